"""Command-line surface: estimate, sweep, lu-stats, abstain, gauss-validate.

Every report embeds the full run configuration and a format-version string.
Timestamps live in a separate ``generated_at`` field so reports can be
compared byte-for-byte after dropping that one key. Exit codes: 0 success,
2 configuration error, 3 infeasible search, 4 I/O error, 5 malformed data,
6 internal error (table also in README).
"""

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import _kernels, abstain, gaussmix, pipeline, uncertainty
from .dataset import load_dataset, load_labels, load_soft_labels, make_dataset
from .errors import (ConcestError, ConfigError, DomainError, FormatError,
                     InfeasibleError, UnknownIdError)
from .geometry import Metric
from .pipeline import REPORT_FORMAT_VERSION
from .search import SearchParams, run_search

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_FORMAT = 5
EXIT_INTERNAL = 6

log = logging.getLogger("concest.cli")


def parse_epsilon(text: str) -> float:
    """Decimal literal or exact fraction like '8/255'."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return int(num) / int(den)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad epsilon fraction {text!r}") from None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad epsilon {text!r}") from None


def parse_alphas(text: str):
    """Comma list ('0.01,0.02') or range syntax 'start:stop:step' (inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range syntax is start:stop:step, got {text!r}")
        start, stop, step = (Fraction(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad alpha range {text!r}")
        out = []
        v = start
        while v <= stop:
            out.append(float(v))
            v += step
        return out
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad alpha list {text!r}") from None


def _add_data_args(p, soft_required=False):
    p.add_argument("--points", required=True, help="canonical binary point file (CPTS)")
    p.add_argument("--labels", required=True, help="labels CSV (id,label)")
    p.add_argument("--softlabels", required=soft_required, default=None,
                   help="soft-labels CSV (id,p0,...)")
    p.add_argument("--point-format", choices=["binary", "csv"], default="binary")


def _add_search_args(p):
    p.add_argument("--metric", choices=["l2", "linf"], required=True)
    p.add_argument("--epsilon", type=parse_epsilon, required=True,
                   help="perturbation budget; decimal or fraction like 8/255")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--T", type=int, default=5, dest="T")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mem-cap-mb", type=float, default=1024.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="concest",
        description="Empirical label-uncertainty-constrained concentration of "
                    "measure and intrinsic robustness estimation.")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap on kernel worker threads (results are thread-count independent)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="repeated split/search/evaluate trials")
    _add_data_args(p)
    _add_search_args(p)
    p.add_argument("--out", required=True, help="summary report JSON path")

    p = sub.add_parser("sweep", help="alpha sweep emitting a plot-ready CSV")
    _add_data_args(p)
    _add_search_args(p)
    p.add_argument("--alphas", required=True, type=parse_alphas,
                   help="comma list or start:stop:step (e.g. 0.01:0.15:0.01)")
    p.add_argument("--out", required=True, help="sweep CSV path")

    p = sub.add_parser("lu-stats", help="label-uncertainty histogram and per-example scores")
    p.add_argument("--points", default=None, help="optional; scores need only labels")
    p.add_argument("--labels", required=True)
    p.add_argument("--softlabels", required=True)
    p.add_argument("--point-format", choices=["binary", "csv"], default="binary")
    p.add_argument("--bins", type=parse_alphas, default=None,
                   help="histogram bin edges (default 0:2:0.1)")
    p.add_argument("--out", required=True, help="stats JSON path")
    p.add_argument("--csv", default=None, help="optional per-example id,lu CSV path")

    p = sub.add_parser("abstain", help="abstention report and coverage curves")
    p.add_argument("--predictions", required=True,
                   help="CSV id,clean_correct,robust_correct")
    p.add_argument("--labels", required=True)
    p.add_argument("--softlabels", required=True)
    p.add_argument("--tau", type=float, default=0.7, help="abstention LU threshold")
    p.add_argument("--order", choices=["lowest_first", "highest_first"],
                   default="lowest_first")
    p.add_argument("--grid", type=parse_alphas, default=None,
                   help="coverage fractions (default 0.1:1.0:0.1)")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--curve-csv", default=None, help="optional coverage-curve CSV path")

    p = sub.add_parser("gauss-validate",
                       help="compare analytic, Monte-Carlo and greedy estimates on the mixture")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--epsilon", type=parse_epsilon, default=0.5)
    p.add_argument("--T", type=int, default=1, dest="T")
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--search-samples", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-tolerance", type=float, default=0.01)
    p.add_argument("--out", required=True, help="comparison JSON path")
    return parser


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _config_echo(args) -> dict:
    # threads is a performance knob with no effect on results, so it is
    # deliberately left out of the echoed configuration
    skip = {"command", "verbose", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _report_envelope(args) -> dict:
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "config": _config_echo(args),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def _search_params(args) -> SearchParams:
    return SearchParams(args.alpha, args.gamma, args.epsilon, args.T, Metric.parse(args.metric))


def _load_for_search(args):
    if args.gamma > 0 and args.softlabels is None:
        raise ConfigError("--gamma > 0 requires --softlabels")
    return load_dataset(args.points, args.labels, args.softlabels, args.point_format)


def cmd_estimate(args) -> int:
    d = _load_for_search(args)
    params = _search_params(args)
    report = pipeline.repeated_trials(d, params, args.trials, args.seed,
                                      mem_cap_mb=args.mem_cap_mb)
    out = _report_envelope(args)
    out.update(report.to_dict())
    _write_json(args.out, out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = _load_for_search(args)
    params = _search_params(args)
    reports = pipeline.alpha_sweep(d, params, args.alphas, args.trials, args.seed,
                                   mem_cap_mb=args.mem_cap_mb)
    pipeline.write_sweep_csv(args.out, args.alphas, reports, args.gamma)
    return EXIT_OK


def cmd_lu_stats(args) -> int:
    labels, ids = load_labels(args.labels)
    soft, soft_ids = load_soft_labels(args.softlabels)
    if soft_ids != ids:
        raise FormatError("soft-label ids do not match label ids")
    if args.points is not None:
        d = load_dataset(args.points, args.labels, args.softlabels, args.point_format)
    else:
        # scores depend only on labels; coords are a placeholder
        d = make_dataset(np.zeros((len(ids), 1), dtype=np.float32),
                         labels.labels, soft=soft.dist, k=labels.k, ids=ids)
    edges = args.bins if args.bins is not None else [round(0.1 * i, 10) for i in range(21)]
    stats = uncertainty.lu_stats(d, edges)
    out = _report_envelope(args)
    out.update({
        "mean": stats.mean,
        "histogram": {
            "bin_edges": stats.histogram.bin_edges.tolist(),
            "counts": stats.histogram.counts.tolist(),
        },
    })
    _write_json(args.out, out)
    if args.csv:
        uncertainty.write_lu_csv(args.csv, stats)
    return EXIT_OK


def cmd_abstain(args) -> int:
    labels, ids = load_labels(args.labels)
    soft, soft_ids = load_soft_labels(args.softlabels)
    if soft_ids != ids:
        raise FormatError("soft-label ids do not match label ids")
    scores = uncertainty.example_lu_array(soft.dist, labels.labels)
    lu_by_id = dict(zip(ids, scores))
    records = abstain.load_predictions(args.predictions, known_ids=ids)
    report = abstain.abstain_at_threshold(records, lu_by_id, args.tau)
    grid = args.grid if args.grid is not None else [round(0.1 * i, 10) for i in range(1, 11)]
    rows = abstain.coverage_curve(records, lu_by_id, args.order, grid)
    out = _report_envelope(args)
    out.update({"abstain": report.to_dict(),
                "curve": [{"fraction": r[0], "lu_cut": r[1],
                           "clean_accuracy": r[2], "robust_accuracy": r[3]} for r in rows]})
    _write_json(args.out, out)
    if args.curve_csv:
        abstain.write_curve_csv(args.curve_csv, rows)
    return EXIT_OK


def cmd_gauss_validate(args) -> int:
    theta = np.zeros(args.dim)
    theta[0] = 1.0
    model = gaussmix.GaussMixModel(theta, args.sigma)
    analytic = gaussmix.analytic_concentration(model, args.alpha, args.epsilon)

    b = gaussmix.offset_for_alpha(model, args.alpha)
    spec = gaussmix.HalfspaceSpec(gaussmix.HalfspaceSign.MINUS, b)
    mc = gaussmix.sample(model, args.mc_samples, args.seed)
    mc_mask = gaussmix.halfspace_expansion_mask(model, spec,
                                               mc.points.coords.astype(np.float64),
                                               args.epsilon)
    monte_carlo = float(np.mean(mc_mask))

    data = gaussmix.sample(model, args.search_samples, args.seed + 1)
    params = SearchParams(args.alpha, 0.0, args.epsilon, args.T, Metric.L2)
    trial = pipeline.run_trial(data, params, args.seed + 2)

    out = _report_envelope(args)
    out.update({
        "analytic_concentration": analytic,
        "monte_carlo_halfspace_expansion": monte_carlo,
        "mc_abs_error": abs(monte_carlo - analytic),
        "mc_tolerance": args.mc_tolerance,
        "greedy_test_expansion": trial.test_adv_risk,
        "greedy_train_expansion": trial.train_adv_risk,
    })
    _write_json(args.out, out)
    if abs(monte_carlo - analytic) > args.mc_tolerance:
        log.error("Monte-Carlo expansion deviates from analytic value by %.4g",
                  abs(monte_carlo - analytic))
        return EXIT_INTERNAL
    return EXIT_OK


_COMMANDS = {
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "lu-stats": cmd_lu_stats,
    "abstain": cmd_abstain,
    "gauss-validate": cmd_gauss_validate,
}


def _emit_error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            _emit_error(ConfigError("--threads must be >= 1"), EXIT_CONFIG)
            return EXIT_CONFIG
        if _kernels.NUMBA_ENABLED:
            import numba

            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError) as e:
        _emit_error(e, EXIT_CONFIG)
        return EXIT_CONFIG
    except InfeasibleError as e:
        _emit_error(e, EXIT_INFEASIBLE)
        return EXIT_INFEASIBLE
    except (FormatError, UnknownIdError) as e:
        _emit_error(e, EXIT_FORMAT)
        return EXIT_FORMAT
    except OSError as e:
        _emit_error(e, EXIT_IO)
        return EXIT_IO
    except ConcestError as e:
        _emit_error(e, EXIT_INTERNAL)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
