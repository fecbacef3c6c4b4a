"""Split -> search -> held-out evaluation -> repeated trials -> reports."""

import csv
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .dataset import Dataset, split
from .errors import DimensionError, InfeasibleError
from .geometry import Region, expansion_member_mask, region_member_mask
from .search import SearchParams, run_search
from .uncertainty import dataset_lu

log = logging.getLogger("concest.pipeline")

REPORT_FORMAT_VERSION = "1"

_SCALAR_FIELDS = (
    "train_risk", "test_risk", "train_adv_risk", "test_adv_risk",
    "intrinsic_robustness_train", "intrinsic_robustness_test",
    "train_region_lu", "test_region_lu",
)


@dataclass(frozen=True)
class TrialReport:
    seed: int
    train_risk: float
    test_risk: float
    train_adv_risk: float
    test_adv_risk: float
    intrinsic_robustness_train: float
    intrinsic_robustness_test: float
    train_region_lu: Optional[float]
    test_region_lu: Optional[float]
    region: dict

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train_risk": self.train_risk,
            "test_risk": self.test_risk,
            "train_adv_risk": self.train_adv_risk,
            "test_adv_risk": self.test_adv_risk,
            "intrinsic_robustness_train": self.intrinsic_robustness_train,
            "intrinsic_robustness_test": self.intrinsic_robustness_test,
            "train_region_lu": self.train_region_lu,
            "test_region_lu": self.test_region_lu,
            "region": self.region,
        }


@dataclass(frozen=True)
class SummaryReport:
    params: dict
    trials: List[TrialReport]
    summary: dict  # field -> {"mean": .., "std": ..}

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "params": self.params,
            "trials": [t.to_dict() for t in self.trials],
            "summary": self.summary,
        }


def evaluate_region(region: Region, eval_set: Dataset, epsilon: float) -> dict:
    """Risk, adversarial risk and region LU of `region` on `eval_set`.

    region_lu is None when no eval point falls in the region or soft labels
    are absent.
    """
    coords = eval_set.points.coords
    if region.balls and region.balls[0].center.shape[0] != coords.shape[1]:
        raise DimensionError(
            f"region dimension {region.balls[0].center.shape[0]} != eval dimension {coords.shape[1]}")
    in_region = region_member_mask(region, coords)
    in_expansion = expansion_member_mask(region, coords, epsilon)
    risk = float(np.count_nonzero(in_region)) / eval_set.m
    adv_risk = float(np.count_nonzero(in_expansion)) / eval_set.m
    region_lu = None
    if eval_set.soft is not None and in_region.any():
        region_lu = float(np.mean(dataset_lu(eval_set)[in_region]))
    return {"risk": risk, "adv_risk": adv_risk, "region_lu": region_lu}


def run_trial(d: Dataset, params: SearchParams, seed: int,
              mem_cap_mb: Optional[float] = 1024.0) -> TrialReport:
    """One 50/50 split, search on the first half, evaluation on both halves."""
    train, test = split(d, 0.5, seed)
    try:
        region = run_search(train, params, mem_cap_mb=mem_cap_mb)
    except InfeasibleError as e:
        log.error("trial with seed %d infeasible: %s", seed, e)
        raise
    ev_train = evaluate_region(region, train, params.epsilon)
    ev_test = evaluate_region(region, test, params.epsilon)
    return TrialReport(
        seed=seed,
        train_risk=ev_train["risk"],
        test_risk=ev_test["risk"],
        train_adv_risk=ev_train["adv_risk"],
        test_adv_risk=ev_test["adv_risk"],
        intrinsic_robustness_train=1.0 - ev_train["adv_risk"],
        intrinsic_robustness_test=1.0 - ev_test["adv_risk"],
        train_region_lu=ev_train["region_lu"],
        test_region_lu=ev_test["region_lu"],
        region=region.to_json(),
    )


def _summarize(trials: List[TrialReport]) -> dict:
    summary = {}
    for name in _SCALAR_FIELDS:
        values = [getattr(t, name) for t in trials]
        if any(v is None for v in values):
            summary[name] = {"mean": None, "std": None}
            continue
        arr = np.asarray(values, dtype=np.float64)
        std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
        summary[name] = {"mean": float(np.mean(arr)), "std": std}
    return summary


def params_dict(params: SearchParams, trials: int, base_seed: int) -> dict:
    return {
        "metric": params.metric.value,
        "epsilon": params.epsilon,
        "alpha": params.alpha,
        "gamma": params.gamma,
        "T": params.T,
        "trials": trials,
        "base_seed": base_seed,
    }


def repeated_trials(d: Dataset, params: SearchParams, n_trials: int, base_seed: int,
                    mem_cap_mb: Optional[float] = 1024.0) -> SummaryReport:
    """Trials with seeds base_seed .. base_seed + n_trials - 1.

    Standard deviations use the n-1 denominator; a single trial reports
    std 0 by convention.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    trials = []
    for i in range(n_trials):
        seed = base_seed + i
        log.info("trial %d/%d (seed %d)", i + 1, n_trials, seed)
        trials.append(run_trial(d, params, seed, mem_cap_mb=mem_cap_mb))
    return SummaryReport(params_dict(params, n_trials, base_seed), trials, _summarize(trials))


def alpha_sweep(d: Dataset, params: SearchParams, alphas, n_trials: int, base_seed: int,
                mem_cap_mb: Optional[float] = 1024.0):
    """One SummaryReport (or None for infeasible alphas) per sweep value."""
    reports = []
    for alpha in alphas:
        p = SearchParams(alpha, params.gamma, params.epsilon, params.T, params.metric)
        try:
            reports.append(repeated_trials(d, p, n_trials, base_seed, mem_cap_mb=mem_cap_mb))
        except InfeasibleError as e:
            log.warning("alpha=%g infeasible: %s", alpha, e)
            reports.append(None)
    return reports


def write_sweep_csv(path, alphas, reports, gamma: float):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["alpha", "test_risk_mean", "test_risk_std",
                    "intrinsic_robustness_mean", "intrinsic_robustness_std", "gamma"])
        for alpha, rep in zip(alphas, reports):
            if rep is None:
                w.writerow([alpha, "infeasible", "", "", "", gamma])
                continue
            tr = rep.summary["test_risk"]
            ir = rep.summary["intrinsic_robustness_test"]
            w.writerow([alpha, tr["mean"], tr["std"], ir["mean"], ir["std"], gamma])
