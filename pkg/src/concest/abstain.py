"""Abstention on high-label-uncertainty examples and coverage curves.

Consumes externally produced per-example prediction records
(``id,clean_correct,robust_correct`` CSV) and joins them with label
uncertainty scores. Retention is inclusive: an example is kept when its
score is <= the threshold.
"""

import csv
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .errors import EmptyRetainedError, FormatError, UnknownIdError


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    clean_correct: bool
    robust_correct: bool


@dataclass(frozen=True)
class AbstainReport:
    threshold: float
    abstained_count: int
    retained_count: int
    clean_accuracy_retained: float
    robust_accuracy_retained: float
    clean_accuracy_all: float
    robust_accuracy_all: float
    ceiling: float  # overall robust accuracy / (1 - abstain fraction)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "abstained_count": self.abstained_count,
            "retained_count": self.retained_count,
            "clean_accuracy_retained": self.clean_accuracy_retained,
            "robust_accuracy_retained": self.robust_accuracy_retained,
            "clean_accuracy_all": self.clean_accuracy_all,
            "robust_accuracy_all": self.robust_accuracy_all,
            "ceiling": self.ceiling,
        }


def load_predictions(path, known_ids=None) -> List[PredictionRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "clean_correct", "robust_correct"]:
            raise FormatError(f"{path}: expected header 'id,clean_correct,robust_correct'")
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != 3:
                raise FormatError(f"{path}: row {i} has {len(row)} fields, expected 3")
            vals = []
            for v in row[1:]:
                if v not in ("0", "1"):
                    raise FormatError(f"{path}: row {i}: correctness must be 0 or 1, got {v!r}")
                vals.append(v == "1")
            records.append(PredictionRecord(row[0], vals[0], vals[1]))
    if known_ids is not None:
        known = set(known_ids)
        for r in records:
            if r.id not in known:
                raise UnknownIdError(f"prediction id {r.id!r} not in dataset")
    return records


def _scores_for(records: List[PredictionRecord], lu_scores: Dict[str, float]) -> np.ndarray:
    try:
        return np.asarray([lu_scores[r.id] for r in records], dtype=np.float64)
    except KeyError as e:
        raise UnknownIdError(f"no label-uncertainty score for id {e.args[0]!r}") from None


def abstain_at_threshold(records: List[PredictionRecord], lu_scores: Dict[str, float],
                         tau: float) -> AbstainReport:
    """Abstain on examples with score > tau; accuracies over the rest."""
    scores = _scores_for(records, lu_scores)
    clean = np.asarray([r.clean_correct for r in records])
    robust = np.asarray([r.robust_correct for r in records])
    retained = scores <= tau
    n = len(records)
    n_ret = int(np.count_nonzero(retained))
    if n_ret == 0:
        raise EmptyRetainedError(f"threshold {tau} retains no examples")
    abstain_fraction = (n - n_ret) / n
    robust_all = float(np.mean(robust))
    return AbstainReport(
        threshold=tau,
        abstained_count=n - n_ret,
        retained_count=n_ret,
        clean_accuracy_retained=float(np.mean(clean[retained])),
        robust_accuracy_retained=float(np.mean(robust[retained])),
        clean_accuracy_all=float(np.mean(clean)),
        robust_accuracy_all=robust_all,
        ceiling=robust_all / (1.0 - abstain_fraction),
    )


def coverage_curve(records: List[PredictionRecord], lu_scores: Dict[str, float],
                   order: str = "lowest_first", grid=(0.8, 0.9, 0.98, 1.0)):
    """Accuracy over the floor(f*m) examples with lowest (or highest) score.

    Ties in the score break by ascending id for reproducibility. Returns
    rows of (fraction, lu_threshold_at_cut, clean_accuracy, robust_accuracy).
    """
    if order not in ("lowest_first", "highest_first"):
        raise FormatError(f"order must be 'lowest_first' or 'highest_first', got {order!r}")
    scores = _scores_for(records, lu_scores)
    clean = np.asarray([r.clean_correct for r in records])
    robust = np.asarray([r.robust_correct for r in records])
    key_score = scores if order == "lowest_first" else -scores
    ids = [r.id for r in records]
    rank = sorted(range(len(records)), key=lambda i: (key_score[i], ids[i]))
    rank = np.asarray(rank)
    m = len(records)
    rows = []
    for f in grid:
        if not 0.0 < f <= 1.0:
            raise FormatError(f"grid fraction {f} outside (0, 1]")
        cut = int(np.floor(f * m))
        if cut == 0:
            raise EmptyRetainedError(f"fraction {f} includes no examples for m={m}")
        included = rank[:cut]
        rows.append((
            float(f),
            float(scores[included[-1]]),
            float(np.mean(clean[included])),
            float(np.mean(robust[included])),
        ))
    return rows


def write_curve_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("fraction,lu_cut,clean_accuracy,robust_accuracy\n")
        for frac, cut, ca, ra in rows:
            f.write(f"{frac},{cut},{ca},{ra}\n")
