"""Per-example and per-region label uncertainty scores and summary stats.

The score of an example with soft-label row p and assigned class c is
``1 - p[c] + max_{y != c} p[y]``, which lies in [0, 2]: 0 when the assigned
label carries all the mass, 1 when another class is equally likely, 2 when
all the mass sits on a different class. A region's score is the mean over
its members.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DomainError, EmptyRegionError


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray


def example_lu(soft_row, label: int) -> float:
    soft_row = np.asarray(soft_row, dtype=np.float64)
    k = soft_row.shape[0]
    if not 0 <= label < k:
        raise DomainError(f"label {label} out of range for {k} classes")
    rest = np.delete(soft_row, label)
    other = rest.max() if rest.size else 0.0
    return float(1.0 - soft_row[label] + other)


def example_lu_array(soft: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vectorized scores for all rows; doubles throughout."""
    soft = np.asarray(soft, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    m = soft.shape[0]
    rows = np.arange(m)
    assigned = soft[rows, labels]
    masked = soft.copy()
    masked[rows, labels] = -np.inf
    other = masked.max(axis=1)
    if soft.shape[1] == 1:
        other = np.zeros(m)
    return 1.0 - assigned + other


def dataset_lu(d: Dataset) -> np.ndarray:
    if d.soft is None:
        raise DomainError("dataset has no soft labels")
    return example_lu_array(d.soft.dist, d.labels.labels)


def region_lu(d: Dataset, members) -> float:
    """Mean label uncertainty over the member examples."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise EmptyRegionError("region LU is undefined for an empty member set")
    return float(np.mean(dataset_lu(d)[members]))


@dataclass(frozen=True)
class LuStats:
    histogram: Histogram
    mean: float
    rows: tuple  # (id, score) per example, file order


def lu_stats(d: Dataset, bin_edges) -> LuStats:
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be a strictly ascending 1-D array")
    scores = dataset_lu(d)
    counts, _ = np.histogram(scores, bins=edges)
    # np.histogram drops values outside the edge range; the histogram must
    # account for every scored example, so widen a copy of the outer bins.
    if counts.sum() != scores.size:
        clipped = np.clip(scores, edges[0], np.nextafter(edges[-1], -np.inf))
        counts, _ = np.histogram(clipped, bins=edges)
    return LuStats(
        histogram=Histogram(edges, counts),
        mean=float(np.mean(scores)),
        rows=tuple(zip(d.ids, scores.tolist())),
    )


def write_lu_csv(path, stats: LuStats):
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("id,lu\n")
        for ex_id, score in stats.rows:
            f.write(f"{ex_id},{score:.6g}\n")
