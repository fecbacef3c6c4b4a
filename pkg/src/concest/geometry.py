"""Metrics, neighbour radii, union-of-balls regions and their expansions.

All distances follow one numeric convention (see `_kernels`): accumulate in
float64, round to float32, compare in float64. Boundary comparisons are
inclusive, and a point counts as its own first nearest neighbour.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from . import _kernels
from .errors import DimensionError, DomainError, FormatError


class Metric(Enum):
    L2 = "l2"
    LINF = "linf"

    @property
    def code(self):
        return _kernels.METRIC_L2 if self is Metric.L2 else _kernels.METRIC_LINF

    @classmethod
    def parse(cls, s: str) -> "Metric":
        for mtr in cls:
            if mtr.value == s:
                return mtr
        raise DomainError(f"unknown metric {s!r} (expected 'l2' or 'linf')")


@dataclass(frozen=True)
class Ball:
    center_index: int  # index into the training set the region was built on
    center: np.ndarray  # (n,) coordinates, float32
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError(f"ball radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class Region:
    metric: Metric
    balls: List[Ball]

    def to_json(self) -> dict:
        return {
            "metric": self.metric.value,
            "balls": [
                {"center_index": b.center_index, "radius": float(b.radius)}
                for b in self.balls
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, train_coords: np.ndarray) -> "Region":
        try:
            metric = Metric.parse(obj["metric"])
            balls = [
                Ball(int(b["center_index"]), train_coords[int(b["center_index"])], float(b["radius"]))
                for b in obj["balls"]
            ]
        except (KeyError, TypeError, IndexError) as e:
            raise FormatError(f"bad region JSON: {e}") from None
        return cls(metric, balls)


def distance(metric: Metric, x, u) -> float:
    """Distance between two points, accumulated in float64 (not rounded)."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if x.shape != u.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {u.shape}")
    if metric is Metric.L2:
        return float(np.sqrt(np.sum((x - u) ** 2)))
    return float(np.max(np.abs(x - u))) if x.size else 0.0


def distances_to(coords: np.ndarray, center, metric: Metric) -> np.ndarray:
    """Float64 view of the canonical float32 distances from `center`."""
    coords = np.asarray(coords)
    center = np.asarray(center)
    if coords.shape[1] != center.shape[0]:
        raise DimensionError(f"dimension mismatch: {coords.shape[1]} vs {center.shape[0]}")
    return distance_rowf(coords, center, metric).astype(np.float64)


def distance_rowf(coords, center, metric: Metric) -> np.ndarray:
    return _kernels.distance_row(coords, center, metric.code)


class DistanceCache:
    """Lazily built all-pairs float32 distance matrix with a memory cap.

    Below the cap the full matrix is materialised once and rows are served
    from it; above the cap rows are recomputed on demand. Either way the
    served values are identical.
    """

    def __init__(self, coords: np.ndarray, metric: Metric, mem_cap_mb: Optional[float] = 1024.0):
        self.coords = np.ascontiguousarray(coords, dtype=np.float64)
        self.metric = metric
        m = self.coords.shape[0]
        self._matrix = None
        self._cacheable = mem_cap_mb is None or (4.0 * m * m / 1e6) <= mem_cap_mb

    @property
    def matrix(self) -> Optional[np.ndarray]:
        if self._cacheable and self._matrix is None:
            self._matrix = _kernels.pairwise_matrix(self.coords, self.metric.code)
        return self._matrix if self._cacheable else None

    def row(self, i: int) -> np.ndarray:
        if self._cacheable:
            return self.matrix[i]
        return distance_rowf(self.coords, self.coords[i], self.metric)


def kth_neighbor_radius(coords, active, u_index: int, k: int, metric: Metric,
                        cache: Optional[DistanceCache] = None) -> float:
    """k-th smallest distance from point `u_index` to the active points.

    The point's own zero distance counts as the first neighbour whenever it
    is active; ties count with multiplicity (k-th order statistic).
    """
    active = np.asarray(active, dtype=np.int64)
    if k < 1 or k > active.size:
        raise DomainError(f"k={k} outside [1, {active.size}]")
    row = cache.row(u_index) if cache is not None else distances_to(coords, coords[u_index], metric)
    d = np.sort(np.asarray(row, dtype=np.float64)[active])
    return float(d[k - 1])


def ball_members(coords, active, center, radius: float, metric: Metric) -> np.ndarray:
    """Active indices within `radius` of `center` (inclusive boundary)."""
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    active = np.asarray(active, dtype=np.int64)
    d = distances_to(coords, center, metric)[active]
    return active[d <= radius]


def region_member_mask(region: Region, coords) -> np.ndarray:
    return expansion_member_mask(region, coords, 0.0)


def expansion_member_mask(region: Region, coords, epsilon: float) -> np.ndarray:
    """Boolean mask over `coords` of the region's epsilon-expansion."""
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    coords = np.asarray(coords)
    mask = np.zeros(coords.shape[0], dtype=bool)
    for ball in region.balls:
        d = distances_to(coords, ball.center, region.metric)
        mask |= d <= ball.radius + epsilon
    return mask


def expansion_members(region: Region, coords, epsilon: float) -> np.ndarray:
    return np.flatnonzero(expansion_member_mask(region, coords, epsilon))


def empirical_measure(member_count: int, m: int) -> float:
    if not 0 <= member_count <= m:
        raise DomainError(f"member count {member_count} outside [0, {m}]")
    return member_count / m
