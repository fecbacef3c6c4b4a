"""Greedy sequential placement of balls minimizing expansion growth.

The search places up to T balls. At each step it enumerates every training
point as a candidate center together with a capture count k, keeps the
candidates whose captured points have mean label uncertainty >= gamma, and
picks the one whose ball grows the region's epsilon-expansion the least
relative to the points it newly captures. `reference_step` is a deliberately
naive re-implementation of one step, used as a differential-testing oracle
for the accelerated `greedy_step`.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import _kernels
from .dataset import Dataset
from .errors import ConfigError, DomainError, InfeasibleError
from .geometry import Ball, DistanceCache, Metric, Region, distances_to
from .uncertainty import dataset_lu

log = logging.getLogger("concest.search")


@dataclass(frozen=True)
class SearchParams:
    alpha: float
    gamma: float
    epsilon: float
    T: int
    metric: Metric

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha}")
        if not 0.0 <= self.gamma <= 2.0:
            raise DomainError(f"gamma must lie in [0,2], got {self.gamma}")
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.T < 1:
            raise DomainError(f"T must be >= 1, got {self.T}")


@dataclass
class SearchState:
    captured_init: np.ndarray  # bool mask over the training set
    captured_exp: np.ndarray
    balls: List[Ball] = field(default_factory=list)
    t: int = 1

    @classmethod
    def fresh(cls, m: int) -> "SearchState":
        return cls(np.zeros(m, dtype=bool), np.zeros(m, dtype=bool))


@dataclass(frozen=True)
class Placement:
    center_index: int
    k: int
    radius: float
    objective: int
    init_members: np.ndarray  # newly captured indices
    exp_members: np.ndarray  # indices newly entering the expansion


def capture_target(alpha: float, m: int) -> int:
    """ceil(alpha * m), evaluated on the exact rational value of alpha.

    Going through Fraction avoids float artifacts like
    ceil(0.05 * 5000) == 251.
    """
    return int(math.ceil(Fraction(alpha).limit_denominator(10 ** 9) * m))


def k_bounds(state: SearchState, params: SearchParams, m_train: int):
    """Per-iteration capture-count range; (0, 0) once the target is reached."""
    target = capture_target(params.alpha, m_train)
    remaining = target - int(np.count_nonzero(state.captured_init))
    if remaining <= 0:
        return 0, 0
    steps_left = params.T - state.t + 1
    k_lower = -(-remaining // steps_left)
    return k_lower, remaining


def _lu_scores(train: Dataset, params: SearchParams) -> np.ndarray:
    if train.soft is not None:
        return dataset_lu(train)
    if params.gamma > 0:
        raise ConfigError("gamma > 0 requires soft labels")
    return np.zeros(train.m, dtype=np.float64)


def _placement_members(row, active_init, active_exp, radius, epsilon):
    d = np.asarray(row, dtype=np.float64)
    init_members = active_init[d[active_init] <= radius]
    exp_members = active_exp[d[active_exp] <= radius + epsilon]
    return init_members, exp_members


def greedy_step(state: SearchState, params: SearchParams, train: Dataset,
                cache: Optional[DistanceCache] = None) -> Placement:
    """One step of the search, accelerated by the kernel backend."""
    if cache is None:
        cache = DistanceCache(train.points.coords, params.metric)
    lu = _lu_scores(train, params)
    k_lo, k_hi = k_bounds(state, params, train.m)
    if k_lo < 1:
        raise DomainError("capture target already reached; no step to take")
    active_init = np.flatnonzero(~state.captured_init).astype(np.int64)
    active_exp = np.flatnonzero(~state.captured_exp).astype(np.int64)
    lu_init = np.ascontiguousarray(lu[active_init])
    dmat = cache.matrix
    if dmat is not None:
        found, obj, u, k, radius, max_lu = _kernels.best_placement_cached(
            dmat, active_init, active_exp, lu_init,
            k_lo, k_hi, params.epsilon, params.gamma)
    else:
        found, obj, u, k, radius, max_lu = _kernels.best_placement_nocache(
            cache.coords, params.metric.code, active_init, active_exp, lu_init,
            k_lo, k_hi, params.epsilon, params.gamma)
    if not found:
        raise InfeasibleError(state.t, float(max_lu), len(state.balls))
    init_members, exp_members = _placement_members(
        cache.row(int(u)), active_init, active_exp, float(radius), params.epsilon)
    return Placement(int(u), int(k), float(radius), int(obj), init_members, exp_members)


def reference_step(state: SearchState, params: SearchParams, train: Dataset) -> Placement:
    """Naive re-enumeration of one step: per-candidate distance recomputation
    and full re-sorting, no caching. Same contract and tie-breaking as
    `greedy_step`; intended purely as a differential-testing oracle."""
    lu = _lu_scores(train, params)
    coords = train.points.coords
    m = train.m
    target = capture_target(params.alpha, m)
    remaining = target - int(np.count_nonzero(state.captured_init))
    if remaining <= 0:
        raise DomainError("capture target already reached; no step to take")
    k_lo = math.ceil(remaining / (params.T - state.t + 1))
    active_init = np.flatnonzero(~state.captured_init)
    active_exp = np.flatnonzero(~state.captured_exp)
    best = None
    max_lu = -1.0
    for u in range(m):
        for k in range(k_lo, min(remaining, active_init.size) + 1):
            row = distances_to(coords, coords[u], params.metric)
            d_init = np.sort(row[active_init])
            radius = float(d_init[k - 1])
            init_members = active_init[row[active_init] <= radius]
            exp_members = active_exp[row[active_exp] <= radius + params.epsilon]
            mean_lu = float(np.mean(lu[init_members]))
            max_lu = max(max_lu, mean_lu)
            if mean_lu < params.gamma:
                continue
            obj = len(exp_members) - len(init_members)
            if best is None or obj < best.objective:
                best = Placement(u, k, radius, obj, init_members, exp_members)
    if best is None:
        raise InfeasibleError(state.t, max_lu, len(state.balls))
    return best


def apply_placement(state: SearchState, placement: Placement, coords) -> None:
    state.captured_init[placement.init_members] = True
    state.captured_exp[placement.exp_members] = True
    state.balls.append(Ball(placement.center_index,
                            np.array(coords[placement.center_index]),
                            placement.radius))
    state.t += 1


def run_search(train: Dataset, params: SearchParams,
               mem_cap_mb: Optional[float] = 1024.0,
               step_fn=greedy_step) -> Region:
    """Run the full T-step search on the training set.

    Stops early once ceil(alpha * m) points are captured. On success the
    returned region covers at least that many training points and the
    captured set has mean label uncertainty >= gamma.
    """
    if params.gamma > 0 and train.soft is None:
        raise ConfigError("gamma > 0 requires soft labels")
    cache = DistanceCache(train.points.coords, params.metric, mem_cap_mb)
    state = SearchState.fresh(train.m)
    kwargs = {"cache": cache} if step_fn is greedy_step else {}
    for t in range(1, params.T + 1):
        state.t = t
        k_lo, k_hi = k_bounds(state, params, train.m)
        if k_lo < 1:
            log.info("target reached after %d balls; stopping early", len(state.balls))
            break
        placement = step_fn(state, params, train, **kwargs)
        log.info("iteration %d: center=%d k=%d radius=%.6g objective=%d",
                 t, placement.center_index, placement.k, placement.radius,
                 placement.objective)
        apply_placement(state, placement, train.points.coords)
    return Region(params.metric, list(state.balls))
