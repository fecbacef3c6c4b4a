"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set ``CONCEST_DISABLE_NUMBA=1`` to force the numpy fallback (also used
automatically when numba is not importable). Both backends follow the same
numeric convention: distances are accumulated in float64 and stored/rounded
to float32, and all threshold comparisons happen on those float32 values
widened back to float64. This keeps cached and uncached code paths, and the
greedy search and its naive reference oracle, count-for-count consistent.

``benchmarks/bench_kernels.py`` compares the two backends.
"""

import os

import numpy as np

METRIC_L2 = 0
METRIC_LINF = 1

_disable = os.environ.get("CONCEST_DISABLE_NUMBA", "0") not in ("", "0")

if not _disable:
    try:
        from numba import njit, prange

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# distance rows / all-pairs matrix
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _row(coords, center, metric_code):
        m, n = coords.shape
        out = np.empty(m, dtype=np.float32)
        for j in range(m):
            if metric_code == METRIC_L2:
                s = 0.0
                for t in range(n):
                    d = coords[j, t] - center[t]
                    s += d * d
                out[j] = np.sqrt(s)
            else:
                mx = 0.0
                for t in range(n):
                    d = abs(coords[j, t] - center[t])
                    if d > mx:
                        mx = d
                out[j] = mx
        return out

else:

    def _row(coords, center, metric_code):
        diff = coords - center
        if metric_code == METRIC_L2:
            d = np.sqrt(np.sum(diff * diff, axis=1))
        else:
            d = np.max(np.abs(diff), axis=1)
        return d.astype(np.float32)


@njit(cache=True, parallel=True)
def _pairwise(coords, metric_code):
    m = coords.shape[0]
    out = np.empty((m, m), dtype=np.float32)
    for i in prange(m):
        out[i] = _row(coords, coords[i], metric_code)
    return out


def distance_row(coords, center, metric_code):
    """Float32 distances from every row of `coords` to `center`."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    return _row(coords, center, metric_code)


def pairwise_matrix(coords, metric_code):
    """Full m-by-m float32 distance matrix (row i = distances from point i)."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    return _pairwise(coords, metric_code)


# ---------------------------------------------------------------------------
# greedy placement scan
# ---------------------------------------------------------------------------
#
# A candidate (u, k) captures the points of init_idx within r_k(u), where
# r_k(u) is the k-th smallest distance from u to init_idx (u's own zero
# distance counts when u is uncaptured). It is feasible when the mean label
# uncertainty of the captured points is >= gamma. The objective is the
# number of points newly entering the expansion minus the number newly
# captured; ties break by ascending (objective, center index, k), which the
# ascending loop order realises with a strict '<' test.

@njit(cache=True)
def _scan_center(row, init_idx, exp_idx, lu_init, k_lo, k_hi, eps, gamma):
    """Best feasible k for one center; returns (found, obj, k, r, max_lu)."""
    n_init = init_idx.shape[0]
    d_init = row[init_idx].astype(np.float64)
    order = np.argsort(d_init)
    ds = d_init[order]
    pre_lu = np.cumsum(lu_init[order])
    d_exp = np.sort(row[exp_idx].astype(np.float64))
    hi = k_hi if k_hi < n_init else n_init
    found = False
    best_obj = 0
    best_k = -1
    best_r = 0.0
    max_lu = -1.0
    for k in range(k_lo, hi + 1):
        r = ds[k - 1]
        ci = np.searchsorted(ds, r, side="right")
        mean_lu = pre_lu[ci - 1] / ci
        if mean_lu > max_lu:
            max_lu = mean_lu
        if mean_lu >= gamma:
            ce = np.searchsorted(d_exp, r + eps, side="right")
            obj = ce - ci
            if (not found) or obj < best_obj:
                found = True
                best_obj = obj
                best_k = k
                best_r = r
    return found, best_obj, best_k, best_r, max_lu


@njit(cache=True)
def best_placement_cached(dmat, init_idx, exp_idx, lu_init, k_lo, k_hi, eps, gamma):
    """Scan all centers against a precomputed distance matrix."""
    m = dmat.shape[0]
    found = False
    best_obj = 0
    best_u = -1
    best_k = -1
    best_r = 0.0
    max_lu = -1.0
    for u in range(m):
        f, obj, k, r, ml = _scan_center(dmat[u], init_idx, exp_idx, lu_init,
                                        k_lo, k_hi, eps, gamma)
        if ml > max_lu:
            max_lu = ml
        if f and ((not found) or obj < best_obj):
            found = True
            best_obj = obj
            best_u = u
            best_k = k
            best_r = r
    return found, best_obj, best_u, best_k, best_r, max_lu


@njit(cache=True)
def best_placement_nocache(coords, metric_code, init_idx, exp_idx, lu_init,
                           k_lo, k_hi, eps, gamma):
    """Scan all centers, computing each distance row on the fly."""
    m = coords.shape[0]
    found = False
    best_obj = 0
    best_u = -1
    best_k = -1
    best_r = 0.0
    max_lu = -1.0
    for u in range(m):
        row = _row(coords, coords[u], metric_code)
        f, obj, k, r, ml = _scan_center(row, init_idx, exp_idx, lu_init,
                                        k_lo, k_hi, eps, gamma)
        if ml > max_lu:
            max_lu = ml
        if f and ((not found) or obj < best_obj):
            found = True
            best_obj = obj
            best_u = u
            best_k = k
            best_r = r
    return found, best_obj, best_u, best_k, best_r, max_lu
