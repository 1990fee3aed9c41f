"""Compiled inner loops for prefix mean-deviation sums.

Both kernels answer the same question for every prefix of an already
canonically ordered point list: given values f_j and masses w_j, what is
D_k = sum over j <= k of w_j * |f_j - m_k|^p, where m_k is the weighted
mean of the prefix? The p = 1 case maintains a Fenwick tree over value
ranks so each prefix costs O(log K); the generic-p case re-scans the
prefix (O(K^2) total) and is only used for exponents without a closed
form or a tree trick.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def prefix_absdev(vals, wts, sorted_vals, ranks):
    """D_k = sum_{j<=k} w_j |v_j - mean_k| for every prefix k.

    sorted_vals is vals sorted ascending; ranks[j] is the position of
    element j in that order (stable, so duplicates get distinct leaves).
    Two Fenwick trees accumulate mass and mass-weighted values by rank;
    splitting the prefix at the running mean turns the absolute sum into
    two one-sided queries.
    """
    K = vals.size
    tree_w = np.zeros(K + 1)
    tree_wv = np.zeros(K + 1)
    out = np.empty(K)
    W = 0.0
    S = 0.0
    for k in range(K):
        i = ranks[k] + 1
        w = wts[k]
        wv = w * vals[k]
        while i <= K:
            tree_w[i] += w
            tree_wv[i] += wv
            i += i & (-i)
        W += w
        S += wv
        m = S / W
        # ranks index the full sorted order; uninserted leaves hold zero,
        # so querying all full-order positions with value <= m is safe
        j = np.searchsorted(sorted_vals, m, side="right")
        W_below = 0.0
        S_below = 0.0
        while j > 0:
            W_below += tree_w[j]
            S_below += tree_wv[j]
            j -= j & (-j)
        out[k] = (m * W_below - S_below) + (S - S_below) - m * (W - W_below)
    return out


@njit(cache=True, nogil=True)
def prefix_powdev(vals, wts, p):
    """D_k = sum_{j<=k} w_j |v_j - mean_k|^p for every prefix k (generic p)."""
    K = vals.size
    out = np.empty(K)
    W = 0.0
    S = 0.0
    for k in range(K):
        W += wts[k]
        S += wts[k] * vals[k]
        m = S / W
        acc = 0.0
        for j in range(k + 1):
            acc += wts[j] * abs(vals[j] - m) ** p
        out[k] = acc
    return out


def prefix_deviation(vals: np.ndarray, wts: np.ndarray, p: float) -> np.ndarray:
    """Dispatch: exact closed form for p=2, Fenwick for p=1, loop otherwise.

    Values are shifted by the first entry before any arithmetic: the
    deviation is shift-invariant, and without the shift a mean that
    dwarfs the spread cancels catastrophically — singleton and constant
    prefixes must come out exactly 0.0, not rounding noise, because
    callers divide by ball radii that are legitimately zero there.
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    wts = np.ascontiguousarray(wts, dtype=np.float64)
    if vals.size == 0:
        return np.empty(0)
    vals = vals - vals[0]
    if p == 1.0:
        order = np.argsort(vals, kind="stable")
        ranks = np.empty(vals.size, dtype=np.int64)
        ranks[order] = np.arange(vals.size, dtype=np.int64)
        return prefix_absdev(vals, wts, vals[order], ranks)
    if p == 2.0:
        W = np.cumsum(wts)
        S = np.cumsum(wts * vals)
        Q = np.cumsum(wts * vals * vals)
        return np.maximum(Q - S * S / W, 0.0)
    return prefix_powdev(vals, wts, float(p))
