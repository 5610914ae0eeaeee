"""Hot loops: exhaustive CH / R grid maximisation and greedy coincidence matching.

Two interchangeable implementations live here, a numba ``@njit`` one and a
pure numpy/Python fallback. The fallback is used when numba is missing or
when ``CHBELL_DISABLE_NUMBA`` is set to a truthy value before import.
``BACKEND`` names the active one.

Grid maximisation exploits the structure of the CH sum. With the arm-2 pair
(θ2, θ2′) held fixed, θ1 enters only through P(θ1,θ2) - P(θ1,θ2′), and θ1′
only through the remaining terms, so the exact maximum over the full 4-D
grid is found in O(n^3) instead of O(n^4). For R the θ1 term separates
the same way; θ1′ also sits in the denominator and is enumerated.

Ties: among grid points whose objective lies within ``tol`` of the maximum,
the lexicographically smallest index quadruple (i1, i1′, i2, i2′) wins, and
within a fixed (i2, i2′) the smallest θ1 (θ1′) index within ``tol`` of that
slice's maximum is used. The result does not depend on evaluation order.
"""

from __future__ import annotations

import os

import numpy as np

_DENOM_GUARD = 1e-9


def _env_disabled() -> bool:
    return os.environ.get("CHBELL_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------

def _first_within(arr, tol, axis=0):
    best = arr.max(axis=axis)
    idx = np.argmax(arr >= np.expand_dims(best, axis) - tol, axis=axis)
    return best, idx


def _lexmin(*cols):
    pick = np.lexsort(tuple(reversed(cols)))[0]
    return tuple(int(c[pick]) for c in cols)


def best_ch_numpy(pab, pabp, papb, papbp, s1p, s2, tol):
    a = pab[:, :, None] - pabp[:, None, :]
    amax, aidx = _first_within(a, tol)
    del a
    b = papb[:, :, None] + papbp[:, None, :] - s1p[:, None, None]
    bmax, bidx = _first_within(b, tol)
    del b
    tot = amax + bmax - s2[:, None]
    top = tot.max()
    jj, kk = np.nonzero(tot >= top - tol)
    i, l, j, k = _lexmin(aidx[jj, kk], bidx[jj, kk], jj, kk)
    value = pab[i, j] - pabp[i, k] + papb[l, j] + papbp[l, k] - s1p[l] - s2[j]
    return float(value), i, l, j, k


def best_ratio_numpy(pab, pabp, papb, papbp, s1p, s2, tol):
    a = pab[:, :, None] - pabp[:, None, :]
    amax, aidx = _first_within(a, tol)
    del a
    den = s1p[:, None, None] + s2[None, :, None]
    num = amax[None, :, :] + papb[:, :, None] + papbp[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > _DENOM_GUARD, num / den, -np.inf)
    top = r.max()
    ll, jj, kk = np.nonzero(r >= top - tol)
    i, l, j, k = _lexmin(aidx[jj, kk], ll, jj, kk)
    value = (pab[i, j] - pabp[i, k] + papb[l, j] + papbp[l, k]) / (s1p[l] + s2[j])
    return float(value), i, l, j, k


def match_heads_numpy(t1, t2, i, j, window):
    a = np.asarray(t1, dtype=np.int64).tolist()
    b = np.asarray(t2, dtype=np.int64).tolist()
    n1, n2 = len(a), len(b)
    count = 0
    while i < n1 and j < n2:
        x, y = a[i], b[j]
        d = x - y
        if -window <= d <= window:
            count += 1
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return count, i, j


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _slice_best_a(pab, pabp, j, k, tol):
        n1 = pab.shape[0]
        top = -np.inf
        for i in range(n1):
            v = pab[i, j] - pabp[i, k]
            if v > top:
                top = v
        for i in range(n1):
            if pab[i, j] - pabp[i, k] >= top - tol:
                return top, i
        return top, 0

    @numba.njit(cache=True)
    def _lex_less(a0, a1, a2, a3, b0, b1, b2, b3):
        if a0 != b0:
            return a0 < b0
        if a1 != b1:
            return a1 < b1
        if a2 != b2:
            return a2 < b2
        return a3 < b3

    @numba.njit(cache=True)
    def best_ch_numba(pab, pabp, papb, papbp, s1p, s2, tol):
        n1p = papb.shape[0]
        n2 = pab.shape[1]
        n2p = pabp.shape[1]
        tot = np.empty((n2, n2p))
        aidx = np.empty((n2, n2p), dtype=np.int64)
        bidx = np.empty((n2, n2p), dtype=np.int64)
        for j in range(n2):
            for k in range(n2p):
                amax, ai = _slice_best_a(pab, pabp, j, k, tol)
                bmax = -np.inf
                for l in range(n1p):
                    v = papb[l, j] + papbp[l, k] - s1p[l]
                    if v > bmax:
                        bmax = v
                bi = 0
                for l in range(n1p):
                    if papb[l, j] + papbp[l, k] - s1p[l] >= bmax - tol:
                        bi = l
                        break
                tot[j, k] = amax + bmax - s2[j]
                aidx[j, k] = ai
                bidx[j, k] = bi
        top = -np.inf
        for j in range(n2):
            for k in range(n2p):
                if tot[j, k] > top:
                    top = tot[j, k]
        bi_, bl_, bj_, bk_ = -1, -1, -1, -1
        for j in range(n2):
            for k in range(n2p):
                if tot[j, k] >= top - tol:
                    if bi_ < 0 or _lex_less(aidx[j, k], bidx[j, k], j, k, bi_, bl_, bj_, bk_):
                        bi_, bl_, bj_, bk_ = aidx[j, k], bidx[j, k], j, k
        i, l, j, k = bi_, bl_, bj_, bk_
        value = pab[i, j] - pabp[i, k] + papb[l, j] + papbp[l, k] - s1p[l] - s2[j]
        return value, i, l, j, k

    @numba.njit(cache=True)
    def best_ratio_numba(pab, pabp, papb, papbp, s1p, s2, tol):
        n1p = papb.shape[0]
        n2 = pab.shape[1]
        n2p = pabp.shape[1]
        amax = np.empty((n2, n2p))
        aidx = np.empty((n2, n2p), dtype=np.int64)
        for j in range(n2):
            for k in range(n2p):
                amax[j, k], aidx[j, k] = _slice_best_a(pab, pabp, j, k, tol)
        top = -np.inf
        for l in range(n1p):
            for j in range(n2):
                den = s1p[l] + s2[j]
                if den <= _DENOM_GUARD:
                    continue
                for k in range(n2p):
                    v = (amax[j, k] + papb[l, j] + papbp[l, k]) / den
                    if v > top:
                        top = v
        bi_, bl_, bj_, bk_ = -1, -1, -1, -1
        for l in range(n1p):
            for j in range(n2):
                den = s1p[l] + s2[j]
                if den <= _DENOM_GUARD:
                    continue
                for k in range(n2p):
                    v = (amax[j, k] + papb[l, j] + papbp[l, k]) / den
                    if v >= top - tol:
                        if bi_ < 0 or _lex_less(aidx[j, k], l, j, k, bi_, bl_, bj_, bk_):
                            bi_, bl_, bj_, bk_ = aidx[j, k], l, j, k
        i, l, j, k = bi_, bl_, bj_, bk_
        value = (pab[i, j] - pabp[i, k] + papb[l, j] + papbp[l, k]) / (s1p[l] + s2[j])
        return value, i, l, j, k

    @numba.njit(cache=True)
    def _match_heads_jit(t1, t2, i, j, window):
        n1 = t1.shape[0]
        n2 = t2.shape[0]
        count = 0
        while i < n1 and j < n2:
            d = t1[i] - t2[j]
            if d <= window and -d <= window:
                count += 1
                i += 1
                j += 1
            elif t1[i] < t2[j]:
                i += 1
            else:
                j += 1
        return count, i, j

    def match_heads_numba(t1, t2, i, j, window):
        # signed copy: unsigned differences would wrap
        t1 = np.ascontiguousarray(t1, dtype=np.int64)
        t2 = np.ascontiguousarray(t2, dtype=np.int64)
        c, i, j = _match_heads_jit(t1, t2, i, j, float(window))
        return int(c), int(i), int(j)

else:  # pragma: no cover
    best_ch_numba = best_ratio_numba = match_heads_numba = None


USE_NUMBA = HAVE_NUMBA and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    best_ch, best_ratio, match_heads = best_ch_numba, best_ratio_numba, match_heads_numba
else:
    best_ch, best_ratio, match_heads = best_ch_numpy, best_ratio_numpy, match_heads_numpy


def implementations():
    """Mapping backend name -> (best_ch, best_ratio, match_heads), for tests and benchmarks."""
    impls = {"numpy": (best_ch_numpy, best_ratio_numpy, match_heads_numpy)}
    if HAVE_NUMBA:
        impls["numba"] = (best_ch_numba, best_ratio_numba, match_heads_numba)
    return impls
