"""Hot numeric kernels: water level of a channel subset and exhaustive subset scans.

Each kernel exists twice: a numba-compiled loop and a vectorized numpy
version.  ``COGSENSE_BACKEND=numpy`` forces the numpy path; otherwise numba is
used when it imports.  Both variants are importable by name so the benchmark
and the tests can compare them directly.
"""

from __future__ import annotations

import itertools
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
_requested = os.environ.get("COGSENSE_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"COGSENSE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if HAVE_NUMBA and _requested != "numpy" else "numpy"

# numpy path materializes this many subsets at a time
_NUMPY_BLOCK = 1 << 15


def _level_loop(q, s2, budget):
    # breakpoint walk over channels sorted by noise; inf when total width is zero
    order = np.argsort(s2, kind="mergesort")
    m = order.shape[0]
    sq = 0.0
    sqs = 0.0
    for k in range(m):
        i = order[k]
        sq += q[i]
        sqs += q[i] * s2[i]
        if sq > 0.0:
            lam = (budget + sqs) / sq
            if k == m - 1 or lam <= s2[order[k + 1]]:
                return lam
    return math.inf


def _scan_loop(q, s2, budget, k, first, count):
    n = q.shape[0]
    order = np.argsort(s2, kind="mergesort")
    rank = np.empty(n, dtype=np.int64)
    for r in range(n):
        rank[order[r]] = r
    comb = first.copy()
    member = np.zeros(n, dtype=np.bool_)
    sel = np.empty(k, dtype=np.int64)
    best_cap = -1.0
    best = first.copy()
    for _ in range(count):
        for j in range(k):
            member[rank[comb[j]]] = True
        c = 0
        for r in range(n):
            if member[r]:
                sel[c] = order[r]
                member[r] = False
                c += 1
        sq = 0.0
        sqs = 0.0
        lam = math.inf
        for t in range(k):
            i = sel[t]
            sq += q[i]
            sqs += q[i] * s2[i]
            if sq > 0.0:
                lam = (budget + sqs) / sq
                if t == k - 1 or lam <= s2[sel[t + 1]]:
                    break
        cap = 0.0
        if sq > 0.0:
            for t in range(k):
                i = sel[t]
                if q[i] > 0.0 and s2[i] < lam:
                    cap += 0.5 * q[i] * math.log1p((lam - s2[i]) / s2[i])
        if cap > best_cap:
            best_cap = cap
            for j in range(k):
                best[j] = comb[j]
        # next k-subset in lexicographic order
        j = k - 1
        while j >= 0 and comb[j] == n - k + j:
            j -= 1
        if j < 0:
            break
        comb[j] += 1
        for t in range(j + 1, k):
            comb[t] = comb[t - 1] + 1
    return best_cap, best


def waterfill_level_numpy(q, s2, budget):
    """Water level for the given channels; ``inf`` when all widths are zero.

    Uses the fact that the true level is the smallest of the prefix
    solutions ``(P + sum q s2) / sum q`` taken in ascending noise order.
    """
    q = np.asarray(q, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    order = np.argsort(s2, kind="stable")
    qs = q[order]
    sq = np.cumsum(qs)
    sqs = np.cumsum(qs * s2[order])
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(sq > 0.0, (budget + sqs) / sq, np.inf)
    return float(lam.min()) if lam.size else math.inf


def _scan_block(q, s2, budget, combos, order, rank):
    idx = order[np.sort(rank[combos], axis=1)]
    qq = q[idx]
    ss = s2[idx]
    sq = np.cumsum(qq, axis=1)
    sqs = np.cumsum(qq * ss, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(sq > 0.0, (budget + sqs) / sq, np.inf).min(axis=1)
        active = (qq > 0.0) & (ss < lam[:, None])
        terms = np.where(active, 0.5 * qq * np.log1p((lam[:, None] - ss) / ss), 0.0)
    cap = terms.sum(axis=1)
    cap[sq[:, -1] <= 0.0] = 0.0
    return cap


def scan_subsets_numpy(q, s2, budget, k, first, count):
    """Best (capacity, subset) over ``count`` lexicographic k-subsets from ``first``."""
    q = np.asarray(q, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    n = q.shape[0]
    order = np.argsort(s2, kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    stream = _lex_from(n, k, tuple(int(x) for x in first))
    best_cap = -1.0
    best = np.array(first, dtype=np.int64)
    left = count
    while left > 0:
        take = min(left, _NUMPY_BLOCK)
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(stream, take)),
                           dtype=np.int64)
        if flat.size == 0:
            break
        combos = flat.reshape(-1, k)
        cap = _scan_block(q, s2, budget, combos, order, rank)
        j = int(np.argmax(cap))
        if cap[j] > best_cap:
            best_cap = float(cap[j])
            best = combos[j].copy()
        left -= combos.shape[0]
    return best_cap, best


def _lex_from(n, k, first):
    comb = list(first)
    while True:
        yield tuple(comb)
        j = k - 1
        while j >= 0 and comb[j] == n - k + j:
            j -= 1
        if j < 0:
            return
        comb[j] += 1
        for t in range(j + 1, k):
            comb[t] = comb[t - 1] + 1


if HAVE_NUMBA:
    waterfill_level_numba = numba.njit(cache=True, nogil=True)(_level_loop)
    _scan_numba_jit = numba.njit(cache=True, nogil=True)(_scan_loop)

    def scan_subsets_numba(q, s2, budget, k, first, count):
        cap, best = _scan_numba_jit(np.ascontiguousarray(q, dtype=np.float64),
                                    np.ascontiguousarray(s2, dtype=np.float64),
                                    float(budget), int(k),
                                    np.asarray(first, dtype=np.int64), int(count))
        return float(cap), best
else:  # pragma: no cover
    waterfill_level_numba = None
    scan_subsets_numba = None


if BACKEND == "numba":
    def waterfill_level(q, s2, budget):
        return float(waterfill_level_numba(np.ascontiguousarray(q, dtype=np.float64),
                                           np.ascontiguousarray(s2, dtype=np.float64),
                                           float(budget)))

    scan_subsets = scan_subsets_numba
else:
    waterfill_level = waterfill_level_numpy
    scan_subsets = scan_subsets_numpy
