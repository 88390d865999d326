"""Exhaustive search over sensing subsets.

Only subsets of size exactly L are scanned: water-filling over a superset
never does worse, since the extra channels can always be left at zero power.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator

import numpy as np

from . import _kernels
from .model import Instance, SensingSet
from .selector import OptResult
from .waterfill import solve_waterfill

__all__ = [
    "EnumerationCapError",
    "DEFAULT_CAP",
    "subsets_of_size",
    "unrank_subset",
    "chunk_ranges",
    "exhaustive_search",
]

DEFAULT_CAP = 10**7


class EnumerationCapError(RuntimeError):
    pass


def unrank_subset(n: int, k: int, rank: int) -> tuple[int, ...]:
    """The ``rank``-th k-subset of ``range(n)`` in lexicographic order."""
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise IndexError(f"rank {rank} out of range for C({n}, {k}) = {total}")
    out = []
    x = 0
    for slot in range(k):
        while True:
            # subsets starting with x at this slot
            block = math.comb(n - x - 1, k - slot - 1)
            if rank < block:
                break
            rank -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def subsets_of_size(n: int, k: int, start: int = 0,
                    stop: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield k-subsets of ``range(n)`` in lexicographic order, ranks ``[start, stop)``."""
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"invalid subset size k={k} for n={n}")
    total = math.comb(n, k)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return iter(())
    if k == 0:
        return iter([()])
    return itertools.islice(_kernels._lex_from(n, k, unrank_subset(n, k, start)), stop - start)


def chunk_ranges(total: int, chunks: int) -> list[tuple[int, int]]:
    chunks = max(1, min(chunks, total))
    bounds = [total * c // chunks for c in range(chunks + 1)]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def _scan(inst: Instance, k: int, start: int, stop: int):
    first = np.array(unrank_subset(inst.n, k, start), dtype=np.int64)
    cap, best = _kernels.scan_subsets(inst.q, inst.noise_var, inst.power_budget,
                                      k, first, stop - start)
    return cap, tuple(int(i) for i in best)


def exhaustive_search(inst: Instance, cap: int = DEFAULT_CAP, workers: int = 1,
                      chunks: int | None = None) -> OptResult:
    """Best size-L sensing set by brute force.

    Ties go to the lexicographically smallest index set.  With ``chunks`` > 1
    the rank range is split and scanned (on ``workers`` threads); the reduction
    keeps the earlier chunk on equal capacity so the result matches a serial
    scan exactly.
    """
    n, k = inst.n, inst.sensing_budget
    if not np.any(inst.q > 0.0):
        raise ValueError("no channel with positive availability")
    total = math.comb(n, k)
    if total > cap:
        raise EnumerationCapError(f"C({n}, {k}) = {total} exceeds enumeration cap {cap}")
    ranges = chunk_ranges(total, chunks if chunks is not None else workers)
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _scan(inst, k, *r), ranges))
    else:
        parts = [_scan(inst, k, *r) for r in ranges]
    best_cap, best = parts[0]
    for c, s in parts[1:]:
        if c > best_cap:
            best_cap, best = c, s
    sensing = SensingSet(best)
    alloc = solve_waterfill(inst, sensing)
    return OptResult("exhaustive", sensing, alloc, total, True, alloc.water_level)
