"""Two-stage channel selection: coarse fixed point, optimality certificate, fine refinement."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .model import Allocation, Instance, SensingSet
from .waterfill import solve_waterfill

__all__ = [
    "OptResult",
    "coarse_optimize",
    "lemma1_certificate",
    "candidate_set",
    "fine_lambda",
    "fine_score",
    "fine_rank_score",
    "fine_optimize",
    "joint_optimize",
]

log = logging.getLogger(__name__)

CERT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class OptResult:
    method: str
    sensing: SensingSet
    alloc: Allocation
    iterations: int
    certified_optimal: bool
    lambda_min: float
    # (set, water level computed from it) for every executed Step II
    trace: tuple[tuple[SensingSet, float], ...] = ()

    @property
    def capacity_nats(self) -> float:
        return self.alloc.capacity_nats


def _top_positive(scores: np.ndarray, pool: Iterable[int], limit: int) -> SensingSet:
    # score descending, then index ascending; non-positive scores never selected
    ranked = sorted((i for i in pool if scores[i] > 0.0), key=lambda i: (-scores[i], i))
    return SensingSet(ranked[:limit])


def _iterate(inst: Instance, start: SensingSet, level: Callable[[SensingSet], float],
             select: Callable[[float], SensingSet]):
    """Run set <- select(level(set)) to a fixed point; on a cycle keep the best iterate."""
    history = [start]
    seen = {start}
    trace = []
    current = start
    iterations = 0
    while True:
        iterations += 1
        lam = level(current)
        trace.append((current, lam))
        nxt = select(lam)
        if nxt == current:
            return current, iterations, tuple(trace), False
        if nxt in seen:
            log.debug("set iteration cycled after %d steps", iterations)
            best = max(history, key=lambda s: (solve_waterfill(inst, s).capacity_nats,
                                               [-i for i in s.indices]))
            return best, iterations, tuple(trace), True
        history.append(nxt)
        seen.add(nxt)
        current = nxt


def coarse_optimize(inst: Instance) -> OptResult:
    """Iterate water-fill / re-select until the sensed set stops changing.

    Starts from the L channels with the largest availability and keeps, at
    each step, up to L channels with the largest positive
    ``q_n * (lam - sigma_n^2)``.
    """
    q, s2, l = inst.q, inst.noise_var, inst.sensing_budget
    if not np.any(q > 0.0):
        raise ValueError("no channel with positive availability")
    start = SensingSet(sorted(range(inst.n), key=lambda i: (-q[i], i))[:l])

    def level(s):
        return solve_waterfill(inst, s).water_level

    def select(lam):
        return _top_positive(q * (lam - s2), range(inst.n), l)

    final, iterations, trace, cycled = _iterate(inst, start, level, select)
    if not cycled:
        levels = [lam for _, lam in trace]
        if any(b > a * (1 + 1e-12) for a, b in zip(levels, levels[1:])):
            log.warning("coarse water level not monotone: %s", levels)
    alloc = solve_waterfill(inst, final)
    res = OptResult("coarse", final, alloc, iterations, False, alloc.water_level, trace)
    return dataclasses.replace(res, certified_optimal=lemma1_certificate(inst, res))


def lemma1_certificate(inst: Instance, coarse: OptResult) -> bool:
    """True when every unsensed channel sits at or above the coarse water level."""
    lam = coarse.lambda_min
    bound = lam - CERT_RTOL * lam
    return all(inst.noise_var[i] >= bound for i in range(inst.n) if i not in coarse.sensing)


def candidate_set(inst: Instance, lambda_min: float) -> frozenset[int]:
    return frozenset(int(i) for i in np.flatnonzero(inst.noise_var <= lambda_min))


def fine_lambda(inst: Instance, sensing: SensingSet) -> float:
    """Untruncated level ``(sum q sigma^2 + P) / sum q`` over ``sensing``."""
    idx = list(sensing.indices)
    width = float(np.sum(inst.q[idx]))
    if not width > 0.0:
        raise ValueError("degenerate: zero total width")
    return (float(np.dot(inst.q[idx], inst.noise_var[idx])) + inst.power_budget) / width


def fine_score(lam: float, noise_var: float) -> float:
    """``lam - sigma^2 * exp(1 - sigma^2 / lam)``; positive when inclusion is admissible."""
    return lam - noise_var * math.exp(1.0 - noise_var / lam)


def fine_rank_score(lam: float, noise_var: float, avail_prob: float) -> float:
    """Availability-weighted inclusion gain ``q * ln(lam / (sigma^2 exp(1 - sigma^2 / lam)))``.

    Has the sign of :func:`fine_score` for ``q > 0`` and orders candidates by
    the rate they add net of the power they consume at level ``lam``.
    """
    x = noise_var / lam
    return avail_prob * (x - 1.0 - math.log(x))


def fine_optimize(inst: Instance, coarse: OptResult) -> OptResult:
    """Refine a full coarse set over the channels at or below the coarse level.

    Alternates the closed-form level of the current set with re-selecting the
    L admissible candidates of largest :func:`fine_rank_score`.  Returns the
    coarse selection (tagged ``fine``) when it is certified or uses fewer
    than L channels.
    """
    l = inst.sensing_budget
    if coarse.certified_optimal or lemma1_certificate(inst, coarse) or len(coarse.sensing) < l:
        return dataclasses.replace(coarse, method="fine", iterations=0, trace=())
    pool = sorted(candidate_set(inst, coarse.lambda_min))
    q, s2 = inst.q, inst.noise_var

    def select(lam):
        scores = np.zeros(inst.n)
        for i in pool:
            if fine_score(lam, s2[i]) > 0.0:
                scores[i] = fine_rank_score(lam, s2[i], q[i])
        return _top_positive(scores, pool, l)

    final, iterations, trace, _ = _iterate(
        inst, coarse.sensing, lambda s: fine_lambda(inst, s), select)
    alloc = solve_waterfill(inst, final)
    return OptResult("fine", final, alloc, iterations, False, coarse.lambda_min, trace)


def joint_optimize(inst: Instance) -> OptResult:
    coarse = coarse_optimize(inst)
    fine = fine_optimize(inst, coarse)
    best = fine if fine.capacity_nats > coarse.capacity_nats else coarse
    return dataclasses.replace(best, certified_optimal=coarse.certified_optimal)
