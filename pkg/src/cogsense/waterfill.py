"""Modified water-filling over a fixed sensing set.

Channel ``n`` has width ``q_n``; the level ``lam`` solves
``sum_{n in S} q_n * max(lam - sigma_n^2, 0) = P`` and each sensed channel
gets ``max(lam - sigma_n^2, 0)``.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .model import Allocation, Instance, SensingSet, capacity

__all__ = ["WaterfillError", "solve_waterfill", "water_level"]


class WaterfillError(ValueError):
    pass


def water_level(inst: Instance, sensing: SensingSet) -> float:
    if len(sensing) == 0:
        raise WaterfillError("empty sensing set")
    idx = np.fromiter(sensing.indices, dtype=np.int64)
    if idx[0] < 0 or idx[-1] >= inst.n:
        raise WaterfillError(f"sensing set {sensing} out of range for n={inst.n}")
    lam = _kernels.waterfill_level(inst.q[idx], inst.noise_var[idx], inst.power_budget)
    if not math.isfinite(lam):
        raise WaterfillError("degenerate: zero total width")
    return lam


def solve_waterfill(inst: Instance, sensing: SensingSet) -> Allocation:
    """Exact water level and powers for ``sensing``.

    Raises :class:`WaterfillError` for an empty set or when every sensed
    channel has zero availability.
    """
    lam = water_level(inst, sensing)
    powers = np.zeros(inst.n)
    for i in sensing.indices:
        powers[i] = max(lam - inst.noise_var[i], 0.0)
    alloc = Allocation(lam, powers, 0.0)
    return Allocation(lam, powers, capacity(inst, sensing, alloc))
