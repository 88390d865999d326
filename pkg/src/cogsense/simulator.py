"""Monte Carlo check of the ergodic rate with i.i.d. Bernoulli channel availability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Allocation, Instance, SensingSet

__all__ = ["SimResult", "simulate"]

_SLOT_BLOCK = 1 << 14


@dataclass(frozen=True)
class SimResult:
    empirical_rate: float
    rate_stderr: float
    empirical_avg_power: float
    power_stderr: float
    slots: int

    def within_band(self, analytical: float, k: float = 3.0) -> bool:
        return abs(self.empirical_rate - analytical) <= k * self.rate_stderr


class _Moments:
    """Running mean / variance of per-slot values, shifted by the first value."""

    def __init__(self):
        self.shift = None
        self.count = 0
        self.s1 = 0.0
        self.s2 = 0.0

    def add(self, x: np.ndarray) -> None:
        if self.shift is None:
            self.shift = float(x[0])
        d = x - self.shift
        self.count += x.size
        self.s1 += float(d.sum())
        self.s2 += float(np.dot(d, d))

    def mean(self) -> float:
        return self.shift + self.s1 / self.count

    def stderr(self) -> float:
        if self.count < 2:
            return math.inf
        var = (self.s2 - self.s1 * self.s1 / self.count) / (self.count - 1)
        return math.sqrt(max(var, 0.0) / self.count)


def simulate(inst: Instance, sensing: SensingSet, alloc: Allocation,
             slots: int, seed: int) -> SimResult:
    """Draw availability per slot and sensed channel, accrue rate and power when free.

    Powers are held static across slots.  Random draws come from numpy's
    PCG64 generator seeded with ``seed``; rows of ``slots x |sensing|``
    uniforms are consumed in fixed-size blocks, so a given seed always yields
    the same stream.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    powers = alloc.powers
    if powers.shape != (inst.n,):
        raise ValueError(f"powers must have length {inst.n}")
    off = [i for i in range(inst.n) if i not in sensing.selected and powers[i] != 0.0]
    if off:
        raise ValueError(f"allocation inconsistent with sensing set: power on {off}")
    idx = np.fromiter(sensing.indices, dtype=np.int64)
    q = inst.q[idx]
    p = powers[idx]
    rate = 0.5 * np.log1p(p / inst.noise_var[idx])
    rng = np.random.default_rng(seed)
    rate_m, power_m = _Moments(), _Moments()
    done = 0
    while done < slots:
        t = min(_SLOT_BLOCK, slots - done)
        avail = (rng.random((t, idx.size)) < q).astype(np.float64)
        rate_m.add(avail @ rate if idx.size else np.zeros(t))
        power_m.add(avail @ p if idx.size else np.zeros(t))
        done += t
    return SimResult(
        empirical_rate=max(rate_m.mean(), 0.0),
        rate_stderr=rate_m.stderr(),
        empirical_avg_power=max(power_m.mean(), 0.0),
        power_stderr=power_m.stderr(),
        slots=slots,
    )
