"""Problem types, validation, random instances and the instance file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InstanceError",
    "ChannelProfile",
    "Instance",
    "SensingSet",
    "Allocation",
    "validate_instance",
    "capacity",
    "generate_instance",
    "read_instance",
    "write_instance",
]

NOISE_CLAMP = (1e-6, 1e6)


class InstanceError(ValueError):
    """Raised for malformed instance documents or violated invariants."""


@dataclass(frozen=True)
class ChannelProfile:
    avail_prob: float
    noise_var: float


@dataclass(frozen=True)
class Instance:
    """N parallel channels, an average power budget P and a sensing budget L."""

    channels: tuple[ChannelProfile, ...]
    power_budget: float
    sensing_budget: int

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))

    @classmethod
    def from_arrays(cls, q: Sequence[float], noise_var: Sequence[float],
                    power_budget: float, sensing_budget: int) -> "Instance":
        if len(q) != len(noise_var):
            raise InstanceError("q and noise_var must have equal length")
        chans = tuple(ChannelProfile(float(a), float(s)) for a, s in zip(q, noise_var))
        return cls(chans, float(power_budget), int(sensing_budget))

    @property
    def n(self) -> int:
        return len(self.channels)

    @cached_property
    def q(self) -> np.ndarray:
        arr = np.array([c.avail_prob for c in self.channels], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def noise_var(self) -> np.ndarray:
        arr = np.array([c.noise_var for c in self.channels], dtype=np.float64)
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class SensingSet:
    """Indices of the channels the radio senses (the indicator I_n)."""

    selected: frozenset[int]

    def __init__(self, selected: Iterable[int] = ()):
        object.__setattr__(self, "selected", frozenset(int(i) for i in selected))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.selected))

    @property
    def bitmask(self) -> int:
        mask = 0
        for i in self.selected:
            mask |= 1 << i
        return mask

    @classmethod
    def from_bitmask(cls, mask: int) -> "SensingSet":
        return cls(i for i in range(mask.bit_length()) if mask >> i & 1)

    def __len__(self) -> int:
        return len(self.selected)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.selected

    def __repr__(self) -> str:
        return f"SensingSet({set(self.indices) or '{}'})"


@dataclass(frozen=True, eq=False)
class Allocation:
    """Water level, per-channel powers (length N) and the resulting capacity in nats."""

    water_level: float
    powers: np.ndarray
    capacity_nats: float

    def __post_init__(self):
        p = np.array(self.powers, dtype=np.float64)
        p.flags.writeable = False
        object.__setattr__(self, "powers", p)

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2.0)


def validate_instance(inst: Instance) -> None:
    """Raise :class:`InstanceError` naming the first violated invariant."""
    if inst.n < 1:
        raise InstanceError("instance must have at least one channel")
    for i, ch in enumerate(inst.channels):
        a = ch.avail_prob
        if not (isinstance(a, (int, float)) and math.isfinite(a) and 0.0 <= a <= 1.0):
            raise InstanceError(f"channel {i}: avail_prob out of range [0, 1]: {a!r}")
        s = ch.noise_var
        if not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0.0):
            raise InstanceError(f"channel {i}: noise_var must be positive and finite: {s!r}")
    p = inst.power_budget
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p > 0.0):
        raise InstanceError(f"power_budget must be positive and finite: {p!r}")
    l = inst.sensing_budget
    if isinstance(l, bool) or not isinstance(l, (int, np.integer)):
        raise InstanceError(f"sensing_budget must be an integer: {l!r}")
    if l < 1:
        raise InstanceError("sensing_budget must be >= 1")
    if l > inst.n:
        raise InstanceError(f"sensing_budget must be <= n ({inst.n}): {l}")


def capacity(inst: Instance, sensing: SensingSet, alloc: Allocation) -> float:
    """Ergodic rate sum over sensed channels of (q_n / 2) ln(1 + P_n / sigma_n^2), in nats."""
    powers = alloc.powers
    if powers.shape != (inst.n,):
        raise ValueError(f"powers must have length {inst.n}")
    off = [i for i in range(inst.n) if i not in sensing.selected and powers[i] != 0.0]
    if off:
        raise ValueError(f"nonzero power on unsensed channels {off}")
    total = 0.0
    for i in sensing.indices:
        total += 0.5 * inst.q[i] * math.log1p(powers[i] / inst.noise_var[i])
    return total


def generate_instance(seed: int, n: int, l: int, snr_db: float, taps: int) -> Instance:
    """Random instance: uniform availabilities and a frequency-selective noise profile.

    A ``taps``-tap complex Gaussian impulse response is folded onto ``n`` points
    and transformed; the resulting gains are normalized to unit mean power and
    each channel's noise variance is the reciprocal gain, clamped to
    ``[1e-6, 1e6]``.  The power budget is ``n * 10**(snr_db / 10)``.
    """
    if n < 1:
        raise InstanceError("n must be >= 1")
    if not 1 <= l <= n:
        raise InstanceError(f"l must satisfy 1 <= l <= n, got l={l}, n={n}")
    if taps < 1:
        raise InstanceError("taps must be >= 1")
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.0, 1.0, size=n)
    h = (rng.standard_normal(taps) + 1j * rng.standard_normal(taps)) / math.sqrt(2.0)
    folded = np.zeros(n, dtype=np.complex128)
    np.add.at(folded, np.arange(taps) % n, h)
    gain = np.abs(np.fft.fft(folded)) ** 2
    gain /= gain.mean()
    with np.errstate(divide="ignore"):
        noise = np.clip(1.0 / gain, *NOISE_CLAMP)
    inst = Instance.from_arrays(q, noise, n * 10.0 ** (snr_db / 10.0), l)
    validate_instance(inst)
    return inst


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_instance(inst: Instance) -> bytes:
    validate_instance(inst)
    lines = [
        "{",
        f'  "n": {inst.n},',
        f'  "power_budget": {_fmt(inst.power_budget)},',
        f'  "sensing_budget": {int(inst.sensing_budget)},',
        '  "channels": [',
    ]
    rows = [f'    {{"q": {_fmt(c.avail_prob)}, "noise_var": {_fmt(c.noise_var)}}}'
            for c in inst.channels]
    lines.append(",\n".join(rows))
    lines += ["  ]", "}", ""]
    return "\n".join(lines).encode("utf-8")


def _number(doc: dict, key: str, where: str = "") -> float:
    if key not in doc:
        raise InstanceError(f"missing {key!r}{where}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceError(f"{key!r}{where} must be a number")
    return v


def read_instance(data: bytes | str) -> Instance:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceError(f"malformed instance document: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    n = _number(doc, "n")
    power = float(_number(doc, "power_budget"))
    budget = _number(doc, "sensing_budget")
    if not isinstance(n, int) or not isinstance(budget, int):
        raise InstanceError("'n' and 'sensing_budget' must be integers")
    chans = doc.get("channels")
    if not isinstance(chans, list):
        raise InstanceError("missing 'channels' list")
    if len(chans) != n:
        raise InstanceError(f"'n' is {n} but {len(chans)} channels are listed")
    profiles = []
    for i, c in enumerate(chans):
        if not isinstance(c, dict):
            raise InstanceError(f"channel {i} must be an object")
        where = f" in channel {i}"
        profiles.append(ChannelProfile(float(_number(c, "q", where)),
                                       float(_number(c, "noise_var", where))))
    inst = Instance(tuple(profiles), power, budget)
    validate_instance(inst)
    return inst
