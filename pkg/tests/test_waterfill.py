import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogsense import Instance, SensingSet, solve_waterfill
from cogsense.waterfill import WaterfillError

from .conftest import random_instance


def bisect_level(q, s2, budget, iters=300):
    """Independent reference: bisection on the increasing map lam -> sum q [lam - s2]^+."""
    q = np.asarray(q, float)
    s2 = np.asarray(s2, float)
    lo = float(s2.min())
    hi = float(s2.max()) + budget / q.sum()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if np.sum(q * np.maximum(mid - s2, 0.0)) < budget:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("q, s2, p, lam, powers", [
    ([1.0], [1.0], 1.0, 2.0, [1.0]),
    ([1.0, 1.0], [1.0, 3.0], 4.0, 4.0, [3.0, 1.0]),
    ([1.0, 1.0], [1.0, 10.0], 1.0, 2.0, [1.0, 0.0]),
    ([0.5, 0.25], [1.0, 1.0], 1.5, 3.0, [2.0, 2.0]),
])
def test_closed_forms(q, s2, p, lam, powers):
    inst = Instance.from_arrays(q, s2, p, len(q))
    alloc = solve_waterfill(inst, SensingSet(range(len(q))))
    assert alloc.water_level == pytest.approx(lam, rel=1e-14)
    np.testing.assert_allclose(alloc.powers, powers, rtol=1e-14, atol=1e-14)


def test_closed_form_capacities():
    inst = Instance.from_arrays([1.0], [1.0], 1.0, 1)
    assert solve_waterfill(inst, SensingSet({0})).capacity_nats == pytest.approx(0.34657, abs=1e-5)
    inst = Instance.from_arrays([1.0, 1.0], [1.0, 3.0], 4.0, 2)
    cap = solve_waterfill(inst, SensingSet({0, 1})).capacity_nats
    assert cap == pytest.approx(0.5 * (math.log(4) + math.log(4 / 3)), rel=1e-14)


def test_unsensed_channels_get_no_power():
    inst = Instance.from_arrays([0.5, 0.9, 0.2], [0.1, 0.2, 0.3], 5.0, 2)
    alloc = solve_waterfill(inst, SensingSet({0, 2}))
    assert alloc.powers[1] == 0.0


def test_zero_width_channel_in_set():
    inst = Instance.from_arrays([0.0, 0.5], [0.1, 1.0], 1.0, 2)
    alloc = solve_waterfill(inst, SensingSet({0, 1}))
    assert alloc.water_level == pytest.approx(3.0)
    assert np.dot(inst.q, alloc.powers) == pytest.approx(1.0)


def test_ties_in_noise():
    inst = Instance.from_arrays([0.3, 0.3, 0.4], [2.0, 2.0, 2.0], 1.0, 3)
    alloc = solve_waterfill(inst, SensingSet({0, 1, 2}))
    assert alloc.water_level == pytest.approx(3.0)


def test_empty_set_rejected():
    inst = Instance.from_arrays([0.5], [1.0], 1.0, 1)
    with pytest.raises(WaterfillError, match="empty"):
        solve_waterfill(inst, SensingSet())


def test_all_zero_width_rejected():
    inst = Instance.from_arrays([0.0, 0.0, 0.5], [1.0, 1.0, 1.0], 1.0, 2)
    with pytest.raises(WaterfillError, match="zero total width"):
        solve_waterfill(inst, SensingSet({0, 1}))


def _check_kkt(inst, sensing, alloc):
    p = inst.power_budget
    assert abs(np.dot(inst.q, alloc.powers) - p) <= 1e-9 * p
    lam = alloc.water_level
    for i in sensing.indices:
        if alloc.powers[i] > 0:
            assert abs(alloc.powers[i] + inst.noise_var[i] - lam) <= 1e-9 * lam
        else:
            assert inst.noise_var[i] >= lam - 1e-9 * lam


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_kkt_and_bisection_oracle(seed, n):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n)
    sensing = SensingSet(i for i in range(n) if rng.random() < 0.7 or i == 0)
    if inst.q[list(sensing.indices)].sum() == 0:
        return
    alloc = solve_waterfill(inst, sensing)
    _check_kkt(inst, sensing, alloc)
    idx = list(sensing.indices)
    ref = bisect_level(inst.q[idx], inst.noise_var[idx], inst.power_budget)
    assert abs(alloc.water_level - ref) <= 1e-10 * max(1.0, ref)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_superset_never_worse(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8)
    small = SensingSet(i for i in range(8) if rng.random() < 0.4)
    big = SensingSet(set(small.selected) | {i for i in range(8) if rng.random() < 0.5})
    if len(small) == 0 or inst.q[list(small.indices)].sum() == 0:
        return
    assert (solve_waterfill(inst, small).capacity_nats
            <= solve_waterfill(inst, big).capacity_nats * (1 + 1e-12))
