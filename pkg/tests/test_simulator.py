import numpy as np
import pytest

from cogsense import Allocation, Instance, SensingSet, joint_optimize, simulate, solve_waterfill


def test_all_available_is_exact():
    inst = Instance.from_arrays([1.0, 1.0, 1.0], [0.5, 1.0, 3.0], 2.0, 2)
    s = SensingSet({0, 1})
    alloc = solve_waterfill(inst, s)
    sim = simulate(inst, s, alloc, 5000, seed=1)
    assert sim.empirical_rate == pytest.approx(alloc.capacity_nats, rel=1e-14)
    assert sim.rate_stderr == 0.0
    assert sim.empirical_avg_power == pytest.approx(inst.power_budget, rel=1e-12)


def test_never_available():
    inst = Instance.from_arrays([0.0, 0.0, 0.7], [0.5, 1.0, 3.0], 2.0, 3)
    s = SensingSet({0, 1, 2})
    alloc = Allocation(3.0, [2.5, 2.0, 0.0], 0.0)
    sim = simulate(inst, SensingSet({0, 1}), Allocation(3.0, [2.5, 2.0, 0.0], 0.0), 1000, 3)
    assert sim.empirical_rate == 0.0 and sim.empirical_avg_power == 0.0
    assert simulate(inst, s, alloc, 10, 3).slots == 10


def test_deterministic(golden):
    res = joint_optimize(golden)
    a = simulate(golden, res.sensing, res.alloc, 20_000, 5)
    b = simulate(golden, res.sensing, res.alloc, 20_000, 5)
    assert a == b
    assert a != simulate(golden, res.sensing, res.alloc, 20_000, 6)


def test_single_slot_has_no_error_estimate(golden):
    res = joint_optimize(golden)
    sim = simulate(golden, res.sensing, res.alloc, 1, 0)
    assert sim.slots == 1 and sim.rate_stderr == np.inf


def test_golden_band(golden):
    res = joint_optimize(golden)
    sim = simulate(golden, res.sensing, res.alloc, 100_000, 11)
    assert sim.within_band(res.capacity_nats)
    assert sim.empirical_avg_power <= golden.power_budget + 3 * sim.power_stderr


def test_inconsistent_allocation_rejected():
    inst = Instance.from_arrays([0.5, 0.5], [1.0, 1.0], 1.0, 1)
    with pytest.raises(ValueError):
        simulate(inst, SensingSet({0}), Allocation(2.0, [1.0, 1.0], 0.0), 10, 0)
    with pytest.raises(ValueError):
        simulate(inst, SensingSet({0}), Allocation(2.0, [1.0, 0.0], 0.0), 0, 0)
