"""Both kernel backends must agree with each other and with plain Python."""

import itertools

import numpy as np
import pytest

from cogsense import _kernels

from .test_waterfill import bisect_level

BACKENDS = [pytest.param("numpy", id="numpy"),
            pytest.param("numba", id="numba",
                         marks=pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing"))]


def _level(backend):
    return _kernels.waterfill_level_numpy if backend == "numpy" else _kernels.waterfill_level_numba


def _scan(backend):
    return _kernels.scan_subsets_numpy if backend == "numpy" else _kernels.scan_subsets_numba


@pytest.mark.parametrize("backend", BACKENDS)
def test_level_against_bisection(backend):
    rng = np.random.default_rng(1)
    for _ in range(300):
        m = int(rng.integers(1, 9))
        q = rng.uniform(0, 1, m)
        s2 = np.exp(rng.uniform(-3, 3, m))
        p = float(np.exp(rng.uniform(-3, 5)))
        lam = _level(backend)(q, s2, p)
        assert abs(lam - bisect_level(q, s2, p)) <= 1e-10 * max(1.0, lam)


@pytest.mark.parametrize("backend", BACKENDS)
def test_level_zero_width_is_inf(backend):
    assert _level(backend)(np.zeros(3), np.ones(3), 1.0) == np.inf


def _brute(q, s2, p, k):
    best = (-1.0, None)
    for combo in itertools.combinations(range(len(q)), k):
        idx = list(combo)
        if q[idx].sum() == 0:
            cap = 0.0
        else:
            lam = bisect_level(q[idx], s2[idx], p)
            cap = sum(0.5 * q[i] * np.log(lam / s2[i]) for i in idx if s2[i] < lam)
        if cap > best[0] + 1e-12:
            best = (cap, combo)
    return best


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("seed", range(8))
def test_scan_against_brute_force(backend, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    k = int(rng.integers(1, n + 1))
    q = rng.uniform(0, 1, n)
    s2 = np.exp(rng.uniform(-2, 2, n))
    p = float(np.exp(rng.uniform(-2, 4)))
    cap, best = _scan(backend)(q, s2, p, k, np.arange(k), 10**9)
    ref_cap, ref_best = _brute(q, s2, p, k)
    assert cap == pytest.approx(ref_cap, rel=1e-10)
    assert tuple(best) == ref_best


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing")
def test_backends_agree_on_partial_ranges(golden):
    q, s2, p = golden.q, golden.noise_var, golden.power_budget
    for first, count in [((0, 1, 2, 3, 4, 5, 6, 7), 5000), ((2, 3, 5, 6, 9, 10, 11, 14), 3000)]:
        a = _kernels.scan_subsets_numpy(q, s2, p, 8, np.array(first), count)
        b = _kernels.scan_subsets_numba(q, s2, p, 8, np.array(first), count)
        assert a[0] == pytest.approx(b[0], rel=1e-13)
        assert tuple(a[1]) == tuple(b[1])


def test_backend_flag_value():
    assert _kernels.BACKEND in ("numba", "numpy")
