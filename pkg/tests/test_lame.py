import math

import numpy as np
import pytest

from chargeq import classical
from chargeq.fields import lame_field
from chargeq.lame import (
    EnumerationResult,
    HeineStieltjesSolution,
    LameSystem,
    compositions,
    enumerate_solutions,
    monic_from_zeros,
    ode_residual,
    recover_van_vleck,
    sigma,
    solve,
    zero_set_distance,
)


def jacobi_system(alpha, beta, n):
    return LameSystem((-1.0, 1.0), (beta + 1.0, alpha + 1.0), n, (n,))


def test_system_validation():
    with pytest.raises(ValueError):
        LameSystem((1.0, -1.0), (1.0, 1.0), 1, (1,))
    with pytest.raises(ValueError):
        LameSystem((-1.0, 1.0), (1.0, -1.0), 1, (1,))
    with pytest.raises(ValueError):
        LameSystem((-1.0, 1.0), (1.0,), 1, (1,))
    with pytest.raises(ValueError):
        LameSystem((-1.0, 1.0), (1.0, 1.0), 2, (1,))  # composition sum mismatch
    with pytest.raises(ValueError):
        LameSystem((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), 1, (1,))  # wrong length


def test_system_dict_roundtrip():
    system = LameSystem((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 4, (1, 3))
    assert LameSystem.from_dict(system.to_dict()) == system


def test_monic_from_zeros():
    assert monic_from_zeros([]) == pytest.approx([1.0])
    assert monic_from_zeros([2.0]) == pytest.approx([-2.0, 1.0])
    # (x-1)(x+1)(x-2) = -x^2 ... expand: x^3 - 2x^2 - x + 2
    assert monic_from_zeros([1.0, -1.0, 2.0]) == pytest.approx([2.0, -1.0, -2.0, 1.0])


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (0.5, -0.3), (2.0, 3.0)])
@pytest.mark.parametrize("n", [1, 5, 10])
def test_jacobi_reduction(alpha, beta, n):
    solution = solve(jacobi_system(alpha, beta, n))
    oracle = classical.zeros(classical.jacobi(alpha, beta), n)
    assert np.max(np.abs(solution.zeros - oracle)) < 1e-10
    lam = n * (n + alpha + beta + 1)
    assert solution.van_vleck.size == 1
    assert abs(solution.van_vleck[0] - lam) <= 1e-8 * lam
    assert solution.division_remainder_norm < 1e-10
    assert solution.converged


def test_p2_single_charge_against_bisection_oracle():
    # one charge in (-1, 0) of the field with poles (-1, 0, 1), residues 1:
    # the stationarity condition is 1/(x+1) + 1/x + 1/(x-1) = 0.
    def slope(x):
        return 1.0 / (x + 1.0) + 1.0 / x + 1.0 / (x - 1.0)

    lo, hi = -1.0 + 1e-9, -1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slope(lo) * slope(mid) <= 0:
            hi = mid
        else:
            lo = mid
    oracle = 0.5 * (lo + hi)

    system = LameSystem((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), 1, (1, 0))
    solution = solve(system)
    assert solution.zeros.size == 1
    assert -1.0 < solution.zeros[0] < 0.0
    assert solution.zeros[0] == pytest.approx(oracle, abs=1e-9)
    assert solution.zeros[0] == pytest.approx(-1.0 / math.sqrt(3.0), abs=1e-10)


def test_symmetric_system_reflects():
    poles = (-1.0, 0.0, 1.0)
    residues = (0.7, 1.1, 0.7)
    left = solve(LameSystem(poles, residues, 3, (2, 1)))
    right = solve(LameSystem(poles, residues, 3, (1, 2)))
    assert np.max(np.abs(left.zeros + right.zeros[::-1])) < 1e-9


def test_recover_van_vleck_empty():
    system = LameSystem((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), 0, (0, 0))
    c, remainder = recover_van_vleck([], system)
    assert c == pytest.approx([0.0])
    assert remainder == 0.0
    solution = solve(system)
    assert solution.converged and solution.zeros.size == 0


def test_recover_van_vleck_flags_non_equilibrium():
    system = LameSystem((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 4, (2, 2))
    solution = solve(system)
    perturbed = solution.zeros + np.array([3e-3, -2e-3, 1e-3, -4e-3])
    _, remainder = recover_van_vleck(perturbed, system)
    assert remainder > 1e-5
    assert solution.division_remainder_norm < 1e-12


def test_recover_van_vleck_rejects_zero_at_pole():
    system = LameSystem((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), 2, (1, 1))
    with pytest.raises(ValueError):
        recover_van_vleck([-0.5, 0.0], system)


def test_compositions_and_sigma():
    assert list(compositions(4, 2)) == [(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)]
    assert sigma(4, 2) == 5
    assert sigma(2, 3) == 6
    assert sigma(7, 1) == 1


def test_enumerate_counts_and_order():
    result = enumerate_solutions((-1.0, -0.2, 0.4, 1.0), (1.0, 1.0, 1.0, 1.0), 2)
    assert isinstance(result, EnumerationResult)
    assert not result.failures
    assert len(result.solutions) == sigma(2, 3) == 6
    comps = [s.composition for s in result.solutions]
    assert comps == sorted(comps)


def test_enumerate_p1_single_solution():
    result = enumerate_solutions((-1.0, 1.0), (1.0, 1.5), 6)
    assert len(result.solutions) == 1
    oracle = classical.zeros(classical.jacobi(0.5, 0.0), 6)
    assert np.max(np.abs(result.solutions[0].zeros - oracle)) < 1e-10


def test_enumerate_solutions_distinct_and_localized():
    poles = (-1.0, 0.0, 1.0)
    residues = (0.6, 0.8, 0.7)
    result = enumerate_solutions(poles, residues, 4)
    sols = result.solutions
    assert len(sols) == 5 and not result.failures
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            assert zero_set_distance(sols[i].zeros, sols[j].zeros) > 1e-6
    for sol in sols:
        # Van Vleck polynomial linear with its zero inside the pole hull
        assert sol.van_vleck.size <= 2
        assert abs(sol.van_vleck[-1]) > 1e-10
        root = -sol.van_vleck[0] / sol.van_vleck[1]
        assert -1.0 <= root <= 1.0
        system = LameSystem(poles, residues, 4, sol.composition)
        assert ode_residual(system, sol) < 1e-8


def test_enumerate_reports_failures_without_aborting():
    result = enumerate_solutions((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0), 2, max_iter=0)
    assert len(result.failures) == sigma(2, 2) == 3
    assert not result.solutions
    for comp, message in result.failures:
        assert isinstance(comp, tuple) and message


def test_enumerate_thread_cap(monkeypatch):
    serial = enumerate_solutions((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 3)
    monkeypatch.setenv("CHARGE_EQ_THREADS", "3")
    threaded = enumerate_solutions((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 3)
    assert len(serial.solutions) == len(threaded.solutions)
    for a, b in zip(serial.solutions, threaded.solutions):
        assert a.composition == b.composition
        assert np.max(np.abs(a.zeros - b.zeros)) < 1e-12


def test_van_vleck_zeros_in_hull_across_grid():
    poles = (-1.0, -0.1, 1.0)
    for residues in ((0.5, 0.5, 0.5), (1.2, 0.4, 2.0)):
        for n in (1, 2, 3):
            for sol in enumerate_solutions(poles, residues, n).solutions:
                c = sol.van_vleck
                assert c.size <= 2  # degree bound p - 1
                if c.size == 2 and abs(c[1]) > 1e-10 * max(1.0, abs(c[0])):
                    root = -c[0] / c[1]
                    assert poles[0] - 1e-9 <= root <= poles[-1] + 1e-9


def test_ode_residual_at_custom_points():
    system = LameSystem((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 3, (2, 1))
    solution = solve(system)
    x = np.linspace(-2.0, 2.0, 17)
    assert ode_residual(system, solution, x) < 1e-8


def test_solution_degrees():
    system = LameSystem((-1.0, 0.0, 1.0), (0.6, 0.8, 0.7), 4, (1, 3))
    sol = solve(system)
    assert sol.monic_coefficients.size == 5
    assert sol.monic_coefficients[-1] == pytest.approx(1.0)
    # field/zero consistency: composition counted per gap
    assert np.sum((sol.zeros > -1) & (sol.zeros < 0)) == 1
    assert np.sum((sol.zeros > 0) & (sol.zeros < 1)) == 3
