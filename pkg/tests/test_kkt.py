import json

import numpy as np
import pytest

from trapcc import geometry as geo
from trapcc.errors import MaxItersExceeded, SingularFit
from trapcc.kkt import (
    Multipliers,
    Solution,
    SolverConfig,
    fd_jacobian,
    initial_multipliers,
    kkt_jacobian,
    kkt_residual,
    newton_solve,
    newton_step,
    sigma_squared_triple,
)
from trapcc.potential import MassVector, moment_of_inertia, normalize_inertia

from conftest import SQUARE_LAMBDA, SQUARE_SIGMA, UNIT_SQUARE

UNIT = MassVector((1, 1, 1, 1))
SQUARE_MULT = Multipliers(SQUARE_LAMBDA, SQUARE_SIGMA)
# relabelling 1<->2, 3<->4 sends (r12, r13, r14, r23, r24, r34) to this order
RELABEL = [0, 4, 3, 2, 1, 5]


def test_square_multiplier_values():
    assert SQUARE_LAMBDA == pytest.approx(0.6767766953, abs=1e-10)
    assert SQUARE_SIGMA == pytest.approx(0.1616116524, abs=1e-10)


def test_residual_vanishes_at_square():
    np.testing.assert_allclose(kkt_residual(UNIT_SQUARE, SQUARE_MULT, UNIT), 0, atol=1e-12)


def test_residual_without_multipliers():
    m = MassVector((1, 2, 3, 4))
    r = np.array([0.7, 1.1, 0.8, 0.9, 1.2, 0.6])
    res = kkt_residual(r, (0.0, 0.0), m)
    order = [0, 5, 1, 4, 2, 3]
    np.testing.assert_allclose(res[:6], m.pair_products[order] * r[order] ** -3)
    assert res[6] == pytest.approx(moment_of_inertia(r, m) - 1)
    assert res[7] == pytest.approx(geo.trapezoid_residual(r))


def test_residual_first_order_in_f():
    r = UNIT_SQUARE.copy()
    r[0] += 1e-3
    assert kkt_residual(r, SQUARE_MULT, UNIT)[7] == pytest.approx(2e-3, rel=1e-3)


def test_analytic_jacobian_matches_finite_differences(rng):
    for _ in range(20):
        m = MassVector(tuple(rng.uniform(0.2, 3, 4)))
        r = rng.uniform(0.5, 2, 6)
        mult = rng.normal(size=2)
        np.testing.assert_allclose(kkt_jacobian(r, mult, m), fd_jacobian(r, mult, m), rtol=1e-6, atol=1e-6)


def test_newton_direction_cross_validation(rng):
    m = MassVector((1, 2, 3, 4))
    for _ in range(20):
        r = normalize_inertia(rng.uniform(0.5, 2, 6), m)
        mult = initial_multipliers(r, m)
        a = newton_step(r, mult, m, "analytic")
        b = newton_step(r, mult, m, "finite-difference")
        assert np.linalg.norm(a - b) <= 1e-5 * np.linalg.norm(a)


def test_initial_multipliers_exact_at_square():
    lam, sigma = initial_multipliers(UNIT_SQUARE, UNIT)
    assert lam == pytest.approx(SQUARE_LAMBDA, abs=1e-12)
    assert sigma == pytest.approx(SQUARE_SIGMA, abs=1e-12)


def test_initial_multipliers_normal_equations():
    r = normalize_inertia(np.ones(6), UNIT)
    # rows (12),(34),(13),(24),(14),(23) against columns (lambda, sigma)
    a = np.array([[1, 2], [1, 2], [1, -2], [1, -2], [1, 2], [1, 2]], dtype=float)
    b = r**-3
    expected = np.linalg.solve(a.T @ a, a.T @ b)
    got = initial_multipliers(r, UNIT)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)
    assert got[1] == pytest.approx(0.0, abs=1e-15)


def test_initial_multipliers_relabel_invariant(rng):
    m = (1.0, 2.0, 3.0, 4.0)
    swapped = (2.0, 1.0, 4.0, 3.0)
    for _ in range(10):
        r = rng.uniform(0.5, 2, 6)
        a = kkt_residual(r, initial_multipliers(r, m), m)[:6]
        b = kkt_residual(r[RELABEL], initial_multipliers(r[RELABEL], swapped), swapped)[:6]
        assert np.linalg.norm(a) == pytest.approx(np.linalg.norm(b), rel=1e-12)


def test_singular_fit_guard():
    with pytest.raises(SingularFit):
        initial_multipliers([1, 1, 1, 1, 1, np.inf], UNIT)


def test_sigma_triple_examples():
    triple = sigma_squared_triple(UNIT_SQUARE, SQUARE_LAMBDA, UNIT)
    np.testing.assert_allclose(triple, SQUARE_SIGMA**2, rtol=1e-12)
    assert SQUARE_SIGMA**2 == pytest.approx(0.02611832, abs=1e-8)
    np.testing.assert_allclose(sigma_squared_triple(np.ones(6), 0.0, UNIT), 0.25)


def test_newton_from_perturbed_square(rng):
    start = normalize_inertia(UNIT_SQUARE + rng.uniform(-0.05, 0.05, 6), UNIT)
    sol = newton_solve(start, UNIT)
    assert sol.residual_norm < 1e-12
    assert sol.iterations <= 12
    np.testing.assert_allclose(sol.r, UNIT_SQUARE, atol=1e-10)
    assert sol.realizable and sol.convex_sequential
    assert sol.certificate.passed


def test_newton_at_root_does_nothing():
    sol = newton_solve(UNIT_SQUARE, UNIT)
    assert sol.iterations <= 1
    np.testing.assert_allclose(sol.r, UNIT_SQUARE, atol=1e-14)


def test_finite_difference_mode_converges(rng):
    start = normalize_inertia(UNIT_SQUARE + rng.uniform(-0.05, 0.05, 6), UNIT)
    sol = newton_solve(start, UNIT, SolverConfig(jacobian_mode="finite-difference"))
    np.testing.assert_allclose(sol.r, UNIT_SQUARE, atol=1e-10)


def test_max_iters_reports_best_iterate(rng):
    start = normalize_inertia(UNIT_SQUARE + 0.2, UNIT)
    with pytest.raises(MaxItersExceeded) as info:
        newton_solve(start, UNIT, SolverConfig(max_iters=1))
    assert info.value.solution is not None
    assert not info.value.solution.converged


def test_converged_invariants():
    for masses in [(1, 1, 1, 1), (1, 1, 2, 2), (1, 2, 3, 4), (0.3, 1.7, 0.9, 2.2)]:
        m = MassVector(masses)
        sol = newton_solve(normalize_inertia(UNIT_SQUARE, m), m)
        assert sol.mult.lam > 0
        assert sol.sigma_sq_spread <= 1e-10
        np.testing.assert_allclose(
            sigma_squared_triple(sol.r, sol.mult.lam, m), sol.mult.sigma**2, rtol=1e-10
        )
        if sol.realizable:
            assert abs(geo.cayley_menger(sol.r)) <= geo.planarity_tolerance(sol.r)


def test_relabel_equivariance():
    m = (1.0, 2.0, 3.0, 4.0)
    swapped = (2.0, 1.0, 4.0, 3.0)
    start = normalize_inertia(np.array([0.9, 1.3, 1.0, 1.1, 1.2, 0.8]), m)
    a = newton_solve(start, m)
    b = newton_solve(start[RELABEL], swapped)
    np.testing.assert_allclose(b.r, a.r[RELABEL], atol=1e-10)
    assert b.mult.lam == pytest.approx(a.mult.lam, rel=1e-10)
    assert b.mult.sigma == pytest.approx(a.mult.sigma, rel=1e-10)


def test_solution_json_roundtrip():
    sol = newton_solve(UNIT_SQUARE, UNIT)
    data = json.loads(json.dumps(sol.to_dict()))
    assert set(data) == {
        "masses", "r", "lambda", "sigma", "residual_norm", "iterations",
        "realizable", "convex_sequential", "sigma_sq_spread", "certificate",
    }
    back = Solution.from_dict(data)
    np.testing.assert_array_equal(back.r, sol.r)
    assert back.mult == sol.mult
    assert back.certificate == sol.certificate


@pytest.mark.parametrize("kwargs", [{"backtrack": 1.5}, {"tol_residual": 0}, {"jacobian_mode": "bogus"}, {"max_iters": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)
