import warnings
from dataclasses import replace

import numpy as np
import pytest

from windbands.core import MeanProfile, ValidationError, DimensionError, day_offband
from windbands.optimizer import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    BandProblem,
    SolverOptions,
    brute_force_oracle,
    build_instance,
    solve,
    solve_relaxation,
)

from conftest import constraint_violations, dual_lp_objective, make_day, random_days


def test_build_instance_mean_profile():
    days = [make_day([0.2, 0.4], [0.2, 0.4], 0), make_day([0.6, 0.8], [0.6, 0.8], 1)]
    problem = build_instance(days, days, 0.1, 1.0)
    np.testing.assert_allclose(problem.mean_profile.w_bar, [0.4, 0.6])


def test_build_instance_separate_mean_source():
    days = [make_day([0.2, 0.4], [0.2, 0.4], 0)]
    history = [make_day([0.0, 0.0], [0.0, 0.0], 5), make_day([1.0, 0.5], [1.0, 0.5], 6)]
    problem = build_instance(days, history, 0.1, 1.0)
    np.testing.assert_allclose(problem.mean_profile.w_bar, [0.5, 0.25])
    explicit = build_instance(days, MeanProfile([0.1, 0.9]), 0.1, 1.0)
    np.testing.assert_allclose(explicit.mean_profile.w_bar, [0.1, 0.9])


def test_build_instance_validation():
    days = [make_day([0.2, 0.4], [0.2, 0.4], 0)]
    with pytest.raises(ValidationError):
        build_instance(days, days, 1.2, 1.0)
    with pytest.raises(ValidationError):
        build_instance(days, days, 0.1, -0.1)
    with pytest.raises(ValidationError):
        build_instance([], days, 0.1, 1.0)
    with pytest.raises(DimensionError):
        build_instance(days + [make_day([0.1] * 3, [0.1] * 3, 1)], days, 0.1, 1.0)


def test_single_day_analytic_lp():
    # theta=0 forces z=0, so p_t x_t >= |w_t - p_t| binds: x = 0.1 / 0.5
    day = make_day([0.5, 0.5], [0.6, 0.4])
    problem = BandProblem([day], MeanProfile([0.5, 0.5]), 0.0, 1.0)
    sol = solve(problem)
    assert sol.status == OPTIMAL
    np.testing.assert_allclose(sol.coefficients.x, [0.2, 0.2], atol=1e-9)
    assert sol.objective == pytest.approx(0.2, abs=1e-9)
    assert sol.nodes == 1


def test_theta_above_worst_deviation_gives_zero_band(rng):
    days = random_days(rng, 6, 8)
    worst = max(np.mean(d.abs_error) for d in days)
    sol = solve(build_instance(days, days, min(1.0, worst + 1e-9), 1.0))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(sol.coefficients.x, 0.0, atol=1e-9)


def test_discards_the_bad_day():
    good = make_day([0.5, 0.5, 0.5], [0.5, 0.5, 0.5], 0)
    bad = make_day([0.5, 0.5, 0.5], [0.5, 0.95, 0.05], 1)
    problem = build_instance([good, bad], [good, bad], 0.0, 0.5)
    for options in (SolverOptions(), SolverOptions(formulation="big-m"),
                     SolverOptions(branching="most-fractional")):
        sol = solve(problem, options)
        assert sol.status == OPTIMAL
        assert sol.regular_flags.tolist() == [1, 0]
        assert sol.objective == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(sol.violations[1], 0.0)
    oracle = brute_force_oracle(problem)
    assert oracle.regular_flags.tolist() == [1, 0]
    assert oracle.n_assignments == 3


def test_relaxation_all_fixed_matches_lp_path(rng):
    days = random_days(rng, 5, 6)
    problem = build_instance(days, days, 0.05, 1.0)
    relaxed = solve_relaxation(replace(problem, lam=0.6), fixed_y=[1] * 5)
    assert relaxed.objective == pytest.approx(solve(problem).objective, abs=1e-7)


def test_relaxation_is_a_lower_bound(rng):
    days = random_days(rng, 6, 6)
    for lam in (0.0, 0.5):
        problem = build_instance(days, days, 0.02, lam)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            milp = solve(problem)
        for formulation in ("tight", "big-m"):
            relaxed = solve_relaxation(problem, options=SolverOptions(formulation=formulation))
            assert relaxed.status == OPTIMAL
            assert relaxed.objective <= milp.objective + 1e-7


def test_relaxation_cardinality_infeasible(rng):
    days = random_days(rng, 4, 5)
    problem = build_instance(days, days, 0.05, 0.75)
    relaxed = solve_relaxation(problem, fixed_y=[0, 0, None, None])
    assert relaxed.status == INFEASIBLE


def test_oracle_enumeration_counts(rng):
    days = random_days(rng, 4, 4)
    assert brute_force_oracle(build_instance(days, days, 0.05, 1.0)).n_assignments == 1
    assert brute_force_oracle(build_instance(days[:2], days, 0.05, 0.5)).n_assignments == 3
    many = random_days(rng, 13, 3)
    with pytest.raises(ValidationError):
        brute_force_oracle(build_instance(many, many, 0.05, 1.0))


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("formulation, branching",
                         [("tight", "pseudocost"), ("big-m", "pseudocost"), ("tight", "most-fractional")])
def test_solve_matches_oracle(seed, formulation, branching):
    rng = np.random.default_rng(seed)
    n, T = int(rng.integers(2, 8)), int(rng.integers(2, 10))
    days = random_days(rng, n, T, atypical={0})
    lam = float(rng.choice([0.5, 0.75, 1.0]))
    theta = float(rng.choice([0.0, 0.05, 0.2]))
    problem = build_instance(days, days, theta, lam)
    sol = solve(problem, SolverOptions(formulation=formulation, branching=branching))
    oracle = brute_force_oracle(problem)
    assert sol.status == oracle.status == OPTIMAL
    assert sol.objective == pytest.approx(oracle.objective, abs=1e-6)


def test_solution_is_certified_and_z_recovered(rng):
    days = random_days(rng, 7, 8, atypical={2, 5})
    problem = build_instance(days, days, 0.03, 0.7)
    sol = solve(problem)
    worst = constraint_violations(problem, sol)
    assert max(worst.values()) <= 1e-6
    p, w, x = problem.forecasts, problem.actuals, sol.coefficients.x
    expected = np.maximum.reduce([np.zeros_like(p), w - p * (1 + x), p * (1 - x) - w])
    for d, regular in enumerate(sol.regular_flags):
        if regular:
            np.testing.assert_allclose(sol.violations[d], expected[d], atol=1e-9)
            assert day_offband(days[d], sol.coefficients) == pytest.approx(sol.violations[d].sum() / 8, abs=1e-9)
        else:
            assert not sol.violations[d].any()


def test_monotone_in_theta_and_lambda(rng):
    days = random_days(rng, 8, 6, atypical={1})
    base = build_instance(days, days, 0.0, 1.0)
    by_theta = [solve(replace(base, theta=t)).objective for t in (0.0, 0.01, 0.05, 0.1, 0.3)]
    assert all(b <= a + 1e-7 for a, b in zip(by_theta, by_theta[1:]))
    by_lambda = [solve(replace(base, theta=0.02, lam=lam)).objective for lam in (0.5, 0.75, 0.875, 1.0)]
    assert all(b >= a - 1e-7 for a, b in zip(by_lambda, by_lambda[1:]))


def test_lp_path_strong_duality(rng):
    days = random_days(rng, 4, 5)
    problem = build_instance(days, days, 0.03, 1.0)
    primal = solve(problem).objective
    assert primal == pytest.approx(dual_lp_objective(problem), abs=1e-6)
    relaxed = solve_relaxation(problem, fixed_y=[1] * 4)
    assert relaxed.dual_objective == pytest.approx(relaxed.objective, abs=1e-6)


def test_infeasible_reports_witness():
    # hours with zero forecast and positive actual cannot be covered by a relative band
    ok = make_day([0.3, 0.3, 0.3], [0.3, 0.3, 0.3], 0)
    hopeless = make_day([0.0, 0.0, 0.0], [0.0, 0.6, 0.6], 1)
    problem = build_instance([ok, hopeless], [ok, hopeless], 0.1, 1.0)
    sol = solve(problem)
    assert sol.status == INFEASIBLE
    assert sol.witness_day == 1
    assert sol.coefficients is None
    assert (1, 1) in sol.zero_forecast_hours
    assert brute_force_oracle(problem).status == INFEASIBLE
    # the same day may simply be discarded once lambda allows it
    relaxed = solve(replace(problem, lam=0.5))
    assert relaxed.status == OPTIMAL
    assert relaxed.regular_flags.tolist() == [1, 0]


def test_x_cap_limits_band_and_can_make_infeasible():
    day = make_day([0.2, 0.2], [0.2, 0.6])
    problem = build_instance([day], [day], 0.0, 1.0)
    assert solve(problem).coefficients.x[1] == pytest.approx(2.0)
    assert solve(problem, SolverOptions(x_cap=1.0)).status == INFEASIBLE
    capped = solve(replace(problem, theta=0.1), SolverOptions(x_cap=1.0))
    assert capped.status == OPTIMAL
    assert capped.coefficients.x.max() <= 1.0 + 1e-12


def test_node_limit_reports_iteration_limit(rng):
    days = random_days(rng, 10, 6, atypical={0, 3, 7})
    problem = build_instance(days, days, 0.01, 0.6)
    full = solve(problem)
    limited = solve(problem, SolverOptions(node_limit=1))
    assert full.status == OPTIMAL
    assert limited.status == ITERATION_LIMIT
    assert limited.best_bound <= full.objective + 1e-7
    if limited.coefficients is not None:
        assert limited.objective >= full.objective - 1e-7


def test_lambda_zero_warns_and_returns_empty_band(rng):
    days = random_days(rng, 3, 4)
    with pytest.warns(UserWarning):
        sol = solve(build_instance(days, days, 0.0, 0.0))
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_solve_is_deterministic(rng):
    days = random_days(rng, 9, 6, atypical={4})
    problem = build_instance(days, days, 0.02, 0.75)
    a, b = solve(problem), solve(problem)
    assert a.regular_flags.tolist() == b.regular_flags.tolist()
    np.testing.assert_array_equal(a.coefficients.x, b.coefficients.x)
    assert a.nodes == b.nodes


def test_zero_mean_hours_get_smallest_x():
    # w_bar_0 = 0 leaves x_0 free in the objective; the tidy-up pass keeps it at zero
    days = [make_day([0.0, 0.5], [0.0, 0.6], 0), make_day([0.0, 0.5], [0.0, 0.4], 1)]
    sol = solve(build_instance(days, days, 0.0, 1.0))
    assert sol.coefficients.x[0] == pytest.approx(0.0, abs=1e-9)
    assert sol.coefficients.x[1] == pytest.approx(0.2, abs=1e-9)
