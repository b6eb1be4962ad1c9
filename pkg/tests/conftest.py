import datetime as dt

import numpy as np
import pytest

from windbands.core import DayRecord

ACCEPTANCE_LINES = []


def make_day(forecast, actual, day=0, check_start=False):
    return DayRecord(dt.date(2016, 1, 1) + dt.timedelta(days=day), forecast, actual, check_start=check_start)


def random_days(rng, n, T, noise=0.2, atypical=()):
    """Assimilated random days; indices in ``atypical`` get much larger errors."""
    days = []
    for i in range(n):
        w = rng.uniform(0.0, 1.0, T)
        scale = noise * (3.0 if i in atypical else 1.0)
        p = np.clip(w + rng.normal(0.0, scale, T), 0.01, 1.0)
        p[0] = w[0]
        days.append(make_day(p, w, day=i, check_start=True))
    return days


@pytest.fixture
def rng():
    return np.random.default_rng(20160405)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def constraint_violations(problem, solution):
    """Largest violation of each model constraint, computed from the solution fields."""
    p = problem.forecasts
    a = np.abs(problem.actuals - p)
    x = solution.coefficients.x
    y = np.asarray(solution.regular_flags, dtype=float)
    z = solution.violations
    T = problem.horizon
    lhs_i = p * x[None, :] - y[:, None] + z
    worst_i = float(np.max((a - 1.0) - lhs_i))
    worst_ii = float(np.max(z.sum(axis=1) - T * (problem.theta + 1.0 - y)))
    worst_iii = float(np.ceil(problem.lam * problem.n_days - 1e-9) - y.sum())
    worst_bounds = float(max(-x.min(), -z.min(), z.max() - 1.0))
    return {"i": worst_i, "ii": worst_ii, "iii": worst_iii, "bounds": worst_bounds}


def dual_lp_objective(problem):
    """Optimal value of the explicit dual of the all-regular LP.

    Primal: min w_bar.x  s.t. p_dt x_t + z_dt >= a_dt, sum_t z_dt <= T theta,
    x >= 0, 0 <= z <= 1. Dual variables u_dt >= 0 (cover rows), v_d >= 0
    (budget rows), s_dt >= 0 (z <= 1):
    max sum u a - T theta sum v - sum s  s.t.  sum_d u_dt p_dt <= w_bar_t,
    u_dt - v_d - s_dt <= 0.
    """
    from scipy.optimize import linprog

    n, T = problem.n_days, problem.horizon
    p = problem.forecasts
    a = np.abs(problem.actuals - p)
    nu, nv, ns = n * T, n, n * T
    c = np.concatenate([-a.ravel(), np.full(nv, T * problem.theta), np.ones(ns)])
    rows, rhs = [], []
    for t in range(T):
        row = np.zeros(nu + nv + ns)
        for d in range(n):
            row[d * T + t] = p[d, t]
        rows.append(row)
        rhs.append(problem.mean_profile.w_bar[t])
    for d in range(n):
        for t in range(T):
            row = np.zeros(nu + nv + ns)
            row[d * T + t] = 1.0
            row[nu + d] = -1.0
            row[nu + nv + d * T + t] = -1.0
            rows.append(row)
            rhs.append(0.0)
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return -res.fun
