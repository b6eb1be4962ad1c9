"""Minimal-width relative band training.

The model chooses per-hour half-widths ``x`` and per-day regular flags ``y``::

    min  sum_t w_bar_t * x_t
    s.t. p_dt * x_t - y_d + z_dt >= |w_dt - p_dt| - 1      for all d, t   (i)
         sum_t z_dt <= T * (theta + 1 - y_d)               for all d      (ii)
         sum_d y_d >= ceil(lambda * |D|)                                  (iii)
         y_d in {0, 1},  x_t >= 0,  0 <= z_dt <= 1

With ``lambda == 1`` every ``y_d`` is fixed to one and the model is a plain
LP. Otherwise it is solved by best-bound-first branch-and-bound over ``y``
using LP relaxations from HiGHS (``scipy.optimize.linprog``).

Two relaxation formulations are available. ``"big-m"`` is the model above
verbatim. ``"tight"`` (default) replaces the unit big-M terms by their
smallest valid values::

    p_dt * x_t + z_dt >= |w_dt - p_dt| * y_d                              (i')
    sum_t z_dt <= T * theta * y_d                                         (ii')

Both have the same integer feasible set in ``(x, y)`` and the same optimum;
the tight one gives much stronger bounds when ``y`` is fractional.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .core import (
    BandCoefficients,
    DayRecord,
    MeanProfile,
    ValidationError,
    DimensionError,
    check_horizons,
)

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"

ORACLE_MAX_DAYS = 12
_INT_TOL = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-6
    node_limit: int = 10_000
    time_limit: float | None = None
    x_cap: float | None = None
    formulation: str = "tight"
    heuristic_every: int = 10
    branching: str = "pseudocost"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.node_limit < 1:
            raise ValidationError("node_limit must be >= 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValidationError("time_limit must be positive")
        if self.x_cap is not None and self.x_cap < 0:
            raise ValidationError("x_cap must be >= 0")
        if self.formulation not in ("tight", "big-m"):
            raise ValidationError(f"unknown formulation {self.formulation!r}")
        if self.branching not in ("most-fractional", "pseudocost"):
            raise ValidationError(f"unknown branching rule {self.branching!r}")


@dataclass(frozen=True)
class BandProblem:
    days: tuple[DayRecord, ...]
    mean_profile: MeanProfile
    theta: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        if not self.days:
            raise ValidationError("problem needs at least one training day")
        check_horizons(self.days, self.mean_profile.horizon)
        for name in ("theta", "lam"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    @property
    def horizon(self) -> int:
        return self.mean_profile.horizon

    @property
    def n_days(self) -> int:
        return len(self.days)

    @property
    def min_regular(self) -> int:
        """Constraint (iii) as an integer day count."""
        return min(self.n_days, math.ceil(self.lam * self.n_days - 1e-9))

    @property
    def forecasts(self) -> np.ndarray:
        return np.array([d.forecast for d in self.days])

    @property
    def actuals(self) -> np.ndarray:
        return np.array([d.actual for d in self.days])


@dataclass
class LPSolution:
    status: str
    objective: float = math.inf
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    dual_objective: float | None = None


@dataclass
class BandSolution:
    coefficients: BandCoefficients | None
    regular_flags: np.ndarray
    violations: np.ndarray
    objective: float
    status: str
    solve_seconds: float
    best_bound: float = math.nan
    nodes: int = 0
    witness_day: int | None = None
    zero_forecast_hours: list[tuple[int, int]] = field(default_factory=list)
    n_assignments: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def atypical_days(self) -> list[int]:
        return [i for i, flag in enumerate(self.regular_flags) if not flag]


def build_instance(days, mean_source, theta: float, lam: float) -> BandProblem:
    """Materialize a band problem.

    ``mean_source`` is either a collection of days, whose actuals are averaged
    hour by hour into the objective weights, or a ready ``MeanProfile``. It may
    differ from the training set.
    """
    days = tuple(days)
    if not days:
        raise ValidationError("empty training set")
    horizon = check_horizons(days)
    if isinstance(mean_source, MeanProfile):
        profile = mean_source
    else:
        profile = MeanProfile.from_days(mean_source)
    if profile.horizon != horizon:
        raise DimensionError(f"mean profile horizon {profile.horizon} != data horizon {horizon}")
    return BandProblem(days, profile, theta, lam)


def irreducible_offband(problem: BandProblem, x_cap: float | None = None) -> np.ndarray:
    """Per-day off-band energy left at the widest admissible band."""
    p = problem.forecasts
    a = np.abs(problem.actuals - p)
    if x_cap is None:
        residual = np.where(p <= 0.0, a, 0.0)
    else:
        residual = np.maximum(a - p * x_cap, 0.0)
    return residual.sum(axis=1) / problem.horizon


def _feasibility_precheck(problem, options) -> tuple[np.ndarray, int | None]:
    """Days that can be regular at all, and a witness if too few can."""
    slack = options.tolerance
    irreducible = irreducible_offband(problem, options.x_cap)
    can_be_regular = irreducible <= problem.theta + slack
    witness = None
    if can_be_regular.sum() < problem.min_regular:
        witness = int(np.argmax(irreducible))
    return can_be_regular, witness


def recover_violations(problem: BandProblem, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Smallest feasible z for given (x, y); zero rows for atypical days."""
    p = problem.forecasts
    a = np.abs(problem.actuals - p)
    z = np.maximum(a - p * x[None, :], 0.0)
    z[np.asarray(y) < 0.5] = 0.0
    return z


class _RelaxationModel:
    """Constraint matrices for one problem; nodes only change ``y`` bounds."""

    def __init__(self, problem: BandProblem, options: SolverOptions):
        self.problem = problem
        self.options = options
        n, T = problem.n_days, problem.horizon
        self.n, self.T = n, T
        self.n_vars = T + n + n * T
        p = problem.forecasts
        a = np.abs(problem.actuals - p)

        rows_i = np.arange(n * T)
        d_idx = np.repeat(np.arange(n), T)
        t_idx = np.tile(np.arange(T), n)
        x_col, y_col, z_col = t_idx, T + d_idx, T + n + rows_i

        tight = options.formulation == "tight"
        y_coef_i = a.ravel() if tight else np.ones(n * T)
        block_i = sparse.coo_matrix(
            (
                np.concatenate([-p.ravel(), y_coef_i, -np.ones(n * T)]),
                (np.tile(rows_i, 3), np.concatenate([x_col, y_col, z_col])),
            ),
            shape=(n * T, self.n_vars),
        )
        rhs_i = np.zeros(n * T) if tight else 1.0 - a.ravel()

        y_coef_ii = -T * problem.theta if tight else float(T)
        block_ii = sparse.coo_matrix(
            (
                np.concatenate([np.ones(n * T), np.full(n, y_coef_ii)]),
                (np.concatenate([d_idx, np.arange(n)]), np.concatenate([z_col, T + np.arange(n)])),
            ),
            shape=(n, self.n_vars),
        )
        rhs_ii = np.zeros(n) if tight else np.full(n, T * (problem.theta + 1.0))

        block_iii = sparse.coo_matrix(
            (-np.ones(n), (np.zeros(n, dtype=int), T + np.arange(n))), shape=(1, self.n_vars)
        )
        rhs_iii = np.array([-float(problem.min_regular)])

        self.A_ub = sparse.vstack([block_i, block_ii, block_iii]).tocsr()
        self.b_ub = np.concatenate([rhs_i, rhs_ii, rhs_iii])
        self.c = np.concatenate([problem.mean_profile.w_bar, np.zeros(n + n * T)])
        x_hi = np.inf if options.x_cap is None else options.x_cap
        self.lower = np.zeros(self.n_vars)
        self.upper = np.concatenate([np.full(T, x_hi), np.ones(n), np.ones(n * T)])

    def solve(self, fixed_y=None) -> LPSolution:
        lower = self.lower.copy()
        upper = self.upper.copy()
        if fixed_y is not None:
            for d, value in enumerate(fixed_y):
                if value is None or value < 0:
                    continue
                lower[self.T + d] = upper[self.T + d] = float(value)
            if upper[self.T:self.T + self.n].sum() < self.problem.min_regular - 1e-9:
                return LPSolution(INFEASIBLE)
        upper_arg = np.where(np.isinf(upper), None, upper)
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            bounds=list(zip(lower, upper_arg)),
            method="highs",
        )
        if res.status == 2:
            return LPSolution(INFEASIBLE)
        if res.status != 0:
            raise RuntimeError(f"LP solver failed: {res.message}")
        T, n = self.T, self.n
        sol = res.x
        dual = float(self.b_ub @ res.ineqlin.marginals)
        dual += float(lower @ res.lower.marginals)
        finite = np.isfinite(upper)
        dual += float(upper[finite] @ res.upper.marginals[finite])
        return LPSolution(
            OPTIMAL,
            objective=float(res.fun),
            x=np.clip(sol[:T], 0.0, None),
            y=np.clip(sol[T:T + n], 0.0, 1.0),
            z=sol[T + n:].reshape(n, T),
            dual_objective=dual,
        )


def solve_relaxation(problem: BandProblem, fixed_y=None, options: SolverOptions | None = None) -> LPSolution:
    """LP relaxation with unfixed ``y`` free in ``[0, 1]``.

    ``fixed_y`` is a sequence with 0/1 for fixed days and ``None`` (or -1)
    for free ones. An infeasible node returns ``status == "infeasible"``.
    """
    options = options or SolverOptions()
    return _RelaxationModel(problem, options).solve(fixed_y)


def _minimize_unweighted_x(problem, options, y, objective):
    """Among optimal x for fixed y, pick the smallest; only matters where w_bar is 0."""
    regular = [d for d, flag in zip(problem.days, y) if flag]
    if not regular:
        return np.zeros(problem.horizon)
    T = problem.horizon
    sub = BandProblem(regular, problem.mean_profile, problem.theta, 1.0)
    model = _RelaxationModel(sub, options)
    budget = sparse.csr_matrix(model.c.reshape(1, -1))
    lower = model.lower.copy()
    lower[T:T + model.n] = 1.0
    res = linprog(
        np.concatenate([np.ones(T), np.zeros(model.n_vars - T)]),
        A_ub=sparse.vstack([model.A_ub, budget]),
        b_ub=np.concatenate([model.b_ub, [objective + options.tolerance * max(1.0, abs(objective))]]),
        bounds=list(zip(lower, np.where(np.isinf(model.upper), None, model.upper))),
        method="highs",
    )
    if res.status != 0:
        return None
    return np.clip(res.x[:T], 0.0, None)


def _finalize(problem, options, lp: LPSolution, y, status, started, **extra) -> BandSolution:
    y = np.asarray(y, dtype=int)
    x = lp.x
    objective = float(problem.mean_profile.w_bar @ x)
    if np.any(problem.mean_profile.w_bar <= 0.0):
        tidy = _minimize_unweighted_x(problem, options, y, objective)
        if tidy is not None:
            x = tidy
    if options.x_cap is not None:
        x = np.minimum(x, options.x_cap)
    coeffs = BandCoefficients(x, problem.theta, problem.lam)
    return BandSolution(
        coefficients=coeffs,
        regular_flags=y,
        violations=recover_violations(problem, x, y),
        objective=float(problem.mean_profile.w_bar @ x),
        status=status,
        solve_seconds=time.perf_counter() - started,
        zero_forecast_hours=_zero_forecast_hours(problem),
        **extra,
    )


def _zero_forecast_hours(problem) -> list[tuple[int, int]]:
    p = problem.forecasts
    w = problem.actuals
    d_idx, t_idx = np.nonzero((p <= 0.0) & (w > 0.0))
    return list(zip(d_idx.tolist(), t_idx.tolist()))


def _infeasible(problem, witness, started, **extra) -> BandSolution:
    n, T = problem.n_days, problem.horizon
    return BandSolution(
        coefficients=None,
        regular_flags=np.zeros(n, dtype=int),
        violations=np.zeros((n, T)),
        objective=math.inf,
        status=INFEASIBLE,
        solve_seconds=time.perf_counter() - started,
        witness_day=witness,
        zero_forecast_hours=_zero_forecast_hours(problem),
        **extra,
    )


def _round_top(y_relaxed, fixed, k) -> list[int]:
    """Pick k regular days: fixed ones first, then largest relaxed y, lowest index on ties."""
    n = len(fixed)
    chosen = [d for d in range(n) if fixed[d] == 1]
    free = [d for d in range(n) if fixed[d] < 0]
    free.sort(key=lambda d: (-y_relaxed[d], d))
    chosen += free[: max(0, k - len(chosen))]
    y = [0] * n
    for d in chosen:
        y[d] = 1
    return y


class _Pseudocosts:
    """Average objective gain per unit of y moved, per day and direction."""

    def __init__(self, n):
        self.sums = np.zeros((2, n))
        self.counts = np.zeros((2, n))

    def record(self, day, value, distance, gain):
        if distance > _INT_TOL:
            self.sums[value, day] += max(gain, 0.0) / distance
            self.counts[value, day] += 1

    def _estimate(self, value):
        known = self.counts[value] > 0
        fallback = self.sums[value][known].sum() / self.counts[value][known].sum() if known.any() else 1.0
        return np.where(known, self.sums[value] / np.maximum(self.counts[value], 1), fallback)

    def select(self, y, frac):
        down = np.maximum(y * self._estimate(0), 1e-6)
        up = np.maximum((1.0 - y) * self._estimate(1), 1e-6)
        score = np.where(frac > _INT_TOL, down * up, -1.0)
        return int(np.argmax(score))


def solve(problem: BandProblem, options: SolverOptions | None = None) -> BandSolution:
    """Solve the band problem to optimality, or stop at a node/time budget.

    Returns status ``"optimal"``, ``"infeasible"`` (with ``witness_day``) or
    ``"iteration-limit"`` (best incumbent, if any, plus ``best_bound``).
    """
    options = options or SolverOptions()
    started = time.perf_counter()
    n, k = problem.n_days, problem.min_regular
    if k == 0:
        warnings.warn("lambda allows discarding every day; the trivial band x = 0 is optimal")

    can_be_regular, witness = _feasibility_precheck(problem, options)
    if witness is not None:
        return _infeasible(problem, witness, started)

    model = _RelaxationModel(problem, options)
    # days that cannot be regular at any x are forced atypical
    base_fix = [-1 if ok else 0 for ok in can_be_regular]

    if k == n:
        lp = model.solve([1] * n)
        if lp.status != OPTIMAL:
            witness = int(np.argmax(irreducible_offband(problem, options.x_cap)))
            return _infeasible(problem, witness, started)
        return _finalize(problem, options, lp, [1] * n, OPTIMAL, started,
                         best_bound=lp.objective, nodes=1)

    tol = options.tolerance
    incumbent: tuple[float, LPSolution, list[int]] | None = None

    def gap_closed(bound: float) -> bool:
        if incumbent is None:
            return False
        return bound >= incumbent[0] - tol * max(1.0, abs(incumbent[0]))

    def try_assignment(y):
        nonlocal incumbent
        lp = model.solve(y)
        if lp.status == OPTIMAL and (incumbent is None or lp.objective < incumbent[0] - 1e-12):
            incumbent = (lp.objective, lp, list(y))

    pseudo = _Pseudocosts(n) if options.branching == "pseudocost" else None
    counter = itertools.count()
    heap = [(-math.inf, next(counter), tuple(base_fix), None)]
    nodes = 0
    status = OPTIMAL
    best_bound = -math.inf
    while heap:
        if nodes >= options.node_limit or (
            options.time_limit is not None and time.perf_counter() - started > options.time_limit
        ):
            status = ITERATION_LIMIT
            break
        bound, _, fixed, origin = heapq.heappop(heap)
        if gap_closed(bound):
            continue
        nodes += 1
        lp = model.solve(fixed)
        if pseudo is not None and origin is not None and lp.status == OPTIMAL:
            pseudo.record(*origin, lp.objective - bound)
        if lp.status != OPTIMAL or gap_closed(lp.objective):
            continue
        y = lp.y
        frac = np.minimum(y, 1.0 - y)
        frac[np.array(fixed) >= 0] = 0.0
        if frac.max() <= _INT_TOL:
            try_assignment([int(round(v)) for v in y])
            continue
        if nodes == 1 or nodes % options.heuristic_every == 0:
            try_assignment(_round_top(y, fixed, k))
        if pseudo is None:
            branch_on = int(np.argmax(frac))  # argmax returns the lowest index on ties
        else:
            branch_on = pseudo.select(y, frac)
        for value in (1, 0):
            child = list(fixed)
            child[branch_on] = value
            if value == 1 and not can_be_regular[branch_on]:
                continue
            distance = 1.0 - y[branch_on] if value == 1 else y[branch_on]
            origin = (branch_on, value, distance)
            heapq.heappush(heap, (lp.objective, next(counter), tuple(child), origin))

    if status == OPTIMAL:
        best_bound = incumbent[0] if incumbent else math.inf
    else:
        open_bounds = [entry[0] for entry in heap]
        best_bound = min(open_bounds) if open_bounds else (incumbent[0] if incumbent else math.inf)
        if incumbent is not None:
            best_bound = min(best_bound, incumbent[0])
    if incumbent is None:
        if status == OPTIMAL:
            return _infeasible(problem, int(np.argmax(irreducible_offband(problem, options.x_cap))),
                               started, nodes=nodes)
        return BandSolution(
            coefficients=None,
            regular_flags=np.zeros(n, dtype=int),
            violations=np.zeros((n, problem.horizon)),
            objective=math.inf,
            status=status,
            solve_seconds=time.perf_counter() - started,
            best_bound=best_bound,
            nodes=nodes,
        )
    log.debug("branch-and-bound finished: %s after %d nodes", status, nodes)
    return _finalize(problem, options, incumbent[1], incumbent[2], status, started,
                     best_bound=best_bound, nodes=nodes)


def _fixed_assignment_lp(problem: BandProblem, y, x_cap):
    """Independent LP for a fixed regular set: min w_bar.x s.t. every regular day within theta."""
    T = problem.horizon
    regular = [d for d, flag in zip(problem.days, y) if flag]
    m = len(regular)
    c = np.concatenate([problem.mean_profile.w_bar, np.zeros(m * T)])
    if m == 0:
        return 0.0, np.zeros(T)
    p = np.array([d.forecast for d in regular])
    a = np.abs(np.array([d.actual for d in regular]) - p)
    # p x_t + z_dt >= a_dt  ->  -p x_t - z_dt <= -a_dt
    A = np.zeros((m * T + m, T + m * T))
    b = np.zeros(m * T + m)
    for d in range(m):
        for t in range(T):
            row = d * T + t
            A[row, t] = -p[d, t]
            A[row, T + row] = -1.0
            b[row] = -a[d, t]
        A[m * T + d, T + d * T:T + (d + 1) * T] = 1.0
        b[m * T + d] = T * problem.theta
    bounds = [(0, x_cap)] * T + [(0, 1)] * (m * T)
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        return None, None
    return float(res.fun), np.clip(res.x[:T], 0.0, None)


def brute_force_oracle(problem: BandProblem, options: SolverOptions | None = None) -> BandSolution:
    """Enumerate every admissible regular set and solve one LP per set.

    Refuses problems with more than 12 days.
    """
    options = options or SolverOptions()
    n, k = problem.n_days, problem.min_regular
    if n > ORACLE_MAX_DAYS:
        raise ValidationError(f"oracle enumeration refused for {n} > {ORACLE_MAX_DAYS} days")
    started = time.perf_counter()
    best = None
    count = 0
    for y in itertools.product((1, 0), repeat=n):
        if sum(y) < k:
            continue
        count += 1
        objective, x = _fixed_assignment_lp(problem, y, options.x_cap)
        if objective is not None and (best is None or objective < best[0] - 1e-12):
            best = (objective, x, y)
    if best is None:
        witness = int(np.argmax(irreducible_offband(problem, options.x_cap)))
        return _infeasible(problem, witness, started, n_assignments=count)
    objective, x, y = best
    y = np.array(y, dtype=int)
    return BandSolution(
        coefficients=BandCoefficients(x, problem.theta, problem.lam),
        regular_flags=y,
        violations=recover_violations(problem, x, y),
        objective=objective,
        status=OPTIMAL,
        solve_seconds=time.perf_counter() - started,
        best_bound=objective,
        zero_forecast_hours=_zero_forecast_hours(problem),
        n_assignments=count,
    )
