"""Augmented-Lagrangian solver for the transcribed planning problems.

Method of multipliers over the box constraints: equalities carry explicit
multiplier estimates, inequalities enter through slack-free max(0, .)^2
terms, and each outer iteration minimizes the augmented Lagrangian on the
box with a projected quasi-Newton method (L-BFGS-B).  The penalty grows
only when feasibility stalls, and growth is throttled near convergence so
the multiplier updates, not the penalty, deliver the final digits.

Any problem object exposing lower/upper bounds, n_eq/n_ineq, values(),
weighted_gradient(), flat_start() and perturbed_start() can be solved;
the OLG transcription and the cake-eating oracle both do.
"""

import enum
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

MULTIPLIER_CAP = 1e10
_TRACE = bool(os.environ.get("OLGOPT_SOLVER_TRACE"))


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"
    EVALUATION_ERROR = "EvaluationError"


@dataclass(frozen=True)
class SolveOptions:
    """Tunables for the augmented-Lagrangian loop."""

    max_outer: int = 60
    max_inner: int = 500
    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e8
    eq_tol: float = 1e-8
    stat_tol: float = 1e-6
    multistart: int = 4
    seed: int = 0

    def __post_init__(self):
        positives = (self.max_outer, self.max_inner, self.penalty_init,
                     self.penalty_growth, self.penalty_cap, self.eq_tol,
                     self.stat_tol, self.multistart)
        if any(v <= 0 for v in positives):
            raise ValueError("all SolveOptions magnitudes must be positive")
        if not (self.eq_tol < 1.0 and self.stat_tol < 1.0):
            raise ValueError("tolerances must be below 1")


@dataclass(frozen=True)
class Multipliers:
    eq: np.ndarray
    ineq: np.ndarray


@dataclass
class StartSummary:
    start_index: int
    status: SolveStatus
    objective: float
    feasibility: float


@dataclass
class SolveReport:
    status: SolveStatus
    objective: float
    eq_residual_norm: float
    ineq_violation_norm: float
    proj_grad_norm: float
    complementarity_norm: float
    outer_iterations: int
    inner_iterations: int
    x: Optional[np.ndarray]
    multipliers: Optional[Multipliers]
    trajectory: object = None
    start_index: int = 0
    accepted_feasibility: list = field(default_factory=list)
    penalty_final: float = 0.0
    message: str = ""
    start_summaries: list = field(default_factory=list)

    @property
    def optimal(self):
        return self.status is SolveStatus.OPTIMAL


def _feasibility(eq, ineq):
    worst = float(np.abs(eq).max()) if len(eq) else 0.0
    if len(ineq):
        worst = max(worst, max(0.0, -float(ineq.min())))
    return worst


def _objective_scale(problem, x):
    grad = problem.weighted_gradient(
        x, -1.0, np.zeros(problem.n_eq), np.zeros(problem.n_ineq))
    return max(1.0, float(np.abs(grad).max()))


def _stationarity_scale(problem, x, mult_eq, mult_ineq):
    # dual-infeasibility scaling in the style of interior-point codes:
    # gradients and multipliers set the magnitude stationarity lives on
    scale = _objective_scale(problem, x)
    if len(mult_eq):
        scale = max(scale, float(np.abs(mult_eq).max()))
    if len(mult_ineq):
        scale = max(scale, float(np.abs(mult_ineq).max()))
    return scale


def kkt_residuals(problem, x, multipliers):
    """(stationarity, feasibility, complementarity) infinity norms.

    Stationarity is the projected gradient of the Lagrangian of the
    minimization form (negated welfare) at the given multipliers, scaled by
    the objective-gradient magnitude so the tolerance is meaningful across
    objective scales; complementarity is scaled by the multiplier magnitude
    the same way.  Feasibility is the raw constraint violation.
    """
    swf, eq, ineq = problem.values(x)
    mult_eq = np.asarray(multipliers.eq)
    mult_ineq = np.asarray(multipliers.ineq)
    grad = problem.weighted_gradient(x, -1.0, -mult_eq, -mult_ineq)
    projected = x - np.clip(x - grad, problem.lower, problem.upper)
    scale = _stationarity_scale(problem, x, mult_eq, mult_ineq)
    stationarity = float(np.abs(projected).max()) / scale if len(projected) else 0.0
    feasibility = _feasibility(eq, ineq)
    comp = 0.0
    if len(ineq):
        comp_scale = max(1.0, float(np.abs(mult_ineq).max()))
        comp = float(np.abs(mult_ineq * ineq).max()) / comp_scale
    return stationarity, feasibility, comp


def _reconstruct(problem, report):
    builder = getattr(problem, "trajectory", None)
    if builder is not None and report.x is not None:
        try:
            report.trajectory = builder(report.x)
        except Exception as exc:  # reconstruction is best-effort diagnostics
            report.message += f" (trajectory reconstruction failed: {exc})"
    return report


def solve_from(problem, options, x0, start_index=0, multipliers0=None):
    """One augmented-Lagrangian run from a specific start point.

    Multipliers absorb the penalty estimate whenever the subproblem solve
    made feasibility progress; otherwise the penalty grows.  Near the
    feasibility tolerance penalty growth is throttled, and once only
    stationarity is missing the penalty is reduced again to recondition
    the subproblem for the final certificate.
    """
    lb, ub = problem.lower, problem.upper
    x = np.clip(np.asarray(x0, dtype=float), lb, ub)
    n_eq, n_ineq = problem.n_eq, problem.n_ineq
    if multipliers0 is not None:
        lam = np.asarray(multipliers0.eq, dtype=float).copy()
        mu = np.asarray(multipliers0.ineq, dtype=float).copy()
    else:
        lam = np.zeros(n_eq)
        mu = np.zeros(n_ineq)
    rho = options.penalty_init
    eq_tol, stat_tol = options.eq_tol, options.stat_tol
    gtol_floor = 0.25 * stat_tol
    omega = 1e-2
    bounds = list(zip(lb, np.where(np.isinf(ub), np.inf, ub)))

    try:
        swf, eq, ineq = problem.values(x)
    except Exception as exc:
        return SolveReport(SolveStatus.EVALUATION_ERROR, np.nan, np.inf,
                           np.inf, np.inf, np.inf, 0, 0, None, None,
                           start_index=start_index,
                           message=f"initial evaluation failed: {exc}")
    feas = _feasibility(eq, ineq)
    feas_accepted = feas
    x_accepted = x.copy()
    x_initial = x.copy()
    dead_streak = 0
    accepted = []
    inner_total = 0
    status = SolveStatus.ITERATION_LIMIT
    message = "outer iteration limit reached"
    cap_stalls = 0
    polish_stalls = 0
    truncation_streak = 0
    rho_floor = options.penalty_init  # raised past any observed blow-up level
    cert_floor = options.penalty_init  # same, for the near-solution phase
    outer = 0
    pg = np.inf
    comp = np.inf
    lam_eff, mu_eff = lam, mu

    for outer in range(1, options.max_outer + 1):
        def al_value_grad(xx, lam=lam, mu=mu, rho=rho):
            swf_i, eq_i, in_i = problem.values(xx)
            act = np.maximum(0.0, mu - rho * in_i)
            value = (-swf_i - float(lam @ eq_i) + 0.5 * rho * float(eq_i @ eq_i)
                     + (float(act @ act) - float(mu @ mu)) / (2.0 * rho))
            grad = problem.weighted_gradient(xx, -1.0, -(lam - rho * eq_i), -act)
            # keep line searches functional near degenerate box corners
            return value, np.clip(grad, -1e12, 1e12)

        try:
            x_round = x
            for _ in range(4):
                res = _scipy_minimize(
                    al_value_grad, x_round, jac=True, method="L-BFGS-B",
                    bounds=bounds,
                    options=dict(maxiter=options.max_inner,
                                 maxfun=4 * options.max_inner,
                                 ftol=1e-18, gtol=max(gtol_floor, omega),
                                 maxcor=30))
                inner_total += int(res.nit)
                x_round = res.x
                if res.status != 1:  # solved or stalled, not budget-bound
                    break
        except Exception as exc:
            return SolveReport(SolveStatus.EVALUATION_ERROR, np.nan, feas,
                               feas, np.inf, np.inf, outer, inner_total,
                               x, Multipliers(lam, mu),
                               start_index=start_index,
                               message=f"inner solve failed: {exc}")
        x_new = np.clip(res.x, lb, ub)
        swf, eq, ineq = problem.values(x_new)
        feas_new = _feasibility(eq, ineq)
        truncated = res.status == 1  # still budget-bound after all rounds
        # astronomical gradients mark the degenerate corner region where
        # line searches die; never treat such points as revert targets
        grad_sane = float(np.abs(res.jac).max()) < 1e10
        if _TRACE:
            print(f"    outer {outer}: swf={swf:.8f} feas={feas_new:.2e}"
                  f" rho={rho:.1e} cf={cert_floor:.0e} omega={omega:.1e}"
                  f" inner={res.nit} st={res.status}"
                  f"{' (trunc)' if truncated else ''}")

        # inner wandered off: revert to the last accepted point and raise
        # the penalty; only a severe divergence (toward the unbounded
        # corner) hardens the penalty floors
        blown_up = feas_new > 10.0 * max(feas_accepted, 1e-3)
        dead_inner = res.nit == 0 and feas_new > 1e-3
        if blown_up or dead_inner:
            severe = feas_new > 1.0 or dead_inner
            growth = (options.penalty_growth if severe
                      else np.sqrt(options.penalty_growth))
            rho = min(rho * growth, options.penalty_cap)
            if severe:
                rho_floor = max(rho_floor, rho)
                if feas_accepted <= 1e-3:
                    cert_floor = max(cert_floor, rho)
            omega = max(gtol_floor, omega * 0.5)
            if rho >= options.penalty_cap:
                cap_stalls += 1
                if cap_stalls > 3:
                    status = SolveStatus.INFEASIBLE
                    message = ("penalty at cap with diverging feasibility"
                               f" {feas_new:.3e}")
                    break
            if dead_inner:
                # the accepted point may itself sit in the degenerate zone;
                # fall back to the start point on repeated failures
                dead_streak += 1
                x = x_accepted.copy() if dead_streak < 2 else x_initial.copy()
            else:
                x = x_accepted.copy()
            continue
        if res.nit > 0:
            dead_streak = 0

        x = x_new
        lam_eff = np.clip(lam - rho * eq, -MULTIPLIER_CAP, MULTIPLIER_CAP)
        mu_eff = np.clip(np.maximum(0.0, mu - rho * ineq), 0.0, MULTIPLIER_CAP)
        grad_l = problem.weighted_gradient(x, -1.0, -lam_eff, -mu_eff)
        scale = _stationarity_scale(problem, x, lam_eff, mu_eff)
        pg = float(np.abs(x - np.clip(x - grad_l, lb, ub)).max()) / scale
        comp = 0.0
        if n_ineq:
            comp = (float(np.abs(mu_eff * ineq).max())
                    / max(1.0, float(np.abs(mu_eff).max())))
        if _TRACE:
            print(f"      -> pg={pg:.2e} ps={polish_stalls}")

        improved = feas_new <= feas_accepted * 1.005 or not accepted

        if feas_new <= eq_tol and pg <= stat_tol:
            lam, mu = lam_eff, mu_eff
            if improved:
                accepted.append(feas_new)
            status = SolveStatus.OPTIMAL
            message = "converged"
            break

        if truncated and feas_new <= 1e-2:
            # still budget-bound close in: the unsolved subproblem says
            # nothing about the penalty; absorb multipliers when they
            # helped, eventually easing the penalty to recondition
            truncation_streak += 1
            if feas_new <= 0.9 * feas_accepted or feas_new <= 30.0 * eq_tol:
                lam, mu = lam_eff, mu_eff
            if truncation_streak >= 3 and feas_new <= max(100.0 * eq_tol, 1e-5):
                rho = max(rho / options.penalty_growth, cert_floor)
                truncation_streak = 0
            if improved:
                accepted.append(feas_new)
                feas_accepted = min(feas_accepted, feas_new)
                if grad_sane:
                    x_accepted = x.copy()
            feas = feas_new
            continue
        truncation_streak = 0

        if feas_new <= max(0.5 * feas_accepted, 30.0 * eq_tol):
            # solved subproblem with enough progress: multiplier step only
            lam, mu = lam_eff, mu_eff
            if improved:
                accepted.append(feas_new)
                feas_accepted = min(feas_accepted, feas_new)
                if grad_sane:
                    x_accepted = x.copy()
            omega = max(gtol_floor, omega * 0.1)
            if feas_new <= eq_tol:
                # only stationarity missing: recondition by lowering rho
                # (safe here: multipliers are near-exact and blow-ups revert)
                polish_stalls += 1
                if polish_stalls >= 2:
                    rho = max(rho / options.penalty_growth, cert_floor)
                    polish_stalls = 0
            elif feas_new <= 30.0 * eq_tol and feas_new > 0.9 * feas:
                rho = min(rho * np.sqrt(options.penalty_growth),
                          options.penalty_cap)
        else:
            # solved subproblem, weak progress: the penalty is too small
            lam, mu = lam_eff, mu_eff
            rho = min(rho * options.penalty_growth, options.penalty_cap)
            omega = max(gtol_floor, omega * 0.5)
            if improved:
                accepted.append(feas_new)
                feas_accepted = min(feas_accepted, feas_new)
                if grad_sane:
                    x_accepted = x.copy()
            if rho >= options.penalty_cap:
                cap_stalls += 1
                if cap_stalls > 5 and feas_new > 1e3 * eq_tol:
                    status = SolveStatus.INFEASIBLE
                    message = (f"penalty at cap, feasibility stalled at"
                               f" {feas_new:.3e}")
                    break
        feas = feas_new

    swf, eq, ineq = problem.values(x)
    report = SolveReport(
        status=status, objective=float(swf),
        eq_residual_norm=float(np.abs(eq).max()) if n_eq else 0.0,
        ineq_violation_norm=max(0.0, -float(ineq.min())) if n_ineq else 0.0,
        proj_grad_norm=pg, complementarity_norm=comp,
        outer_iterations=outer, inner_iterations=inner_total,
        x=x, multipliers=Multipliers(lam_eff, mu_eff),
        start_index=start_index, accepted_feasibility=accepted,
        penalty_final=rho, message=message)
    return _reconstruct(problem, report)


def _run_start(item):
    problem, options, index, x0 = item
    return solve_from(problem, options, x0, start_index=index)


def multistart(problem, options, pool=None):
    """Best of a Flat start plus seeded log-uniform perturbations.

    Starts are generated up-front from the seed and the merge only looks at
    sorted reports, so results do not depend on execution order; ties prefer
    lower feasibility then lower start index.
    """
    if options.multistart < 1:
        raise ValueError("multistart count must be at least 1")
    x_flat = problem.flat_start()
    rng = np.random.default_rng(options.seed)
    starts = [x_flat]
    for _ in range(options.multistart - 1):
        starts.append(problem.perturbed_start(x_flat, rng))

    items = [(problem, options, index, x0) for index, x0 in enumerate(starts)]
    if pool is None:
        reports = [_run_start(item) for item in items]
    else:
        reports = list(pool.map(_run_start, items))
    reports.sort(key=lambda r: r.start_index)

    summaries = [StartSummary(r.start_index, r.status, r.objective,
                              max(r.eq_residual_norm, r.ineq_violation_norm))
                 for r in reports]
    winners = [r for r in reports if r.optimal]
    if winners:
        best = max(winners, key=lambda r: (
            r.objective,
            -max(r.eq_residual_norm, r.ineq_violation_norm),
            -r.start_index))
    else:
        best = min(reports, key=lambda r: (
            max(r.eq_residual_norm, r.ineq_violation_norm), r.start_index))
    best.start_summaries = summaries
    return best


def solve(problem, options=None, x0=None, multipliers0=None, pool=None):
    """Solve a transcribed problem.

    Without an explicit start this runs the seeded multistart and returns
    the best report; with x0 it is a single run from that point (used for
    warm starts along a horizon sweep).
    """
    options = options or SolveOptions()
    if x0 is not None:
        return solve_from(problem, options, x0, multipliers0=multipliers0)
    return multistart(problem, options, pool=pool)
