"""Transcription of the fixed-horizon planning problem into a smooth NLP.

Decision vector: N_2..N_T, k_2..k_T, plus one epigraph variable u_min for
the maximin objective.  The stock variables (G, H, A, R) are closed-form in
the population schedule and are recomputed inside every evaluation rather
than carried as decision variables.

Equalities: capital-transition residuals for t = 1..T-1 and the terminal
depletion residual R_T - theta H_T N_T.  Inequalities (all >= 0): u_t - mu,
the growth slacks (1 + omega) N_t - N_{t+1}, and u_t - u_min under maximin.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError
from .model import (K_LOWER, K_UPPER, ScenarioParams, Trajectory,
                    productivity_growth, solve_k_next,
                    trajectory_from_schedule)

FD_STEP = 1e-6
ANALYTIC_CHECK_TOL = 1e-4
ANALYTIC_CHECK_COORDS = 24


class Objective(enum.Enum):
    UTILITARIAN = "utilitarian"
    MAXIMIN = "maximin"


@dataclass
class InitialGuess:
    x: np.ndarray
    flat_fallback: bool = False


class NlpProblem:
    """Smooth NLP for one (params, T, objective) triple.

    Built via :func:`build_problem`.  Evaluators are pure; the instance is
    immutable after construction and safe to share across threads.
    """

    def __init__(self, params: ScenarioParams, T: int, objective: Objective,
                 derivatives: str = "fd"):
        if T < 2:
            raise DomainError(f"horizon must be at least 2, got {T}")
        if derivatives not in ("fd", "analytic"):
            raise DomainError(f"unknown derivatives mode {derivatives!r}")
        self.params = params
        self.T = T
        self.objective = objective
        self.derivatives = derivatives
        self.maximin = objective is Objective.MAXIMIN
        self._par = _kernels.pack_params(params)

        self.n_var = 2 * (T - 1) + (1 if self.maximin else 0)
        self.n_eq = T
        self.n_ineq = T + (T - 1) + (T if self.maximin else 0)

        n_max = params.max_population
        lower = [np.full(T - 1, params.lambda_pop), np.full(T - 1, K_LOWER)]
        upper = [np.full(T - 1, n_max), np.full(T - 1, K_UPPER)]
        if self.maximin:
            lower.append([params.mu])
            upper.append([np.inf])
        self.lower = np.concatenate(lower)
        self.upper = np.concatenate(upper)

        if derivatives == "analytic":
            self._check_analytic()

    # ---- layout ---------------------------------------------------------

    def split(self, x):
        """Decision vector -> full (N, k) schedules and u_min (or None)."""
        T = self.T
        x = np.asarray(x, dtype=float)
        N = np.empty(T)
        k = np.empty(T)
        N[0] = self.params.N1
        k[0] = self.params.k1
        N[1:] = x[:T - 1]
        k[1:] = x[T - 1:2 * (T - 1)]
        u_min = float(x[-1]) if self.maximin else None
        return N, k, u_min

    def join(self, N, k, u_min=None):
        """Full schedules -> decision vector (drops the fixed entries)."""
        parts = [np.asarray(N, dtype=float)[1:], np.asarray(k, dtype=float)[1:]]
        if self.maximin:
            parts.append([self.params.mu if u_min is None else u_min])
        return np.concatenate(parts)

    # ---- evaluation -----------------------------------------------------

    def values(self, x):
        """(swf, eq, ineq) at x; swf is the value to maximize."""
        N, k, u_min = self.split(x)
        f_util, u, eq, growth = _kernels.eval_problem(N, k, self._par)
        pieces = [u - self.params.mu, growth]
        if self.maximin:
            pieces.append(u - u_min)
            swf = u_min
        else:
            swf = f_util
        return swf, eq, np.concatenate(pieces)

    def objective_value(self, x):
        return self.values(x)[0]

    def weighted_gradient(self, x, w_obj, w_eq, w_ineq):
        """Gradient of w_obj * swf + w_eq . eq + w_ineq . ineq."""
        if self.derivatives == "analytic":
            return self._weighted_gradient_analytic(x, w_obj, w_eq, w_ineq)
        return self._weighted_gradient_fd(x, w_obj, w_eq, w_ineq)

    def _weighted_gradient_analytic(self, x, w_obj, w_eq, w_ineq):
        T = self.T
        N, k, _ = self.split(x)
        wu = np.asarray(w_ineq[:T], dtype=float).copy()
        wgrowth = np.asarray(w_ineq[T:2 * T - 1], dtype=float)
        if self.maximin:
            w_epi = np.asarray(w_ineq[2 * T - 1:], dtype=float)
            wu += w_epi
            wf_util = 0.0
        else:
            wf_util = float(w_obj)
        gN, gk = _kernels.weighted_gradient(
            N, k, self._par, wf_util, wu,
            np.asarray(w_eq, dtype=float), wgrowth)
        parts = [gN[1:], gk[1:]]
        if self.maximin:
            parts.append([float(w_obj) - float(w_epi.sum())])
        return np.concatenate(parts)

    def _weighted_scalar(self, x, w_obj, w_eq, w_ineq):
        swf, eq, ineq = self.values(x)
        return w_obj * swf + float(np.dot(w_eq, eq)) + float(np.dot(w_ineq, ineq))

    def _weighted_gradient_fd(self, x, w_obj, w_eq, w_ineq, step_scale=1.0):
        x = np.asarray(x, dtype=float)
        grad = np.empty_like(x)
        for i in range(len(x)):
            h = step_scale * max(FD_STEP, FD_STEP * abs(x[i]))
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            grad[i] = (self._weighted_scalar(xp, w_obj, w_eq, w_ineq)
                       - self._weighted_scalar(xm, w_obj, w_eq, w_ineq)) / (2.0 * h)
        return grad

    def eval_objective(self, x):
        """(value, gradient) of the social welfare objective."""
        value = self.objective_value(x)
        grad = self.weighted_gradient(
            x, 1.0, np.zeros(self.n_eq), np.zeros(self.n_ineq))
        return value, grad

    def constraint_values(self, x):
        """(eq, ineq) residual vectors only (no derivatives)."""
        _, eq, ineq = self.values(x)
        return eq, ineq

    def eval_constraints(self, x):
        """(eq, ineq, J_eq, J_ineq) residuals and Jacobians."""
        eq, ineq = self.constraint_values(x)
        J_eq = np.empty((self.n_eq, self.n_var))
        J_ineq = np.empty((self.n_ineq, self.n_var))
        if self.derivatives == "analytic":
            zero_eq = np.zeros(self.n_eq)
            zero_in = np.zeros(self.n_ineq)
            for i in range(self.n_eq):
                w = zero_eq.copy()
                w[i] = 1.0
                J_eq[i] = self.weighted_gradient(x, 0.0, w, zero_in)
            for j in range(self.n_ineq):
                w = zero_in.copy()
                w[j] = 1.0
                J_ineq[j] = self.weighted_gradient(x, 0.0, zero_eq, w)
        else:
            x = np.asarray(x, dtype=float)
            for i in range(self.n_var):
                h = max(FD_STEP, FD_STEP * abs(x[i]))
                xp = x.copy()
                xm = x.copy()
                xp[i] += h
                xm[i] -= h
                _, eq_p, in_p = self.values(xp)
                _, eq_m, in_m = self.values(xm)
                J_eq[:, i] = (eq_p - eq_m) / (2.0 * h)
                J_ineq[:, i] = (in_p - in_m) / (2.0 * h)
        return eq, ineq, J_eq, J_ineq

    def stocks(self, x):
        """(G, H, A, R) recomputed from the N entries of x (diagnostics)."""
        N, k, _ = self.split(x)
        G, H, A, R, *_ = _kernels.forward_quantities(N, k, self._par)
        return G, H, A, R

    def trajectory(self, x):
        """Reconstruct the full Trajectory at x."""
        N, k, _ = self.split(x)
        return trajectory_from_schedule(N, k, self.params)

    # ---- starts ---------------------------------------------------------

    def flat_start(self):
        """N_t = N_1 with capital from zero-growth forward shooting."""
        p = self.params
        T = self.T
        N = np.full(T, p.N1)
        k = np.empty(T)
        k[0] = p.k1
        for t in range(T - 1):
            a_t = productivity_growth(N[t], p)
            k[t + 1] = solve_k_next(k[t], a_t, 0.0, p)
        x = self.join(N, k, u_min=p.mu)
        return np.clip(x, self.lower, self.upper)

    def perturbed_start(self, x_flat, rng):
        """Log-uniform population perturbation of a start vector (in bounds)."""
        T = self.T
        x = np.asarray(x_flat, dtype=float).copy()
        factors = np.exp(rng.uniform(-np.log(3.0), np.log(3.0), T - 1))
        x[:T - 1] = np.clip(x[:T - 1] * factors,
                            self.lower[:T - 1], self.upper[:T - 1])
        return x

    # ---- analytic-path validation ---------------------------------------

    def _check_analytic(self):
        """Analytic gradients must match central differences before use."""
        rng = np.random.default_rng(20240 + self.T)
        T = self.T
        p = self.params
        n_cap = min(p.max_population, 10.0 * p.N1)
        N = np.clip(p.N1 * np.exp(rng.uniform(-0.3, 0.3, T)),
                    p.lambda_pop, n_cap)
        k = np.clip(p.k1 * np.exp(rng.uniform(-0.2, 0.8, T)),
                    K_LOWER, K_UPPER)
        x = self.join(N, k, u_min=p.mu * 1.05)
        w_obj = 0.7
        w_eq = rng.normal(size=self.n_eq)
        w_ineq = rng.normal(size=self.n_ineq)
        ga = self._weighted_gradient_analytic(x, w_obj, w_eq, w_ineq)
        coords = rng.permutation(self.n_var)[:ANALYTIC_CHECK_COORDS]
        for i in coords:
            h = max(FD_STEP, FD_STEP * abs(x[i]))
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            gfd = (self._weighted_scalar(xp, w_obj, w_eq, w_ineq)
                   - self._weighted_scalar(xm, w_obj, w_eq, w_ineq)) / (2.0 * h)
            err = abs(ga[i] - gfd) / max(1.0, abs(gfd))
            if err > ANALYTIC_CHECK_TOL:
                raise DomainError(
                    f"analytic gradient failed finite-difference check at"
                    f" coordinate {i}: analytic={ga[i]!r}, fd={gfd!r}")


def build_problem(params: ScenarioParams, T: int, objective: Objective,
                  derivatives: str = "fd") -> NlpProblem:
    """Construct the NLP for a fixed horizon T."""
    return NlpProblem(params, T, objective, derivatives=derivatives)


def initial_guess(problem: NlpProblem, prior: Optional[Trajectory] = None):
    """Flat start, or a warm start padded/truncated from a prior trajectory.

    The warm start copies overlapping generations, repeats the prior final
    period into any new periods, then rescales the new final population so
    the terminal depletion residual vanishes (when that stays above the
    population floor).  A pad that has already overdrawn the stock falls
    back to Flat with a flag.
    """
    if prior is None:
        return InitialGuess(problem.flat_start(), flat_fallback=False)
    p = problem.params
    T = problem.T
    n_prior = prior.horizon
    N_prior = prior.series("N")
    k_prior = prior.series("k")
    N = np.empty(T)
    k = np.empty(T)
    m = min(T, n_prior)
    N[:m] = N_prior[:m]
    k[:m] = k_prior[:m]
    if T > n_prior:
        N[n_prior:] = N_prior[-1]
        k[n_prior:] = k_prior[-1]
    N[0] = p.N1
    k[0] = p.k1
    N = np.clip(N, p.lambda_pop, p.max_population)
    k = np.clip(k, K_LOWER, K_UPPER)

    # stock remaining entering the final period, determined by N_1..N_{T-1};
    # a converged ascending prior leaves R_T = 0, which still pads fine (the
    # small terminal violation is the solver's job), so only a genuine
    # overdraw falls back
    H = np.empty(T)
    H[0] = p.H1
    H[1:] = p.H1 * np.cumprod(1.0 - p.rho * N[:-1])
    H_T = H[-1]
    R_T = p.R_bar - p.theta * float(np.dot(H[:-1], N[:-1]))
    if R_T < -1e-6 * p.R_bar:
        return InitialGuess(problem.flat_start(), flat_fallback=True)
    N_T_exact = R_T / (p.theta * H_T)
    if p.lambda_pop <= N_T_exact <= p.max_population:
        N[-1] = N_T_exact

    u_min = None
    if problem.maximin:
        _, _, _, _, _, _, _, _, _, u = _kernels.forward_quantities(
            N, k, problem._par)
        u_min = max(p.mu, float(u.min()))
    return InitialGuess(problem.join(N, k, u_min=u_min), flat_fallback=False)
