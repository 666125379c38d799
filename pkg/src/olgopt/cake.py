"""Cake-eating problem with a closed-form optimum, used as a solver oracle.

A single line of agents consumes a capital stock that grows at a constant
productivity: maximize sum_t b^t ln c_t subject to k_{t+1} = a k_t - c_t
with k_{T+1} = 0.  The optimum is known in closed form, the same policy
falls out of backward induction, and an adapter feeds the problem through
the generic NLP transcription/solver machinery to validate it end to end.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .solver import SolveOptions, multistart


@dataclass(frozen=True)
class CakeParams:
    """a: capital productivity; b: discount factor; k0: initial capital;
    T_idx: final generation index (the problem spans t = 0..T_idx)."""

    a: float
    b: float
    k0: float
    T_idx: int

    def __post_init__(self):
        if self.a <= 0.0 or self.k0 <= 0.0:
            raise DomainError("cake productivity and initial capital must be"
                              " positive")
        if not (0.0 < self.b <= 1.0):
            raise DomainError(f"discount factor must lie in (0, 1], got {self.b}")
        if self.T_idx < 0:
            raise DomainError(f"final index must be non-negative, got {self.T_idx}")


def cake_closed_form(cp: CakeParams):
    """Optimal consumption schedule c_0..c_T.

    c_t = b^t (1-b) a^(t+1) k0 / (1 - b^(T+1)); at b = 1 the exact limit
    branch c_t = a^(t+1) k0 / (T+1) is taken, never a numerical limit.
    """
    T = cp.T_idx
    t = np.arange(T + 1)
    a_pow = cp.a ** (t + 1.0)
    if cp.b == 1.0:
        return a_pow * cp.k0 / (T + 1.0)
    return cp.b ** t * (1.0 - cp.b) * a_pow * cp.k0 / (1.0 - cp.b ** (T + 1.0))


def cake_backward_induction(cp: CakeParams):
    """Numerically recovered policy c = a k / (1 + b + ... + b^(T-t)).

    The discount-sum coefficients come from the Bellman recursion; the
    schedule is then simulated forward through the budget identity.
    """
    T = cp.T_idx
    coeff = np.empty(T + 1)
    coeff[T] = 1.0
    for t in range(T - 1, -1, -1):
        coeff[t] = 1.0 + cp.b * coeff[t + 1]
    c = np.empty(T + 1)
    k = cp.k0
    for t in range(T + 1):
        c[t] = cp.a * k / coeff[t]
        k = cp.a * k - c[t]
    return c


def cake_budget_path(cp: CakeParams, schedule):
    """Capital path k_0..k_{T+1} implied by a consumption schedule."""
    schedule = np.asarray(schedule, dtype=float)
    k = np.empty(len(schedule) + 1)
    k[0] = cp.k0
    for t, c in enumerate(schedule):
        k[t + 1] = cp.a * k[t] - c
    return k


class CakeNlpProblem:
    """Cake-eating transcribed for the generic augmented-Lagrangian solver.

    Decisions are the consumptions c_0..c_T; the capital path is eliminated
    (linear in c), leaving one terminal-exhaustion equality and the
    intermediate-capital non-negativity inequalities.
    """

    def __init__(self, cp: CakeParams):
        self.cp = cp
        T = cp.T_idx
        self.n_var = T + 1
        self.n_eq = 1
        self.n_ineq = T
        t = np.arange(T + 1)
        self._a_pow = cp.a ** (t + 1.0)       # a^(t+1), max capital at t
        self._b_pow = cp.b ** t
        self.lower = np.full(T + 1, 1e-12 * cp.k0 * min(1.0, cp.a ** (T + 1)))
        self.upper = self._a_pow * cp.k0

    def _capital(self, c):
        """k_1..k_{T+1} as linear functions of consumption."""
        cp = self.cp
        k = np.empty(len(c) + 1)
        k[0] = cp.k0
        for t in range(len(c)):
            k[t + 1] = cp.a * k[t] - c[t]
        return k[1:]

    def values(self, x):
        c = np.asarray(x, dtype=float)
        f = float(self._b_pow @ np.log(c))
        k_path = self._capital(c)
        eq = np.array([k_path[-1]])
        ineq = k_path[:-1]
        return f, eq, ineq

    def weighted_gradient(self, x, w_obj, w_eq, w_ineq):
        c = np.asarray(x, dtype=float)
        cp = self.cp
        T = cp.T_idx
        grad = w_obj * self._b_pow / c
        # dk_{t+1}/dc_i = -a^(t-i) for i <= t; suffix recursion over the
        # inequality weights plus the terminal equality row
        suffix = 0.0
        w_all = np.concatenate([np.asarray(w_ineq, dtype=float),
                                np.asarray(w_eq, dtype=float)])
        out = np.zeros(T + 1)
        for i in range(T, -1, -1):
            suffix = w_all[i] + cp.a * suffix
            out[i] = -suffix
        return grad + out

    def flat_start(self):
        return 0.5 * self._a_pow * self.cp.k0 / (self.cp.T_idx + 1.0)

    def perturbed_start(self, x_flat, rng):
        factors = np.exp(rng.uniform(-np.log(3.0), np.log(3.0), self.n_var))
        return np.clip(x_flat * factors, self.lower, self.upper)

    def schedule(self, x):
        return np.asarray(x, dtype=float).copy()


CAKE_SOLVE_OPTIONS = SolveOptions(eq_tol=1e-10, stat_tol=3e-8, multistart=2)


def cake_via_nlp(cp: CakeParams, options: SolveOptions = None):
    """Solve the cake problem through the generic NLP machinery.

    Returns (schedule, objective_value, report); callers compare against
    cake_closed_form.
    """
    if cp.T_idx > 20:
        raise DomainError("the NLP adapter is for desk-scale horizons"
                          f" (T <= 20), got {cp.T_idx}")
    options = options or CAKE_SOLVE_OPTIONS
    problem = CakeNlpProblem(cp)
    report = multistart(problem, options)
    if report.x is None:
        return None, np.nan, report
    return problem.schedule(report.x), report.objective, report
