"""Economic primitives of the two-period OLG economy with depletable stock energy.

Everything here is a pure function of its arguments.  Households live two
periods: young earn a wage, split it between consumption and saving, and
consume the capitalized saving when old.  Labor productivity is the product
of energy efficiency (grows with population) and resource availability
(decays with cumulative extraction), and a finite energy stock depletes
with use, which is what ultimately ends the economy.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InfeasibleTransitionError, SimulationError

# Capital bracket for the implicit transition (also the NLP box bounds).
K_LOWER = 1e-7
K_UPPER = 1e7

# Headroom on the population bound N <= POP_HEADROOM / rho that keeps
# resource availability strictly positive.
POP_HEADROOM = 0.999

CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class ScenarioParams:
    """Exogenous constants defining one economy.

    alpha       output elasticity of capital, in (0, 1)
    beta        time preference factor, > 0
    gamma       relative risk aversion, > 0 and != 1
    delta       capital depreciation rate, in [0, 1)
    sigma       energy-efficiency innovation scale per unit population, >= 0
    rho         resource-availability decay scale per unit population, >= 0
    theta       per-capita stock-energy extraction rate, > 0
    mu          minimum utility at which a life is worthwhile, > 0
    lambda_pop  minimum population that sustains a generation, > 0
    omega       maximum population growth rate, > 0
    R_bar       ultimate stock-energy reserve at t = 1, > 0
    k1, N1      initial capital per effective labor and population, > 0
    G1, H1      initial energy efficiency and resource availability, > 0
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    sigma: float
    rho: float
    theta: float
    mu: float
    lambda_pop: float
    omega: float
    R_bar: float
    k1: float
    N1: float
    G1: float = 1.0
    H1: float = 1.0

    def __post_init__(self):
        checks = [
            (0.0 < self.alpha < 1.0, "alpha must lie in (0, 1)"),
            (self.beta > 0.0, "beta must be positive"),
            (self.gamma > 0.0, "gamma must be positive"),
            (self.gamma != 1.0, "gamma = 1 (log utility) is rejected"),
            (0.0 <= self.delta < 1.0, "delta must lie in [0, 1); delta = 1 zeroes"
             " terminal old-age consumption"),
            (self.sigma >= 0.0, "sigma must be non-negative"),
            (self.rho >= 0.0, "rho must be non-negative"),
            (self.theta > 0.0, "theta must be positive"),
            (self.mu > 0.0, "mu must be positive"),
            (self.lambda_pop > 0.0, "lambda_pop must be positive"),
            (self.omega > 0.0, "omega must be positive"),
            (self.R_bar > 0.0, "R_bar must be positive"),
            (self.k1 > 0.0, "k1 must be positive"),
            (self.N1 > 0.0, "N1 must be positive"),
            (self.G1 > 0.0, "G1 must be positive"),
            (self.H1 > 0.0, "H1 must be positive"),
            (self.rho * self.N1 < 1.0, "rho * N1 must be below 1, otherwise"
             " resource availability is non-positive from the start"),
        ]
        for ok, msg in checks:
            if not ok:
                raise DomainError(msg)

    @property
    def max_population(self):
        """Hard upper bound on any N_t keeping resource availability positive."""
        if self.rho == 0.0:
            return np.inf
        return POP_HEADROOM / self.rho

    def with_updates(self, **kwargs):
        """Copy with some fields replaced (re-validates)."""
        return replace(self, **kwargs)


@dataclass(frozen=True)
class GenerationState:
    """All per-generation quantities for one period.

    d_old is the old-age consumption of this generation, consumed at t+1;
    r_next is the return its saving earns, realized at t+1.
    """

    N: float
    n: float
    k: float
    A: float
    G: float
    H: float
    R: float
    a: float
    w: float
    r_next: float
    s: float
    c: float
    d_old: float
    u: float

    @property
    def E(self):
        """Energy used in production, A * N."""
        return self.A * self.N

    @property
    def Z(self):
        """Resource exploited, H * N."""
        return self.H * self.N

    def capital_cost(self, params):
        """Unit capital cost x = r + delta (diagnostic)."""
        return self.r_next + params.delta


SERIES_FIELDS = ("N", "n", "k", "A", "G", "H", "R", "w", "r_next", "s", "c",
                 "d_old", "u", "a")


@dataclass(frozen=True)
class Trajectory:
    """Ordered per-generation states for t = 1..T."""

    params: ScenarioParams
    generations: tuple

    @property
    def horizon(self):
        return len(self.generations)

    def __iter__(self):
        return iter(self.generations)

    def __getitem__(self, t_index):
        return self.generations[t_index]

    def series(self, name):
        """Per-generation array of one field."""
        return np.array([getattr(g, name) for g in self.generations])

    def arrays(self):
        """Dict of all per-generation series."""
        return {name: self.series(name) for name in SERIES_FIELDS}

    @property
    def terminal_residual(self):
        """R_{T+1} = R_T - theta * H_T * N_T (zero at a feasible terminal)."""
        last = self.generations[-1]
        return last.R - self.params.theta * last.H * last.N

    def check_consistency(self, tol=CONSISTENCY_TOL):
        """Raise if any recursive state relation is violated beyond tol."""
        p = self.params
        gens = self.generations
        for t in range(len(gens) - 1):
            g0, g1 = gens[t], gens[t + 1]
            pairs = [
                ("population", g1.N, (1.0 + g0.n) * g0.N),
                ("energy efficiency", g1.G, (1.0 + p.sigma * g0.N) * g0.G),
                ("resource availability", g1.H, (1.0 - p.rho * g0.N) * g0.H),
                ("depletion", g1.R, g0.R - p.theta * g0.H * g0.N),
                ("productivity split", g1.A, g1.G * g1.H),
            ]
            for relation, got, want in pairs:
                if abs(got - want) > tol * max(1.0, abs(want)):
                    raise SimulationError(t + 2, relation,
                                          f"got {got!r}, expected {want!r}")
        for t, g in enumerate(gens):
            if abs(g.A - g.G * g.H) > tol * max(1.0, abs(g.A)):
                raise SimulationError(t + 1, "productivity split",
                                      f"A={g.A!r} != G*H={g.G * g.H!r}")
        return True


@dataclass(frozen=True)
class StockUpdate:
    """Partial next state driven purely by the current population."""

    G: float
    H: float
    A: float
    R: float


def wage(k, A, params):
    """Wage under Cobb-Douglas production: A * (1 - alpha) * k**alpha."""
    if k <= 0.0 or A <= 0.0:
        raise DomainError(f"wage needs k > 0 and A > 0, got k={k}, A={A}")
    return A * (1.0 - params.alpha) * k ** params.alpha


def rate_of_return(k_next, params):
    """Return on saving, alpha * k_next**(alpha - 1) - delta."""
    if k_next <= 0.0:
        raise DomainError(f"rate_of_return needs k_next > 0, got {k_next}")
    return params.alpha * k_next ** (params.alpha - 1.0) - params.delta


def savings_rule(w, r_next, params):
    """CRRA-optimal saving out of wage w facing next-period return r_next."""
    if w <= 0.0:
        raise DomainError(f"savings_rule needs w > 0, got {w}")
    if 1.0 + r_next <= 0.0:
        raise DomainError(
            f"savings_rule needs 1 + r_next > 0, got r_next={r_next};"
            " the terminal period uses terminal_savings instead")
    b, g = params.beta, params.gamma
    return w / (1.0 + b ** (-1.0 / g) * (1.0 + r_next) ** (1.0 - 1.0 / g))


def terminal_savings(w, params):
    """Final-generation saving; its capital only depreciates, gross return 1 - delta."""
    if w <= 0.0:
        raise DomainError(f"terminal_savings needs w > 0, got {w}")
    if params.delta >= 1.0:
        raise DomainError("terminal_savings is degenerate at delta = 1"
                          " (old-age consumption would be zero)")
    b, g = params.beta, params.gamma
    return w / (1.0 + b ** (-1.0 / g) * (1.0 - params.delta) ** (1.0 - 1.0 / g))


def lifetime_utility(c, d_old, params):
    """CRRA lifetime utility over young- and old-age consumption."""
    if c <= 0.0 or d_old <= 0.0:
        raise DomainError(
            f"lifetime_utility needs positive consumptions, got c={c}, d={d_old}")
    g = params.gamma
    return c ** (1.0 - g) / (1.0 - g) + params.beta * d_old ** (1.0 - g) / (1.0 - g)


def productivity_growth(N, params):
    """Productivity growth rate a with 1 + a = (1 + sigma N)(1 - rho N)."""
    if N < 0.0:
        raise DomainError(f"productivity_growth needs N >= 0, got {N}")
    if params.rho * N >= 1.0:
        raise DomainError(
            f"rho * N = {params.rho * N} >= 1: resource availability would"
            " become non-positive")
    return (1.0 + params.sigma * N) * (1.0 - params.rho * N) - 1.0


def state_update(state, params):
    """Advance the stock variables one period from a GenerationState."""
    if params.rho * state.N >= 1.0:
        raise DomainError(
            f"rho * N = {params.rho * state.N} >= 1 at the update")
    G = (1.0 + params.sigma * state.N) * state.G
    H = (1.0 - params.rho * state.N) * state.H
    R = state.R - params.theta * state.H * state.N
    if R < -CONSISTENCY_TOL:
        raise SimulationError(0, "depletion",
                              f"stock energy overdrawn: R_next = {R}")
    return StockUpdate(G=G, H=H, A=G * H, R=R)


def capital_residual(k_t, k_next, a_t, n_t, params):
    """Residual of the implicit OLG capital transition.

    Zero iff (k_t, k_next) is consistent with growth rates (a_t, n_t):
    supply of saving per effective labor equals next-period capital demand.
    """
    if k_t <= 0.0 or k_next <= 0.0:
        raise DomainError(
            f"capital_residual needs positive capital, got ({k_t}, {k_next})")
    al, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    q = 1.0 + al * k_next ** (al - 1.0) - d
    if q <= 0.0:
        raise DomainError(f"1 + r_next = {q} <= 0 at k_next = {k_next}")
    supply = (1.0 - al) * k_t ** al / (1.0 + b ** (-1.0 / g) * q ** ((g - 1.0) / g))
    demand = (1.0 + a_t) * (1.0 + n_t) * al * k_next ** al / q
    return supply - demand


def solve_k_next(k_t, a_t, n_t, params,
                 bracket=(K_LOWER, K_UPPER), tol=1e-12):
    """Next-period capital from the implicit transition.

    Bisection on the bracket (guaranteed once the residual changes sign)
    refined by Newton steps; deterministic.
    """
    lo, hi = bracket
    f_lo = capital_residual(k_t, lo, a_t, n_t, params)
    f_hi = capital_residual(k_t, hi, a_t, n_t, params)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise InfeasibleTransitionError(
            f"no sign change for capital transition from k_t={k_t} with"
            f" a_t={a_t}, n_t={n_t}: residual({lo})={f_lo},"
            f" residual({hi})={f_hi}", f_lo, f_hi)
    # bisect until the bracket is narrow, then polish with Newton
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f_mid = capital_residual(k_t, mid, a_t, n_t, params)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo <= 1e-9 * max(1.0, lo):
            break
    k = 0.5 * (lo + hi)
    h = 1e-7
    for _ in range(12):
        f_k = capital_residual(k_t, k, a_t, n_t, params)
        if abs(f_k) < tol:
            return k
        step = h * max(abs(k), 1e-3)
        df = (capital_residual(k_t, k + step, a_t, n_t, params)
              - capital_residual(k_t, k - step, a_t, n_t, params)) / (2.0 * step)
        if df == 0.0:
            break
        k_new = k - f_k / df
        if not (lo * 0.5 <= k_new <= hi * 2.0) or k_new <= 0.0:
            break
        k = k_new
    f_k = capital_residual(k_t, k, a_t, n_t, params)
    if abs(f_k) >= tol:
        raise InfeasibleTransitionError(
            f"capital transition root did not refine below {tol}:"
            f" residual({k})={f_k}", f_lo, f_hi)
    return k


def forward_simulate(controls, params, T):
    """Simulate a trajectory from growth-rate controls n_1..n_{T-1}.

    The terminal generation uses the terminal savings rule and consumes
    (1 - delta) * s_T when old.  The terminal depletion residual is reported
    on the Trajectory, not forced to zero.
    """
    if T < 2:
        raise DomainError(f"horizon must be at least 2, got {T}")
    controls = list(controls)
    if len(controls) != T - 1:
        raise DomainError(
            f"need {T - 1} controls for horizon {T}, got {len(controls)}")

    N = np.empty(T)
    G = np.empty(T)
    H = np.empty(T)
    R = np.empty(T)
    k = np.empty(T)
    a = np.empty(T)
    N[0], G[0], H[0], R[0], k[0] = (params.N1, params.G1, params.H1,
                                    params.R_bar, params.k1)
    for t in range(T - 1):
        if N[t] <= 0.0:
            raise SimulationError(t + 1, "population",
                                  f"N_t = {N[t]} must stay positive")
        if params.rho * N[t] >= 1.0:
            raise SimulationError(t + 1, "resource availability",
                                  f"rho * N_t = {params.rho * N[t]} >= 1")
        a[t] = productivity_growth(N[t], params)
        try:
            k[t + 1] = solve_k_next(k[t], a[t], controls[t], params)
        except DomainError as exc:
            raise SimulationError(t + 1, "capital transition", str(exc)) from exc
        N[t + 1] = (1.0 + controls[t]) * N[t]
        G[t + 1] = (1.0 + params.sigma * N[t]) * G[t]
        H[t + 1] = (1.0 - params.rho * N[t]) * H[t]
        R[t + 1] = R[t] - params.theta * H[t] * N[t]
    a[T - 1] = productivity_growth(N[T - 1], params)

    gens = []
    for t in range(T):
        A_t = G[t] * H[t]
        w_t = wage(k[t], A_t, params)
        if t < T - 1:
            r_next = rate_of_return(k[t + 1], params)
            s_t = savings_rule(w_t, r_next, params)
            d_t = (1.0 + r_next) * s_t
            n_t = controls[t]
        else:
            r_next = -params.delta
            s_t = terminal_savings(w_t, params)
            d_t = (1.0 - params.delta) * s_t
            n_t = -1.0
        c_t = w_t - s_t
        if c_t <= 0.0:
            raise SimulationError(t + 1, "consumption", f"c_t = {c_t}")
        gens.append(GenerationState(
            N=N[t], n=n_t, k=k[t], A=A_t, G=G[t], H=H[t], R=R[t], a=a[t],
            w=w_t, r_next=r_next, s=s_t, c=c_t, d_old=d_t,
            u=lifetime_utility(c_t, d_t, params)))
    return Trajectory(params=params, generations=tuple(gens))


def trajectory_from_schedule(N, k, params):
    """Trajectory from explicit population and capital schedules.

    Used to reconstruct solver solutions; N[0] and k[0] should equal the
    scenario initial conditions.
    """
    N = np.asarray(N, dtype=float)
    k = np.asarray(k, dtype=float)
    T = len(N)
    if T < 2 or len(k) != T:
        raise DomainError("schedules must share a horizon of at least 2")
    G = np.empty(T)
    H = np.empty(T)
    R = np.empty(T)
    G[0], H[0], R[0] = params.G1, params.H1, params.R_bar
    for t in range(T - 1):
        G[t + 1] = (1.0 + params.sigma * N[t]) * G[t]
        H[t + 1] = (1.0 - params.rho * N[t]) * H[t]
        R[t + 1] = R[t] - params.theta * H[t] * N[t]
    gens = []
    for t in range(T):
        A_t = G[t] * H[t]
        w_t = wage(k[t], A_t, params)
        if t < T - 1:
            r_next = rate_of_return(k[t + 1], params)
            s_t = savings_rule(w_t, r_next, params)
            d_t = (1.0 + r_next) * s_t
            n_t = N[t + 1] / N[t] - 1.0
        else:
            r_next = -params.delta
            s_t = terminal_savings(w_t, params)
            d_t = (1.0 - params.delta) * s_t
            n_t = -1.0
        c_t = w_t - s_t
        if c_t <= 0.0:
            raise SimulationError(t + 1, "consumption", f"c_t = {c_t}")
        gens.append(GenerationState(
            N=N[t], n=n_t, k=k[t], A=A_t, G=G[t], H=H[t], R=R[t],
            a=productivity_growth(N[t], params), w=w_t, r_next=r_next,
            s=s_t, c=c_t, d_old=d_t, u=lifetime_utility(c_t, d_t, params)))
    return Trajectory(params=params, generations=tuple(gens))


def steady_state_n(k, params):
    """Fertility rate consistent with steady-state capital k (A constant)."""
    if k <= 0.0:
        raise DomainError(f"steady_state_n needs k > 0, got {k}")
    al, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    q = 1.0 + al * k ** (al - 1.0) - d
    if q <= 0.0:
        raise DomainError(f"1 + r = {q} <= 0 at k = {k}")
    supply = (1.0 - al) * k ** al / (1.0 + b ** (-1.0 / g) * q ** ((g - 1.0) / g))
    return supply * q / (al * k ** al) - 1.0


def steady_state_utility(k, params, A=None):
    """Representative lifetime utility at steady-state capital k."""
    A = params.G1 * params.H1 if A is None else A
    w = wage(k, A, params)
    r = rate_of_return(k, params)
    if 1.0 + r <= 0.0:
        raise DomainError(f"1 + r = {1.0 + r} <= 0 at k = {k}")
    s = savings_rule(w, r, params)
    return lifetime_utility(w - s, (1.0 + r) * s, params)


@dataclass(frozen=True)
class KGridSpec:
    """Log-spaced capital grid for the steady-state scan."""

    k_min: float = 1e-3
    k_max: float = 1.0
    points: int = 2000

    def grid(self):
        return np.geomspace(self.k_min, self.k_max, self.points)


def find_min_utility_fertility(params, grid_spec=None, k_tol=1e-6):
    """Locate the utility-minimizing steady state.

    Grid scan plus golden-section refinement; returns (k_hat, n_hat, u_hat)
    where n_hat is the fertility rate used as the growth upper bound.
    """
    spec = grid_spec or KGridSpec()
    ks = spec.grid()
    us = np.array([steady_state_utility(k, params) for k in ks])
    i = int(np.argmin(us))
    if i == 0 or i == len(ks) - 1:
        raise DomainError(
            "no interior utility minimum on the capital grid"
            f" [{spec.k_min}, {spec.k_max}]; widen the grid")
    # golden-section on the bracketing triple
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = ks[i - 1], ks[i + 1]
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = steady_state_utility(x1, params)
    f2 = steady_state_utility(x2, params)
    while hi - lo > k_tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = steady_state_utility(x1, params)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = steady_state_utility(x2, params)
    k_hat = 0.5 * (lo + hi)
    return k_hat, steady_state_n(k_hat, params), steady_state_utility(k_hat, params)
