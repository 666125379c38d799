"""Pure-numpy reference implementation of the NLP evaluation kernels.

The compiled extension in ``_fast.pyx`` mirrors these functions exactly;
this module is both the import-time fallback and the semantic reference
the extension is tested against.

All kernels take full per-generation schedules N and k of length T
(including the fixed initial entries) plus the parameter tuple produced by
``pack_params``:

    (alpha, beta, gamma, delta, sigma, rho, theta, R_bar, G1, H1, omega)

Numerical guards: resource availability is floored and energy efficiency
capped at extreme magnitudes so that evaluations stay finite on the whole
bound box (the floors are many orders of magnitude outside any feasible
solution).
"""

import numpy as np

H_FLOOR = 1e-250
G_CAP = 1e280

BACKEND_NAME = "python"


def pack_params(p):
    """Parameter tuple the kernels consume, from a ScenarioParams."""
    return (p.alpha, p.beta, p.gamma, p.delta, p.sigma, p.rho, p.theta,
            p.R_bar, p.G1, p.H1, p.omega)


def _stocks(N, par):
    (alpha, beta, gamma, delta, sigma, rho, theta, R_bar, G1, H1, omega) = par
    T = len(N)
    G = np.empty(T)
    H = np.empty(T)
    G[0], H[0] = G1, H1
    if T > 1:
        G[1:] = G1 * np.cumprod(1.0 + sigma * N[:-1])
        H[1:] = H1 * np.cumprod(1.0 - rho * N[:-1])
    np.minimum(G, G_CAP, out=G)
    np.maximum(H, H_FLOOR, out=H)
    return G, H


def forward_quantities(N, k, par):
    """Full per-generation quantities.

    Returns (G, H, A, R, w, r_next, s, c, d_old, u); r_next[-1] = -delta.
    """
    (alpha, beta, gamma, delta, sigma, rho, theta, R_bar, G1, H1, omega) = par
    T = len(N)
    G, H = _stocks(N, par)
    A = G * H
    R = np.empty(T)
    R[0] = R_bar
    R[1:] = R_bar - theta * np.cumsum(H * N)[:-1]
    ka = k ** alpha
    w = A * (1.0 - alpha) * ka
    bb = beta ** (-1.0 / gamma)
    ex = 1.0 - 1.0 / gamma
    r_next = np.empty(T)
    r_next[:-1] = alpha * k[1:] ** (alpha - 1.0) - delta
    r_next[-1] = -delta
    pm1 = np.empty(T)
    pm1[:-1] = bb * (1.0 + r_next[:-1]) ** ex
    pm1[-1] = bb * (1.0 - delta) ** ex
    pden = 1.0 + pm1
    s = w / pden
    c = w * pm1 / pden
    d_old = np.empty(T)
    d_old[:-1] = (1.0 + r_next[:-1]) * s[:-1]
    d_old[-1] = (1.0 - delta) * s[-1]
    u = c ** (1.0 - gamma) / (1.0 - gamma) \
        + beta * d_old ** (1.0 - gamma) / (1.0 - gamma)
    return G, H, A, R, w, r_next, s, c, d_old, u


def eval_problem(N, k, par):
    """Objective and constraint building blocks in one pass.

    Returns (f_util, u, eq, growth) with f_util = sum u_t N_t, eq the
    capital residuals for t = 1..T-1 followed by the terminal depletion
    residual, and growth the (1 + omega) N_t - N_{t+1} slacks.
    """
    (alpha, beta, gamma, delta, sigma, rho, theta, R_bar, G1, H1, omega) = par
    T = len(N)
    G, H = _stocks(N, par)
    A = G * H
    ka = k ** alpha
    w = A * (1.0 - alpha) * ka
    bb = beta ** (-1.0 / gamma)
    ex = (gamma - 1.0) / gamma
    q = 1.0 + alpha * k[1:] ** (alpha - 1.0) - delta
    pm1 = np.empty(T)
    pm1[:-1] = bb * q ** ex
    pm1[-1] = bb * (1.0 - delta) ** ex
    pden = 1.0 + pm1
    s = w / pden
    c = w * pm1 / pden
    d_old = np.empty(T)
    d_old[:-1] = q * s[:-1]
    d_old[-1] = (1.0 - delta) * s[-1]
    u = c ** (1.0 - gamma) / (1.0 - gamma) \
        + beta * d_old ** (1.0 - gamma) / (1.0 - gamma)

    one_a = (1.0 + sigma * N[:-1]) * (1.0 - rho * N[:-1])
    one_n = N[1:] / N[:-1]
    cap = (1.0 - alpha) * ka[:-1] / pden[:-1] - one_a * one_n * alpha * ka[1:] / q
    term = R_bar - theta * float(H @ N)
    eq = np.concatenate([cap, [term]])
    growth = (1.0 + omega) * N[:-1] - N[1:]
    f_util = float(u @ N)
    return f_util, u, eq, growth


def weighted_gradient(N, k, par, wf_util, wu, weq, wgrowth):
    """Gradient of V = wf_util * sum(u N) + wu.u + weq.eq + wgrowth.growth.

    One reverse sweep, O(T).  Returns (dV/dN, dV/dk), both length T
    (entries 0 correspond to the fixed initial conditions).
    """
    (alpha, beta, gamma, delta, sigma, rho, theta, R_bar, G1, H1, omega) = par
    T = len(N)
    G, H = _stocks(N, par)
    A = G * H
    ka = k ** alpha
    w = A * (1.0 - alpha) * ka
    bb = beta ** (-1.0 / gamma)
    ex = 1.0 - 1.0 / gamma
    q = 1.0 + alpha * k[1:] ** (alpha - 1.0) - delta
    pm1 = np.empty(T)
    pm1[:-1] = bb * q ** ex
    pm1[-1] = bb * (1.0 - delta) ** ex
    pden = 1.0 + pm1
    s = w / pden
    c = w * pm1 / pden
    d_old = np.empty(T)
    d_old[:-1] = q * s[:-1]
    d_old[-1] = (1.0 - delta) * s[-1]
    u = c ** (1.0 - gamma) / (1.0 - gamma) \
        + beta * d_old ** (1.0 - gamma) / (1.0 - gamma)

    one_a = (1.0 + sigma * N[:-1]) * (1.0 - rho * N[:-1])
    one_n = N[1:] / N[:-1]
    wcap = weq[:-1]
    wterm = weq[-1]

    Nbar = np.zeros(T)
    kbar = np.zeros(T)
    # objective: direct N factor (the u_t path flows through ubar below)
    ubar = wu + wf_util * N
    Nbar += wf_util * u
    # utility -> consumptions
    cbar = ubar * c ** (-gamma)
    dbar = ubar * beta * d_old ** (-gamma)
    # consumptions -> savings, wage, return factor
    sbar = -cbar.copy()
    sbar[:-1] += dbar[:-1] * q
    sbar[-1] += dbar[-1] * (1.0 - delta)
    wbar = cbar + sbar / pden
    qbar = sbar[:-1] * (-w[:-1] * bb * ex * q ** (ex - 1.0) / pden[:-1] ** 2)
    qbar += dbar[:-1] * s[:-1]
    # capital residuals (pden[:-1] is the same savings denominator)
    qbar += wcap * (-(1.0 - alpha) * ka[:-1] / pden[:-1] ** 2
                    * (bb * ex * q ** (ex - 1.0))
                    + one_a * one_n * alpha * ka[1:] / q ** 2)
    kbar[:-1] += wcap * (1.0 - alpha) * alpha * ka[:-1] / k[:-1] / pden[:-1]
    kbar[1:] += wcap * (-one_a * one_n * alpha * alpha * ka[1:] / k[1:] / q)
    Bbar = wcap * (-alpha * ka[1:] / q)
    Nbar[1:] += Bbar * one_a / N[:-1]
    da_dN = sigma - rho - 2.0 * sigma * rho * N[:-1]
    Nbar[:-1] += Bbar * (da_dN * one_n - one_a * N[1:] / N[:-1] ** 2)
    # return factor -> next-period capital
    kbar[1:] += qbar * alpha * (alpha - 1.0) * k[1:] ** (alpha - 2.0)
    # wage -> productivity and own capital
    Abar = wbar * (1.0 - alpha) * ka
    kbar += wbar * A * (1.0 - alpha) * alpha * ka / k
    # terminal depletion and growth rows
    Nbar += wterm * (-theta * H)
    Hbar_direct = wterm * (-theta * N)
    Nbar[:-1] += wgrowth * (1.0 + omega)
    Nbar[1:] -= wgrowth
    # cumulative-product stocks: suffix sums over t > j
    Gbar = Abar * H
    Hbar = Abar * G + Hbar_direct
    sg = Gbar * G
    sh = Hbar * H
    suf_g = np.concatenate([np.cumsum(sg[::-1])[::-1][1:], [0.0]])
    suf_h = np.concatenate([np.cumsum(sh[::-1])[::-1][1:], [0.0]])
    Nbar += sigma * suf_g / (1.0 + sigma * N) - rho * suf_h / (1.0 - rho * N)
    return Nbar, kbar
