# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled NLP evaluation kernels (mirrors _ref.py exactly)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, fmax, fmin

cnp.import_array()

BACKEND_NAME = "cython"

cdef double H_FLOOR = 1e-250
cdef double G_CAP = 1e280


def forward_quantities(double[::1] N, double[::1] k, par):
    cdef double alpha = par[0], beta = par[1], gamma = par[2], delta = par[3]
    cdef double sigma = par[4], rho = par[5], theta = par[6], R_bar = par[7]
    cdef double G1 = par[8], H1 = par[9]
    cdef Py_ssize_t T = N.shape[0]
    cdef cnp.ndarray[double, ndim=1] G_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] H_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] A_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] R_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] w_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] r_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] s_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] c_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] d_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] u_ = np.empty(T)
    cdef double[::1] G = G_, H = H_, A = A_, R = R_, w = w_
    cdef double[::1] r = r_, s = s_, c = c_, d = d_, u = u_
    cdef double bb = pow(beta, -1.0 / gamma)
    cdef double ex = 1.0 - 1.0 / gamma
    cdef double oneg = 1.0 - gamma
    cdef double q, pm1, pden, ka
    cdef Py_ssize_t t

    G[0] = G1
    H[0] = H1
    R[0] = R_bar
    for t in range(T - 1):
        G[t + 1] = fmin(G[t] * (1.0 + sigma * N[t]), G_CAP)
        H[t + 1] = fmax(H[t] * (1.0 - rho * N[t]), H_FLOOR)
        R[t + 1] = R[t] - theta * H[t] * N[t]
    for t in range(T):
        A[t] = G[t] * H[t]
        ka = pow(k[t], alpha)
        w[t] = A[t] * (1.0 - alpha) * ka
        if t < T - 1:
            q = 1.0 + alpha * pow(k[t + 1], alpha - 1.0) - delta
            r[t] = q - 1.0
            pm1 = bb * pow(q, ex)
        else:
            q = 1.0 - delta
            r[t] = -delta
            pm1 = bb * pow(1.0 - delta, ex)
        pden = 1.0 + pm1
        s[t] = w[t] / pden
        c[t] = w[t] * pm1 / pden
        d[t] = q * s[t]
        u[t] = pow(c[t], oneg) / oneg + beta * pow(d[t], oneg) / oneg
    return G_, H_, A_, R_, w_, r_, s_, c_, d_, u_


def eval_problem(double[::1] N, double[::1] k, par):
    cdef double alpha = par[0], beta = par[1], gamma = par[2], delta = par[3]
    cdef double sigma = par[4], rho = par[5], theta = par[6], R_bar = par[7]
    cdef double G1 = par[8], H1 = par[9], omega = par[10]
    cdef Py_ssize_t T = N.shape[0]
    cdef cnp.ndarray[double, ndim=1] u_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] eq_ = np.empty(T)
    cdef cnp.ndarray[double, ndim=1] growth_ = np.empty(T - 1)
    cdef double[::1] u = u_, eq = eq_, growth = growth_
    cdef double bb = pow(beta, -1.0 / gamma)
    cdef double ex = 1.0 - 1.0 / gamma
    cdef double oneg = 1.0 - gamma
    cdef double G = G1, H = H1, depleted = 0.0
    cdef double f_util = 0.0
    cdef double q, pm1, pden, ka, ka_next, A, w, s, c, d, one_a
    cdef Py_ssize_t t

    for t in range(T):
        A = G * H
        ka = pow(k[t], alpha)
        w = A * (1.0 - alpha) * ka
        if t < T - 1:
            q = 1.0 + alpha * pow(k[t + 1], alpha - 1.0) - delta
            pm1 = bb * pow(q, ex)
        else:
            q = 1.0 - delta
            pm1 = bb * pow(1.0 - delta, ex)
        pden = 1.0 + pm1
        s = w / pden
        c = w * pm1 / pden
        d = q * s
        u[t] = pow(c, oneg) / oneg + beta * pow(d, oneg) / oneg
        f_util += u[t] * N[t]
        depleted += H * N[t]
        if t < T - 1:
            one_a = (1.0 + sigma * N[t]) * (1.0 - rho * N[t])
            ka_next = pow(k[t + 1], alpha)
            eq[t] = ((1.0 - alpha) * ka / pden
                     - one_a * (N[t + 1] / N[t]) * alpha * ka_next / q)
            growth[t] = (1.0 + omega) * N[t] - N[t + 1]
            G = fmin(G * (1.0 + sigma * N[t]), G_CAP)
            H = fmax(H * (1.0 - rho * N[t]), H_FLOOR)
    eq[T - 1] = R_bar - theta * depleted
    return f_util, u_, eq_, growth_


def weighted_gradient(double[::1] N, double[::1] k, par, double wf_util,
                      double[::1] wu, double[::1] weq, double[::1] wgrowth):
    cdef double alpha = par[0], beta = par[1], gamma = par[2], delta = par[3]
    cdef double sigma = par[4], rho = par[5], theta = par[6], R_bar = par[7]
    cdef double G1 = par[8], H1 = par[9], omega = par[10]
    cdef Py_ssize_t T = N.shape[0]
    cdef cnp.ndarray[double, ndim=1] gN_ = np.zeros(T)
    cdef cnp.ndarray[double, ndim=1] gk_ = np.zeros(T)
    cdef double[::1] gN = gN_, gk = gk_
    cdef cnp.ndarray[double, ndim=1] scratch_ = np.empty(10 * T)
    cdef double[::1] G = scratch_[0:T]
    cdef double[::1] H = scratch_[T:2 * T]
    cdef double[::1] ka = scratch_[2 * T:3 * T]
    cdef double[::1] w = scratch_[3 * T:4 * T]
    cdef double[::1] q = scratch_[4 * T:5 * T]      # 1 + r faced by gen t
    cdef double[::1] pm1 = scratch_[5 * T:6 * T]
    cdef double[::1] s = scratch_[6 * T:7 * T]
    cdef double[::1] c = scratch_[7 * T:8 * T]
    cdef double[::1] d = scratch_[8 * T:9 * T]
    cdef double[::1] u = scratch_[9 * T:10 * T]
    cdef cnp.ndarray[double, ndim=1] adj_ = np.empty(2 * T)
    cdef double[::1] adj_g = adj_[0:T]              # Gbar_t * G_t
    cdef double[::1] adj_h = adj_[T:2 * T]          # Hbar_t * H_t
    cdef double bb = pow(beta, -1.0 / gamma)
    cdef double ex = 1.0 - 1.0 / gamma
    cdef double oneg = 1.0 - gamma
    cdef double pden, one_a, one_n, da_dN
    cdef double ubar, cbar, dbar, sbar, wbar, qbar, Abar, Bbar, wcap
    cdef double suf_g, suf_h
    cdef double wterm = weq[T - 1]
    cdef Py_ssize_t t

    G[0] = G1
    H[0] = H1
    for t in range(T - 1):
        G[t + 1] = fmin(G[t] * (1.0 + sigma * N[t]), G_CAP)
        H[t + 1] = fmax(H[t] * (1.0 - rho * N[t]), H_FLOOR)
    for t in range(T):
        ka[t] = pow(k[t], alpha)
        w[t] = G[t] * H[t] * (1.0 - alpha) * ka[t]
        if t < T - 1:
            q[t] = 1.0 + alpha * pow(k[t + 1], alpha - 1.0) - delta
            pm1[t] = bb * pow(q[t], ex)
        else:
            q[t] = 1.0 - delta
            pm1[t] = bb * pow(1.0 - delta, ex)
        pden = 1.0 + pm1[t]
        s[t] = w[t] / pden
        c[t] = w[t] * pm1[t] / pden
        d[t] = q[t] * s[t]
        u[t] = pow(c[t], oneg) / oneg + beta * pow(d[t], oneg) / oneg

    for t in range(T):
        ubar = wu[t] + wf_util * N[t]
        gN[t] += wf_util * u[t]
        cbar = ubar * pow(c[t], -gamma)
        dbar = ubar * beta * pow(d[t], -gamma)
        sbar = -cbar + dbar * q[t]
        pden = 1.0 + pm1[t]
        wbar = cbar + sbar / pden
        if t < T - 1:
            qbar = (sbar * (-w[t] * bb * ex * pow(q[t], ex - 1.0) / (pden * pden))
                    + dbar * s[t])
            wcap = weq[t]
            one_a = (1.0 + sigma * N[t]) * (1.0 - rho * N[t])
            one_n = N[t + 1] / N[t]
            qbar += wcap * (-(1.0 - alpha) * ka[t] / (pden * pden)
                            * (bb * ex * pow(q[t], ex - 1.0))
                            + one_a * one_n * alpha * ka[t + 1] / (q[t] * q[t]))
            gk[t] += wcap * (1.0 - alpha) * alpha * ka[t] / k[t] / pden
            gk[t + 1] += wcap * (-one_a * one_n * alpha * alpha * ka[t + 1]
                                 / k[t + 1] / q[t])
            Bbar = wcap * (-alpha * ka[t + 1] / q[t])
            gN[t + 1] += Bbar * one_a / N[t]
            da_dN = sigma - rho - 2.0 * sigma * rho * N[t]
            gN[t] += Bbar * (da_dN * one_n - one_a * N[t + 1] / (N[t] * N[t]))
            gk[t + 1] += qbar * alpha * (alpha - 1.0) * pow(k[t + 1], alpha - 2.0)
            gN[t] += wgrowth[t] * (1.0 + omega)
            gN[t + 1] -= wgrowth[t]
        Abar = wbar * (1.0 - alpha) * ka[t]
        gk[t] += wbar * G[t] * H[t] * (1.0 - alpha) * alpha * ka[t] / k[t]
        gN[t] += wterm * (-theta * H[t])
        adj_g[t] = (Abar * H[t]) * G[t]
        adj_h[t] = (Abar * G[t] + wterm * (-theta * N[t])) * H[t]

    suf_g = 0.0
    suf_h = 0.0
    for t in range(T - 1, -1, -1):
        gN[t] += sigma * suf_g / (1.0 + sigma * N[t]) \
            - rho * suf_h / (1.0 - rho * N[t])
        suf_g += adj_g[t]
        suf_h += adj_h[t]
    return gN_, gk_
