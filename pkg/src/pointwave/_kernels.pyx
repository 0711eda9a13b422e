# cython: language_level=3
"""Compiled hot loops. Same signatures and semantics as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

NEAREST_NODE = 0
CHARACTERISTICS_EXACT = 1


cdef inline void _kahan_add(double* y, double* comp, int j, double inc) noexcept nogil:
    cdef double d = inc - comp[j]
    cdef double t = y[j] + d
    comp[j] = (t - y[j]) - d
    y[j] = t


def rk4_first_model(double omega, double gamma, double q0, double v0,
                    const double[::1] q01_half, const double[::1] f0_half,
                    double dt, Py_ssize_t n):
    cdef double w2 = omega * omega, g2 = 2.0 * gamma, src = 2.0 * gamma * v0
    cdef double h2 = 0.5 * dt, s6 = dt / 6.0
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, 4))
    cdef double[:, ::1] out = out_arr
    cdef double y[4]
    cdef double comp[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double qa0, qa1, qa2, fa0, fa1, fa2, q, p, d, f
    cdef Py_ssize_t i
    cdef int j
    y[0] = q0; y[1] = v0; y[2] = 0.0; y[3] = 0.0
    for j in range(4):
        comp[j] = 0.0
        out[0, j] = y[j]
    with nogil:
        for i in range(n - 1):
            qa0 = q01_half[2 * i]; qa1 = q01_half[2 * i + 1]; qa2 = q01_half[2 * i + 2]
            fa0 = f0_half[2 * i]; fa1 = f0_half[2 * i + 1]; fa2 = f0_half[2 * i + 2]
            q = y[0]; p = y[1]; d = y[2]; f = y[3]
            k1[0] = p
            k1[1] = -g2 * p - w2 * q + src + w2 * qa0 + fa0 + g2 * f
            k1[2] = -g2 * (d + qa0 - q)
            k1[3] = fa0
            q = y[0] + h2 * k1[0]; p = y[1] + h2 * k1[1]; d = y[2] + h2 * k1[2]; f = y[3] + h2 * k1[3]
            k2[0] = p
            k2[1] = -g2 * p - w2 * q + src + w2 * qa1 + fa1 + g2 * f
            k2[2] = -g2 * (d + qa1 - q)
            k2[3] = fa1
            q = y[0] + h2 * k2[0]; p = y[1] + h2 * k2[1]; d = y[2] + h2 * k2[2]; f = y[3] + h2 * k2[3]
            k3[0] = p
            k3[1] = -g2 * p - w2 * q + src + w2 * qa1 + fa1 + g2 * f
            k3[2] = -g2 * (d + qa1 - q)
            k3[3] = fa1
            q = y[0] + dt * k3[0]; p = y[1] + dt * k3[1]; d = y[2] + dt * k3[2]; f = y[3] + dt * k3[3]
            k4[0] = p
            k4[1] = -g2 * p - w2 * q + src + w2 * qa2 + fa2 + g2 * f
            k4[2] = -g2 * (d + qa2 - q)
            k4[3] = fa2
            for j in range(4):
                _kahan_add(y, comp, j, s6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                out[i + 1, j] = y[j]
    return out_arr


def rk4_standard_model(double omega, double gamma1, double gamma2, double q0, double v0,
                       const double[::1] phi01_half, const double[::1] f0_half,
                       double dt, Py_ssize_t n):
    cdef double w2 = omega * omega, cpl = 2.0 * gamma1 * gamma2
    cdef double h2 = 0.5 * dt, s6 = dt / 6.0
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, 3))
    cdef double[:, ::1] out = out_arr
    cdef double y[3]
    cdef double comp[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double pa0, pa1, pa2, fa0, fa1, fa2, q, p, s
    cdef Py_ssize_t i
    cdef int j
    y[0] = q0; y[1] = v0; y[2] = 0.0
    for j in range(3):
        comp[j] = 0.0
        out[0, j] = y[j]
    with nogil:
        for i in range(n - 1):
            pa0 = phi01_half[2 * i]; pa1 = phi01_half[2 * i + 1]; pa2 = phi01_half[2 * i + 2]
            fa0 = f0_half[2 * i]; fa1 = f0_half[2 * i + 1]; fa2 = f0_half[2 * i + 2]
            q = y[0]; p = y[1]; s = y[2]
            k1[0] = p; k1[1] = -w2 * q + cpl * s + gamma1 * pa0 + fa0; k1[2] = q
            q = y[0] + h2 * k1[0]; p = y[1] + h2 * k1[1]; s = y[2] + h2 * k1[2]
            k2[0] = p; k2[1] = -w2 * q + cpl * s + gamma1 * pa1 + fa1; k2[2] = q
            q = y[0] + h2 * k2[0]; p = y[1] + h2 * k2[1]; s = y[2] + h2 * k2[2]
            k3[0] = p; k3[1] = -w2 * q + cpl * s + gamma1 * pa1 + fa1; k3[2] = q
            q = y[0] + dt * k3[0]; p = y[1] + dt * k3[1]; s = y[2] + dt * k3[2]
            k4[0] = p; k4[1] = -w2 * q + cpl * s + gamma1 * pa2 + fa2; k4[2] = q
            for j in range(3):
                _kahan_add(y, comp, j, s6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                out[i + 1, j] = y[j]
    return out_arr


def pde_advance(int scheme, double courant, double dt, double dx, double c, Py_ssize_t j0,
                double[::1] u_prev, double[::1] u_cur, Py_ssize_t n_begin, Py_ssize_t n_end,
                double[::1] osc, double omega, double kq, double kQ, double mu,
                const double[::1] f0, const double[:, ::1] f1_block, bint has_f1,
                const double[:, ::1] edge_free,
                double[::1] q_out, double[::1] Q_out, double[::1] qdot_out):
    cdef Py_ssize_t N = u_cur.shape[0]
    cdef double w2 = omega * omega, c2 = courant * courant, dt2 = dt * dt
    cdef double src_scale = dt2 * 2.0 * c / dx, a = 0.5 * dt
    cdef double[::1] prev = np.array(u_prev, copy=True)
    cdef double[::1] cur = np.array(u_cur, copy=True)
    cdef double[::1] nxt = np.empty(N)
    cdef double[::1] tmp
    cdef double q = osc[0], p = osc[1], G = osc[2], Gp = osc[3]
    cdef double Qn, W, gn, den, B, Q0, beta, P0, lam, qn1, pn1, Gn1, p_old, qdot_new
    cdef double w0, w1, wN, wN1
    cdef Py_ssize_t n, j
    with nogil:
        for n in range(n_begin, n_end):
            Qn = cur[j0]
            if scheme == 1:
                for j in range(1, N - 1):
                    nxt[j] = cur[j + 1] + cur[j - 1] - prev[j]
            else:
                for j in range(1, N - 1):
                    nxt[j] = 2.0 * cur[j] - prev[j] + c2 * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1])
            if has_f1:
                for j in range(1, N - 1):
                    nxt[j] += dt2 * f1_block[n - n_begin, j]

            if scheme == 1:
                W = nxt[j0] - Gp
                gn = kq * q + kQ * Qn
                den = 1.0 - a * kQ
                B = G + a * gn + a * kQ * W
                Q0 = W + B / den
                beta = a * kq / den
                P0 = p + a * (-w2 * q + mu * Qn + f0[n]) + a * f0[n + 1] + a * mu * Q0
                lam = mu * beta - w2
                qn1 = (q + a * p + a * P0) / (1.0 - a * a * lam)
                pn1 = P0 + a * lam * qn1
                Gn1 = (B + a * kq * qn1) / den
                nxt[j0] = W + Gn1
                q = qn1
                p = pn1
                Gp = G
                G = Gn1
                qdot_new = p
            else:
                nxt[j0] += src_scale * (kq * q + kQ * Qn)
                q = q + dt * p
                p_old = p
                p = p + dt * (-w2 * q + mu * nxt[j0] + f0[n + 1])
                qdot_new = 0.5 * (p_old + p)

            w0 = cur[0] - edge_free[n, 0]
            w1 = cur[1] - edge_free[n, 1]
            nxt[0] = edge_free[n + 1, 0] + w0 + courant * (w1 - w0)
            wN = cur[N - 1] - edge_free[n, 3]
            wN1 = cur[N - 2] - edge_free[n, 2]
            nxt[N - 1] = edge_free[n + 1, 3] + wN + courant * (wN1 - wN)

            q_out[n + 1] = q
            Q_out[n + 1] = nxt[j0]
            qdot_out[n + 1] = qdot_new
            tmp = prev
            prev = cur
            cur = nxt
            nxt = tmp
        for j in range(N):
            u_prev[j] = prev[j]
            u_cur[j] = cur[j]
    osc[0] = q; osc[1] = p; osc[2] = G; osc[3] = Gp


cdef inline double _history(const double[::1] K, double k_inf, const double[::1] x,
                            Py_ssize_t n, const double[::1] prefix) noexcept nogil:
    cdef Py_ssize_t M = K.shape[0] - 1
    cdef Py_ssize_t top, m
    cdef double acc = 0.0, kn
    if n == 0:
        return 0.0
    top = M if M < n - 1 else n - 1
    for m in range(1, top + 1):
        acc += K[m] * x[n - m]
    if n - 1 > M:
        acc += k_inf * (prefix[n - M - 1] - x[0])
    kn = K[n] if n <= M else k_inf
    return acc + 0.5 * kn * x[0]


def history_sum(const double[::1] K, double k_inf, const double[::1] x, Py_ssize_t n,
                const double[::1] prefix):
    return _history(K, k_inf, x, n, prefix)


def product_integral(const double[::1] K, double k_inf, const double[::1] x, double dt):
    cdef Py_ssize_t n = x.shape[0], i
    cdef double[::1] prefix = np.cumsum(x)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    with nogil:
        out[0] = 0.0
        for i in range(1, n):
            out[i] = dt * (0.5 * K[0] * x[i] + _history(K, k_inf, x, i, prefix))
    return out_arr


def volterra2_solve(const double[::1] K, double k_inf, double coef, double dt,
                    const double[::1] rhs, const double[::1] q):
    cdef Py_ssize_t n = rhs.shape[0], i
    cdef double[::1] y = np.zeros(n)
    cdef double[::1] prefix = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Q_arr = np.empty(n)
    cdef double[::1] Q = Q_arr
    cdef double pivot = 1.0 + coef * dt * 0.5 * K[0], h
    with nogil:
        for i in range(n):
            if i == 0:
                Q[0] = rhs[0]
            else:
                h = _history(K, k_inf, y, i, prefix)
                Q[i] = (rhs[i] - coef * dt * (h - 0.5 * K[0] * q[i])) / pivot
            y[i] = Q[i] - q[i]
            prefix[i] = y[i] + (prefix[i - 1] if i > 0 else 0.0)
    return Q_arr


def nonlocal_march(const double[::1] K, double k_inf, double coef, double omega,
                   const double[::1] q01, const double[::1] f0, const double[::1] if0,
                   double q0, double v0, double dt):
    cdef Py_ssize_t n = q01.shape[0], i
    cdef double w2 = omega * omega
    cdef double pivot = 1.0 + coef * dt * 0.5 * K[0] + w2 * dt * dt * 0.25
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, 3))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] acc = np.zeros(n)
    cdef double[::1] prefix = np.zeros(n)
    cdef double q = q0, v = v0, a, a_new, h, q_pred
    a = -w2 * q0 + w2 * q01[0] + f0[0]
    with nogil:
        acc[0] = a
        prefix[0] = a
        out[0, 0] = q; out[0, 1] = v; out[0, 2] = a
        for i in range(1, n):
            h = _history(K, k_inf, acc, i, prefix)
            q_pred = q + dt * v + 0.25 * dt * dt * a
            a_new = (-w2 * q_pred + w2 * q01[i] + f0[i] + coef * if0[i] - coef * dt * h) / pivot
            q = q_pred + 0.25 * dt * dt * a_new
            v = v + 0.5 * dt * (a + a_new)
            a = a_new
            acc[i] = a
            prefix[i] = prefix[i - 1] + a
            out[i, 0] = q; out[i, 1] = v; out[i, 2] = a
    return out_arr
