"""Pure-Python/numpy implementation of the hot loops.

Mirrors ``_kernels.pyx`` function for function; ``kernels.py`` picks one at
import. Arguments are validated by the callers, not here.
"""
import numpy as np

NEAREST_NODE = 0
CHARACTERISTICS_EXACT = 1


# ---------------------------------------------------------------------------
# Reduced ODEs (classical RK4 with compensated state summation)
# ---------------------------------------------------------------------------

def rk4_first_model(omega, gamma, q0, v0, q01_half, f0_half, dt, n):
    """State (q, qdot, D = Q - Q01, F = int f0); forcing sampled at half steps.

    Returns an (n, 4) array of states on the integer grid.
    """
    w2 = omega * omega
    g2 = 2.0 * gamma
    src = g2 * v0
    out = np.empty((n, 4))
    y = [q0, v0, 0.0, 0.0]
    comp = [0.0, 0.0, 0.0, 0.0]
    out[0] = y
    h2 = 0.5 * dt

    def rhs(q, p, d, f, qa, fa):
        return (p,
                -g2 * p - w2 * q + src + w2 * qa + fa + g2 * f,
                -g2 * (d + qa - q),
                fa)

    for i in range(n - 1):
        qa0, qa1, qa2 = q01_half[2 * i], q01_half[2 * i + 1], q01_half[2 * i + 2]
        fa0, fa1, fa2 = f0_half[2 * i], f0_half[2 * i + 1], f0_half[2 * i + 2]
        q, p, d, f = y
        k1 = rhs(q, p, d, f, qa0, fa0)
        k2 = rhs(q + h2 * k1[0], p + h2 * k1[1], d + h2 * k1[2], f + h2 * k1[3], qa1, fa1)
        k3 = rhs(q + h2 * k2[0], p + h2 * k2[1], d + h2 * k2[2], f + h2 * k2[3], qa1, fa1)
        k4 = rhs(q + dt * k3[0], p + dt * k3[1], d + dt * k3[2], f + dt * k3[3], qa2, fa2)
        for j in range(4):
            inc = dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) - comp[j]
            t = y[j] + inc
            comp[j] = (t - y[j]) - inc
            y[j] = t
        out[i + 1] = y
    return out


def rk4_standard_model(omega, gamma1, gamma2, q0, v0, phi01_half, f0_half, dt, n):
    """State (q0, qdot0, I = int q0). Returns an (n, 3) array."""
    w2 = omega * omega
    cpl = 2.0 * gamma1 * gamma2
    out = np.empty((n, 3))
    y = [q0, v0, 0.0]
    comp = [0.0, 0.0, 0.0]
    out[0] = y
    h2 = 0.5 * dt

    def rhs(q, p, s, pa, fa):
        return (p, -w2 * q + cpl * s + gamma1 * pa + fa, q)

    for i in range(n - 1):
        pa0, pa1, pa2 = phi01_half[2 * i], phi01_half[2 * i + 1], phi01_half[2 * i + 2]
        fa0, fa1, fa2 = f0_half[2 * i], f0_half[2 * i + 1], f0_half[2 * i + 2]
        q, p, s = y
        k1 = rhs(q, p, s, pa0, fa0)
        k2 = rhs(q + h2 * k1[0], p + h2 * k1[1], s + h2 * k1[2], pa1, fa1)
        k3 = rhs(q + h2 * k2[0], p + h2 * k2[1], s + h2 * k2[2], pa1, fa1)
        k4 = rhs(q + dt * k3[0], p + dt * k3[1], s + dt * k3[2], pa2, fa2)
        for j in range(3):
            inc = dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) - comp[j]
            t = y[j] + inc
            comp[j] = (t - y[j]) - inc
            y[j] = t
        out[i + 1] = y
    return out


# ---------------------------------------------------------------------------
# Grid oracle
# ---------------------------------------------------------------------------

def pde_advance(scheme, courant, dt, dx, c, j0, u_prev, u_cur, n_begin, n_end,
                osc, omega, kq, kQ, mu, f0, f1_block, has_f1, edge_free,
                q_out, Q_out, qdot_out):
    """Advance the coupled grid from step n_begin to n_end (n_begin >= 1).

    ``u_prev``/``u_cur`` hold u^{n-1}, u^n and are overwritten in place.
    ``osc`` is (q, p, G, G_prev) for the exact scheme and (q, p_half, 0, 0)
    for the nearest-node scheme; it is updated in place.
    """
    w2 = omega * omega
    c2 = courant * courant
    dt2 = dt * dt
    src_scale = dt2 * 2.0 * c / dx
    a = 0.5 * dt
    N = u_cur.shape[0]
    prev = u_prev.copy()
    cur = u_cur.copy()
    q, p, G, Gp = osc[0], osc[1], osc[2], osc[3]
    for n in range(n_begin, n_end):
        nxt = np.empty(N)
        Qn = cur[j0]
        if scheme == CHARACTERISTICS_EXACT:
            nxt[1:-1] = cur[2:] + cur[:-2] - prev[1:-1]
        else:
            nxt[1:-1] = 2.0 * cur[1:-1] - prev[1:-1] + c2 * (cur[2:] - 2.0 * cur[1:-1] + cur[:-2])
        if has_f1:
            nxt[1:-1] += dt2 * f1_block[n - n_begin, 1:-1]

        if scheme == CHARACTERISTICS_EXACT:
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
            q, p, Gp, G = qn1, pn1, G, Gn1
            qdot_new = p
        else:
            nxt[j0] += src_scale * (kq * q + kQ * Qn)
            q = q + dt * p
            p_old = p
            p = p + dt * (-w2 * q + mu * nxt[j0] + f0[n + 1])
            qdot_new = 0.5 * (p_old + p)

        # absorbing edges on the scattered part u - u_free
        e0, e1, e2, e3 = edge_free[n]
        w0 = cur[0] - e0
        w1 = cur[1] - e1
        nxt[0] = edge_free[n + 1, 0] + w0 + courant * (w1 - w0)
        wN = cur[N - 1] - e3
        wN1 = cur[N - 2] - e2
        nxt[N - 1] = edge_free[n + 1, 3] + wN + courant * (wN1 - wN)

        q_out[n + 1] = q
        Q_out[n + 1] = nxt[j0]
        qdot_out[n + 1] = qdot_new
        prev, cur = cur, nxt
    u_prev[:] = prev
    u_cur[:] = cur
    osc[0], osc[1], osc[2], osc[3] = q, p, G, Gp


# ---------------------------------------------------------------------------
# Product integration on a stationary kernel
# ---------------------------------------------------------------------------
# K holds K(m dt) for m = 0..M; beyond M the kernel equals k_inf exactly.

def _kval(K, k_inf, m):
    return K[m] if m < K.shape[0] else k_inf


def _history(K, k_inf, x, n, prefix):
    """sum_{m=1}^{n-1} K_m x_{n-m} + K_n x_0 / 2 (the trapezoid without the diagonal)."""
    if n == 0:
        return 0.0
    M = K.shape[0] - 1
    top = min(M, n - 1)
    acc = 0.0
    if top >= 1:
        acc = float(np.dot(K[1:top + 1], x[n - top:n][::-1]))
    if n - 1 > M:
        # m = M+1 .. n-1 touches x_1 .. x_{n-M-1}
        acc += k_inf * (prefix[n - M - 1] - x[0])
    return acc + 0.5 * _kval(K, k_inf, n) * x[0]


def product_integral(K, k_inf, x, dt):
    """Trapezoidal product integral I_n = int_s^{t_n} K(t_n - tau) x(tau) dtau for all n."""
    n = x.shape[0]
    prefix = np.cumsum(x)
    out = np.empty(n)
    out[0] = 0.0
    for i in range(1, n):
        out[i] = dt * (0.5 * K[0] * x[i] + _history(K, k_inf, x, i, prefix))
    return out


def volterra2_solve(K, k_inf, coef, dt, rhs, q):
    """Solve Q_n = rhs_n - coef * I_n[Q - q] step by step; returns Q."""
    n = rhs.shape[0]
    y = np.zeros(n)
    prefix = np.zeros(n)
    Q = np.empty(n)
    pivot = 1.0 + coef * dt * 0.5 * K[0]
    for i in range(n):
        if i == 0:
            Q[0] = rhs[0]
        else:
            h = _history(K, k_inf, y, i, prefix)
            Q[i] = (rhs[i] - coef * dt * (h - 0.5 * K[0] * q[i])) / pivot
        y[i] = Q[i] - q[i]
        prefix[i] = y[i] + (prefix[i - 1] if i else 0.0)
    return Q


def nonlocal_march(K, k_inf, coef, omega, q01, f0, if0, q0, v0, dt):
    """Newmark (average acceleration) march of a + coef*I[a] = -w2 q + w2 Q01 + f0 + coef*I[f0].

    Returns an (n, 3) array of (q, qdot, qddot).
    """
    n = q01.shape[0]
    w2 = omega * omega
    pivot = 1.0 + coef * dt * 0.5 * K[0] + w2 * dt * dt * 0.25
    out = np.empty((n, 3))
    acc = np.zeros(n)
    prefix = np.zeros(n)
    q, v = q0, v0
    a = -w2 * q0 + w2 * q01[0] + f0[0]
    acc[0] = a
    prefix[0] = a
    out[0] = (q, v, a)
    for i in range(1, n):
        h = _history(K, k_inf, acc, i, prefix)
        q_pred = q + dt * v + 0.25 * dt * dt * a
        a_new = (-w2 * q_pred + w2 * q01[i] + f0[i] + coef * if0[i] - coef * dt * h) / pivot
        q = q_pred + 0.25 * dt * dt * a_new
        v = v + 0.5 * dt * (a + a_new)
        a = a_new
        acc[i] = a
        prefix[i] = prefix[i - 1] + a
        out[i] = (q, v, a)
    return out


def history_sum(K, k_inf, x, n, prefix):
    """Public wrapper around the trapezoid history for callers doing their own stepping."""
    return _history(K, k_inf, x, n, prefix)
