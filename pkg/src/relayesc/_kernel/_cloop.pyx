# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled closed-loop engine.

Line-for-line mirror of relayesc._kernel.pyloop: same operations in the
same evaluation order (built with -ffp-contract=off, so no FMA fusion),
which makes trajectories bit-identical to the pure-Python backend. Change
the two modules together or the cross-backend equality test will fail.
"""

from libc.math cimport fabs

import numpy as np

cdef double _PIVOT_RTOL = 1e-13


cdef inline double _quad_eval(const double[:, ::1] h, const double[::1] th,
                              const double[:, ::1] tstar, Py_ssize_t seg,
                              Py_ssize_t p) noexcept nogil:
    cdef double acc = 0.0
    cdef double s
    cdef Py_ssize_t r, c
    for r in range(p):
        s = 0.0
        for c in range(p):
            s += h[r, c] * (th[c] - tstar[seg, c])
        acc += (th[r] - tstar[seg, r]) * s
    return 0.5 * acc


cdef inline void _quad_grad(const double[:, ::1] h, const double[::1] th,
                            const double[:, ::1] tstar, Py_ssize_t seg,
                            double sign, Py_ssize_t p, double[::1] out) noexcept nogil:
    cdef double s
    cdef Py_ssize_t r, c
    for r in range(p):
        s = 0.0
        for c in range(p):
            s += h[r, c] * (th[c] - tstar[seg, c])
        out[r] = sign * s


cdef inline int _rls_step(double[:, ::1] pmat, double[::1] g, const double[::1] x,
                          double dydt, double lam, double[::1] px, double[::1] d,
                          Py_ssize_t p) noexcept nogil:
    # Returns 1 when the denominator collapsed (state left untouched).
    cdef double s, xpx, denom, e, dr, m, acc
    cdef Py_ssize_t r, c
    for r in range(p):
        s = 0.0
        for c in range(p):
            s += pmat[r, c] * x[c]
        px[r] = s
    xpx = 0.0
    for r in range(p):
        xpx += x[r] * px[r]
    denom = lam + xpx
    if not denom > 0.0:
        return 1
    for r in range(p):
        d[r] = px[r] / denom
    for r in range(p):
        dr = d[r]
        for c in range(p):
            pmat[r, c] = (pmat[r, c] - dr * px[c]) / lam
    for r in range(p):
        for c in range(r + 1, p):
            m = 0.5 * (pmat[r, c] + pmat[c, r])
            pmat[r, c] = m
            pmat[c, r] = m
    acc = 0.0
    for c in range(p):
        acc += x[c] * g[c]
    e = dydt - acc
    for r in range(p):
        g[r] = g[r] + e * d[r]
    return 0


cdef inline int _solve_inplace(double[:, ::1] a, double[::1] b, Py_ssize_t p,
                               double[::1] sol) noexcept nogil:
    # Gaussian elimination with partial pivoting; returns 0 if singular.
    cdef double scale = 0.0
    cdef double v, tol, piv_val, akk, f, acc, tmp
    cdef Py_ssize_t r, c, col, piv_row
    for r in range(p):
        for c in range(p):
            v = fabs(a[r, c])
            if v > scale:
                scale = v
    if scale == 0.0:
        return 0
    tol = _PIVOT_RTOL * scale
    for col in range(p):
        piv_row = col
        piv_val = fabs(a[col, col])
        for r in range(col + 1, p):
            v = fabs(a[r, col])
            if v > piv_val:
                piv_val = v
                piv_row = r
        if piv_val <= tol:
            return 0
        if piv_row != col:
            for c in range(p):
                tmp = a[col, c]
                a[col, c] = a[piv_row, c]
                a[piv_row, c] = tmp
            tmp = b[col]
            b[col] = b[piv_row]
            b[piv_row] = tmp
        akk = a[col, col]
        for r in range(col + 1, p):
            f = a[r, col] / akk
            for c in range(col, p):
                a[r, c] = a[r, c] - f * a[col, c]
            b[r] = b[r] - f * b[col]
    for r in range(p - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, p):
            acc -= a[r, c] * sol[c]
        sol[r] = acc / a[r, r]
    return 1


def run_loop(Py_ssize_t p, Py_ssize_t n_steps, bint static_mode, bint adaptive,
             bint minimize, bint oracle, bint dynamic_plant,
             double dt, Py_ssize_t hold_steps, double lam, double gamma,
             double zeta, double a_filt, double b_filt,
             const double[::1] k0, const double[::1] theta_init,
             const double[::1] eps_init, const double[:, ::1] h,
             const double[:, ::1] theta_star, const long[::1] seg_idx,
             const double[:, ::1] draws,
             double[:, ::1] out_theta, double[::1] out_y, double[::1] out_q,
             double[:, ::1] out_ghat, double[:, ::1] out_eps,
             double[:, ::1] out_k, unsigned char[::1] out_switched,
             unsigned char[::1] out_degenerate):
    """Run the full closed loop; fills the out_* arrays (n_steps+1 records).

    Same contract as pyloop.run_loop.
    """
    cdef double[::1] theta = np.empty(p)
    cdef double[::1] eps = np.empty(p)
    cdef double[::1] k = np.empty(p)
    cdef double[::1] x = np.empty(p)
    cdef double[::1] ghat = np.zeros(p)
    cdef double[:, ::1] pmat = np.zeros((p, p))
    cdef double[:, ::1] win_x = np.zeros((p, p))
    cdef double[::1] win_y = np.zeros(p)
    cdef double[:, ::1] a_scr = np.empty((p, p))
    cdef double[::1] b_scr = np.empty(p)
    cdef double[::1] sol_scr = np.empty(p)
    cdef double[::1] px_scr = np.empty(p)
    cdef double[::1] d_scr = np.empty(p)

    cdef Py_ssize_t win_n = 0
    cdef Py_ssize_t win_pos = 0
    cdef Py_ssize_t hold_count = 0
    cdef Py_ssize_t i, j, r, seg, base, src
    cdef double gsign = 1.0 if minimize else -1.0
    cdef double q, filt, y, y_eff, y_prev, dydt, delta, kj, gj
    cdef int degen, switched, disagree

    for j in range(p):
        theta[j] = theta_init[j]
        eps[j] = eps_init[j]
        pmat[j, j] = gamma

    if oracle:
        _quad_grad(h, theta, theta_star, seg_idx[0], gsign, p, ghat)

    # initial stochastic gains (draw row 0)
    for j in range(p):
        delta = draws[0, j]
        if adaptive:
            kj = 2.0 * k0[j] * (1.0 + fabs(ghat[j]) + zeta * delta)
        else:
            kj = 2.0 * k0[j] * delta
        k[j] = kj
        x[j] = eps[j] * kj

    q = _quad_eval(h, theta, theta_star, seg_idx[0], p)
    filt = q
    y = q
    y_prev = y if minimize else -y

    for j in range(p):
        out_theta[0, j] = theta[j]
        out_ghat[0, j] = ghat[j]
        out_eps[0, j] = eps[j]
        out_k[0, j] = k[j]
    out_y[0] = y
    out_q[0] = q
    out_switched[0] = 0
    out_degenerate[0] = 0

    for i in range(1, n_steps + 1):
        # integrate the inputs across the period just elapsed
        for j in range(p):
            theta[j] = theta[j] + dt * x[j]
        seg = seg_idx[i]
        q = _quad_eval(h, theta, theta_star, seg, p)
        if dynamic_plant:
            filt = a_filt * filt + b_filt * q
            y = filt
        else:
            y = q

        y_eff = y if minimize else -y
        degen = 0
        if oracle:
            _quad_grad(h, theta, theta_star, seg, gsign, p, ghat)
        else:
            dydt = (y_eff - y_prev) / dt
            if static_mode:
                # push (x, dydt) into the ring, solve when p rows are in
                for j in range(p):
                    win_x[win_pos, j] = x[j]
                win_y[win_pos] = dydt
                win_pos = (win_pos + 1) % p
                if win_n < p:
                    win_n += 1
                if win_n == p:
                    base = win_pos
                    for r in range(p):
                        src = (base + r) % p
                        for j in range(p):
                            a_scr[r, j] = win_x[src, j]
                        b_scr[r] = win_y[src]
                    if _solve_inplace(a_scr, b_scr, p, sol_scr):
                        for j in range(p):
                            ghat[j] = sol_scr[j]
                    else:
                        degen = 1
            else:
                degen = _rls_step(pmat, ghat, x, dydt, lam, px_scr, d_scr, p)
        y_prev = y_eff
        hold_count += 1

        disagree = 0
        for j in range(p):
            gj = ghat[j]
            if gj > 0.0:
                if eps[j] != -1.0:
                    disagree = 1
                    break
            elif gj < 0.0:
                if eps[j] != 1.0:
                    disagree = 1
                    break
        switched = 0
        if disagree and hold_count >= hold_steps:
            hold_count = 0
            switched = 1
            for j in range(p):
                gj = ghat[j]
                if gj > 0.0:
                    eps[j] = -1.0
                elif gj < 0.0:
                    eps[j] = 1.0

        for j in range(p):
            delta = draws[i, j]
            if adaptive:
                kj = 2.0 * k0[j] * (1.0 + fabs(ghat[j]) + zeta * delta)
            else:
                kj = 2.0 * k0[j] * delta
            k[j] = kj
            x[j] = eps[j] * kj

        for j in range(p):
            out_theta[i, j] = theta[j]
            out_ghat[i, j] = ghat[j]
            out_eps[i, j] = eps[j]
            out_k[i, j] = k[j]
        out_y[i] = y
        out_q[i] = q
        out_switched[i] = <unsigned char> switched
        out_degenerate[i] = <unsigned char> degen
