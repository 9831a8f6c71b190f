"""Pure-Python closed-loop engine (reference backend).

One sample period of the relay extremum seeker does, in order: integrate
the inputs with the rates chosen last period, measure the plant, difference
the measurement into a cost rate, update the gradient estimate (recursive
least squares in dynamic mode, an exact window solve over the last p
samples in static mode), apply the hold-time switching rule, draw new
stochastic relay gains and form the next rate vector.

relayesc._kernel._cloop is a compiled mirror of this module. Both backends
consume one pre-generated block of uniform draws and must produce
bit-identical trajectories, which the test suite asserts. For that reason
every inner-loop expression here is plain scalar float arithmetic in a
fixed evaluation order: do not vectorize, reorder, or "simplify" the math
in one backend without changing the other to match.
"""

from __future__ import annotations

# Pivot threshold for the static-mode window solve, relative to the largest
# matrix entry.
_PIVOT_RTOL = 1e-13


class CtrlCore:
    """Mutable per-loop controller state, plain floats and lists only."""

    __slots__ = (
        "p", "static_mode", "adaptive", "minimize",
        "dt", "hold_steps", "lam", "gamma", "zeta",
        "k0", "theta", "eps", "k", "x", "ghat",
        "p_mat", "win_x", "win_y", "win_n", "win_pos",
        "hold_count", "y_prev", "primed",
        "_a_scr", "_b_scr", "_sol_scr", "_px_scr", "_d_scr",
    )


def core_init(p, static_mode, adaptive, minimize, dt, hold_steps, lam, gamma,
              zeta, k0, theta_init, eps_init, draw_row, ghat_init=None):
    """Build the initial controller state and draw the first gains."""
    c = CtrlCore()
    c.p = p
    c.static_mode = static_mode
    c.adaptive = adaptive
    c.minimize = minimize
    c.dt = dt
    c.hold_steps = hold_steps
    c.lam = lam
    c.gamma = gamma
    c.zeta = zeta
    c.k0 = [float(v) for v in k0]
    c.theta = [float(v) for v in theta_init]
    c.eps = [float(v) for v in eps_init]
    c.ghat = [0.0] * p
    if ghat_init is not None:
        for j in range(p):
            c.ghat[j] = float(ghat_init[j])
    c.p_mat = [[gamma if r == cc else 0.0 for cc in range(p)] for r in range(p)]
    c.win_x = [[0.0] * p for _ in range(p)]
    c.win_y = [0.0] * p
    c.win_n = 0
    c.win_pos = 0
    c.hold_count = 0
    c.y_prev = 0.0
    c.primed = False
    c._a_scr = [[0.0] * p for _ in range(p)]
    c._b_scr = [0.0] * p
    c._sol_scr = [0.0] * p
    c._px_scr = [0.0] * p
    c._d_scr = [0.0] * p
    c.k = [0.0] * p
    c.x = [0.0] * p
    _draw_gains(c, draw_row)
    return c


def core_prime(c, y_meas):
    """Register the measurement taken at the initial inputs."""
    c.y_prev = y_meas if c.minimize else -y_meas
    c.primed = True


def core_advance(c):
    """Integrate the inputs across the period just elapsed."""
    dt = c.dt
    for j in range(c.p):
        c.theta[j] = c.theta[j] + dt * c.x[j]


def core_update(c, y_meas, draw_row, ghat_override=None):
    """One controller update at the freshly integrated inputs.

    Returns (switched, degenerate) as 0/1 ints. With ghat_override the
    estimator is bypassed (oracle-gradient test mode).
    """
    p = c.p
    y_eff = y_meas if c.minimize else -y_meas
    degen = 0
    if ghat_override is not None:
        for j in range(p):
            c.ghat[j] = ghat_override[j]
    else:
        dydt = (y_eff - c.y_prev) / c.dt
        if c.static_mode:
            degen = _window_push_solve(c, dydt)
        else:
            degen = _rls_push(c, dydt)
    c.y_prev = y_eff
    c.hold_count += 1

    # Any nonzero gradient component whose sign disagrees with -eps asks
    # for a switch; zero components carry no direction and never do.
    disagree = False
    for j in range(p):
        gj = c.ghat[j]
        if gj > 0.0:
            if c.eps[j] != -1.0:
                disagree = True
                break
        elif gj < 0.0:
            if c.eps[j] != 1.0:
                disagree = True
                break
    switched = 0
    if disagree and c.hold_count >= c.hold_steps:
        c.hold_count = 0
        switched = 1
        for j in range(p):
            gj = c.ghat[j]
            if gj > 0.0:
                c.eps[j] = -1.0
            elif gj < 0.0:
                c.eps[j] = 1.0

    _draw_gains(c, draw_row)
    return switched, degen


def _draw_gains(c, draw_row):
    # Non-adaptive: k = 2 k0 delta (mean k0). Adaptive: gains scale with the
    # estimated gradient magnitude, keeping a small stochastic component.
    p = c.p
    for j in range(p):
        delta = draw_row[j]
        if c.adaptive:
            kj = 2.0 * c.k0[j] * (1.0 + abs(c.ghat[j]) + c.zeta * delta)
        else:
            kj = 2.0 * c.k0[j] * delta
        c.k[j] = kj
        c.x[j] = c.eps[j] * kj


def _rls_push(c, dydt):
    """Forgetting-factor RLS update of (p_mat, ghat) with regressor c.x."""
    p = c.p
    x = c.x
    p_mat = c.p_mat
    px = c._px_scr
    for r in range(p):
        s = 0.0
        row = p_mat[r]
        for cc in range(p):
            s += row[cc] * x[cc]
        px[r] = s
    xpx = 0.0
    for r in range(p):
        xpx += x[r] * px[r]
    denom = c.lam + xpx
    if not denom > 0.0:
        return 1
    d = c._d_scr
    for r in range(p):
        d[r] = px[r] / denom
    lam = c.lam
    for r in range(p):
        row = p_mat[r]
        dr = d[r]
        for cc in range(p):
            row[cc] = (row[cc] - dr * px[cc]) / lam
    for r in range(p):
        for cc in range(r + 1, p):
            m = 0.5 * (p_mat[r][cc] + p_mat[cc][r])
            p_mat[r][cc] = m
            p_mat[cc][r] = m
    acc = 0.0
    g = c.ghat
    for cc in range(p):
        acc += x[cc] * g[cc]
    e = dydt - acc
    for r in range(p):
        g[r] = g[r] + e * d[r]
    return 0


def _window_push_solve(c, dydt):
    """Static mode: keep the last p (x, dy/dt) pairs, solve X g = Y exactly."""
    p = c.p
    row = c.win_x[c.win_pos]
    for j in range(p):
        row[j] = c.x[j]
    c.win_y[c.win_pos] = dydt
    c.win_pos = (c.win_pos + 1) % p
    if c.win_n < p:
        c.win_n += 1
        if c.win_n < p:
            return 0
    base = c.win_pos
    a = c._a_scr
    b = c._b_scr
    for r in range(p):
        src = (base + r) % p
        arow = a[r]
        wrow = c.win_x[src]
        for cc in range(p):
            arow[cc] = wrow[cc]
        b[r] = c.win_y[src]
    if not _solve_inplace(a, b, p, c._sol_scr):
        return 1
    for j in range(p):
        c.ghat[j] = c._sol_scr[j]
    return 0


def _solve_inplace(a, b, p, sol):
    """Gaussian elimination with partial pivoting; 0 if singular."""
    scale = 0.0
    for r in range(p):
        row = a[r]
        for cc in range(p):
            v = abs(row[cc])
            if v > scale:
                scale = v
    if scale == 0.0:
        return 0
    tol = _PIVOT_RTOL * scale
    for col in range(p):
        piv_row = col
        piv_val = abs(a[col][col])
        for r in range(col + 1, p):
            v = abs(a[r][col])
            if v > piv_val:
                piv_val = v
                piv_row = r
        if piv_val <= tol:
            return 0
        if piv_row != col:
            a[col], a[piv_row] = a[piv_row], a[col]
            b[col], b[piv_row] = b[piv_row], b[col]
        arow = a[col]
        akk = arow[col]
        for r in range(col + 1, p):
            brow = a[r]
            f = brow[col] / akk
            for cc in range(col, p):
                brow[cc] = brow[cc] - f * arow[cc]
            b[r] = b[r] - f * b[col]
    for r in range(p - 1, -1, -1):
        acc = b[r]
        row = a[r]
        for cc in range(r + 1, p):
            acc -= row[cc] * sol[cc]
        sol[r] = acc / row[r]
    return 1


def _quad_eval(h, th, ts, p):
    acc = 0.0
    for r in range(p):
        s = 0.0
        hrow = h[r]
        for cc in range(p):
            s += hrow[cc] * (th[cc] - ts[cc])
        acc += (th[r] - ts[r]) * s
    return 0.5 * acc


def _quad_grad(h, th, ts, sign, p, out):
    for r in range(p):
        s = 0.0
        hrow = h[r]
        for cc in range(p):
            s += hrow[cc] * (th[cc] - ts[cc])
        out[r] = sign * s


def run_loop(p, n_steps, static_mode, adaptive, minimize, oracle, dynamic_plant,
             dt, hold_steps, lam, gamma, zeta, a_filt, b_filt,
             k0, theta_init, eps_init, h, theta_star, seg_idx, draws,
             out_theta, out_y, out_q, out_ghat, out_eps, out_k,
             out_switched, out_degenerate):
    """Run the full closed loop; fills the out_* arrays (n_steps+1 records).

    Array arguments are numpy arrays shared with the compiled backend's
    signature; all hot-loop work happens on plain Python floats.
    """
    k0_l = [float(v) for v in k0]
    th0_l = [float(v) for v in theta_init]
    eps0_l = [float(v) for v in eps_init]
    h_l = [[float(v) for v in row] for row in h]
    ts_l = [[float(v) for v in row] for row in theta_star]
    seg_l = [int(v) for v in seg_idx]
    draws_l = [[float(v) for v in row] for row in draws]
    gsign = 1.0 if minimize else -1.0

    ghat0 = None
    gh_scr = [0.0] * p
    if oracle:
        _quad_grad(h_l, th0_l, ts_l[seg_l[0]], gsign, p, gh_scr)
        ghat0 = gh_scr
    c = core_init(p, static_mode, adaptive, minimize, dt, hold_steps, lam,
                  gamma, zeta, k0_l, th0_l, eps0_l, draws_l[0], ghat_init=ghat0)

    th_hist = [list(c.theta)]
    y_hist = [0.0] * (n_steps + 1)
    q_hist = [0.0] * (n_steps + 1)
    gh_hist = [list(c.ghat)]
    eps_hist = [list(c.eps)]
    k_hist = [list(c.k)]
    sw_hist = [0] * (n_steps + 1)
    dg_hist = [0] * (n_steps + 1)

    q = _quad_eval(h_l, c.theta, ts_l[seg_l[0]], p)
    filt = q
    y = q
    q_hist[0] = q
    y_hist[0] = y
    core_prime(c, y)

    for i in range(1, n_steps + 1):
        core_advance(c)
        seg = seg_l[i]
        q = _quad_eval(h_l, c.theta, ts_l[seg], p)
        if dynamic_plant:
            filt = a_filt * filt + b_filt * q
            y = filt
        else:
            y = q
        if oracle:
            _quad_grad(h_l, c.theta, ts_l[seg], gsign, p, gh_scr)
            sw, dg = core_update(c, y, draws_l[i], ghat_override=gh_scr)
        else:
            sw, dg = core_update(c, y, draws_l[i])
        th_hist.append(list(c.theta))
        q_hist[i] = q
        y_hist[i] = y
        gh_hist.append(list(c.ghat))
        eps_hist.append(list(c.eps))
        k_hist.append(list(c.k))
        sw_hist[i] = sw
        dg_hist[i] = dg

    out_theta[:, :] = th_hist
    out_y[:] = y_hist
    out_q[:] = q_hist
    out_ghat[:, :] = gh_hist
    out_eps[:, :] = eps_hist
    out_k[:, :] = k_hist
    out_switched[:] = sw_hist
    out_degenerate[:] = dg_hist
