"""Scalar-loop numeric kernels shared by the numba and pure-Python backends.

Everything in this module must stay nopython-compatible: plain floats,
int64 scalars, contiguous float64 arrays, ``math`` calls. The backend
selector in ``__init__`` rebinds these names to jitted dispatchers, so the
cross-calls below resolve to whichever backend is active.

Scale-factor codes: 0 const(c), 1 t, 2 t^2, 3 exp(t).
Time-function codes: 1 t, 2 t^2, 3 exp(t).
Torus sides: entry <= 0 means the coordinate is non-periodic.
"""

import math

import numpy as np


def t_of_u(scale_code, scale_c, u):
    """Map conformal time u back to coordinate time t."""
    if scale_code == 0:
        return scale_c * u
    elif scale_code == 1:
        return math.exp(u)
    elif scale_code == 2:
        return -1.0 / u
    else:
        return -math.log(-u)


def u_of_t(scale_code, scale_c, t):
    """Conformal time u(t), the antiderivative of 1/f."""
    if scale_code == 0:
        return t / scale_c
    elif scale_code == 1:
        return math.log(t)
    elif scale_code == 2:
        return -1.0 / t
    else:
        return -math.exp(-t)


def scale_f(scale_code, scale_c, t):
    if scale_code == 0:
        return scale_c
    elif scale_code == 1:
        return t
    elif scale_code == 2:
        return t * t
    else:
        return math.exp(t)


def scale_df(scale_code, scale_c, t):
    if scale_code == 0:
        return 0.0
    elif scale_code == 1:
        return 1.0
    elif scale_code == 2:
        return 2.0 * t
    else:
        return math.exp(t)


def phi_val(phi_code, t):
    if phi_code == 2:
        return t * t
    elif phi_code == 3:
        return math.exp(t)
    return t


def phi_deriv(phi_code, t):
    if phi_code == 2:
        return 2.0 * t
    elif phi_code == 3:
        return math.exp(t)
    return 1.0


def tau_of_u(scale_code, scale_c, phi_code, u):
    """Value of the time function phi(t) expressed through conformal time."""
    return phi_val(phi_code, t_of_u(scale_code, scale_c, u))


def nearest_image_delta(dx, side):
    """Reduce a coordinate difference to the nearest periodic image."""
    if side <= 0.0:
        return dx
    d = dx % side
    if d > 0.5 * side:
        d -= side
    return d


def spatial_dist(xa, xb, sides):
    """Euclidean distance with per-coordinate nearest-image reduction."""
    acc = 0.0
    for i in range(xa.shape[0]):
        d = nearest_image_delta(xb[i] - xa[i], sides[i])
        acc += d * d
    return math.sqrt(acc)


def chain_null_length(nodes, scale_code, scale_c, phi_code, sides, u_lo, u_hi):
    """Total null length of the elbow chain through the given anchors.

    ``nodes`` is (K, 1+n): column 0 holds conformal time, the rest spatial
    coordinates. Causally related consecutive anchors contribute a single
    chord; spacelike-related ones are joined through the cheaper of the two
    exact light-cone apexes. Returns inf when a waypoint or every available
    apex leaves the conformal-time domain.
    """
    K = nodes.shape[0]
    n = nodes.shape[1] - 1
    for k in range(1, K - 1):
        if not (u_lo < nodes[k, 0] < u_hi):
            return np.inf
    total = 0.0
    for k in range(K - 1):
        ua = nodes[k, 0]
        ub = nodes[k + 1, 0]
        acc = 0.0
        for j in range(n):
            d = nearest_image_delta(nodes[k + 1, 1 + j] - nodes[k, 1 + j], sides[j])
            acc += d * d
        d = math.sqrt(acc)
        du = ub - ua
        ta = tau_of_u(scale_code, scale_c, phi_code, ua)
        tb = tau_of_u(scale_code, scale_c, phi_code, ub)
        if abs(du) >= d:
            total += abs(tb - ta)
            continue
        best = np.inf
        u_dn = 0.5 * (ua + ub - d)
        if u_dn > u_lo:
            td = tau_of_u(scale_code, scale_c, phi_code, u_dn)
            best = abs(ta - td) + abs(tb - td)
        u_up = 0.5 * (ua + ub + d)
        if u_up < u_hi:
            tu = tau_of_u(scale_code, scale_c, phi_code, u_up)
            cand = abs(tu - ta) + abs(tu - tb)
            if cand < best:
                best = cand
        if best == np.inf:
            return np.inf
        total += best
    return total


def refine_waypoints(nodes, scale_code, scale_c, phi_code, sides, u_lo, u_hi,
                     step0, step_min, max_evals):
    """Coordinate-wise pattern search over the interior anchors of a chain.

    Mutates ``nodes`` in place; the first and last rows are fixed endpoints.
    Deterministic: sweeps rows then columns, halving the step whenever a
    full sweep yields no improvement. Returns (best_cost, evaluations).
    """
    best = chain_null_length(nodes, scale_code, scale_c, phi_code, sides, u_lo, u_hi)
    evals = 1
    K = nodes.shape[0]
    D = nodes.shape[1]
    step = step0
    while step > step_min and evals < max_evals:
        improved = False
        for r in range(1, K - 1):
            for c in range(D):
                base = nodes[r, c]
                nodes[r, c] = base + step
                cand = chain_null_length(nodes, scale_code, scale_c, phi_code,
                                         sides, u_lo, u_hi)
                evals += 1
                if cand < best and best - cand > 1e-15 * (1.0 + abs(cand)):
                    best = cand
                    improved = True
                    continue
                nodes[r, c] = base - step
                cand = chain_null_length(nodes, scale_code, scale_c, phi_code,
                                         sides, u_lo, u_hi)
                evals += 1
                if cand < best and best - cand > 1e-15 * (1.0 + abs(cand)):
                    best = cand
                    improved = True
                else:
                    nodes[r, c] = base
                if evals >= max_evals:
                    break
            if evals >= max_evals:
                break
        if not improved:
            step *= 0.5
    return best, evals


def realize_chain(nodes, scale_code, scale_c, phi_code, sides, u_lo, u_hi):
    """Expand an anchor chain into explicit breakpoint nodes.

    Inserts the apex chosen by ``chain_null_length`` for each
    spacelike-related anchor pair and accumulates nearest-image spatial
    displacements so consecutive output nodes share exact coordinates.
    Returns (out, m): the first m rows of ``out`` are the realized
    (u, x) breakpoints; m == 0 flags an infeasible chain.
    """
    K = nodes.shape[0]
    D = nodes.shape[1]
    n = D - 1
    out = np.empty((2 * K - 1, D))
    delta = np.empty(n)
    for j in range(D):
        out[0, j] = nodes[0, j]
    m = 1
    for k in range(K - 1):
        ua = nodes[k, 0]
        ub = nodes[k + 1, 0]
        acc = 0.0
        for j in range(n):
            delta[j] = nearest_image_delta(nodes[k + 1, 1 + j] - nodes[k, 1 + j],
                                           sides[j])
            acc += delta[j] * delta[j]
        d = math.sqrt(acc)
        du = ub - ua
        if d == 0.0 and du == 0.0:
            continue
        base = m - 1
        if abs(du) >= d:
            out[m, 0] = ub
            for j in range(n):
                out[m, 1 + j] = out[base, 1 + j] + delta[j]
            m += 1
            continue
        ta = tau_of_u(scale_code, scale_c, phi_code, ua)
        tb = tau_of_u(scale_code, scale_c, phi_code, ub)
        l_dn = np.inf
        u_dn = 0.5 * (ua + ub - d)
        if u_dn > u_lo:
            td = tau_of_u(scale_code, scale_c, phi_code, u_dn)
            l_dn = abs(ta - td) + abs(tb - td)
        l_up = np.inf
        u_up = 0.5 * (ua + ub + d)
        if u_up < u_hi:
            tu = tau_of_u(scale_code, scale_c, phi_code, u_up)
            l_up = abs(tu - ta) + abs(tu - tb)
        if l_dn == np.inf and l_up == np.inf:
            return out, 0
        if l_dn <= l_up:
            u_star = u_dn
            frac = 0.5 * (d - du) / d
        else:
            u_star = u_up
            frac = 0.5 * (d + du) / d
        out[m, 0] = u_star
        for j in range(n):
            out[m, 1 + j] = out[base, 1 + j] + frac * delta[j]
        m += 1
        out[m, 0] = ub
        for j in range(n):
            out[m, 1 + j] = out[base, 1 + j] + delta[j]
        m += 1
    return out, m


def max_polyline_length(t_knots, rhos):
    """Largest proper time among monotone causal polylines.

    Each row of ``t_knots`` holds increasing coordinate times; ``rhos``
    holds the per-chord ratio of spatial conformal speed to the cone bound
    (0 = vertical, 1 = null). Chords are straight in conformal coordinates,
    so each contributes sqrt(1 - rho^2) * dt exactly.
    """
    best = 0.0
    m = t_knots.shape[0]
    K = t_knots.shape[1]
    for i in range(m):
        total = 0.0
        for k in range(K - 1):
            rho = rhos[i, k]
            total += math.sqrt(1.0 - rho * rho) * (t_knots[i, k + 1] - t_knots[i, k])
        if total > best:
            best = total
    return best


def _geodesic_rhs(y, deriv, D, scale_code, scale_c):
    """Right-hand side for geodesic + frame transport on a warped product."""
    t = y[0]
    f = scale_f(scale_code, scale_c, t)
    df = scale_df(scale_code, scale_c, t)
    ff = f * df
    # f can touch 0 transiently in substeps right at the domain boundary;
    # the caller rolls the step back, so any finite value works here
    fof = df / f if f != 0.0 else 0.0
    vt = y[D]
    for i in range(D):
        deriv[i] = y[D + i]
    sp = 0.0
    for i in range(1, D):
        sp += y[D + i] * y[D + i]
    deriv[D] = -ff * sp
    for i in range(1, D):
        deriv[D + i] = -2.0 * fof * vt * y[D + i]
    base = 2 * D
    for a in range(D):
        col = base + a * D
        ft = y[col]
        s = 0.0
        for i in range(1, D):
            s += y[D + i] * y[col + i]
        deriv[col] = -ff * s
        for i in range(1, D):
            deriv[col + i] = -fof * (vt * y[col + i] + ft * y[D + i])


def geodesic_rk4(coords, vel, frame, scale_code, scale_c, steps, t_lo, t_hi):
    """Integrate a geodesic with parallel frame over unit parameter.

    Classical fixed-step fourth-order scheme. ``frame`` is (D, D) with
    columns transported in parallel. Returns (coords, vel, frame, status,
    exit_fraction); status 1 means the time coordinate left (t_lo, t_hi),
    with the state rolled back to the last in-domain step.
    """
    D = coords.shape[0]
    size = 2 * D + D * D
    y = np.empty(size)
    for i in range(D):
        y[i] = coords[i]
        y[D + i] = vel[i]
    for a in range(D):
        for i in range(D):
            y[2 * D + a * D + i] = frame[i, a]
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    tmp = np.empty(size)
    prev = np.empty(size)
    h = 1.0 / steps
    status = 0
    frac = 1.0
    for step in range(steps):
        for i in range(size):
            prev[i] = y[i]
        _geodesic_rhs(y, k1, D, scale_code, scale_c)
        for i in range(size):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        _geodesic_rhs(tmp, k2, D, scale_code, scale_c)
        for i in range(size):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        _geodesic_rhs(tmp, k3, D, scale_code, scale_c)
        for i in range(size):
            tmp[i] = y[i] + h * k3[i]
        _geodesic_rhs(tmp, k4, D, scale_code, scale_c)
        for i in range(size):
            y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not (t_lo < y[0] < t_hi):
            status = 1
            bound = t_lo if y[0] <= t_lo else t_hi
            denom = prev[0] - y[0]
            theta = 0.0
            if denom != 0.0:
                theta = (prev[0] - bound) / denom
                if theta < 0.0:
                    theta = 0.0
                elif theta > 1.0:
                    theta = 1.0
            frac = (step + theta) / steps
            for i in range(size):
                y[i] = prev[i]
            break
    out_c = np.empty(D)
    out_v = np.empty(D)
    out_f = np.empty((D, D))
    for i in range(D):
        out_c[i] = y[i]
        out_v[i] = y[D + i]
    for a in range(D):
        for i in range(D):
            out_f[i, a] = y[2 * D + a * D + i]
    return out_c, out_v, out_f, status, frac


def lorentzian_length_builtin(samples, scale_code, scale_c, rel_tol):
    """Trapezoidal proper time of a sampled causal segment.

    Tangents are finite differences over unit parameter (central in the
    interior, one-sided at the ends), each measured with the metric at its
    own sample. Returns (length, bad_index); bad_index >= 0 flags the first
    tangent classified spacelike beyond ``rel_tol``.
    """
    K = samples.shape[0]
    D = samples.shape[1]
    dt = 1.0 / (K - 1)
    v = np.empty(D)
    integrand = np.empty(K)
    for k in range(K):
        if k == 0:
            for j in range(D):
                v[j] = (samples[1, j] - samples[0, j]) / dt
        elif k == K - 1:
            for j in range(D):
                v[j] = (samples[K - 1, j] - samples[K - 2, j]) / dt
        else:
            for j in range(D):
                v[j] = (samples[k + 1, j] - samples[k - 1, j]) / (2.0 * dt)
        f = scale_f(scale_code, scale_c, samples[k, 0])
        q = -v[0] * v[0]
        norm_sq = v[0] * v[0]
        for j in range(1, D):
            q += f * f * v[j] * v[j]
            norm_sq += v[j] * v[j]
        if q > rel_tol * norm_sq:
            return 0.0, k
        integrand[k] = math.sqrt(max(-q, 0.0))
    total = 0.0
    for k in range(K - 1):
        total += 0.5 * (integrand[k] + integrand[k + 1]) * dt
    return total, -1
