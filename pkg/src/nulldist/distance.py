"""Null distance estimation: exact closed forms on Minkowski space, upper
bounds from zigzag optimization elsewhere, lower bounds from the 1-Lipschitz
inequality.

The search space is chains of piecewise-null elbows. Free variables are the
waypoints between elbows, in conformal coordinates; each elbow's apex is
recovered in closed form from the null condition, so every candidate chain
is exactly piecewise causal and the objective is always finite on the
feasible set.
"""

from dataclasses import dataclass

import numpy as np

from . import errors
from . import geometry
from . import timefns
from . import curves
from . import _kernels as K


@dataclass(frozen=True, eq=False)
class NullDistanceEstimate:
    upper: float
    lower: float
    witness: curves.PiecewiseCausalCurve
    method: str  # "exact" | "zigzag_opt"
    iterations: int


@dataclass(frozen=True, eq=False)
class ZigzagSpec:
    """Free variables of one zigzag candidate: anchor chain in (u, x)."""

    apex_count: int
    anchors: np.ndarray  # (apex_count + 1, 1 + n), endpoints included

    def realize(self, st):
        """Expand to explicit breakpoints; raises if no apex fits the domain."""
        code, c = st.scale_codes()
        u_lo, u_hi = st.u_interval
        out, m = K.realize_chain(self.anchors, code, c, 1, np.ascontiguousarray(
            st.sides_array), u_lo, u_hi)
        if m == 0:
            raise errors.NumericalError("zigzag has no apex inside the domain")
        return out[:m]


def _tau_codes(st, tau):
    if st.family not in ("minkowski", "grw"):
        raise errors.UnsupportedError(
            "zigzag estimation needs a built-in spacetime family")
    if tau.kind == timefns.CUSTOM:
        raise errors.UnsupportedError(
            "zigzag estimation needs a whitelist time function")
    code, c = st.scale_codes()
    return code, c, tau.phi_code


def _materialize(st, tau, nodes, p, q):
    """Turn realized (u, x) breakpoints into a curve with exact endpoints."""
    rows = np.empty_like(nodes)
    rows[:, 0] = [st.t_from_u(u) for u in nodes[:, 0]]
    rows[:, 1:] = nodes[:, 1:]
    rows[0] = p.coords
    rows[-1, 0] = q.coords[0]  # spatial part may be a periodic image of q
    segs = []
    for k in range(rows.shape[0] - 1):
        du = nodes[k + 1, 0] - nodes[k, 0]
        direction = geometry.FUTURE if du > 0 else geometry.PAST
        segs.append(curves.CausalSegment(samples=rows[k:k + 2].copy(),
                                         direction=direction))
    if not segs:
        segs = [curves.CausalSegment(samples=np.array([p.coords, p.coords]),
                                     direction=geometry.FUTURE)]
    return curves.PiecewiseCausalCurve(segments=tuple(segs))


def minkowski_exact(st, p, q, tau=None):
    """Exact null distance max(|dt|, |dx|) for coordinate time on Minkowski.

    Causally related pairs get a single-segment witness of length |dt|;
    spacelike pairs a two-null-segment witness through the cone
    intersection apex.
    """
    if st.family != "minkowski":
        raise errors.UnsupportedError("exact formula requires the Minkowski family")
    if tau is None:
        tau = timefns.coordinate_t()
    if tau.kind not in (timefns.COORDINATE_T,) and not (
            tau.kind == timefns.PHI_OF_T and tau.phi_code == 1):
        raise errors.UnsupportedError("exact formula requires coordinate time")
    dt = float(q.coords[0] - p.coords[0])
    dx = float(np.linalg.norm(q.coords[1:] - p.coords[1:]))
    value = max(abs(dt), dx)
    if np.array_equal(p.coords, q.coords):
        witness = curves.PiecewiseCausalCurve(segments=(
            curves.CausalSegment(samples=np.array([p.coords, q.coords]),
                                 direction=geometry.FUTURE),))
        return NullDistanceEstimate(upper=0.0, lower=0.0, witness=witness,
                                    method="exact", iterations=0)
    if abs(dt) >= dx:
        direction = geometry.FUTURE if dt > 0 else geometry.PAST
        witness = curves.PiecewiseCausalCurve(segments=(
            curves.CausalSegment(samples=np.array([p.coords, q.coords]),
                                 direction=direction),))
    else:
        t_apex = 0.5 * (p.coords[0] + q.coords[0] - dx)
        frac = 0.5 * (dx - dt) / dx
        apex = np.concatenate(([t_apex], p.coords[1:] + frac * (q.coords[1:] - p.coords[1:])))
        witness = curves.PiecewiseCausalCurve(segments=(
            curves.CausalSegment(samples=np.array([p.coords, apex]),
                                 direction=geometry.PAST),
            curves.CausalSegment(samples=np.array([apex, q.coords]),
                                 direction=geometry.FUTURE)))
    upper = curves.null_length(tau, witness)
    return NullDistanceEstimate(upper=upper, lower=upper, witness=witness,
                                method="exact", iterations=0)


def estimate(st, tau, p, q, N=2, restarts=8, seed=0, max_evals=20000,
             warm_start=None):
    """Upper and lower bounds on the null distance between p and q.

    Minimizes null length over piecewise-null zigzag chains with up to N
    elbows: deterministic coordinate-wise pattern search on the waypoints,
    with seeded random restarts. The lower bound is |tau(q) - tau(p)|.
    Monotone: more elbows and more restarts never increase the result.
    """
    if N < 1:
        raise errors.ArgumentError("N must be at least 1")
    if restarts < 1:
        raise errors.ArgumentError("restarts must be at least 1")
    code, c, phi_code = _tau_codes(st, tau)
    lower = abs(tau.eval(q) - tau.eval(p))
    if np.array_equal(p.coords, q.coords):
        witness = curves.PiecewiseCausalCurve(segments=(
            curves.CausalSegment(samples=np.array([p.coords, q.coords]),
                                 direction=geometry.FUTURE),))
        return NullDistanceEstimate(upper=0.0, lower=0.0, witness=witness,
                                    method="zigzag_opt", iterations=0)
    sides = np.ascontiguousarray(st.sides_array)
    u_lo, u_hi = st.u_interval
    up = st.conformal_u(p.coords[0])
    uq = st.conformal_u(q.coords[0])
    delta = np.array([K.nearest_image_delta(b - a, s) for a, b, s in zip(
        p.coords[1:], q.coords[1:], sides)])
    d_tot = float(np.linalg.norm(delta))
    span = max(abs(uq - up), d_tot, 1e-6)
    rng = np.random.default_rng(seed)

    best = None  # (cost, segments, nodes)
    iterations = 0

    def consider(anchors, cost, evals):
        nonlocal best, iterations
        iterations += evals
        if not np.isfinite(cost):
            return
        code_, c_ = st.scale_codes()
        out, m = K.realize_chain(anchors, code_, c_, phi_code, sides, u_lo, u_hi)
        if m == 0:
            return
        nodes = out[:m].copy()
        segs = m - 1
        if best is None:
            best = (cost, segs, nodes)
            return
        tol = 1e-15 * (1.0 + abs(best[0]))
        if cost < best[0] - tol:
            best = (cost, segs, nodes)
        elif abs(cost - best[0]) <= tol:
            if segs < best[1] or (segs == best[1] and
                                  tuple(nodes.ravel()) < tuple(best[2].ravel())):
                best = (cost, segs, nodes)

    candidates = []
    if warm_start is not None:
        bp = warm_start.breakpoints
        anchors = np.empty((bp.shape[0], st.dimension))
        anchors[:, 0] = [st.conformal_u(t) for t in bp[:, 0]]
        anchors[:, 1:] = bp[:, 1:]
        candidates.append(anchors)

    for k in range(1, N + 1):
        w = np.linspace(0.0, 1.0, k + 1)[:, None]
        base = np.empty((k + 1, st.dimension))
        base[:, 0] = up + w[:, 0] * (uq - up)
        base[:, 1:] = p.coords[1:] + w * delta
        n_restarts = restarts if k >= 2 else 1
        for r in range(n_restarts):
            anchors = base.copy()
            if r > 0:
                jitter = rng.standard_normal((k - 1, st.dimension))
                anchors[1:-1] += 0.25 * span / k * jitter
            step0 = 0.5 * span / k
            cost, evals = K.refine_waypoints(
                anchors, code, c, phi_code, sides, u_lo, u_hi,
                step0, 1e-10 * max(span, 1.0), max_evals)
            consider(anchors, cost, evals)

    for anchors in candidates:
        cost = K.chain_null_length(anchors, code, c, phi_code, sides, u_lo, u_hi)
        consider(anchors, cost, 1)

    if best is None:
        raise errors.NumericalError(
            "no feasible zigzag found; try more elbows or check the domain")
    witness = _materialize(st, tau, best[2], p, q)
    upper = curves.null_length(tau, witness)
    return NullDistanceEstimate(upper=upper, lower=lower, witness=witness,
                                method="zigzag_opt", iterations=iterations)


def causally_related(st, p, q):
    """True when q lies in the causal future of p (built-in families)."""
    du = st.conformal_u(q.coords[0]) - st.conformal_u(p.coords[0])
    return du >= st.spatial_distance(p.coords[1:], q.coords[1:])


@dataclass(frozen=True)
class DiamondReport:
    bound: float
    rows: tuple  # (x, y, upper, bound)
    ok: bool


def diamond_bound_check(st, tau, p, q, samples, seed=0, N=1, restarts=2,
                        tol=1e-6):
    """Sample the diamond between p and q and check the 2(tau(q)-tau(p)) cap.

    Points are rejection-sampled from the causal diamond in conformal
    coordinates; for each sampled pair the zigzag upper bound must stay
    below 2 (tau(q) - tau(p)) + tol. Report-only.
    """
    if not causally_related(st, p, q):
        raise errors.ArgumentError("need p <= q for a diamond")
    bound = 2.0 * (tau.eval(q) - tau.eval(p))
    rng = np.random.default_rng(seed)
    up = st.conformal_u(p.coords[0])
    uq = st.conformal_u(q.coords[0])
    pts = [p, q]
    guard = 0
    while len(pts) < samples + 2 and guard < 100000:
        guard += 1
        u = rng.uniform(up, uq)
        x = p.coords[1:] + rng.uniform(-1, 1, size=st.n) * max(uq - up, 1e-9)
        if st.spatial_distance(p.coords[1:], x) <= u - up and \
                st.spatial_distance(x, q.coords[1:]) <= uq - u:
            pts.append(geometry.Point(np.concatenate(([st.t_from_u(u)], x))))
    rows = []
    ok = True
    for i in range(0, len(pts) - 1, 2):
        x, y = pts[i], pts[i + 1]
        est = estimate(st, tau, x, y, N=N, restarts=restarts, seed=seed + i)
        good = est.upper <= bound + tol
        ok = ok and good
        rows.append((x, y, est.upper, bound))
    return DiamondReport(bound=bound, rows=tuple(rows), ok=ok)


@dataclass(frozen=True)
class LevelSetRow:
    p: geometry.Point
    q: geometry.Point
    upper: float
    scaled_distance: float

    @property
    def ratio(self):
        if self.scaled_distance == 0:
            return 0.0 if self.upper == 0 else np.inf
        return self.upper / self.scaled_distance


@dataclass(frozen=True)
class LevelSetReport:
    level: float
    constant: float
    rows: tuple
    tol: float

    @property
    def ok(self):
        return all(r.ratio <= 1.0 + self.tol for r in self.rows)


def sample_level_points(st, t_level, count, seed, box=1.0):
    """Deterministic sample of points on the level {time coordinate = t}."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        if st.spatial == "torus":
            x = rng.uniform(0, 1, size=st.n) * st.sides
        else:
            x = rng.uniform(-box, box, size=st.n)
        pts.append(geometry.Point(np.concatenate(([t_level], x))))
    return pts


def verify_level_set_inequality(st, f, t_level, C, pairs, seed=0, N=2,
                                restarts=4, tol=1e-3, grad_tol=1e-6):
    """Check upper estimates against C times the level-set distance.

    Requires |grad f|_g = C on the level (verified numerically on the
    sampled points); each row compares the zigzag upper bound with
    C * d_{h_t} and the report passes when every ratio is at most 1 + tol.
    """
    if isinstance(pairs, int):
        pts = sample_level_points(st, t_level, 2 * pairs, seed)
        pair_list = [(pts[2 * i], pts[2 * i + 1]) for i in range(pairs)]
    else:
        pair_list = list(pairs)
    for p, _ in pair_list[:8]:
        gradf = geometry.gradient(st, f, p)
        norm = geometry.g_norm(st, gradf)
        if abs(norm - C) > grad_tol:
            raise errors.PreconditionError(
                f"|grad f| = {norm} deviates from C = {C} on the level set")
    rows = []
    for i, (p, q) in enumerate(pair_list):
        est = estimate(st, f, p, q, N=N, restarts=restarts, seed=seed + 7 * i)
        dht = st.level_distance(t_level, p.coords[1:], q.coords[1:])
        rows.append(LevelSetRow(p=p, q=q, upper=est.upper,
                                scaled_distance=C * dht))
    return LevelSetReport(level=t_level, constant=C, rows=tuple(rows), tol=tol)
