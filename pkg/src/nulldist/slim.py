"""Slim-cone machinery: the narrowed Minkowski metric, cone-domination
certificates on normal charts, and the explicit two-null-segment zigzag
between nearby level-set points.

The slim metric eta_eps = -(1-eps) dt^2 + sum dx_i^2 has a strictly
narrower cone than eta; on a small enough normal-chart ball every
eta_eps-causal chord maps to a strictly timelike spacetime chord, which is
what makes the chart zigzag a genuine piecewise causal curve.
"""

from dataclasses import dataclass

import numpy as np

from . import errors
from . import geometry
from . import curves
from . import distance


@dataclass(frozen=True)
class SlimMetric:
    epsilon: float
    dimension: int

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise errors.ArgumentError("epsilon must lie in (0, 1)")


def eta_eps_inner(eps, v, w):
    """Bilinear form -(1-eps) v0 w0 + v.w on chart vectors."""
    if not 0 < eps < 1:
        raise errors.ArgumentError("epsilon must lie in (0, 1)")
    return _eta_eps(eps, np.asarray(v, float), np.asarray(w, float))


def _eta_eps(eps, v, w):
    # internal variant: eps = 0 means the plain Minkowski form
    return float(-(1.0 - eps) * v[0] * w[0] + v[1:] @ w[1:])


@dataclass(eq=False)
class NormalChart:
    """Normal coordinates at a point, frame-aligned to a temporal function.

    ``frame`` columns are a g-orthonormal basis (E_0 timelike) such that
    the chart differential sends grad f to -C e_0 and, when supplied, the
    level-curve tangent to e_1. from_chart integrates geodesics; to_chart
    inverts them by Newton shooting.
    """

    st: geometry.Spacetime
    center: geometry.Point
    frame: np.ndarray
    constant: float
    steps: int = 64
    chart_id: str = "normal"

    def from_chart(self, v):
        v = np.asarray(v, dtype=float)
        vec = geometry.TangentVector(base=self.center,
                                     components=self.frame @ v)
        return geometry.exp_map(self.st, vec, steps=self.steps).point

    def to_chart(self, q, tol=1e-13, max_iter=40):
        """Invert the exponential map by Newton iteration."""
        target = q.coords
        v = np.linalg.solve(self.frame, target - self.center.coords)
        for _ in range(max_iter):
            res = self.from_chart(v).coords - target
            if np.linalg.norm(res) <= tol * (1.0 + np.linalg.norm(target)):
                return v
            J = self._jacobian(v)
            v = v - np.linalg.solve(J, res)
        res = self.from_chart(v).coords - target
        if np.linalg.norm(res) <= 1e-9 * (1.0 + np.linalg.norm(target)):
            return v
        raise errors.NumericalError("chart inversion did not converge")

    def _jacobian(self, v, step=1e-6):
        dim = v.size
        h = step * (1.0 + float(np.linalg.norm(v)))
        J = np.empty((dim, dim))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            J[:, i] = (self.from_chart(v + e).coords
                       - self.from_chart(v - e).coords) / (2 * h)
        return J

    def pullback_metric(self, x, step=1e-6):
        """Metric of the spacetime pulled back to chart coordinates at x."""
        x = np.asarray(x, dtype=float)
        J = self._jacobian(x, step=step)
        g = self.st.metric_at(self.from_chart(x))
        return J.T @ g @ J


def normal_chart(st, f, p, tangent=None, steps=64):
    """Build the aligned normal chart at p for a temporal function f.

    E_0 = -grad f / C with C = |grad f|_g; E_1 is the supplied level-curve
    tangent (must be g-unit and orthogonal to grad f); the rest of the
    frame comes from Gram-Schmidt over the coordinate basis.
    """
    dim = st.dimension
    g = st.metric_at(p)
    gradf = geometry.gradient(st, f, p)
    norm_sq = float(gradf.components @ g @ gradf.components)
    if norm_sq >= 0:
        raise errors.PreconditionError("grad f is not timelike at the center")
    C = float(np.sqrt(-norm_sq))
    basis = [-gradf.components / C]
    signs = [-1.0]
    if tangent is not None:
        tv = np.asarray(tangent.components if hasattr(tangent, "components")
                        else tangent, dtype=float)
        if abs(float(basis[0] @ g @ tv)) > 1e-9 * np.linalg.norm(tv):
            raise errors.ArgumentError("tangent is not orthogonal to grad f")
        q = float(tv @ g @ tv)
        if q <= 0:
            raise errors.ArgumentError("tangent must be spacelike")
        basis.append(tv / np.sqrt(q))
        signs.append(1.0)
    for k in range(dim):
        if len(basis) == dim:
            break
        cand = np.zeros(dim)
        cand[k] = 1.0
        for vec, sign in zip(basis, signs):
            cand = cand - sign * float(cand @ g @ vec) * vec
        q = float(cand @ g @ cand)
        if q <= 1e-12:
            continue
        basis.append(cand / np.sqrt(q))
        signs.append(1.0)
    if len(basis) != dim:
        raise errors.NumericalError("failed to complete the orthonormal frame")
    frame = np.column_stack(basis)
    chart = NormalChart(st=st, center=p, frame=frame, constant=C, steps=steps)
    eta = np.diag(np.concatenate(([-1.0], np.ones(dim - 1))))
    if np.max(np.abs(frame.T @ g @ frame - eta)) > 1e-9:
        raise errors.NumericalError("frame is not g-orthonormal")
    return chart


@dataclass(frozen=True)
class ConeDominationResult:
    max_gap: float
    radius: float
    ok: bool
    argmax_point: np.ndarray | None
    argmax_direction: np.ndarray | None


def slim_directions(eps, dim, dir_grid):
    """Generating set of the slim cone: both unit-time slices of its boundary
    and interior, |spatial| <= sqrt(1-eps)."""
    omegas = geometry.unit_sphere_grid(dim - 1, max(4, dir_grid // 8))
    radii = np.linspace(0.0, np.sqrt(1.0 - eps), max(2, dir_grid // omegas.shape[0]))
    dirs = [np.concatenate(([1.0], np.zeros(dim - 1))),
            np.concatenate(([-1.0], np.zeros(dim - 1)))]
    for w in omegas:
        for r in radii[1:]:
            dirs.append(np.concatenate(([1.0], r * w)))
            dirs.append(np.concatenate(([-1.0], r * w)))
    return np.array(dirs)


def verify_cone_domination(st, chart, eps, radius, point_grid=32, dir_grid=64):
    """Sampled certificate that slim-causal chart vectors map to causal ones.

    Evaluates gap(x, v) = pullback_g(v, v) - eta_eps(v, v) over a grid of
    chart points in the Euclidean ball of the given radius and slim-cone
    directions normalized to unit time component. All gaps negative means
    the chart ball maps slim cones strictly inside the spacetime cones; on
    flat space the gap is identically -eps. Chart points whose geodesics
    escape the domain fail the certificate.
    """
    if radius < 0:
        raise errors.ArgumentError("radius must be nonnegative")
    if point_grid < 16 or dir_grid < 16:
        raise errors.ArgumentError("grids must have at least 16 entries")
    dim = st.dimension
    dirs = slim_directions(eps, dim, dir_grid)
    eta_eps_vals = np.array([_eta_eps(eps, v, v) for v in dirs])
    if radius == 0:
        points = [np.zeros(dim)]
    else:
        sphere = geometry.unit_sphere_grid(dim, max(4, point_grid // 4))
        shells = np.linspace(0.0, radius, max(2, point_grid // sphere.shape[0] + 1))
        points = [np.zeros(dim)]
        for r in shells[1:]:
            for w in sphere:
                points.append(r * w)
    worst = -np.inf
    arg_p = None
    arg_v = None
    for x in points:
        try:
            P = chart.pullback_metric(x)
        except errors.DomainEscapeError:
            return ConeDominationResult(max_gap=np.inf, radius=radius, ok=False,
                                        argmax_point=x, argmax_direction=None)
        gaps = np.einsum("ki,ij,kj->k", dirs, P, dirs) - eta_eps_vals
        k = int(np.argmax(gaps))
        if gaps[k] > worst:
            worst = float(gaps[k])
            arg_p = x
            arg_v = dirs[k]
    return ConeDominationResult(max_gap=worst, radius=radius, ok=worst < 0,
                                argmax_point=arg_p, argmax_direction=arg_v)


def certified_radius(st, chart, eps, r0=1.0, iters=8, point_grid=32, dir_grid=64):
    """Largest certified ball radius found by bisection (iters halvings)."""
    if verify_cone_domination(st, chart, eps, r0, point_grid, dir_grid).ok:
        return r0
    lo, hi = 0.0, r0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if verify_cone_domination(st, chart, eps, mid, point_grid, dir_grid).ok:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise errors.NumericalError("no certified radius found; center too curved")
    return lo


def t_star(q_s, eps):
    """Apex time of the slim zigzag toward chart point (t_s, x_s).

    q_s may be the chart vector or the pair (t_s, |x_s|). Requires the
    spatial offset to be nonzero and the denominator bounded away from 0.
    """
    if not 0 <= eps < 1:
        raise errors.ArgumentError("epsilon must lie in [0, 1)")
    q_s = np.asarray(q_s, dtype=float)
    t_s = float(q_s[0])
    a = float(np.linalg.norm(q_s[1:])) if q_s.size > 2 else abs(float(q_s[1]))
    root = np.sqrt(1.0 - eps)
    denom = 2.0 * root * (a - root * t_s)
    if a == 0.0 or abs(a - root * t_s) <= 1e-12 * max(1.0, a, abs(t_s)):
        raise errors.DegenerateConfigurationError(
            "slim apex undefined: spatial offset vanishes against the cone")
    return (a * a - (1.0 - eps) * t_s * t_s) / denom


@dataclass(frozen=True, eq=False)
class SlimZigzag:
    curve: curves.PiecewiseCausalCurve
    null_len: float
    t_star: float
    apex_chart: np.ndarray
    target_chart: np.ndarray
    nullity_residuals: tuple


@dataclass(frozen=True, eq=False)
class LevelCurve:
    """A curve on a level set: s -> Point, with its unit tangent at s=0."""

    point_at: object
    tangent0: geometry.TangentVector

    def __call__(self, s):
        return self.point_at(s)


def spatial_level_line(st, p, omega):
    """Unit-speed straight coordinate line on the level through p.

    Speed is measured in the induced level metric, so the coordinate
    velocity is omega / f(t) on warped products.
    """
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    rate = 1.0
    if st.family == "grw":
        rate = 1.0 / st.scale(p.coords[0])

    def at(s):
        x = p.coords[1:] + s * rate * omega
        return geometry.Point(np.concatenate(([p.coords[0]], x)))

    comps = np.concatenate(([0.0], rate * omega))
    return LevelCurve(point_at=at, tangent0=geometry.TangentVector(
        base=p, components=comps))


def build_slim_zigzag(st, f, chart, gamma, s, eps, radius=None,
                      samples_per_segment=9):
    """The two-segment slim zigzag from the chart center to gamma(s).

    Both chart segments are exactly slim-null by construction; the mapped
    curve is piecewise causal whenever the target stays inside the
    certified radius. Null length equals twice the drop of f at the apex.
    """
    if not 0 <= eps < 1:
        raise errors.ArgumentError("epsilon must lie in [0, 1)")
    q_chart = chart.to_chart(gamma(s))
    if radius is not None and np.linalg.norm(q_chart) > radius:
        raise errors.OutOfNeighborhoodError(
            f"target at |x| = {np.linalg.norm(q_chart):.3g} exceeds the "
            f"certified radius {radius:.3g}")
    t_s = q_chart[0]
    x_s = q_chart[1:]
    a = float(np.linalg.norm(x_s))
    ts = t_star(np.concatenate(([t_s], [a])), eps)
    root = np.sqrt(1.0 - eps)
    r_chart = np.concatenate(([ts], root * ts * x_s / a))
    res1 = abs(_eta_eps(eps, r_chart, r_chart))
    dvec = q_chart - r_chart
    res2 = abs(_eta_eps(eps, dvec, dvec))
    scale = max(1.0, float(q_chart @ q_chart))
    if res1 > 1e-12 * scale or res2 > 1e-12 * scale:
        raise errors.NumericalError(
            f"slim segments are not null: residuals {res1:.3g}, {res2:.3g}")
    segs = []
    for start, end, direction in (
            (np.zeros_like(q_chart), r_chart,
             geometry.FUTURE if ts > 0 else geometry.PAST),
            (r_chart, q_chart,
             geometry.PAST if ts > t_s else geometry.FUTURE)):
        w = np.linspace(0.0, 1.0, samples_per_segment)[:, None]
        chart_pts = (1 - w) * start + w * end
        rows = np.array([chart.from_chart(v).coords for v in chart_pts])
        segs.append(curves.CausalSegment(samples=rows, direction=direction))
    # consecutive segments share the apex row exactly
    second = segs[1].samples.copy()
    second[0] = segs[0].samples[-1]
    segs[1] = curves.CausalSegment(samples=second, direction=segs[1].direction)
    curve = curves.PiecewiseCausalCurve(segments=tuple(segs))
    apex_point = geometry.Point(segs[0].samples[-1])
    null_len = 2.0 * abs(f.eval(apex_point) - f.eval(chart.center))
    return SlimZigzag(curve=curve, null_len=null_len, t_star=ts,
                      apex_chart=r_chart, target_chart=q_chart,
                      nullity_residuals=(res1, res2))


def richardson_limit(xs, ys):
    """Polynomial extrapolation of y(x) to x = 0 through the given nodes."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    total = 0.0
    for i in range(xs.size):
        w = 1.0
        for j in range(xs.size):
            if j != i:
                w *= (0.0 - xs[j]) / (xs[i] - xs[j])
        total += w * ys[i]
    return total


@dataclass(frozen=True)
class RatioTable:
    """Rows (eps, s, t_star/s, null_length/s) plus extracted limits."""

    rows: tuple
    eps_limits: tuple       # (eps, extrapolated ratio) per eps
    diagonal: float         # eps -> 0 extrapolation of the per-eps limits
    constant: float

    def to_csv_rows(self):
        header = ("epsilon", "s", "t_star_over_s", "ratio")
        return header, [(e, s, t, r) for (e, s, t, r) in self.rows]


def ratio_table(st, f, p, gamma, s_list, eps_list, chart=None, steps=64,
                gate="auto", point_grid=32, dir_grid=64):
    """Slim-zigzag ratio table over shrinking arclength and cone widths.

    For each eps the small-s limit of null_length / arclength is extracted
    by polynomial extrapolation through the three smallest s values; the
    per-eps limits are then extrapolated to eps = 0, which should recover
    the gradient-norm constant. ``gate`` controls the certified-radius
    check: "auto" bisects per eps, None disables, a float fixes it.
    """
    s_list = sorted(float(s) for s in s_list)
    eps_list = sorted(float(e) for e in eps_list)
    if chart is None:
        chart = normal_chart(st, f, p, tangent=gamma.tangent0, steps=steps)
    rows = []
    eps_limits = []
    for eps in eps_list:
        radius = None
        if gate == "auto":
            r0 = max(4.0 * max(s_list), 1.0)
            radius = certified_radius(st, chart, eps, r0=r0,
                                      point_grid=point_grid, dir_grid=dir_grid)
        elif gate is not None:
            radius = float(gate)
        ratios = []
        for s in s_list:
            z = build_slim_zigzag(st, f, chart, gamma, s, eps, radius=radius)
            rows.append((eps, s, z.t_star / s, z.null_len / s))
            ratios.append(z.null_len / s)
        k = min(3, len(s_list))
        eps_limits.append((eps, richardson_limit(s_list[:k], ratios[:k])))
    k = min(3, len(eps_limits))
    diagonal = richardson_limit([e for e, _ in eps_limits[:k]],
                                [v for _, v in eps_limits[:k]])
    return RatioTable(rows=tuple(rows), eps_limits=tuple(eps_limits),
                      diagonal=float(diagonal), constant=chart.constant)
