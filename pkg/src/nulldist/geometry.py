"""Charts, metric tensors, causal classification, gradients, and geodesics.

Built-in families use a single global chart: Cartesian coordinates for
Minkowski space, product coordinates (t, x) for warped products over an
interval. Coordinate 0 is always the time coordinate.
"""

from dataclasses import dataclass, field

import numpy as np

from . import errors
from . import _kernels as K

TIMELIKE = "timelike"
NULL = "null"
SPACELIKE = "spacelike"
ZERO = "zero"
FUTURE = "future"
PAST = "past"

DEFAULT_CAUSAL_TOL = 1e-9

_SCALE_CODES = {"const": 0, "t": 1, "t^2": 2, "exp(t)": 3}


@dataclass(frozen=True, eq=False)
class Point:
    """A chart point; coords[0] is the time coordinate."""

    coords: np.ndarray
    chart_id: str = "global"

    def __repr__(self):
        vals = ", ".join(f"{c:.6g}" for c in self.coords)
        return f"Point({vals})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: Point
    components: np.ndarray


@dataclass(frozen=True)
class CausalClass:
    kind: str
    direction: str | None = None

    @property
    def is_causal(self):
        return self.kind in (TIMELIKE, NULL)


@dataclass(frozen=True)
class ScaleFactor:
    """Warped-product scale factor from the fixed expression whitelist."""

    expr: str
    code: int
    c: float = 1.0

    def __call__(self, t):
        return K.scale_f(self.code, self.c, float(t))

    def deriv(self, t):
        return K.scale_df(self.code, self.c, float(t))

    def u_of_t(self, t):
        return K.u_of_t(self.code, self.c, float(t))

    def t_of_u(self, u):
        return K.t_of_u(self.code, self.c, float(u))


def parse_scale_factor(expr):
    """Parse a whitelist scale-factor expression: const literal, t, t^2, exp(t)."""
    expr = expr.strip()
    if expr in ("t", "t^2", "exp(t)"):
        return ScaleFactor(expr=expr, code=_SCALE_CODES[expr])
    try:
        c = float(expr)
    except ValueError:
        raise errors.ArgumentError(
            f"scale factor {expr!r} not in whitelist {{const, t, t^2, exp(t)}}")
    if c <= 0:
        raise errors.ArgumentError("constant scale factor must be positive")
    return ScaleFactor(expr="const", code=0, c=c)


@dataclass(frozen=True, eq=False)
class Spacetime:
    """A built-in spacetime: dimension, metric field, and time orientation.

    ``family`` is one of "minkowski", "grw", "custom". The interval bounds
    the time coordinate; for warped products it is (0, inf). Spatial factor
    "torus" identifies coordinates modulo ``sides``.
    """

    family: str
    n: int
    scale: ScaleFactor | None = None
    spatial: str = "euclidean"
    sides: np.ndarray | None = None
    interval: tuple = (-np.inf, np.inf)
    metric_fn: object = None
    orientation_fn: object = None

    @property
    def dimension(self):
        return self.n + 1

    def point(self, *coords):
        arr = np.asarray(coords, dtype=float).ravel()
        if arr.size != self.dimension:
            raise errors.ArgumentError(
                f"expected {self.dimension} coordinates, got {arr.size}")
        if not (self.interval[0] < arr[0] < self.interval[1]):
            raise errors.ArgumentError(
                f"time coordinate {arr[0]} outside interval {self.interval}")
        return Point(coords=arr)

    def vector(self, point, *components):
        arr = np.asarray(components, dtype=float).ravel()
        if arr.size != self.dimension:
            raise errors.ArgumentError(
                f"expected {self.dimension} components, got {arr.size}")
        return TangentVector(base=point, components=arr)

    def metric_at(self, p):
        if self.family == "custom":
            return np.asarray(self.metric_fn(p.coords), dtype=float)
        g = np.eye(self.dimension)
        g[0, 0] = -1.0
        if self.family == "grw":
            f = self.scale(p.coords[0])
            g[1:, 1:] *= f * f
        return g

    def orientation_at(self, p):
        if self.family == "custom" and self.orientation_fn is not None:
            return TangentVector(base=p, components=np.asarray(
                self.orientation_fn(p.coords), dtype=float))
        comps = np.zeros(self.dimension)
        comps[0] = 1.0
        return TangentVector(base=p, components=comps)

    # -- conformal structure (built-in families only) --

    @property
    def sides_array(self):
        if self.spatial == "torus":
            return self.sides
        return np.zeros(self.n)

    def conformal_u(self, t):
        if self.family == "minkowski":
            return float(t)
        if self.family == "grw":
            return self.scale.u_of_t(t)
        raise errors.UnsupportedError("no conformal chart for custom metrics")

    def t_from_u(self, u):
        if self.family == "minkowski":
            return float(u)
        if self.family == "grw":
            return self.scale.t_of_u(u)
        raise errors.UnsupportedError("no conformal chart for custom metrics")

    @property
    def u_interval(self):
        """Image of the time interval under conformal time (u is increasing)."""
        lo, hi = self.interval
        if self.family == "minkowski":
            return (-np.inf, np.inf)
        if self.family != "grw":
            raise errors.UnsupportedError("no conformal chart for custom metrics")
        code = self.scale.code
        if lo <= 0:
            u_lo = {0: 0.0, 1: -np.inf, 2: -np.inf, 3: -1.0}[code]
        else:
            u_lo = self.scale.u_of_t(lo)
        if np.isinf(hi):
            u_hi = {0: np.inf, 1: np.inf, 2: 0.0, 3: 0.0}[code]
        else:
            u_hi = self.scale.u_of_t(hi)
        return (u_lo, u_hi)

    def spatial_distance(self, xa, xb):
        return K.spatial_dist(np.asarray(xa, float), np.asarray(xb, float),
                              self.sides_array)

    def wrap_spatial(self, x):
        """Reduce spatial coordinates to the fundamental domain."""
        x = np.array(x, dtype=float)
        if self.spatial == "torus":
            x %= self.sides
        return x

    def level_distance(self, t, xa, xb):
        """Induced Riemannian distance on the level {time coordinate = t}."""
        base = self.spatial_distance(xa, xb)
        if self.family == "grw":
            return self.scale(t) * base
        return base

    def scale_codes(self):
        """(scale_code, scale_c) for kernel dispatch."""
        if self.family == "minkowski":
            return 0, 1.0
        if self.family == "grw":
            return self.scale.code, self.scale.c
        raise errors.UnsupportedError("kernels require a built-in family")


def minkowski(n):
    """(n+1)-dimensional Minkowski spacetime in Cartesian coordinates."""
    if n < 1:
        raise errors.ArgumentError("need at least one spatial dimension")
    return Spacetime(family="minkowski", n=n, interval=(-np.inf, np.inf))


def grw(n, scale="t", spatial="euclidean", sides=None):
    """Warped product (0, inf) x S with metric -dt^2 + f(t)^2 h.

    ``scale`` is a whitelist expression; ``spatial`` is "euclidean" or
    "torus" (flat metric either way, torus identifies modulo ``sides``).
    """
    if n < 1:
        raise errors.ArgumentError("need at least one spatial dimension")
    sf = scale if isinstance(scale, ScaleFactor) else parse_scale_factor(scale)
    if spatial == "torus":
        if sides is None:
            sides = np.ones(n)
        sides = np.asarray(sides, dtype=float).ravel()
        if sides.size != n or np.any(sides <= 0):
            raise errors.ArgumentError("torus sides must be n positive lengths")
    elif spatial == "euclidean":
        sides = None
    else:
        raise errors.ArgumentError(f"unknown spatial factor {spatial!r}")
    return Spacetime(family="grw", n=n, scale=sf, spatial=spatial, sides=sides,
                     interval=(0.0, np.inf))


def custom_spacetime(n, metric_fn, orientation_fn=None, interval=(-np.inf, np.inf)):
    """Spacetime from a user-supplied metric function coords -> matrix."""
    return Spacetime(family="custom", n=n, metric_fn=metric_fn,
                     orientation_fn=orientation_fn, interval=interval)


def spacetime_from_config(block):
    """Build a spacetime from a key-value mapping.

    Recognized keys: family (minkowski | grw), dimension (total, n+1),
    scale_factor (whitelist expression), spatial (euclidean | torus),
    sides (whitespace-separated lengths).
    """
    family = str(block.get("family", "")).strip().lower()
    try:
        dim = int(block["dimension"])
    except KeyError:
        raise errors.ArgumentError("spacetime config needs 'dimension'")
    if dim < 2:
        raise errors.ArgumentError("dimension must be at least 2 (one time + one space)")
    n = dim - 1
    if family == "minkowski":
        return minkowski(n)
    if family == "grw":
        scale = str(block.get("scale_factor", "t"))
        spatial = str(block.get("spatial", "euclidean")).strip().lower()
        sides = block.get("sides")
        if isinstance(sides, str):
            sides = [float(v) for v in sides.split()]
        return grw(n, scale=scale, spatial=spatial, sides=sides)
    raise errors.ArgumentError(f"unknown spacetime family {family!r}")


# -- pointwise operations --


def inner(st, X, Y):
    """Metric pairing g_p(X, Y); the base points must coincide."""
    if X.base.chart_id != Y.base.chart_id or not np.array_equal(
            X.base.coords, Y.base.coords):
        raise errors.ArgumentError("tangent vectors have different base points")
    g = st.metric_at(X.base)
    return float(X.components @ g @ Y.components)


def g_norm(st, X):
    """The g-norm sqrt(|g(X, X)|)."""
    return float(np.sqrt(abs(inner(st, X, X))))


def causal_class(st, X, tol=DEFAULT_CAUSAL_TOL):
    """Classify a tangent vector as timelike, null, spacelike, or zero.

    The null band is relative: |g(X,X)| < tol * |X|^2 in chart-Euclidean
    norm, which keeps the classification scale-invariant. Causal vectors get
    a direction from the sign of g(X, orientation).
    """
    if tol <= 0:
        raise errors.ArgumentError("tol must be positive")
    comps = X.components
    euclid_sq = float(comps @ comps)
    if np.sqrt(euclid_sq) < tol:
        return CausalClass(ZERO)
    q = inner(st, X, X)
    if abs(q) < tol * euclid_sq:
        kind = NULL
    elif q < 0:
        kind = TIMELIKE
    else:
        return CausalClass(SPACELIKE)
    theta = st.orientation_at(X.base)
    direction = FUTURE if inner(st, X, theta) < 0 else PAST
    return CausalClass(kind, direction)


def gradient(st, f, p, step=1e-5):
    """Metric gradient of a scalar field at p.

    Uses the field's closed form when it carries one (time-function
    handles); otherwise applies the inverse metric to a central-difference
    differential.
    """
    closed = getattr(f, "closed_form_gradient", None)
    if closed is not None:
        v = closed(st, p)
        if v is not None:
            return v
    if step <= 0:
        raise errors.ArgumentError("step must be positive")
    evaluate = getattr(f, "eval", f)
    dim = st.dimension
    df = np.empty(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        df[i] = (evaluate(Point(p.coords + e, p.chart_id))
                 - evaluate(Point(p.coords - e, p.chart_id))) / (2 * step)
    g = st.metric_at(p)
    try:
        comps = np.linalg.solve(g, df)
    except np.linalg.LinAlgError as exc:
        raise errors.NumericalError(f"singular metric at {p}: {exc}")
    return TangentVector(base=p, components=comps)


def christoffels(st, p, step=1e-5):
    """Christoffel symbols Gamma[k, i, j] at p.

    Closed form for the built-in families; central finite differences of
    the metric for custom ones.
    """
    dim = st.dimension
    gamma = np.zeros((dim, dim, dim))
    if st.family == "minkowski":
        return gamma
    if st.family == "grw":
        t = p.coords[0]
        f = st.scale(t)
        df = st.scale.deriv(t)
        for i in range(1, dim):
            gamma[0, i, i] = f * df
            gamma[i, 0, i] = df / f
            gamma[i, i, 0] = df / f
        return gamma
    g0 = st.metric_at(p)
    dg = np.empty((dim, dim, dim))
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = step
        gp = st.metric_at(Point(p.coords + e, p.chart_id))
        gm = st.metric_at(Point(p.coords - e, p.chart_id))
        dg[k] = (gp - gm) / (2 * step)
    ginv = np.linalg.inv(g0)
    for k in range(dim):
        for i in range(dim):
            for j in range(dim):
                gamma[k, i, j] = 0.5 * np.sum(
                    ginv[k] * (dg[i, :, j] + dg[j, i, :] - dg[:, i, j]))
    return gamma


@dataclass(frozen=True, eq=False)
class ExpMapResult:
    point: Point
    velocity: np.ndarray
    frame: np.ndarray


def exp_map(st, X, steps=64, frame=None):
    """Geodesic from base(X) with initial velocity X over unit parameter.

    Fixed-step classical fourth-order integration; straight line (exact)
    for Minkowski. A frame, default the coordinate basis, is parallel
    transported along. Raises DomainEscapeError with the exit fraction when
    the time coordinate leaves the interval.
    """
    if steps < 1:
        raise errors.ArgumentError("steps must be at least 1")
    dim = st.dimension
    if frame is None:
        frame = np.eye(dim)
    frame = np.array(frame, dtype=float)
    if st.family == "minkowski":
        return ExpMapResult(point=Point(X.base.coords + X.components),
                            velocity=X.components.copy(), frame=frame)
    if st.family == "grw":
        code, c = st.scale_codes()
        coords, vel, fr, status, frac = K.geodesic_rk4(
            X.base.coords.astype(float), X.components.astype(float), frame,
            code, c, steps, st.interval[0], st.interval[1])
        if status != 0:
            raise errors.DomainEscapeError(
                f"geodesic left the chart domain at fraction {frac:.6g}",
                exit_fraction=frac, last_coords=coords)
        return ExpMapResult(point=Point(coords), velocity=vel, frame=fr)
    return _exp_map_custom(st, X, steps, frame)


def _exp_map_custom(st, X, steps, frame):
    """Generic RK4 with finite-difference Christoffel symbols."""
    dim = st.dimension
    lo, hi = st.interval

    def rhs(coords, vel, fr):
        gamma = christoffels(st, Point(coords, X.base.chart_id))
        acc = -np.einsum("kij,i,j->k", gamma, vel, vel)
        dfr = -np.einsum("kij,i,ja->ka", gamma, vel, fr)
        return vel, acc, dfr

    coords = X.base.coords.astype(float)
    vel = X.components.astype(float)
    fr = frame
    h = 1.0 / steps
    for step_i in range(steps):
        prev = (coords.copy(), vel.copy(), fr.copy())
        k1 = rhs(coords, vel, fr)
        k2 = rhs(coords + 0.5 * h * k1[0], vel + 0.5 * h * k1[1], fr + 0.5 * h * k1[2])
        k3 = rhs(coords + 0.5 * h * k2[0], vel + 0.5 * h * k2[1], fr + 0.5 * h * k2[2])
        k4 = rhs(coords + h * k3[0], vel + h * k3[1], fr + h * k3[2])
        coords = coords + (h / 6) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        vel = vel + (h / 6) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        fr = fr + (h / 6) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (lo < coords[0] < hi):
            bound = lo if coords[0] <= lo else hi
            denom = prev[0][0] - coords[0]
            theta = (prev[0][0] - bound) / denom if denom != 0 else 0.0
            frac = (step_i + min(max(theta, 0.0), 1.0)) / steps
            raise errors.DomainEscapeError(
                f"geodesic left the chart domain at fraction {frac:.6g}",
                exit_fraction=frac, last_coords=prev[0])
    return ExpMapResult(point=Point(coords, X.base.chart_id), velocity=vel, frame=fr)


def unit_sphere_grid(n, m):
    """Deterministic grid of ~m unit vectors in R^n.

    n=1: the two signs; n=2: uniform angles; n=3: Fibonacci spiral;
    higher n: a fixed-seed uniform sample (deterministic given m).
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        i = np.arange(m) + 0.5
        phi = np.arccos(1 - 2 * i / m)
        golden = np.pi * (1 + 5 ** 0.5)
        theta = golden * i
        return np.column_stack([np.sin(phi) * np.cos(theta),
                                np.sin(phi) * np.sin(theta),
                                np.cos(phi)])
    rng = np.random.default_rng(1234567 + 97 * n + m)
    v = rng.standard_normal((m, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def future_cone_grid(st, p, m, include_axis=True):
    """About m future-directed causal unit vectors (chart-Euclidean norm) at p.

    Rays from the orientation axis out to the exact null boundary for each
    spatial direction, boundary included, so the grid always contains null
    directions.
    """
    dim = st.dimension
    g = st.metric_at(p)
    axis = np.zeros(dim)
    axis[0] = 1.0
    n_theta = max(2, int(round(np.sqrt(m))))
    n_omega = max(1, int(np.ceil(m / n_theta)))
    omegas = unit_sphere_grid(dim - 1, n_omega)
    dirs = []
    for w in omegas:
        spat = np.zeros(dim)
        spat[1:] = w
        a = float(axis @ g @ axis)
        b = float(axis @ g @ spat)
        c = float(spat @ g @ spat)
        # g(cos axis + sin spat) = a cos^2 + 2b cos sin + c sin^2 = 0
        disc = b * b - a * c
        t_null = (-b + np.sqrt(disc)) / c
        theta_null = np.arctan(t_null)
        for theta in np.linspace(0.0, theta_null, n_theta):
            dirs.append(np.cos(theta) * axis + np.sin(theta) * spat)
    out = np.array(dirs)
    if not include_axis:
        out = out[~np.all(out == axis, axis=1)]
    return out
