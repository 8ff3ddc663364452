"""Time and temporal functions: evaluation, monotonicity probing, and
anti-Lipschitz constant estimation."""

from dataclasses import dataclass

import numpy as np

from . import errors
from . import geometry
from . import _kernels as K

_PHI_CODES = {"t": 1, "t^2": 2, "exp(t)": 3}

COORDINATE_T = "coordinate_t"
PHI_OF_T = "phi_of_t"
COSMOLOGICAL = "cosmological"
CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class TimeFunctionHandle:
    """A scalar field used as a (candidate) time function.

    Built-in kinds evaluate phi(t) of the time coordinate and carry an
    exact gradient; custom handles wrap an arbitrary evaluator and fall
    back to finite differences.
    """

    kind: str
    phi_code: int = 1
    eval_fn: object = None
    grad_fn: object = None
    label: str = "t"

    def eval(self, p):
        if self.kind == CUSTOM:
            return float(self.eval_fn(p))
        return K.phi_val(self.phi_code, float(p.coords[0]))

    def __call__(self, p):
        return self.eval(p)

    def phi_deriv(self, t):
        if self.kind == CUSTOM:
            raise errors.UnsupportedError("custom handle has no phi derivative")
        return K.phi_deriv(self.phi_code, float(t))

    def closed_form_gradient(self, st, p):
        """Exact gradient where available, else None.

        For phi(t) on the built-in families the inverse metric sends the
        differential (phi'(t), 0, ...) to (-phi'(t), 0, ...).
        """
        if self.kind == CUSTOM:
            if self.grad_fn is None:
                return None
            return geometry.TangentVector(
                base=p, components=np.asarray(self.grad_fn(p), dtype=float))
        if st.family not in ("minkowski", "grw"):
            return None
        comps = np.zeros(st.dimension)
        comps[0] = -K.phi_deriv(self.phi_code, float(p.coords[0]))
        return geometry.TangentVector(base=p, components=comps)


def coordinate_t():
    """The coordinate time function tau(t, x) = t."""
    return TimeFunctionHandle(kind=COORDINATE_T, phi_code=1, label="t")


def phi_of_t(expr):
    """A time function tau(t, x) = phi(t) from the whitelist {t, t^2, exp(t)}."""
    expr = expr.strip()
    if expr not in _PHI_CODES:
        raise errors.ArgumentError(
            f"phi expression {expr!r} not in whitelist {{t, t^2, exp(t)}}")
    return TimeFunctionHandle(kind=PHI_OF_T, phi_code=_PHI_CODES[expr], label=expr)


def custom_time_function(eval_fn, grad_fn=None, label="custom"):
    """Wrap an arbitrary Point -> real evaluator (no monotonicity promise)."""
    return TimeFunctionHandle(kind=CUSTOM, phi_code=0, eval_fn=eval_fn,
                              grad_fn=grad_fn, label=label)


@dataclass(frozen=True)
class MonotonicityReport:
    trials: int
    steps_per_trial: int
    min_increment: float
    violations: int
    first_violation: tuple | None

    @property
    def ok(self):
        return self.violations == 0


def monotonicity_probe(st, tau, trials, seed, steps_per_trial=8,
                       margin=0.05, start_scale=1.0):
    """Probe strict increase of tau along random future causal polylines.

    Polylines are built in conformal coordinates with spatial speed at most
    (1 - margin) of the cone bound, so every chord is strictly timelike.
    Reports the minimum observed increment of tau per unit parameter and
    flags a violation whenever an increment is <= 0.
    """
    if trials < 1:
        raise errors.ArgumentError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    u_lo, u_hi = st.u_interval
    n = st.n
    min_inc = np.inf
    violations = 0
    first = None
    for trial in range(trials):
        if st.family == "minkowski":
            u = rng.uniform(-start_scale, start_scale)
        else:
            t0 = rng.uniform(0.3, 0.3 + start_scale)
            u = st.conformal_u(t0)
        x = rng.uniform(-start_scale, start_scale, size=n)
        if st.spatial == "torus":
            x = rng.uniform(0, 1, size=n) * st.sides
        p_prev = geometry.Point(np.concatenate(([st.t_from_u(u)], x)))
        for step_i in range(steps_per_trial):
            cap = 0.2 * start_scale
            if np.isfinite(u_hi):
                cap = min(cap, 0.2 * (u_hi - u))
            du = rng.uniform(0.01, 1.0) * cap
            direction = geometry.unit_sphere_grid(n, 16)[
                rng.integers(0, 16 if n > 1 else 2)]
            speed = rng.uniform(0.0, 1.0 - margin)
            u = u + du
            x = x + speed * du * direction
            p_cur = geometry.Point(np.concatenate(([st.t_from_u(u)], x)))
            inc = (tau.eval(p_cur) - tau.eval(p_prev)) / du
            if inc < min_inc:
                min_inc = inc
            if inc <= 0 and first is None:
                first = (trial, step_i)
            if inc <= 0:
                violations += 1
            p_prev = p_cur
    return MonotonicityReport(trials=trials, steps_per_trial=steps_per_trial,
                              min_increment=float(min_inc),
                              violations=violations, first_violation=first)


def anti_lipschitz_constant(st, f, region, grid=64, h_at=None, step=1e-5):
    """Sampled local anti-Lipschitz constant of f.

    Minimizes g(grad f, X) over the region points and a deterministic grid
    of future-directed causal h-unit directions (h defaults to the chart
    Euclidean metric). A positive value certifies the inequality
    g(grad f, X) >= C * |X|_h on the sample; a nonpositive one raises
    NotTemporalOnSample carrying the offending minimum.
    """
    if grid < 8:
        raise errors.ArgumentError("grid must be at least 8")
    if h_at is not None:
        raise errors.UnsupportedError(
            "only the chart-Euclidean reference metric is supported")
    worst = np.inf
    for p in region:
        gradf = geometry.gradient(st, f, p, step=step)
        g = st.metric_at(p)
        dirs = geometry.future_cone_grid(st, p, grid)
        vals = dirs @ (g @ gradf.components)
        m = float(vals.min())
        if m < worst:
            worst = m
    if worst <= 0:
        raise errors.NotTemporalOnSample(worst)
    return worst
