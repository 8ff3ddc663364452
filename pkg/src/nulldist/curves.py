"""Piecewise causal curves: representation, validation, null length, and
proper-time length.

Curves are polylines in chart coordinates. For the built-in families a
chord's causal character is decided exactly in the conformal chart, where
the light cones of -du^2 + h coincide with those of the warped product.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import errors
from . import geometry
from . import _kernels as K

NULL_TOL_FACTOR = 10.0  # nullity sits on the classification boundary


@dataclass(frozen=True, eq=False)
class CausalSegment:
    """An ordered run of samples declared future- or past-directed."""

    samples: np.ndarray  # (K, n+1)
    direction: str

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] < 2:
            raise errors.CurveValidationError("segment needs at least two samples")
        if self.direction not in (geometry.FUTURE, geometry.PAST):
            raise errors.CurveValidationError(f"bad direction {self.direction!r}")
        object.__setattr__(self, "samples", s)

    @property
    def start(self):
        return self.samples[0]

    @property
    def end(self):
        return self.samples[-1]


@dataclass(frozen=True, eq=False)
class PiecewiseCausalCurve:
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def breakpoints(self):
        """Segment endpoints, shared nodes listed once."""
        if not self.segments:
            return np.empty((0, 0))
        nodes = [self.segments[0].start]
        for seg in self.segments:
            nodes.append(seg.end)
        return np.array(nodes)

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end

    def reversed(self):
        """Same trace walked backwards with directions flipped."""
        flipped = []
        for seg in reversed(self.segments):
            d = geometry.PAST if seg.direction == geometry.FUTURE else geometry.FUTURE
            flipped.append(CausalSegment(samples=seg.samples[::-1].copy(), direction=d))
        return PiecewiseCausalCurve(segments=tuple(flipped))


def segment_between(a, b, direction, samples=2):
    """Straight chart segment from a to b with the given sample count."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.linspace(0.0, 1.0, samples)[:, None]
    return CausalSegment(samples=(1 - w) * a + w * b, direction=direction)


def conformal_chord_samples(st, a, b, samples):
    """Sample the causal chord from a to b along the conformal straight line.

    Returned points are (t, x) with u interpolated linearly, so every
    sub-chord has the same causal character as the whole chord.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ua = st.conformal_u(a[0])
    ub = st.conformal_u(b[0])
    out = np.empty((samples, a.size))
    for i, w in enumerate(np.linspace(0.0, 1.0, samples)):
        u = (1 - w) * ua + w * ub
        out[i, 0] = st.t_from_u(u)
        out[i, 1:] = (1 - w) * a[1:] + w * b[1:]
    out[0] = a
    out[-1] = b
    return out


def _chord_class(st, a, b, tol):
    """Causal class of the chord a -> b, exact via the conformal chart."""
    if st.family in ("minkowski", "grw"):
        du = st.conformal_u(b[0]) - st.conformal_u(a[0])
        d = st.spatial_distance(a[1:], b[1:])
        scale = max(abs(du), d)
        if scale < tol:
            return geometry.CausalClass(geometry.ZERO)
        if abs(abs(du) - d) <= NULL_TOL_FACTOR * tol * scale:
            kind = geometry.NULL
        elif abs(du) > d:
            kind = geometry.TIMELIKE
        else:
            return geometry.CausalClass(geometry.SPACELIKE)
        direction = geometry.FUTURE if du > 0 else geometry.PAST
        return geometry.CausalClass(kind, direction)
    mid = geometry.Point(0.5 * (a + b))
    v = geometry.TangentVector(base=mid, components=b - a)
    return geometry.causal_class(st, v, tol)


@dataclass(frozen=True)
class SegmentReport:
    index: int
    direction: str
    histogram: dict
    ok: bool
    first_bad_chord: int | None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    segments: tuple
    message: str = ""


def validate(st, curve, tol=geometry.DEFAULT_CAUSAL_TOL):
    """Check a curve chord by chord against its declared directions.

    Produces a per-segment histogram of chord classes. A segment passes if
    every chord is causal with the declared direction (zero chords are
    allowed as degenerate). Report-only: never raises on bad curves.
    """
    if not curve.segments:
        return ValidationReport(ok=False, segments=(), message="degenerate curve")
    reports = []
    ok = True
    prev_end = None
    for idx, seg in enumerate(curve.segments):
        if prev_end is not None and not np.array_equal(prev_end, seg.start):
            return ValidationReport(
                ok=False, segments=tuple(reports),
                message=f"segments {idx - 1} and {idx} do not share an endpoint")
        prev_end = seg.end
        hist = {geometry.TIMELIKE: 0, geometry.NULL: 0,
                geometry.SPACELIKE: 0, geometry.ZERO: 0}
        seg_ok = True
        first_bad = None
        for k in range(seg.samples.shape[0] - 1):
            cls = _chord_class(st, seg.samples[k], seg.samples[k + 1], tol)
            hist[cls.kind] += 1
            good = cls.kind == geometry.ZERO or (
                cls.is_causal and cls.direction == seg.direction)
            if not good and first_bad is None:
                first_bad = k
                seg_ok = False
        reports.append(SegmentReport(index=idx, direction=seg.direction,
                                     histogram=hist, ok=seg_ok,
                                     first_bad_chord=first_bad))
        ok = ok and seg_ok
    return ValidationReport(ok=ok, segments=tuple(reports))


def null_length(tau, curve):
    """Sum of |tau differences| over the segment boundaries."""
    if not curve.segments:
        raise errors.CurveValidationError("degenerate curve: no segments")
    prev_end = None
    total = 0.0
    for seg in curve.segments:
        if prev_end is not None and not np.array_equal(prev_end, seg.start):
            raise errors.CurveValidationError("segments do not share endpoints")
        prev_end = seg.end
        total += abs(tau.eval(geometry.Point(seg.end))
                     - tau.eval(geometry.Point(seg.start)))
    return total


def lorentzian_length(st, segment, tol=geometry.DEFAULT_CAUSAL_TOL):
    """Proper time of a causal segment by trapezoidal integration.

    Finite-difference tangents over the sample parameter, metric evaluated
    at each sample. Raises on a tangent classified spacelike beyond tol.
    """
    samples = segment.samples
    if st.family in ("minkowski", "grw"):
        code, c = st.scale_codes()
        length, bad = K.lorentzian_length_builtin(samples, code, c, tol)
        if bad >= 0:
            raise errors.CurveValidationError(
                f"spacelike tangent at sample {bad}")
        return float(length)
    K_n = samples.shape[0]
    dt = 1.0 / (K_n - 1)
    vals = np.empty(K_n)
    for k in range(K_n):
        if k == 0:
            v = (samples[1] - samples[0]) / dt
        elif k == K_n - 1:
            v = (samples[-1] - samples[-2]) / dt
        else:
            v = (samples[k + 1] - samples[k - 1]) / (2 * dt)
        g = st.metric_at(geometry.Point(samples[k]))
        q = float(v @ g @ v)
        if q > tol * float(v @ v):
            raise errors.CurveValidationError(f"spacelike tangent at sample {k}")
        vals[k] = np.sqrt(max(-q, 0.0))
    return float(np.trapz(vals, dx=dt))


def connect(st, p, q, margin=0.05):
    """A valid piecewise causal curve from p to q, built in closed form.

    The default is a future/past two-segment zigzag through an apex in the
    intersection of the chronological futures; when the conformal-time
    domain caps the apex the chain flips to past apexes or subdivides until
    every elbow fits.
    """
    if np.array_equal(p.coords, q.coords):
        seg = CausalSegment(samples=np.array([p.coords, q.coords]),
                            direction=geometry.FUTURE)
        return PiecewiseCausalCurve(segments=(seg,))
    u_lo, u_hi = st.u_interval
    up = st.conformal_u(p.coords[0])
    uq = st.conformal_u(q.coords[0])
    pieces = 1
    while True:
        anchors_u = np.linspace(up, uq, pieces + 1)
        anchors_x = [p.coords[1:]]
        delta = np.array([K.nearest_image_delta(dq - dp, s) for dp, dq, s in zip(
            p.coords[1:], q.coords[1:], st.sides_array)])
        for j in range(1, pieces + 1):
            anchors_x.append(p.coords[1:] + (j / pieces) * delta)
        segs = []
        feasible = True
        for j in range(pieces):
            xa, xb = anchors_x[j], anchors_x[j + 1]
            ua, ub = anchors_u[j], anchors_u[j + 1]
            d = st.spatial_distance(xa, xb)
            pad = margin * max(d, abs(ub - ua), 1e-9)
            u_apex = max(ua, ub) + 0.5 * d + pad
            if u_apex < u_hi:
                x_apex = xa + (0.5 if d > 0 else 0.0) * (xb - xa)
                a = np.concatenate(([st.t_from_u(u_apex)], x_apex))
                start = np.concatenate(([st.t_from_u(ua)], xa))
                end = np.concatenate(([st.t_from_u(ub)], xb))
                segs.append(CausalSegment(np.array([start, a]), geometry.FUTURE))
                segs.append(CausalSegment(np.array([a, end]), geometry.PAST))
                continue
            u_apex = min(ua, ub) - 0.5 * d - pad
            if u_apex > u_lo:
                x_apex = xa + (0.5 if d > 0 else 0.0) * (xb - xa)
                a = np.concatenate(([st.t_from_u(u_apex)], x_apex))
                start = np.concatenate(([st.t_from_u(ua)], xa))
                end = np.concatenate(([st.t_from_u(ub)], xb))
                segs.append(CausalSegment(np.array([start, a]), geometry.PAST))
                segs.append(CausalSegment(np.array([a, end]), geometry.FUTURE))
                continue
            feasible = False
            break
        if feasible:
            # restore the exact endpoint coordinates
            first = segs[0].samples.copy()
            first[0] = p.coords
            segs[0] = CausalSegment(first, segs[0].direction)
            last = segs[-1].samples.copy()
            last[-1][0] = q.coords[0]
            segs[-1] = CausalSegment(last, segs[-1].direction)
            return PiecewiseCausalCurve(segments=tuple(segs))
        pieces *= 2
        if pieces > 4096:
            raise errors.NumericalError("could not fit a causal zigzag in the domain")


# -- serialization --


def curve_to_json(curve):
    """JSON text for a curve; float round-trip is exact on binary64."""
    payload = [{"direction": seg.direction,
                "samples": [list(map(float, row)) for row in seg.samples]}
               for seg in curve.segments]
    return json.dumps(payload)


def curve_from_json(text):
    data = json.loads(text)
    segs = [CausalSegment(samples=np.array(item["samples"], dtype=float),
                          direction=item["direction"]) for item in data]
    return PiecewiseCausalCurve(segments=tuple(segs))
