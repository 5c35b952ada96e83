"""Dimension-generic vector geometry in R^d, d >= 4.

Points and vectors are plain numpy float arrays.  Composite objects
(segments, flats, spheres, circles, arcs, cones) are small frozen
dataclasses validated at construction and immutable afterwards, so every
operation here is pure and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class DegenerateGeometry(GeometryError):
    pass


class FlatConeError(GeometryError):
    """Right cone with half-angle pi/2; caller must use the flat-case path."""


# ---------------------------------------------------------------------------
# points and vectors


def as_point(p, d=None):
    """Validate and freeze a coordinate array (d >= 4, all finite)."""
    a = np.array(p, dtype=float)
    if a.ndim != 1:
        raise GeometryError("a point is a 1-D coordinate sequence")
    if a.size < 4:
        raise DimensionMismatch(f"need d >= 4, got d={a.size}")
    if d is not None and a.size != d:
        raise DimensionMismatch(f"expected d={d}, got d={a.size}")
    if not np.isfinite(a).all():
        raise GeometryError("non-finite coordinate")
    a.setflags(write=False)
    return a


def norm(v):
    return float(np.linalg.norm(v))


def unit(v, eps=None):
    n = np.linalg.norm(v)
    if n <= (config.EPS_UNIT if eps is None else eps):
        raise DegenerateGeometry("cannot normalize a near-zero vector")
    return np.asarray(v, dtype=float) / n


def same_d(*objs):
    dims = {o.d if hasattr(o, "d") else len(o) for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed ambient dimensions {sorted(dims)}")
    return dims.pop()


def gram_schmidt(vectors, eps=1e-12):
    """Orthonormalize row vectors, dropping near-dependent ones."""
    rows = []
    for v in vectors:
        w = np.array(v, dtype=float)
        scale = max(1.0, np.linalg.norm(w))
        for r in rows:
            w -= (w @ r) * r
        # second pass for numerical stability
        for r in rows:
            w -= (w @ r) * r
        n = np.linalg.norm(w)
        if n > eps * scale:
            rows.append(w / n)
    return np.array(rows) if rows else np.zeros((0, len(vectors[0])))


def complete_basis(rows, d, rng=None):
    """Extend orthonormal rows to a full orthonormal basis of R^d.

    Completion vectors come from the coordinate axes, or from ``rng``
    (seeded) when a reproducibly random completion is wanted.
    """
    rows = [np.asarray(r, float) for r in rows]
    out = list(rows)
    k = 0
    while len(out) < d:
        if rng is None:
            if k >= d:
                raise GeometryError("failed to complete basis")
            cand = np.zeros(d)
            cand[k] = 1.0
            k += 1
        else:
            cand = rng.standard_normal(d)
        w = cand.copy()
        for r in out:
            w -= (w @ r) * r
        for r in out:
            w -= (w @ r) * r
        n = np.linalg.norm(w)
        if n > 1e-6:
            out.append(w / n)
    return np.array(out)


def orthonormal_complement(rows, d, rng=None):
    """Orthonormal basis of the orthogonal complement of span(rows)."""
    rows = gram_schmidt(rows) if len(rows) else np.zeros((0, d))
    full = complete_basis(list(rows), d, rng=rng)
    return full[len(rows):]


def complement_within(basis, v):
    """Orthonormal basis of {x in span(basis) : x ⟂ v}."""
    vu = unit(v)
    reduced = [r - (r @ vu) * vu for r in basis]
    return gram_schmidt(reduced)


# ---------------------------------------------------------------------------
# composite objects


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_point(self.a)
        b = as_point(self.b, d=a.size)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if np.linalg.norm(b - a) <= config.EPS_UNIT:
            raise DegenerateGeometry("zero-length segment")

    @property
    def d(self):
        return self.a.size

    @property
    def length(self):
        return norm(self.b - self.a)

    @property
    def direction(self):
        return unit(self.b - self.a)

    def point_at(self, t):
        return self.a + t * (self.b - self.a)


@dataclass(frozen=True)
class Flat:
    """A k-flat: origin plus an orthonormal (k, d) row basis."""

    origin: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        o = as_point(self.origin)
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[1] != o.size:
            raise DimensionMismatch("basis shape must be (k, d)")
        if B.shape[0] > o.size:
            raise GeometryError("more basis vectors than dimensions")
        G = B @ B.T
        if B.shape[0] and norm(G - np.eye(B.shape[0])) > 1e-9:
            raise GeometryError("basis not orthonormal")
        B.setflags(write=False)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_span(cls, origin, vectors, eps=1e-12):
        origin = as_point(origin)
        B = gram_schmidt(vectors, eps=eps) if len(vectors) else np.zeros((0, origin.size))
        return cls(origin, B)

    @classmethod
    def full(cls, d):
        return cls(np.zeros(d), np.eye(d))

    @property
    def d(self):
        return self.origin.size

    @property
    def dim(self):
        return self.basis.shape[0]

    def project(self, p):
        rel = np.asarray(p, float) - self.origin
        return self.origin + (rel @ self.basis.T) @ self.basis

    def offset(self, p):
        """Component of p orthogonal to the flat (zero iff p lies in it)."""
        rel = np.asarray(p, float) - self.origin
        return rel - (rel @ self.basis.T) @ self.basis

    def contains(self, p, eps=None):
        eps = config.EPS if eps is None else eps
        scale = 1.0 + norm(np.asarray(p, float) - self.origin)
        return norm(self.offset(p)) <= eps * scale

    def contains_flat(self, other, eps=None):
        if not self.contains(other.origin, eps):
            return False
        return all(
            norm(v - (v @ self.basis.T) @ self.basis) <= (config.EPS if eps is None else eps)
            for v in other.basis
        )

    def local(self, p):
        return (np.asarray(p, float) - self.origin) @ self.basis.T

    def point(self, coords):
        return self.origin + np.asarray(coords, float) @ self.basis


@dataclass(frozen=True)
class Sphere:
    """A k-sphere: fixed-radius points of a (k+1)-flat host around a center.

    ``host=None`` means the full ambient space (a (d-1)-sphere).
    """

    center: np.ndarray
    radius: float
    host: Flat | None = None

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", c)
        if not (self.radius > 0.0):
            raise DegenerateGeometry("sphere radius must be positive")
        if self.host is not None:
            if self.host.d != c.size:
                raise DimensionMismatch("host flat dimension mismatch")
            if not self.host.contains(c, eps=1e-9):
                raise GeometryError("sphere center must lie in its host flat")

    @property
    def d(self):
        return self.center.size

    @property
    def dim(self):
        return (self.d if self.host is None else self.host.dim) - 1

    def contains(self, p, eps=None):
        eps = config.EPS if eps is None else eps
        scale = max(1.0, self.radius)
        if abs(norm(np.asarray(p, float) - self.center) - self.radius) > eps * scale:
            return False
        return self.host is None or self.host.contains(p, eps)


@dataclass(frozen=True)
class Circle:
    """A 1-sphere: center, radius and an orthonormal in-plane frame (u, v).

    ``radius == 0`` encodes a degenerate point component.
    """

    center: np.ndarray
    radius: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        c = as_point(self.center)
        u = as_point(self.u, d=c.size)
        v = as_point(self.v, d=c.size)
        if self.radius < 0.0:
            raise DegenerateGeometry("negative circle radius")
        for w in (u, v):
            if abs(norm(w) - 1.0) > 1e-9:
                raise GeometryError("circle frame vectors must be unit")
        if abs(float(u @ v)) > 1e-9:
            raise GeometryError("circle frame vectors must be orthogonal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def at_point(cls, p):
        """Zero-radius circle encoding an isolated point."""
        p = as_point(p)
        d = p.size
        u = np.zeros(d)
        u[0] = 1.0
        v = np.zeros(d)
        v[1] = 1.0
        return cls(p, 0.0, u, v)

    @property
    def d(self):
        return self.center.size

    def point_at(self, theta):
        return self.center + self.radius * (
            math.cos(theta) * self.u + math.sin(theta) * self.v
        )

    def angle_of(self, p):
        rel = np.asarray(p, float) - self.center
        return math.atan2(float(rel @ self.v), float(rel @ self.u)) % TWO_PI


@dataclass(frozen=True)
class Arc:
    """Angular interval [start, start+extent] on a circle.

    ``extent == 0`` encodes a point component; ``extent == 2*pi`` a full
    circle.  Intervals are closed on both ends (obstructions are closed
    sets, which is the conservative choice).
    """

    circle: Circle
    start: float
    extent: float

    def __post_init__(self):
        if not (0.0 <= self.extent <= TWO_PI + 1e-12):
            raise GeometryError("arc extent must lie in [0, 2*pi]")
        object.__setattr__(self, "start", float(self.start) % TWO_PI)
        object.__setattr__(self, "extent", float(min(self.extent, TWO_PI)))

    @classmethod
    def full(cls, circle):
        return cls(circle, 0.0, TWO_PI)

    @classmethod
    def point(cls, p, circle=None, angle=None):
        if circle is None:
            return cls(Circle.at_point(p), 0.0, 0.0)
        return cls(circle, circle.angle_of(p) if angle is None else angle, 0.0)

    @property
    def d(self):
        return self.circle.d

    @property
    def is_full(self):
        return self.extent >= TWO_PI - 1e-12

    @property
    def is_point(self):
        return self.extent <= 1e-12 or self.circle.radius <= 1e-12

    def contains_angle(self, theta, ang_eps=None):
        ang_eps = config.ANG_EPS if ang_eps is None else ang_eps
        if self.is_full:
            return True
        rel = (theta - self.start) % TWO_PI
        return rel <= self.extent + ang_eps or rel >= TWO_PI - ang_eps

    def contains_point(self, p, eps=None, ang_eps=None):
        eps = config.EPS if eps is None else eps
        p = np.asarray(p, float)
        if self.circle.radius <= 1e-12:
            return norm(p - self.circle.center) <= eps
        th = self.circle.angle_of(p)
        if not self.contains_angle(th, ang_eps):
            return False
        return norm(p - self.circle.point_at(th)) <= eps * max(1.0, self.circle.radius)

    def point_at_fraction(self, f):
        return self.circle.point_at(self.start + f * self.extent)

    def sample_angles(self, k):
        if self.is_full:
            return self.start + np.linspace(0.0, TWO_PI, k, endpoint=False)
        return self.start + np.linspace(0.0, self.extent, max(k, 2))

    def sample_points(self, k):
        return np.array([self.circle.point_at(t) for t in self.sample_angles(k)])


@dataclass(frozen=True)
class TriangleCone:
    """Union of rays from an apex through the points of a segment ab."""

    apex: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        apex = as_point(self.apex)
        a = as_point(self.a, d=apex.size)
        b = as_point(self.b, d=apex.size)
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if np.linalg.norm(a - b) <= config.EPS_UNIT:
            raise DegenerateGeometry("cone segment endpoints coincide")
        dist, _ = point_segment_distance(apex, a, b)
        if dist <= config.EPS_UNIT * max(1.0, norm(a - apex)):
            raise DegenerateGeometry("cone apex lies on the segment")

    @property
    def d(self):
        return self.apex.size

    @property
    def is_degenerate(self):
        """True when apex, a, b are collinear; the cone is then a ray."""
        B = gram_schmidt([self.a - self.apex, self.b - self.apex])
        return B.shape[0] < 2

    def plane(self):
        return Flat.from_span(self.apex, [self.a - self.apex, self.b - self.apex])


@dataclass(frozen=True)
class QuadCone(TriangleCone):
    """Triangle cone minus the open triangle: ray points at or beyond ab."""


@dataclass(frozen=True)
class RightCone:
    """Right spherical cone: points whose ray from the apex makes a fixed
    angle with the apex->axis_point direction.

    The half-angle is stored canonically in [0, pi/2]; an angle above pi/2
    is reflected by mirroring the axis point across the apex.
    """

    apex: np.ndarray
    axis_point: np.ndarray
    half_angle: float

    def __post_init__(self):
        apex = as_point(self.apex)
        ax = as_point(self.axis_point, d=apex.size)
        if np.linalg.norm(ax - apex) <= config.EPS_UNIT:
            raise DegenerateGeometry("cone axis point coincides with apex")
        th = float(self.half_angle)
        if not (0.0 <= th <= math.pi):
            raise GeometryError("half-angle must lie in [0, pi]")
        if th > math.pi / 2.0:
            ax = 2.0 * apex - ax
            th = math.pi - th
        ax.setflags(write=False)
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "axis_point", ax)
        object.__setattr__(self, "half_angle", th)

    @property
    def d(self):
        return self.apex.size

    @property
    def axis(self):
        return unit(self.axis_point - self.apex)

    def contains(self, p, eps=None):
        eps = config.EPS if eps is None else eps
        w = np.asarray(p, float) - self.apex
        n = norm(w)
        if n <= eps:
            return True
        c = float(w @ self.axis) / n
        return abs(c - math.cos(self.half_angle)) <= eps


@dataclass(frozen=True)
class ApexLineCase:
    """A segment whose line runs through a right cone's apex along a ruling."""

    apex: np.ndarray
    direction: np.ndarray  # unit, oriented into the canonical half-cone


# ---------------------------------------------------------------------------
# distances


def point_segment_distance(p, a, b):
    """Distance from point to segment and the closest segment point."""
    p = np.asarray(p, float)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    u = b - a
    uu = float(u @ u)
    t = 0.0 if uu <= 0.0 else float((p - a) @ u) / uu
    t = min(max(t, 0.0), 1.0)
    q = a + t * u
    return norm(p - q), q


def segment_pairs_distance(p1, q1, p2, q2, return_points=False):
    """Vectorized minimum distance for stacked segment pairs.

    All inputs have shape (m, d); returns distances of shape (m,)
    (and, optionally, the closest points on each segment).
    """
    p1 = np.atleast_2d(np.asarray(p1, float))
    q1 = np.atleast_2d(np.asarray(q1, float))
    p2 = np.atleast_2d(np.asarray(p2, float))
    q2 = np.atleast_2d(np.asarray(q2, float))
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, r)
    f = np.einsum("ij,ij->i", d2, r)
    denom = a * e - b * b
    safe = np.where(denom > 1e-300, denom, 1.0)
    s = np.where(denom > 1e-300, np.clip((b * f - c * e) / safe, 0.0, 1.0), 0.0)
    e_safe = np.where(e > 0.0, e, 1.0)
    t = (b * s + f) / e_safe
    a_safe = np.where(a > 0.0, a, 1.0)
    s = np.where(t < 0.0, np.clip(-c / a_safe, 0.0, 1.0), s)
    s = np.where(t > 1.0, np.clip((b - c) / a_safe, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    c1 = p1 + s[:, None] * d1
    c2 = p2 + t[:, None] * d2
    dist = np.linalg.norm(c1 - c2, axis=1)
    if return_points:
        return dist, c1, c2
    return dist


def segment_segment_distance(s1, s2):
    """Exact minimum distance between two segments, with the closest pair.

    Symmetric in its arguments up to floating error; the minimizer of the
    convex quadratic over the unit parameter square is found by the
    standard interior / edge / corner case analysis.
    """
    if isinstance(s1, Segment):
        a1, b1 = s1.a, s1.b
    else:
        a1, b1 = s1
    if isinstance(s2, Segment):
        a2, b2 = s2.a, s2.b
    else:
        a2, b2 = s2
    dist, c1, c2 = segment_pairs_distance(
        a1[None], b1[None], a2[None], b2[None], return_points=True
    )
    return float(dist[0]), (c1[0], c2[0])


def segment_plane_distance(seg, origin, basis):
    """Distance from a segment to an (infinite) flat with the given frame.

    Lower bound for the distance to any subset of the flat.
    """
    fl = Flat(origin, basis) if not isinstance(origin, Flat) else origin
    ra = fl.offset(seg.a if isinstance(seg, Segment) else seg[0])
    rb = fl.offset(seg.b if isinstance(seg, Segment) else seg[1])
    dr = rb - ra
    dd = float(dr @ dr)
    t = 0.0 if dd <= 0.0 else -float(ra @ dr) / dd
    t = min(max(t, 0.0), 1.0)
    return norm(ra + t * dr)


def _lsq_candidates(y, cols, bounds):
    """Minimize |y - cols @ x| subject to simple bounds via active sets.

    ``cols`` has shape (d, k); ``bounds`` is a list of (lo, hi) with None
    for unbounded sides.  Returns the constrained minimum distance.
    Exhaustive over active sets, so only use for small k.
    """
    k = cols.shape[1]
    best = None
    # enumerate: each variable free, or pinned at a finite bound
    options = []
    for lo, hi in bounds:
        opts = [None]
        if lo is not None and np.isfinite(lo):
            opts.append(lo)
        if hi is not None and np.isfinite(hi):
            opts.append(hi)
        options.append(opts)
    import itertools

    for combo in itertools.product(*options):
        free = [i for i in range(k) if combo[i] is None]
        target = y.astype(float).copy()
        for i in range(k):
            if combo[i] is not None:
                target -= combo[i] * cols[:, i]
        if free:
            A = cols[:, free]
            G = A.T @ A
            try:
                x = np.linalg.solve(G, A.T @ target)
            except np.linalg.LinAlgError:
                continue
            full = np.zeros(k)
            for j, i in enumerate(free):
                full[i] = x[j]
            for i in range(k):
                if combo[i] is not None:
                    full[i] = combo[i]
            ok = True
            for i in range(k):
                lo, hi = bounds[i]
                if lo is not None and full[i] < lo - 1e-12:
                    ok = False
                if hi is not None and full[i] > hi + 1e-12:
                    ok = False
            if not ok:
                continue
            resid = norm(target - A @ x)
        else:
            resid = norm(target)
        if best is None or resid < best:
            best = resid
    return best


def segment_tricone_distance(seg, apex, gen_a, gen_b):
    """Minimum distance from a segment to the (infinite) triangle cone
    spanned by two generator vectors at the apex."""
    a0 = seg.a if isinstance(seg, Segment) else np.asarray(seg[0], float)
    a1 = seg.b if isinstance(seg, Segment) else np.asarray(seg[1], float)
    y = np.asarray(apex, float) - a0
    cols = np.stack([a1 - a0, -np.asarray(gen_a, float), -np.asarray(gen_b, float)], axis=1)
    # |a0 + r e - apex - s ga - t gb| = |cols @ (r, s, t) - y|
    return _lsq_candidates(y, cols, [(0.0, 1.0), (0.0, None), (0.0, None)])


def point_tricone_distance(p, apex, gen_a, gen_b):
    y = np.asarray(p, float) - np.asarray(apex, float)
    cols = np.stack([np.asarray(gen_a, float), np.asarray(gen_b, float)], axis=1)
    return _lsq_candidates(y, cols, [(0.0, None), (0.0, None)])


# ---------------------------------------------------------------------------
# rotations and spherical helpers


def rotation_to(u0, u1, rng=None):
    """Great-arc frame carrying unit vector u0 to u1.

    Returns (e1, e2, angle) with u0 = e1 and
    u1 = cos(angle) e1 + sin(angle) e2.  Antipodal inputs leave e2
    underdetermined; it is then drawn (reproducibly) from ``rng``.
    """
    u0 = unit(u0)
    u1 = unit(u1)
    c = float(np.clip(u0 @ u1, -1.0, 1.0))
    angle = math.acos(c)
    perp = u1 - c * u0
    n = np.linalg.norm(perp)
    if n > 1e-12:
        return u0, perp / n, angle
    if angle < math.pi / 2.0:
        # parallel: zero rotation, any orthogonal direction will do
        e2 = orthonormal_complement([u0], u0.size)[0]
        return u0, e2, 0.0
    if rng is None:
        raise DegenerateGeometry("antipodal rotation needs a seeded rng")
    comp = orthonormal_complement([u0], u0.size)
    coeff = rng.standard_normal(comp.shape[0])
    return u0, unit(coeff @ comp), math.pi


def slerp(u0, u1, f, rng=None):
    e1, e2, ang = rotation_to(u0, u1, rng=rng)
    t = f * ang
    return math.cos(t) * e1 + math.sin(t) * e2


@dataclass(frozen=True)
class SphereFrame:
    """Local 3-D chart for a 2-sphere living in a 3-flat of R^d.

    Maps ambient points to coordinates in which the sphere is the standard
    sphere of its radius around the local origin.
    """

    sphere: Sphere

    def __post_init__(self):
        host = self.sphere.host
        if host is None or host.dim != 3:
            raise GeometryError("SphereFrame requires a 2-sphere in a 3-flat")

    @property
    def basis(self):
        return self.sphere.host.basis

    def to_local(self, p):
        return (np.asarray(p, float) - self.sphere.center) @ self.basis.T

    def from_local(self, q):
        return self.sphere.center + np.asarray(q, float) @ self.basis

    def to_local_dir(self, v):
        return np.asarray(v, float) @ self.basis.T

    def from_local_dir(self, v):
        return np.asarray(v, float) @ self.basis
