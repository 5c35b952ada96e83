"""Intersection primitives against independent root-finding oracles.

Every primitive is exercised on >= 1000 seeded random instances.  The
oracle parametrizes one of the two objects by a scalar, evaluates the
signed membership function of the other on a dense grid, and refines
each sign change by bisection; the refined intersection points must lie
within 1e-6 of the components the primitive reports, and every reported
component must satisfy both membership equations to the same tolerance.
Component counts are held to their bounds throughout.
"""
import math

import numpy as np
import pytest

from linkfold.geom import (
    Flat,
    GeometryError,
    QuadCone,
    RightCone,
    Segment,
    Sphere,
    TriangleCone,
    gram_schmidt,
    norm,
    orthonormal_complement,
    point_segment_distance,
    unit,
)
from linkfold.intersect import (
    cone_segment_intersect,
    flats_intersect,
    parallelogram_sphere_intersect,
    quadcone_sphere_intersect,
    segment_flat_intersect,
    segment_sphere_intersect,
    sphere_plane_intersect,
    tricone_sphere_intersect,
)
from linkfold.geom import ApexLineCase

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# oracle helpers


def _bisect(f, a, b, fa, fb, iters=60):
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if fa * fm <= 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _grid_roots(f, lo, hi, k=256):
    """Sign-change roots of a vectorized scalar function on [lo, hi]."""
    ts = np.linspace(lo, hi, k)
    vs = f(ts)
    roots = []
    g = lambda t: float(f(np.array([t]))[0])
    for i in range(k - 1):
        if vs[i] == 0.0:
            roots.append(float(ts[i]))
        elif vs[i] * vs[i + 1] < 0.0:
            roots.append(_bisect(g, float(ts[i]), float(ts[i + 1]),
                                 float(vs[i]), float(vs[i + 1])))
    if vs[-1] == 0.0:
        roots.append(float(ts[-1]))
    return roots


def _arc_dist(p, comp):
    """Exact distance from a point to an arc/point component."""
    p = np.asarray(p, float)
    if comp.is_point:
        return norm(p - comp.point_at_fraction(0.0))
    c = comp.circle
    rel = p - c.center
    th = math.atan2(float(rel @ c.v), float(rel @ c.u)) % TWO_PI
    if not comp.is_full:
        off = (th - comp.start) % TWO_PI
        if off > comp.extent:
            to_end = off - comp.extent
            to_start = TWO_PI - off
            th = comp.start + (comp.extent if to_end <= to_start else 0.0)
    q = c.center + c.radius * (math.cos(th) * c.u + math.sin(th) * c.v)
    return norm(p - q)


def _comps_dist(p, comps):
    return min((_arc_dist(p, c) for c in comps), default=math.inf)


def _span_coords(p, apex, ga, gb):
    """Least-squares (s, t) with p - apex = s ga + t gb, plus residual."""
    M = np.stack([ga, gb], axis=1)
    rhs = np.asarray(p, float) - apex
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return float(sol[0]), float(sol[1]), norm(rhs - M @ sol)


def _comp_samples(comp, k=7):
    if comp.is_point:
        return [comp.point_at_fraction(0.0)]
    return [comp.point_at_fraction(f) for f in np.linspace(0.0, 1.0, k)]


# ---------------------------------------------------------------------------
# flats


def test_flats_intersect_oracle():
    rng = np.random.default_rng(20)
    for case in range(1000):
        d = 4
        g = case % 3  # dimension of the constructed shared flat
        origin = rng.standard_normal(d)
        shared = gram_schmidt(rng.standard_normal((g, d))) if g else \
            np.zeros((0, d))
        if shared.shape[0] != g:
            continue
        F1 = Flat.from_span(origin, list(shared) + [rng.standard_normal(d)])
        F2 = Flat.from_span(origin, list(shared) + [rng.standard_normal(d)])
        if F1.dim != g + 1 or F2.dim != g + 1:
            continue
        I = flats_intersect(F1, F2)
        assert I is not None
        assert I.dim == g
        # soundness: points of I lie in both inputs
        for _ in range(4):
            p = I.point(rng.standard_normal(I.dim) * 2.0) if I.dim else \
                I.origin
            assert F1.contains(p, eps=1e-6)
            assert F2.contains(p, eps=1e-6)
        # completeness: the constructed shared flat is inside I
        for _ in range(4):
            p = origin + (rng.standard_normal(g) @ shared if g else 0.0)
            assert norm(I.offset(p)) <= 1e-6 * (1.0 + norm(p))
        # a parallel translate misses
        comp = orthonormal_complement(F1.basis, d)
        off = comp[0]
        assert flats_intersect(F1, Flat(F1.origin + 0.5 * off,
                                        F1.basis)) is None


def test_segment_flat_oracle():
    rng = np.random.default_rng(21)
    done = 0
    while done < 1000:
        k = int(rng.integers(1, 4))
        H = Flat.from_span(rng.standard_normal(4),
                           rng.standard_normal((k, 4)))
        if H.dim != k:
            continue
        mode = done % 3
        if mode == 0:
            # transversal crossing through a known flat point
            p = H.point(rng.standard_normal(k))
            u = rng.standard_normal(4)
            if norm(H.offset(H.origin + u)) < 1e-3:
                continue
            seg = Segment(p - rng.uniform(0.3, 1.5) * u,
                          p + rng.uniform(0.3, 1.5) * u)
            hit = segment_flat_intersect(seg, H)
            assert hit is not None and hit[0] == "point"
            assert norm(hit[1] - p) <= 1e-6 * (1.0 + norm(p))
        elif mode == 1:
            # fully inside the flat
            a = H.point(rng.standard_normal(k))
            b = H.point(rng.standard_normal(k))
            if norm(a - b) < 1e-3:
                continue
            hit = segment_flat_intersect(Segment(a, b), H)
            assert hit is not None and hit[0] == "segment"
        else:
            # parallel and strictly off the flat
            comp = orthonormal_complement(H.basis, 4)
            a = H.point(rng.standard_normal(k)) + 0.2 * comp[0]
            b = H.point(rng.standard_normal(k)) + 0.2 * comp[0]
            if norm(a - b) < 1e-3:
                continue
            assert segment_flat_intersect(Segment(a, b), H) is None
        done += 1


# ---------------------------------------------------------------------------
# spheres


def test_sphere_plane_oracle():
    rng = np.random.default_rng(22)
    done = 0
    while done < 1000:
        C = rng.standard_normal(4)
        r = rng.uniform(0.5, 2.0)
        B = gram_schmidt(rng.standard_normal((2, 4)))
        if B.shape[0] != 2:
            continue
        n = orthonormal_complement(B, 4)[0]
        h = rng.uniform(0.0, 1.5) * r
        if 0.9 * r < h < 1.1 * r:
            continue  # skip the tangency band
        origin = C + h * n + rng.standard_normal(2) @ B
        H = Flat(origin, B)
        S = Sphere(C, r)
        res = sphere_plane_intersect(S, H)
        if h > r:
            assert res is None
        else:
            assert res is not None and not isinstance(res, np.ndarray)
            for th in np.linspace(0.0, TWO_PI, 16, endpoint=False):
                p = res.point_at(th)
                assert abs(norm(p - C) - r) <= 1e-6
                assert H.contains(p, eps=1e-6)
            # oracle: in-plane rays from the projected center hit the
            # circle where |x - C| = r
            bp = origin + ((C - origin) @ B.T) @ B
            for _ in range(8):
                u = unit(rng.standard_normal(2) @ B)
                f = lambda ts: np.linalg.norm(
                    bp[None] + ts[:, None] * u[None] - C, axis=1) - r
                for t in _grid_roots(f, -3.0 * r, 3.0 * r):
                    p = bp + t * u
                    assert abs(norm(p - res.center) - res.radius) <= 1e-6
        done += 1


def test_segment_sphere_oracle():
    rng = np.random.default_rng(23)
    for case in range(1000):
        C = rng.standard_normal(4)
        r = rng.uniform(0.4, 1.6)
        if case % 10 < 7:
            S = Sphere(C, r)
            a = C + r * rng.uniform(0.3, 1.7) * unit(rng.standard_normal(4))
            b = C + r * rng.uniform(0.3, 1.7) * unit(rng.standard_normal(4))
        else:
            # hosted 2-sphere, segment inside the host 3-flat
            B = gram_schmidt(rng.standard_normal((3, 4)))
            if B.shape[0] != 3:
                continue
            host = Flat(C, B)
            S = Sphere(C, r, host)
            a = host.point(r * rng.uniform(0.3, 1.7)
                           * unit(rng.standard_normal(3)))
            b = host.point(r * rng.uniform(0.3, 1.7)
                           * unit(rng.standard_normal(3)))
        if norm(a - b) < 1e-3:
            continue
        seg = Segment(a, b)
        pts = segment_sphere_intersect(seg, S)
        assert len(pts) <= 2
        for q in pts:
            assert abs(norm(q - C) - r) <= 1e-6
            assert point_segment_distance(q, a, b)[0] <= 1e-6
        f = lambda ts: np.linalg.norm(
            a[None] + ts[:, None] * (b - a)[None] - C, axis=1) - r
        for t in _grid_roots(f, 0.0, 1.0, 512):
            p = a + t * (b - a)
            assert min((norm(p - q) for q in pts), default=math.inf) <= 1e-6


# ---------------------------------------------------------------------------
# cones


def _random_cone_sphere(rng, cls, apex_centered):
    apex = rng.standard_normal(4) * 0.5
    ga = rng.uniform(0.6, 1.6) * unit(rng.standard_normal(4))
    gb = rng.uniform(0.6, 1.6) * unit(rng.standard_normal(4))
    if norm(np.cross(ga[:3], gb[:3])) < 1e-2 and abs(ga[3] - gb[3]) < 1e-2:
        return None
    try:
        T = cls(apex, apex + ga, apex + gb)
    except GeometryError:
        return None
    if apex_centered:
        C = apex
    else:
        C = apex + rng.uniform(0.0, 1.5) * ga + rng.uniform(0.0, 1.5) * gb \
            + rng.uniform(-0.3, 0.3) * rng.standard_normal(4)
    S = Sphere(C, rng.uniform(0.5, 1.5))
    return T, S, ga, gb


def _check_cone_sphere(T, S, ga, gb, comps, quad, rng):
    apex = T.apex
    # soundness: reported components lie on the sphere and in the cone
    for comp in comps:
        for p in _comp_samples(comp):
            assert abs(norm(p - S.center) - S.radius) <= 1e-6
            s, t, resid = _span_coords(p, apex, ga, gb)
            scale = 1.0 + norm(p - apex)
            assert resid <= 1e-6 * scale
            assert s >= -1e-5 and t >= -1e-5
            if quad:
                assert s + t >= 1.0 - 1e-5
    # completeness: rays through the generator segment, refined onto the
    # sphere, must land inside a reported component
    for _ in range(12):
        gam = rng.uniform(0.02, 0.98)
        direc = (1.0 - gam) * ga + gam * gb
        rmax = (norm(S.center - apex) + S.radius) * 1.5 / norm(direc)
        f = lambda ts: np.linalg.norm(
            apex[None] + ts[:, None] * direc[None] - S.center, axis=1) \
            - S.radius
        for rl in _grid_roots(f, 0.0, rmax):
            if rl < 1e-3:
                continue
            if quad and rl < 1.0 + 1e-3:
                if rl > 1.0 - 1e-3:
                    continue  # skip the s+t = 1 boundary band
                continue
            p = apex + rl * direc
            assert _comps_dist(p, comps) <= 1e-6


def test_tricone_sphere_oracle():
    rng = np.random.default_rng(24)
    done = 0
    while done < 1000:
        centered = done >= 800
        inst = _random_cone_sphere(rng, TriangleCone, centered)
        if inst is None:
            continue
        T, S, ga, gb = inst
        try:
            comps = tricone_sphere_intersect(T, S)
        except GeometryError:
            continue
        assert len(comps) <= (1 if centered else 2)
        _check_cone_sphere(T, S, ga, gb, comps, False, rng)
        done += 1


def test_quadcone_sphere_oracle():
    rng = np.random.default_rng(25)
    done = 0
    while done < 1000:
        centered = done >= 800
        inst = _random_cone_sphere(rng, QuadCone, centered)
        if inst is None:
            continue
        Q, S, ga, gb = inst
        try:
            comps = quadcone_sphere_intersect(Q, S)
        except GeometryError:
            continue
        assert len(comps) <= (1 if centered else 2)
        _check_cone_sphere(Q, S, ga, gb, comps, True, rng)
        done += 1


def test_parallelogram_sphere_oracle():
    rng = np.random.default_rng(26)
    done = 0
    while done < 1000:
        corner = rng.standard_normal(4)
        e1 = rng.uniform(0.8, 2.0) * unit(rng.standard_normal(4))
        e2 = rng.uniform(0.8, 2.0) * unit(rng.standard_normal(4))
        if gram_schmidt([e1, e2]).shape[0] < 2:
            continue
        C = corner + rng.uniform(-0.2, 1.2) * e1 + rng.uniform(-0.2, 1.2) \
            * e2 + rng.uniform(-0.3, 0.3) * rng.standard_normal(4)
        S = Sphere(C, rng.uniform(0.4, 1.2))
        comps = parallelogram_sphere_intersect(corner, e1, e2, S)
        assert len(comps) <= 4
        for comp in comps:
            for p in _comp_samples(comp):
                assert abs(norm(p - C) - S.radius) <= 1e-6
                s, t, resid = _span_coords(p, corner, e1, e2)
                assert resid <= 1e-6 * (1.0 + norm(p - corner))
                assert -1e-5 <= s <= 1.0 + 1e-5
                assert -1e-5 <= t <= 1.0 + 1e-5
        for _ in range(10):
            si = rng.uniform(0.02, 0.98)
            base = corner + si * e1
            f = lambda ts: np.linalg.norm(
                base[None] + ts[:, None] * e2[None] - C, axis=1) - S.radius
            for t in _grid_roots(f, 0.0, 1.0):
                if not 1e-3 < t < 1.0 - 1e-3:
                    continue
                assert _comps_dist(base + t * e2, comps) <= 1e-6
        done += 1


def test_cone_segment_oracle():
    rng = np.random.default_rng(27)
    done = 0
    while done < 1000:
        apex = rng.standard_normal(4)
        u = unit(rng.standard_normal(4))
        theta = rng.uniform(0.2, 1.3)
        if abs(theta - math.pi / 2.0) < 0.08:
            continue
        cone = RightCone(apex, apex + u, theta)
        # a segment through a known surface point, random orientation
        w = unit(orthonormal_complement([u], 4)[
            int(rng.integers(0, 3))] + 0.3 * rng.standard_normal(4)
            - float(u @ rng.standard_normal(4)) * 0.0)
        w = unit(w - float(w @ u) * u)
        surf = apex + rng.uniform(0.3, 2.0) * (
            math.cos(theta) * u + math.sin(theta) * w)
        direc = unit(rng.standard_normal(4))
        a = surf - rng.uniform(0.3, 1.5) * direc
        b = surf + rng.uniform(0.3, 1.5) * direc
        if norm(a - b) < 1e-3:
            continue
        seg = Segment(a, b)
        hit = cone_segment_intersect(cone, seg)
        if isinstance(hit, ApexLineCase):
            continue
        assert len(hit) <= 2
        axis = cone.axis
        cos_t = math.cos(cone.half_angle)
        for q in hit:
            wv = q - apex
            assert abs(float(wv @ axis) - cos_t * norm(wv)) <= \
                1e-6 * (1.0 + norm(wv))
            assert point_segment_distance(q, a, b)[0] <= 1e-6
        vec = b - a
        f = lambda ts: (
            (a[None] + ts[:, None] * vec[None] - apex) @ axis
            - cos_t * np.linalg.norm(
                a[None] + ts[:, None] * vec[None] - apex, axis=1))
        for t in _grid_roots(f, 0.0, 1.0, 512):
            p = a + t * vec
            if norm(p - apex) < 1e-6:
                continue
            assert min((norm(p - q) for q in hit), default=math.inf) <= 1e-6
        done += 1


def test_cone_segment_rejects_flat_cone():
    from linkfold.geom import FlatConeError
    cone = RightCone(np.zeros(4), np.array([1.0, 0, 0, 0]), math.pi / 2.0)
    seg = Segment(np.array([0.0, 1, 0, 0]), np.array([0.0, -1, 0.5, 0]))
    with pytest.raises(FlatConeError):
        cone_segment_intersect(cone, seg)


# ---------------------------------------------------------------------------
# isometry invariance


def _random_isometry(rng, d=4):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    s = rng.standard_normal(d)
    return Q, s


def test_segment_sphere_isometry_invariance():
    rng = np.random.default_rng(28)
    done = 0
    while done < 200:
        C = rng.standard_normal(4)
        r = rng.uniform(0.4, 1.6)
        a = C + r * rng.uniform(0.3, 1.7) * unit(rng.standard_normal(4))
        b = C + r * rng.uniform(0.3, 1.7) * unit(rng.standard_normal(4))
        if norm(a - b) < 1e-3:
            continue
        pts = segment_sphere_intersect(Segment(a, b), Sphere(C, r))
        Q, s = _random_isometry(rng)
        pts2 = segment_sphere_intersect(
            Segment(Q @ a + s, Q @ b + s), Sphere(Q @ C + s, r))
        assert len(pts) == len(pts2)
        for p in pts:
            m = Q @ p + s
            assert min((norm(m - q) for q in pts2),
                       default=math.inf) <= 1e-9
        done += 1


def test_tricone_sphere_isometry_invariance():
    rng = np.random.default_rng(29)
    done = 0
    while done < 200:
        inst = _random_cone_sphere(rng, TriangleCone, False)
        if inst is None:
            continue
        T, S, _, _ = inst
        try:
            comps = tricone_sphere_intersect(T, S)
        except GeometryError:
            continue
        Q, s = _random_isometry(rng)
        T2 = TriangleCone(Q @ T.apex + s, Q @ T.a + s, Q @ T.b + s)
        try:
            comps2 = tricone_sphere_intersect(
                T2, Sphere(Q @ S.center + s, S.radius))
        except GeometryError:
            continue
        for comp in comps:
            for p in _comp_samples(comp):
                assert _comps_dist(Q @ p + s, comps2) <= 1e-9
        done += 1
