"""Intersection primitives between flats, spheres, segments and cones.

Every operation returns conservative (closed) results: points within the
predicate tolerance of a boundary count as intersections.  Component
counts are checked against their theoretical bounds and violations raise
``GeometryError`` rather than returning silently wrong answers.
"""
from __future__ import annotations

import math

import numpy as np

from . import config
from .geom import (
    TWO_PI,
    Arc,
    Circle,
    ApexLineCase,
    DegenerateGeometry,
    DimensionMismatch,
    Flat,
    FlatConeError,
    GeometryError,
    QuadCone,
    RightCone,
    Segment,
    Sphere,
    TriangleCone,
    as_point,
    gram_schmidt,
    norm,
    orthonormal_complement,
    point_segment_distance,
    unit,
)

_EMPTY = "empty"


# ---------------------------------------------------------------------------
# flats


def flats_intersect(f1: Flat, f2: Flat, eps=None):
    """Intersection of two flats: a Flat (possibly 0-dimensional) or None."""
    eps = config.EPS if eps is None else eps
    if f1.d != f2.d:
        raise DimensionMismatch("flats live in different ambient dimensions")
    d = f1.d
    n1 = orthonormal_complement(f1.basis, d)
    n2 = orthonormal_complement(f2.basis, d)
    A = np.vstack([n1, n2])
    b = np.concatenate([n1 @ f1.origin, n2 @ f2.origin])
    if A.shape[0] == 0:
        return Flat(f1.origin, np.eye(d))
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    scale = 1.0 + norm(f1.origin) + norm(f2.origin)
    if norm(A @ x - b) > eps * scale:
        return None
    # direction space: null space of A
    _, s, vt = np.linalg.svd(A)
    tol = max(A.shape) * (s[0] if s.size else 0.0) * 1e-12
    rank = int(np.sum(s > tol))
    basis = vt[rank:]
    return Flat(x, basis)


def segment_flat_intersect(seg: Segment, H: Flat, eps=None):
    """Classify segment vs flat: ('segment', seg), ('point', p) or None."""
    eps = config.EPS if eps is None else eps
    if seg.d != H.d:
        raise DimensionMismatch("segment/flat dimension mismatch")
    ra = H.offset(seg.a)
    rb = H.offset(seg.b)
    scale = 1.0 + seg.length + norm(seg.a - H.origin)
    tol = eps * scale
    na, nb = norm(ra), norm(rb)
    if na <= tol and nb <= tol:
        return ("segment", seg)
    dr = rb - ra
    dd = float(dr @ dr)
    if dd <= tol * tol:
        return None  # parallel, strictly off the flat
    t = -float(ra @ dr) / dd
    if -eps <= t <= 1.0 + eps and norm(ra + t * dr) <= tol:
        t = min(max(t, 0.0), 1.0)
        return ("point", seg.point_at(t))
    return None


# ---------------------------------------------------------------------------
# sphere basics


def _require_plane_in_host(S: Sphere, H: Flat, eps):
    if S.host is not None and not S.host.contains_flat(H, eps=max(eps, 1e-9)):
        raise GeometryError("plane must lie inside the sphere's host flat")


def sphere_plane_intersect(S: Sphere, H: Flat, eps=None):
    """Plane (2-flat) vs sphere: Circle, a point array, or None.

    For a hosted (lower-dimensional) sphere the plane must lie inside the
    host flat; use the cone intersections for the transversal cases.
    """
    eps = config.EPS if eps is None else eps
    if H.dim != 2:
        raise GeometryError("H must be a 2-flat")
    if S.d != H.d:
        raise DimensionMismatch("sphere/plane dimension mismatch")
    _require_plane_in_host(S, H, eps)
    c_h = H.project(S.center)
    A2 = float((S.center - c_h) @ (S.center - c_h))
    r2 = S.radius * S.radius - A2
    scale = max(1.0, S.radius * S.radius)
    if r2 < -eps * scale:
        return None
    if r2 <= eps * scale:
        return c_h
    return Circle(c_h, math.sqrt(r2), H.basis[0], H.basis[1])


def _line_sphere_params(origin, direction, S: Sphere, eps):
    """Parameters t with |origin + t*direction - center| = radius."""
    w = np.asarray(origin, float) - S.center
    u = np.asarray(direction, float)
    a = float(u @ u)
    b = 2.0 * float(w @ u)
    c = float(w @ w) - S.radius * S.radius
    scale = max(1.0, S.radius * S.radius)
    if a <= 1e-300:
        return []
    disc = b * b - 4.0 * a * c
    if disc < -eps * scale * a:
        return []
    disc = max(disc, 0.0)
    sq = math.sqrt(disc)
    t1 = (-b - sq) / (2.0 * a)
    t2 = (-b + sq) / (2.0 * a)
    if abs(t2 - t1) * math.sqrt(a) <= eps * max(1.0, S.radius):
        return [(t1 + t2) / 2.0]
    return [t1, t2]


def segment_sphere_intersect(seg: Segment, S: Sphere, eps=None):
    """Segment vs sphere: list of at most two points."""
    eps = config.EPS if eps is None else eps
    if seg.d != S.d:
        raise DimensionMismatch("segment/sphere dimension mismatch")
    if S.host is not None:
        hit = segment_flat_intersect(seg, S.host, eps)
        if hit is None:
            return []
        kind, obj = hit
        if kind == "point":
            return [obj] if S.contains(obj, eps) else []
        seg = obj
    u = seg.b - seg.a
    eps_t = eps / max(seg.length, eps)
    out = []
    for t in _line_sphere_params(seg.a, u, S, eps):
        if -eps_t <= t <= 1.0 + eps_t:
            out.append(seg.point_at(min(max(t, 0.0), 1.0)))
    if len(out) == 2 and norm(out[0] - out[1]) <= eps * max(1.0, S.radius):
        out = out[:1]
    if len(out) > 2:
        raise GeometryError("line.sphere count bound violated")
    return out


# ---------------------------------------------------------------------------
# circle clipping machinery (cones and parallelograms vs spheres)


def _span2_coords(apex, ga, gb, p):
    """Least-squares (s, t) with p - apex ~ s*ga + t*gb, plus the residual."""
    rel = np.asarray(p, float) - apex
    g11 = float(ga @ ga)
    g12 = float(ga @ gb)
    g22 = float(gb @ gb)
    det = g11 * g22 - g12 * g12
    if det <= 1e-300:
        return None
    r1 = float(ga @ rel)
    r2 = float(gb @ rel)
    s = (g22 * r1 - g12 * r2) / det
    t = (g11 * r2 - g12 * r1) / det
    resid = norm(rel - s * ga - t * gb)
    return s, t, resid


def _line_circle_angles(circle: Circle, origin, direction, eps):
    """Angles of intersection of a coplanar line with the circle."""
    out = []
    w = np.asarray(origin, float) - circle.center
    u = np.asarray(direction, float)
    a = float(u @ u)
    b = 2.0 * float(w @ u)
    c = float(w @ w) - circle.radius * circle.radius
    if a <= 1e-300:
        return out
    disc = b * b - 4.0 * a * c
    scale = max(1.0, circle.radius * circle.radius)
    if disc < -eps * scale * a:
        return out
    disc = max(disc, 0.0)
    sq = math.sqrt(disc)
    for t in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)):
        out.append(circle.angle_of(origin + t * u))
    return out


def _clip_circle(circle: Circle, member, lines, ang_eps=None):
    """Clip a circle to a coplanar region given by a membership predicate.

    ``lines`` are (origin, direction) pairs for the region's boundary
    lines; their circle crossings give exact arc endpoints.  Open
    intervals between crossings are classified by midpoint membership and
    merged into maximal closed arcs.
    """
    ang_eps = config.ANG_EPS if ang_eps is None else ang_eps
    cands = []
    for origin, direction in lines:
        cands.extend(_line_circle_angles(circle, origin, direction, config.EPS))
    cands = sorted(c % TWO_PI for c in cands)
    merged = []
    for c in cands:
        if merged and (c - merged[-1]) <= ang_eps:
            continue
        merged.append(c)
    if len(merged) >= 2 and (merged[0] + TWO_PI - merged[-1]) <= ang_eps:
        merged.pop()
    if not merged:
        return [Arc.full(circle)] if member(circle.point_at(0.0)) else []
    k = len(merged)
    gaps_in = []
    for i in range(k):
        a0 = merged[i]
        a1 = merged[(i + 1) % k] + (TWO_PI if i == k - 1 else 0.0)
        mid = (a0 + a1) / 2.0
        gaps_in.append(member(circle.point_at(mid)))
    cand_in = [member(circle.point_at(a)) for a in merged]
    if all(gaps_in) and all(cand_in):
        return [Arc.full(circle)]
    # cells alternate: cand 0, gap 0, cand 1, gap 1, ...
    cells = []
    for i in range(k):
        cells.append(("cand", i, cand_in[i]))
        cells.append(("gap", i, gaps_in[i]))
    n = len(cells)
    # find a cell that is out, rotate so runs don't straddle the seam
    start = next((i for i in range(n) if not cells[i][2]), None)
    if start is None:
        return [Arc.full(circle)]
    order = cells[start:] + cells[:start]
    arcs = []
    run = []
    for cell in order + [("cand", -1, False)]:
        if cell[2]:
            run.append(cell)
        elif run:
            arcs.append(_run_to_arc(circle, run, merged))
            run = []
    return [a for a in arcs if a is not None]


def _run_to_arc(circle, run, cands):
    kinds = [c[0] for c in run]
    if kinds == ["cand"]:
        return Arc(circle, cands[run[0][1]], 0.0)
    # a run of gaps must begin/end at candidate angles
    first_gap = next((c for c in run if c[0] == "gap"), None)
    if first_gap is None:
        # several isolated candidates merged without gaps: return first
        return Arc(circle, cands[run[0][1]], 0.0)
    idxs = [c[1] for c in run if c[0] == "gap"]
    k = len(cands)
    a0 = cands[idxs[0]]
    a1 = cands[(idxs[-1] + 1) % k]
    extent = (a1 - a0) % TWO_PI
    if extent == 0.0:
        extent = TWO_PI
    return Arc(circle, a0, extent)


def _merge_close_arcs(arcs, ang_eps):
    """Merge arcs on the same circle whose endpoints nearly touch."""
    if len(arcs) <= 1:
        return arcs
    out = list(arcs)
    changed = True
    while changed and len(out) > 1:
        changed = False
        for i in range(len(out)):
            for j in range(len(out)):
                if i == j:
                    continue
                a, b = out[i], out[j]
                if a.circle is not b.circle:
                    continue
                gap = (b.start - (a.start + a.extent)) % TWO_PI
                if gap <= ang_eps:
                    extent = min(a.extent + gap + b.extent, TWO_PI)
                    merged = Arc(a.circle, a.start, extent)
                    out = [out[x] for x in range(len(out)) if x not in (i, j)]
                    out.append(merged)
                    changed = True
                    break
            if changed:
                break
    return out


def _in_tricone(T: TriangleCone, p, eps):
    ga = T.a - T.apex
    gb = T.b - T.apex
    scale = 1.0 + norm(np.asarray(p, float) - T.apex)
    co = _span2_coords(T.apex, ga, gb, p)
    if co is None:
        # degenerate ray
        rel = np.asarray(p, float) - T.apex
        u = unit(ga)
        along = float(rel @ u)
        return along >= -eps * scale and norm(rel - along * u) <= eps * scale
    s, t, resid = co
    if resid > eps * scale:
        return False
    lam = max(norm(ga), norm(gb))
    tol = eps * scale / max(lam, eps)
    ok = s >= -tol and t >= -tol
    if ok and isinstance(T, QuadCone):
        ok = s + t >= 1.0 - tol
    return ok


def _hosted_point_components(points, member):
    return [Arc.point(p) for p in points if member(p)]


def _cone_sphere_generic(T: TriangleCone, S: Sphere, member, extra_lines, eps):
    """Shared implementation for triangle/quad cone vs sphere."""
    if T.is_degenerate:
        # cone is a ray from the apex
        direction = unit(T.a - T.apex)
        pts = []
        seg_len = max(norm(T.a - T.apex), norm(T.b - T.apex))
        far = T.apex + direction * (seg_len + 4.0 * (S.radius + norm(S.center - T.apex)))
        ray = Segment(T.apex, far)
        for p in segment_sphere_intersect(ray, S, eps):
            if member(p):
                pts.append(p)
        return [Arc.point(p) for p in pts]
    P = T.plane()
    host = S.host
    base_lines = [(T.apex, T.a - T.apex), (T.apex, T.b - T.apex)] + extra_lines
    if host is None or host.contains_flat(P, eps=1e-9):
        cut = sphere_plane_intersect(Sphere(S.center, S.radius, None), P, eps) \
            if host is None else _plane_sphere_in_host(S, P, eps)
        if cut is None:
            return []
        if isinstance(cut, np.ndarray):
            return _hosted_point_components([cut], member)
        return _clip_circle(cut, member, base_lines)
    G = flats_intersect(P, host, eps)
    if G is None:
        return []
    if G.dim == 0:
        p = G.origin
        if S.contains(p, eps) and member(p):
            return [Arc.point(p)]
        return []
    if G.dim == 1:
        pts = []
        for t in _line_sphere_params(G.origin, G.basis[0], Sphere(S.center, S.radius), eps):
            p = G.origin + t * G.basis[0]
            if member(p):
                pts.append(p)
        return [Arc.point(p) for p in pts]
    # numerically, P turned out to lie inside the host after all
    cut = _plane_sphere_in_host(S, G, eps)
    if cut is None:
        return []
    if isinstance(cut, np.ndarray):
        return _hosted_point_components([cut], member)
    return _clip_circle(cut, member, base_lines)


def _plane_sphere_in_host(S: Sphere, H: Flat, eps):
    """Plane-in-host vs hosted sphere; same Pythagorean construction."""
    c_h = H.project(S.center)
    A2 = float((S.center - c_h) @ (S.center - c_h))
    r2 = S.radius * S.radius - A2
    scale = max(1.0, S.radius * S.radius)
    if r2 < -eps * scale:
        return None
    if r2 <= eps * scale:
        return c_h
    return Circle(c_h, math.sqrt(r2), H.basis[0], H.basis[1])


def tricone_sphere_intersect(T: TriangleCone, S: Sphere, eps=None):
    """Triangle cone vs sphere: at most two arc/point components
    (at most one when the apex is the sphere center)."""
    eps = config.EPS if eps is None else eps
    if T.d != S.d:
        raise DimensionMismatch("cone/sphere dimension mismatch")
    member = lambda p: _in_tricone(T, p, eps)
    comps = _cone_sphere_generic(T, S, member, [], eps)
    comps = _merge_close_arcs(comps, 1e-7)
    bound = 1 if norm(T.apex - S.center) <= eps * max(1.0, S.radius) else 2
    if sum(1 for c in comps if not c.is_point) + sum(1 for c in comps if c.is_point) > max(bound, 2) \
            or len(comps) > 2 or (bound == 1 and len(comps) > 1):
        raise GeometryError("tricone.sphere count bound violated")
    return comps


def quadcone_sphere_intersect(Q: QuadCone, S: Sphere, eps=None):
    """Quadrilateral cone (rays at or beyond ab) vs sphere: <= 2 components."""
    eps = config.EPS if eps is None else eps
    if Q.d != S.d:
        raise DimensionMismatch("cone/sphere dimension mismatch")
    member = lambda p: _in_tricone(Q, p, eps)
    extra = [] if Q.is_degenerate else [(Q.a, Q.b - Q.a)]
    comps = _cone_sphere_generic(Q, S, member, extra, eps)
    comps = _merge_close_arcs(comps, 1e-7)
    bound = 1 if norm(Q.apex - S.center) <= eps * max(1.0, S.radius) else 2
    if len(comps) > bound and len(comps) > 2:
        raise GeometryError("quadcone.sphere count bound violated")
    if bound == 1 and len(comps) > 1:
        raise GeometryError("quadcone.sphere apex-centered count bound violated")
    return comps


def parallelogram_sphere_intersect(corner, e1, e2, S: Sphere, eps=None):
    """Parallelogram {corner + s e1 + t e2, s,t in [0,1]} vs sphere:
    at most four arc/point components."""
    eps = config.EPS if eps is None else eps
    corner = as_point(corner, d=S.d)
    e1 = np.asarray(e1, float)
    e2 = np.asarray(e2, float)
    B = gram_schmidt([e1, e2])
    if B.shape[0] < 2:
        # degenerate: reduces to a segment along the surviving direction
        pts = []
        tips = [corner + a * e1 + b * e2 for a in (0.0, 1.0) for b in (0.0, 1.0)]
        lens = [float((t - corner) @ (t - corner)) for t in tips]
        far = tips[int(np.argmax(lens))]
        if norm(far - corner) <= config.EPS_UNIT:
            return [Arc.point(corner)] if S.contains(corner, eps) else []
        for p in segment_sphere_intersect(Segment(corner, far), S, eps):
            pts.append(p)
        return [Arc.point(p) for p in pts]

    def member(p):
        co = _span2_coords(corner, e1, e2, p)
        if co is None:
            return False
        s, t, resid = co
        scale = 1.0 + norm(np.asarray(p, float) - corner)
        lam = max(norm(e1), norm(e2))
        tol = eps * scale / max(lam, eps)
        return resid <= eps * scale and -tol <= s <= 1.0 + tol and -tol <= t <= 1.0 + tol

    P = Flat(corner, B)
    host = S.host
    lines = [
        (corner, e1),
        (corner, e2),
        (corner + e2, e1),
        (corner + e1, e2),
    ]
    if host is None or host.contains_flat(P, eps=1e-9):
        cut = _plane_sphere_in_host(S, P, eps)
        if cut is None:
            comps = []
        elif isinstance(cut, np.ndarray):
            comps = _hosted_point_components([cut], member)
        else:
            comps = _clip_circle(cut, member, lines)
    else:
        G = flats_intersect(P, host, eps)
        if G is None:
            comps = []
        elif G.dim == 0:
            p = G.origin
            comps = [Arc.point(p)] if (S.contains(p, eps) and member(p)) else []
        elif G.dim == 1:
            pts = [
                G.origin + t * G.basis[0]
                for t in _line_sphere_params(G.origin, G.basis[0], Sphere(S.center, S.radius), eps)
            ]
            comps = [Arc.point(p) for p in pts if member(p)]
        else:
            cut = _plane_sphere_in_host(S, G, eps)
            if cut is None:
                comps = []
            elif isinstance(cut, np.ndarray):
                comps = _hosted_point_components([cut], member)
            else:
                comps = _clip_circle(cut, member, lines)
    comps = _merge_close_arcs(comps, 1e-7)
    if len(comps) > 4:
        raise GeometryError("para.sphere count bound violated")
    return comps


# ---------------------------------------------------------------------------
# right cones


def cone_segment_intersect(C: RightCone, seg: Segment, eps=None):
    """Right cone surface vs segment: at most two points, or ApexLineCase
    when the segment's line is a cone ruling through the apex.

    The squared cone equation admits the mirror cone; roots with
    (p - apex) . axis < 0 are discarded (the unsquared equation is the
    authority).  Raises FlatConeError for half-angle pi/2.
    """
    eps = config.EPS if eps is None else eps
    if C.d != seg.d:
        raise DimensionMismatch("cone/segment dimension mismatch")
    theta = C.half_angle
    if abs(theta - math.pi / 2.0) <= config.ANG_EPS:
        raise FlatConeError("degenerate flat cone; use the flat-case path")
    axis = C.axis
    scale = 1.0 + norm(seg.a - C.apex) + seg.length
    # line through the apex?
    u = seg.b - seg.a
    dline, _ = point_segment_distance(
        C.apex, seg.a - 10.0 * u * scale, seg.b + 10.0 * u * scale
    )
    if dline <= eps * scale:
        du = unit(u)
        if float(du @ axis) < 0.0:
            du = -du
        if abs(float(du @ axis) - math.cos(theta)) <= math.sqrt(eps):
            return ApexLineCase(C.apex, du)
        return []
    cos2 = math.cos(theta) ** 2
    w0 = seg.a - C.apex
    A = float(u @ axis) ** 2 - cos2 * float(u @ u)
    B = 2.0 * (float(w0 @ axis) * float(u @ axis) - cos2 * float(w0 @ u))
    C0 = float(w0 @ axis) ** 2 - cos2 * float(w0 @ w0)
    qscale = max(abs(A), abs(B), abs(C0), 1e-30)
    roots = []
    if abs(A) <= 1e-14 * qscale:
        if abs(B) > 1e-14 * qscale:
            roots = [-C0 / B]
    else:
        disc = B * B - 4.0 * A * C0
        if disc >= -eps * qscale:
            sq = math.sqrt(max(disc, 0.0))
            roots = [(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)]
    eps_t = eps / max(seg.length, eps)
    out = []
    for t in roots:
        if not (-eps_t <= t <= 1.0 + eps_t):
            continue
        p = seg.point_at(min(max(t, 0.0), 1.0))
        w = p - C.apex
        if float(w @ axis) < -eps * scale:
            continue  # mirror cone
        if out and any(norm(p - q) <= eps * scale for q in out):
            continue
        out.append(p)
    if len(out) > 2:
        raise GeometryError("line.cone count bound violated")
    return out


# ---------------------------------------------------------------------------
# elbow spheres


def elbow_sphere(v_prev, v_next, l1, l2, workspace: Flat | None = None, eps=None):
    """Positions of a middle joint with both neighbors pinned.

    The set {z : |z - v_prev| = l1, |z - v_next| = l2} is a sphere of one
    dimension less than ambient, hosted in the flat through its center
    orthogonal to the elbow axis.  ``workspace`` restricts the host to a
    given 4-flat (for chains embedded in a flat of a higher-dimensional
    space); without it, the host spans the full orthogonal complement.
    Raises DegenerateGeometry for straight or folded elbows.
    """
    eps = config.EPS if eps is None else eps
    v_prev = as_point(v_prev)
    v_next = as_point(v_next, d=v_prev.size)
    w = v_next - v_prev
    D = norm(w)
    scale = max(1.0, l1 + l2)
    if D >= l1 + l2 - eps * scale:
        raise DegenerateGeometry("straight elbow: joint already straightened")
    if D <= abs(l1 - l2) + eps * scale:
        raise DegenerateGeometry("folded elbow: violates simplicity upstream")
    x = (D * D + l1 * l1 - l2 * l2) / (2.0 * D)
    rho = math.sqrt(max(l1 * l1 - x * x, 0.0))
    center = v_prev + (x / D) * w
    if workspace is None:
        basis = orthonormal_complement([w], v_prev.size)
    else:
        from .geom import complement_within

        basis = complement_within(workspace.basis, w)
    host = Flat(center, basis)
    return Sphere(center, rho, host)
