"""Obstruction diagrams: blocked regions on motion spheres.

When one joint moves while the rest of the linkage is pinned, the
moving joint lives on a sphere and each stationary segment blocks a
small closed set there (arcs and isolated points, obtained from cone /
sphere intersections).  The diagrams drive the planner's choice of
collision-free targets and certify the sparsity bounds the move counts
rely on.
"""
from __future__ import annotations

import math

import numpy as np

from . import config
from .geom import (
    Arc,
    ApexLineCase,
    Circle,
    DegenerateGeometry,
    FlatConeError,
    Flat,
    GeometryError,
    QuadCone,
    RightCone,
    Segment,
    Sphere,
    SphereFrame,
    TriangleCone,
    norm,
    orthonormal_complement,
    segment_pairs_distance,
    unit,
)
from .intersect import (
    cone_segment_intersect,
    quadcone_sphere_intersect,
    segment_flat_intersect,
    segment_sphere_intersect,
    tricone_sphere_intersect,
)

TWO_PI = 2.0 * math.pi


class ObstructionDiagram:
    """Blocked components (arcs / points) on a sphere of joint positions.

    ``provenance`` maps each component's index to the index of the
    obstacle segment that produced it (None for synthetic components),
    so a diagram hit can be traced back to the offending link.
    """

    def __init__(self, host: Sphere, components=None, provenance=None):
        self.host = host
        self.components = list(components or [])
        self.provenance = dict(provenance or {})

    @property
    def sphere(self):
        return self.host

    def add(self, comps, source=None):
        for c in comps:
            self.provenance[len(self.components)] = source
            self.components.append(c)

    @property
    def component_count(self):
        return len(self.components)

    @property
    def arcs(self):
        return [c for c in self.components if not c.is_point]

    @property
    def points(self):
        return [c.point_at_fraction(0.0) for c in self.components
                if c.is_point]

    def blocked(self, p, eps=1e-7):
        return any(c.contains_point(p, eps=eps, ang_eps=1e-6)
                   for c in self.components)

    def blocking(self, p, eps=1e-7):
        return [c for c in self.components
                if c.contains_point(p, eps=eps, ang_eps=1e-6)]

    def source_of(self, comp):
        for i, c in enumerate(self.components):
            if c is comp:
                return self.provenance.get(i)
        return None


def _shadow_components(apex, obstacle, sphere, eps=None):
    """Positions p on the sphere with segment(apex, p) meeting the obstacle.

    For a segment obstacle ab this is the quad cone {apex + s(a-apex)
    + t(b-apex) : s,t >= 0, s+t >= 1}; for a point obstacle it is the
    closed ray from the obstacle away from the apex.
    """
    eps = config.EPS if eps is None else eps
    if isinstance(obstacle, Segment):
        try:
            Q = QuadCone(apex, obstacle.a, obstacle.b)
        except GeometryError:
            # apex on the obstacle's line: shadow is the union of two rays
            out = []
            for q in (obstacle.a, obstacle.b):
                out.extend(_point_shadow(apex, q, sphere, eps))
            return out
        return quadcone_sphere_intersect(Q, sphere, eps)
    return _point_shadow(apex, np.asarray(obstacle, float), sphere, eps)


def _point_shadow(apex, q, sphere, eps):
    u = q - apex
    L = norm(u)
    if L <= eps:
        return []
    reach = L + 4.0 * (sphere.radius + norm(sphere.center - apex))
    ray = Segment(q, apex + unit(u) * reach)
    return [Arc.point(p) for p in segment_sphere_intersect(ray, sphere, eps)]


def build_ob_elbow(tail_tip, next_vertex, sphere: Sphere, obstacles, eps=None):
    """Diagram for a joint moving on its elbow sphere.

    The joint is tied by straight segments to ``tail_tip`` and
    ``next_vertex``; each stationary obstacle blocks at most two
    components per tie (its shadow cone), so the component count is at
    most 4 per obstacle -- within the 6-per-obstacle certified bound.
    Obstacles may be segments or bare points (degenerate links).
    """
    eps = config.EPS if eps is None else eps
    obstacles = list(obstacles)
    ob = ObstructionDiagram(sphere)
    for i, obs in enumerate(obstacles):
        for apex in (tail_tip, next_vertex):
            ob.add(_shadow_components(np.asarray(apex, float), obs, sphere,
                                      eps), source=i)
    limit = 6 * max(len(obstacles), 1)
    if ob.component_count > limit:
        raise GeometryError("elbow diagram exceeds its component bound")
    return ob


def build_ob_v0(chain, eps=None):
    """Diagram of blocked free-end positions on the sphere about v1.

    The free end v0 lives on the full sphere of radius l0 about v1.
    Each later link blocks one shadow-cone component (the apex is the
    sphere's center, so each cone meets the sphere in at most one
    component); folding back flat onto the first interior link is
    blocked by a single point.  At most n - 1 components total for an
    n-link chain, and the current v0 is never blocked (the chain is
    simple).
    """
    eps = config.EPS if eps is None else eps
    V = chain.vertices
    if chain.closed or chain.n < 2:
        raise GeometryError("expected an open chain with at least 2 links")
    v1 = V[1]
    l0 = norm(V[0] - V[1])
    S = Sphere(v1, l0)
    ob = ObstructionDiagram(S)
    for i in range(2, chain.n):
        comps = _shadow_components(v1, Segment(V[i], V[i + 1]), S, eps)
        if len(comps) > 1:
            raise GeometryError("apex-centered shadow must be connected")
        ob.add(comps, source=i)
    ob.add([Arc.point(v1 + l0 * unit(V[2] - v1))], source=1)
    if ob.component_count > chain.n - 1:
        raise GeometryError("free-end diagram exceeds its component bound")
    return ob


def build_ob_goal_directions(chain, eps=None, block_tol=1e-7):
    """Diagram of blocked approach directions on the unit 2-sphere at v_g.

    Each later link is pushed through the central projection from v1
    onto the 3-flat through the goal position orthogonal to the goal
    segment; its image, seen from the flat's center, shadows at most one
    arc of the unit direction sphere.  At most n components total.
    """
    eps = config.EPS if eps is None else eps
    V = chain.vertices
    if chain.closed or chain.n < 2:
        raise GeometryError("expected an open chain with at least 2 links")
    v1, v2 = V[1], V[2]
    l0 = norm(V[0] - v1)
    wg = unit(v1 - v2)
    vg = v1 + l0 * wg
    obstacles = [Segment(V[i], V[i + 1]) for i in range(2, chain.n)]
    goal = Segment(v1, vg)
    for i, obs in enumerate(obstacles):
        if segment_pairs_distance(goal.a[None], goal.b[None],
                                  obs.a[None], obs.b[None])[0] <= block_tol:
            raise GeometryError(
                "goal segment is intersected (by link %d); the elbow must "
                "move first" % (i + 2))
    host = Flat(vg, orthonormal_complement([wg], v1.size))
    sphere = Sphere(vg, 1.0, host)
    return goal_direction_diagram(v1, wg, l0, obstacles, sphere, eps=eps)


def goal_direction_diagram(v1, w_goal, l0, obstacles, sphere: Sphere,
                           clip_radius=1e7, eps=None):
    """Core of build_ob_goal_directions over an explicit obstacle list.

    ``sphere`` holds candidate tip positions (any radius about the goal
    position in the 3-flat orthogonal to the goal direction; the radius
    only rescales angles).  A straight tail toward tip g sweeps the
    segment [v1, g]; each obstacle is centrally projected onto the tip
    flat and shadows at most one component (apex at the sphere's
    center).  Obstacles may be segments or bare points.
    """
    eps = config.EPS if eps is None else eps
    v1 = np.asarray(v1, float)
    w = unit(np.asarray(w_goal, float))
    obstacles = list(obstacles)
    ob = ObstructionDiagram(sphere)
    for i, obs in enumerate(obstacles):
        img = _project_to_tip_flat(v1, w, l0, obs, clip_radius)
        if img is None:
            continue
        a, b = img
        if norm(a - b) <= eps:
            ob.add(_point_shadow(sphere.center, a, sphere, eps)
                   if norm(a - sphere.center) > eps
                   else [], source=i)
            continue
        try:
            T = TriangleCone(sphere.center, a, b)
        except GeometryError:
            pts = segment_sphere_intersect(Segment(a, b), sphere, eps)
            ob.add([Arc.point(p) for p in pts], source=i)
            continue
        comps = tricone_sphere_intersect(T, sphere, eps)
        if len(comps) > 1:
            raise GeometryError("apex-centered shadow must be connected")
        ob.add(comps, source=i)
    if ob.component_count > len(obstacles) + 1:
        raise GeometryError("goal-direction diagram exceeds its bound")
    return ob


def _project_to_tip_flat(v1, w, l0, seg, clip_radius):
    """Central projection of a segment from v1 onto {x: (x-v1).w = l0}.

    Points with non-positive height project nowhere; a mixed-sign
    segment maps to a ray, which is clipped at ``clip_radius``.  A bare
    point obstacle maps to its projected point (or nowhere).
    """
    if not isinstance(seg, Segment):
        p = np.asarray(seg, float)
        h = float((p - v1) @ w)
        if h <= 1e-12:
            return None
        q = v1 + (l0 / h) * (p - v1)
        return q, q
    ha = float((seg.a - v1) @ w)
    hb = float((seg.b - v1) @ w)
    tiny = 1e-12
    proj = lambda p, h: v1 + (l0 / h) * (p - v1)
    if ha > tiny and hb > tiny:
        return proj(seg.a, ha), proj(seg.b, hb)
    if ha <= tiny and hb <= tiny:
        return None
    # one endpoint above, one at/below the horizon: image is a ray
    if ha > tiny:
        p0 = proj(seg.a, ha)
        h0, p_low, h_low = ha, seg.b, hb
    else:
        p0 = proj(seg.b, hb)
        h0, p_low, h_low = hb, seg.a, ha
    # direction of the ray: limit of projections approaching the horizon
    t = (h0 - tiny) / (h0 - h_low) if h0 != h_low else 1.0
    near = seg.a + (seg.b - seg.a) * (t if ha > tiny else 1.0 - t)
    hn = float((near - v1) @ w)
    p1 = proj(near, max(hn, tiny))
    u = p1 - p0
    nu = norm(u)
    if nu <= 1e-15:
        return p0, p0
    return p0, p0 + (clip_radius / nu) * u


def build_ob_linetrack(v_a, v_b, l_a, l_b, obstacles, sphere: Sphere,
                       eps=None):
    """Diagram for a tracked joint on the elbow sphere between v_a, v_b.

    The two moving edges sweep truncated right cones (apexes v_a, v_b);
    a stationary segment meets each cone surface in at most two points,
    i.e. at most four blocked positions per segment generically.  The
    flat-cone instant (half-angle pi/2) degrades gracefully to points
    and arcs via the disk special case.
    """
    eps = config.EPS if eps is None else eps
    v_a = np.asarray(v_a, float)
    v_b = np.asarray(v_b, float)
    ob = ObstructionDiagram(sphere)
    for i, seg in enumerate(obstacles):
        for apex, other, l_edge in ((v_a, v_b, float(l_a)),
                                    (v_b, v_a, float(l_b))):
            ob.add(_tracked_edge_hits(apex, other, l_edge, seg, sphere, eps),
                   source=i)
    return ob


def _tracked_edge_hits(apex, other, l_edge, seg: Segment, sphere, eps):
    """Blocked sphere positions from one moving edge vs one segment."""
    w = other - apex
    D = norm(w)
    u = w / D
    # sphere positions sit at distance l_edge from the apex at a fixed
    # axis angle; recover it from the sphere's center offset
    x = float((sphere.center - apex) @ u)
    cos_t = min(max(x / l_edge, -1.0), 1.0)
    theta = math.acos(cos_t)
    if abs(theta - math.pi / 2.0) <= 1e-7:
        return _flat_cone_hits(apex, u, l_edge, seg, sphere, eps)
    axis_pt = apex + u if cos_t >= 0.0 else apex - u
    half = theta if cos_t >= 0.0 else math.pi - theta
    cone = RightCone(apex, axis_pt, half)
    hit = cone_segment_intersect(cone, seg, eps)
    if isinstance(hit, ApexLineCase):
        p = apex + l_edge * hit.direction
        return [Arc.point(p)] if sphere.contains(p, 1e-6) else []
    out = []
    for p in hit:
        r = norm(p - apex)
        if r <= l_edge + eps * max(1.0, l_edge) and r > eps:
            q = apex + l_edge * unit(p - apex)
            out.append(Arc.point(q))
    return out


def _flat_cone_hits(apex, axis_u, l_edge, seg: Segment, sphere, eps):
    """Flat-instant case: the swept surface is a disk orthogonal to the
    axis; an off-disk segment contributes at most one point, an in-disk
    segment an arc pair via the shadow cone."""
    d = apex.size
    host = Flat(apex, orthonormal_complement([axis_u], d))
    hit = segment_flat_intersect(seg, host, eps)
    if hit is None:
        return []
    kind, obj = hit
    if kind == "point":
        r = norm(obj - apex)
        if eps < r <= l_edge + eps * max(1.0, l_edge):
            return [Arc.point(apex + l_edge * unit(obj - apex))]
        return []
    # in-disk segment: its shadow from the apex meets the rim circle
    return _shadow_components(apex, obj, sphere, eps)


def free_point_near(p, diag, max_step=None, rng=None, eps=1e-7):
    """A point on the 2-sphere near ``p`` avoiding every diagram component.

    If ``p`` is clear it is returned unchanged.  Otherwise a direction
    in the tangent plane is chosen to bisect the widest gap between the
    tangents of the arcs through ``p`` (seeded random for point-only
    hits), and the walk along the corresponding great circle stops at
    half the distance to the nearest other component crossing, capped at
    ``max_step/2`` (``max_step`` measured as arc length on the host).
    The candidate is verified and the step halved on failure; fresh
    directions are drawn if a direction dead-ends.
    """
    sphere = diag.host
    components = diag.components
    rng = np.random.default_rng(0) if rng is None else rng
    p = np.asarray(p, float)
    blocking = [c for c in components
                if c.contains_point(p, eps=eps, ang_eps=1e-6)]
    if not blocking:
        return p
    frame = SphereFrame(sphere)
    r = sphere.radius
    pl = frame.to_local(p)
    n = unit(pl)
    t1, t2 = _tangent_basis(n)
    tangents = []
    for c in blocking:
        if c.is_point or c.circle.radius <= 1e-12:
            continue
        th = c.circle.angle_of(p)
        tv = (-math.sin(th)) * c.circle.u + math.cos(th) * c.circle.v
        tl = frame.to_local_dir(tv)
        tl = tl - float(tl @ n) * n
        if norm(tl) > 1e-9:
            tl = unit(tl)
            tangents.extend([tl, -tl])
    cand_dirs = _gap_bisectors(tangents, t1, t2)
    max_ang = (math.pi / 2.0 if max_step is None
               else min(max_step / r, math.pi / 2.0))
    for attempt in range(24):
        if attempt < len(cand_dirs):
            u = cand_dirs[attempt]
        else:
            phi = rng.uniform(0.0, TWO_PI)
            u = math.cos(phi) * t1 + math.sin(phi) * t2
        delta = _nearest_crossing(sphere, frame, components, blocking, n, u)
        step = min(delta / 2.0, max_ang / 2.0)
        for _ in range(40):
            q = frame.from_local(
                r * (math.cos(step) * n + math.sin(step) * u))
            if not any(c.contains_point(q, eps=eps, ang_eps=1e-6)
                       for c in components):
                return q
            step /= 2.0
            if step < 1e-12:
                break
    raise DegenerateGeometry("no free point found near the requested one")


def _tangent_basis(n):
    d = n.size
    best = np.zeros(d)
    best[int(np.argmin(np.abs(n)))] = 1.0
    t1 = unit(best - float(best @ n) * n)
    t2 = np.cross(n, t1) if d == 3 else None
    if t2 is None:
        raise GeometryError("tangent basis expects local 3-space coordinates")
    return t1, t2


def _gap_bisectors(tangents, t1, t2):
    """Directions bisecting the angular gaps between tangent vectors."""
    if not tangents:
        return []
    angs = sorted(math.atan2(float(t @ t2), float(t @ t1)) % TWO_PI
                  for t in tangents)
    merged = []
    for a in angs:
        if merged and a - merged[-1] <= 1e-9:
            continue
        merged.append(a)
    out = []
    k = len(merged)
    gaps = []
    for i in range(k):
        a0 = merged[i]
        a1 = merged[(i + 1) % k] + (TWO_PI if i == k - 1 else 0.0)
        gaps.append((a1 - a0, (a0 + a1) / 2.0))
    gaps.sort(reverse=True)
    for _, mid in gaps:
        out.append(math.cos(mid) * t1 + math.sin(mid) * t2)
    return out


def _nearest_crossing(sphere, frame, components, blocking, n, u):
    """Angular distance along the great circle (n, u) to the nearest
    crossing with a component other than those already through p."""
    r = sphere.radius
    best = math.pi
    others = [c for c in components
              if not any(c is b for b in blocking)]
    for c in others:
        if c.is_point or c.circle.radius <= 1e-12:
            q = c.circle.center
            ql = frame.to_local(q) if norm(q - sphere.center) <= 2 * r else None
            if ql is None:
                continue
            # angle along the walk where we pass closest to q
            a = float(unit(ql) @ n)
            b = float(unit(ql) @ u)
            s = math.atan2(b, a) % TWO_PI
            close = norm(r * (math.cos(s) * n + math.sin(s) * u) - ql)
            if close <= 1e-6 * max(1.0, r) and 1e-9 < s < best:
                best = s
            continue
        # component circle in local coordinates: a plane cut of the sphere
        c0 = frame.to_local(c.circle.center)
        axis = np.cross(frame.to_local_dir(c.circle.u),
                        frame.to_local_dir(c.circle.v))
        axis = unit(axis)
        h = float(c0 @ axis)
        # walk point r(cos s * n + sin s * u) lies on the plane when
        # A cos s + B sin s = h
        A = r * float(n @ axis)
        B = r * float(u @ axis)
        R = math.hypot(A, B)
        if R < abs(h) - 1e-12:
            continue
        phi = math.atan2(B, A)
        val = min(max(h / max(R, 1e-300), -1.0), 1.0)
        base = math.acos(val)
        for s in ((phi + base) % TWO_PI, (phi - base) % TWO_PI):
            if 1e-9 < s < best:
                q = frame.from_local(
                    r * (math.cos(s) * n + math.sin(s) * u))
                if c.contains_point(q, eps=1e-6, ang_eps=1e-5):
                    best = s
    return best
