"""Straightening planner for open chains in R^d, d >= 4.

The chain is straightened one joint at a time from the free end inward.
Once the tail ahead of joint j is collinear it moves as a rigid rod, so
every later step sees an effective two-vertex tail (tip and pivot).  At
each joint the target position of the rod -- the extension of the next
edge -- is classified:

* free:        one planar rotation carries the rod onto the goal;
* obstructed:  the goal is clear but the direct rotation plane is not;
               lean the rod slightly into a clear plane (one move),
               after which the joint re-classifies as free;
* intersected: the goal segment itself is occupied; move the pivot a
               short arc on its elbow sphere to shift the goal off the
               obstacle, then finish (at most 3 moves in total).

For d > 4 the same machinery runs inside a chain-derived 4-flat; the
stationary links are replaced by their intersections with that flat
(points or sub-segments), which is exact for motions confined to it.

Every emitted move is verified against the stationary segments before
it is committed, so traces pass independent re-verification by
construction rather than by luck.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .geom import (
    DegenerateGeometry,
    Flat,
    GeometryError,
    Segment,
    Sphere,
    SphereFrame,
    complete_basis,
    gram_schmidt,
    norm,
    rotation_to,
    segment_pairs_distance,
    segment_tricone_distance,
    unit,
)
from .intersect import elbow_sphere, segment_flat_intersect
from .model import (
    Chain,
    CircularMove,
    MotionTrace,
    _pair_tables,
    simplicity_violation,
)
from .obstruction import (
    ObstructionDiagram,
    _nearest_crossing,
    _tangent_basis,
    build_ob_elbow,
    free_point_near,
    goal_direction_diagram,
)

FREE = "free"
OBSTRUCTED = "obstructed"
INTERSECTED = "intersected"
ALIGNED = "aligned"

# classification threshold: anything closer than this to the goal or to
# the rotation sector counts as blocking (clearly separated from the
# simplicity tolerance so near-misses are routed to the careful steps)
BLOCK_TOL = 1e-7


class PlanningError(GeometryError):
    """The planner exhausted its retries for a move."""


class AtGoal(GeometryError):
    """The joint is already straight; there is no goal direction."""


class AntipodalDegenerate(GeometryError):
    """The end link points exactly away from the goal; the rotation
    direction is underdetermined (supply an RNG to break the tie)."""


@dataclass(frozen=True)
class GoalDirection:
    """Unit direction of rotation toward the goal.

    Satisfies a1 * w_g + b1 * w = w_g - w0 with a1, b1 > 0 and
    w orthogonal to w_g.
    """

    w: np.ndarray
    a1: float
    b1: float
    degenerate: bool = False


def goal_direction(v0, v1, v2, rng=None, align_tol=1e-12):
    """Decompose the turn from the end link onto the goal direction.

    w is the unit component of (w_g - w0) orthogonal to w_g; the
    positive coefficients a1, b1 recover w_g - w0 exactly.  A straight
    joint raises AtGoal; an exactly folded joint leaves w free in the
    whole orthogonal plane -- a seeded ``rng`` picks one (recorded via
    ``degenerate``), otherwise AntipodalDegenerate is raised.
    """
    v0 = np.asarray(v0, float)
    v1 = np.asarray(v1, float)
    v2 = np.asarray(v2, float)
    w0 = unit(v0 - v1)
    wg = unit(v1 - v2)
    c = float(np.clip(w0 @ wg, -1.0, 1.0))
    perp = w0 - c * wg
    pn = norm(perp)
    if c >= 1.0 - align_tol:
        raise AtGoal("joint is already straight")
    if pn <= align_tol:
        if rng is None:
            raise AntipodalDegenerate(
                "end link opposes the goal; rotation plane underdetermined")
        raw = rng.standard_normal(wg.size)
        w = unit(raw - float(raw @ wg) * wg)
        # folded flat: w_g - w_0 = 2 w_g, so the w coefficient vanishes
        return GoalDirection(w, 1.0 - c, pn, degenerate=True)
    # w_g - w0 = (1 - c) w_g + pn * (-perp/pn)
    return GoalDirection(-perp / pn, 1.0 - c, pn)


@dataclass(frozen=True)
class GoalState:
    """Classification of the first joint's straightening target."""

    v_g: np.ndarray
    s_g: Segment
    classification: str


# ---------------------------------------------------------------------------
# obstacles


def _obstacle_arrays(V, j):
    """Stationary segments s_{j+1}..s_{n-1} as stacked endpoint arrays."""
    A = V[j + 1:-1]
    B = V[j + 2:]
    return A, B


def _clip_obstacles(A, B, H: Flat, eps):
    """Replace obstacles by their intersections with the working 4-flat.

    Exact for motions confined to the flat: a link misses the moving
    material unless it meets the flat, and then only along the returned
    point or sub-segment.  Point hits become zero-length rows.
    """
    rows_a, rows_b = [], []
    for a, b in zip(A, B):
        hit = segment_flat_intersect(Segment(a, b), H, eps)
        if hit is None:
            continue
        kind, obj = hit
        if kind == "point":
            rows_a.append(obj)
            rows_b.append(obj)
        else:
            rows_a.append(obj.a)
            rows_b.append(obj.b)
    d = A.shape[1] if A.ndim == 2 else H.origin.size
    if not rows_a:
        return np.zeros((0, d)), np.zeros((0, d))
    return np.array(rows_a), np.array(rows_b)


def _obstacle_objects(A, B, eps=1e-11):
    """Segment / bare-point views of obstacle endpoint rows."""
    out = []
    for a, b in zip(A, B):
        if norm(a - b) <= eps:
            out.append(np.asarray(a, float))
        else:
            out.append(Segment(a, b))
    return out


def _seg_to_obstacles(p, q, A, B):
    if A.shape[0] == 0:
        return math.inf
    m = A.shape[0]
    P = np.repeat(np.asarray(p, float)[None], m, axis=0)
    Q = np.repeat(np.asarray(q, float)[None], m, axis=0)
    return float(np.min(segment_pairs_distance(P, Q, A, B)))


def _sector_clear(P, q1, q2, A, B, tol):
    """Min distance from obstacles to the rotation sector cone(P; q1, q2).

    The infinite cone over the sector is used (conservative).  A
    vectorized distance to the cone's plane prunes obstacles that cannot
    possibly come near before the exact per-segment cone distance runs.
    """
    if A.shape[0] == 0:
        return math.inf
    g1 = np.asarray(q1, float) - P
    g2 = np.asarray(q2, float) - P
    Bas = gram_schmidt([g1, g2])
    if Bas.shape[0] < 2:
        # degenerate sector: just the segment P..q1
        return _seg_to_obstacles(P, q1, A, B)
    d = P.size
    comp = complete_basis(list(Bas), d)[2:]
    ra = (A - P) @ comp.T
    rb = (B - P) @ comp.T
    dr = rb - ra
    dd = np.einsum("ij,ij->i", dr, dr)
    t = np.where(dd > 0.0, -np.einsum("ij,ij->i", ra, dr) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    plane_d = np.linalg.norm(ra + t[:, None] * dr, axis=1)
    best = math.inf
    for i in np.nonzero(plane_d < max(tol * 10.0, 1e-3))[0]:
        dist = segment_tricone_distance((A[i], B[i]), P, g1, g2)
        best = min(best, dist)
    if best is math.inf and A.shape[0]:
        best = float(np.min(plane_d)) if plane_d.size else math.inf
    return best


# ---------------------------------------------------------------------------
# classification


def classify_state(T, P, N, A, B, block_tol=BLOCK_TOL, align_tol=1e-12):
    """Classify the straightening goal of the rod [T, P] about pivot P.

    N defines the goal direction (extension of N -> P); A, B hold the
    stationary obstacle segments.  Returns (state, info): info carries
    the geometry reused by the steps.
    """
    T = np.asarray(T, float)
    P = np.asarray(P, float)
    N = np.asarray(N, float)
    L = norm(T - P)
    w0 = unit(T - P)
    wg = unit(P - N)
    vg = P + L * wg
    c = float(np.clip(w0 @ wg, -1.0, 1.0))
    psi = math.acos(c)
    info = {"T": T, "P": P, "N": N, "L": L, "w0": w0, "wg": wg,
            "vg": vg, "psi": psi}
    if psi <= align_tol or norm(T - vg) <= align_tol * max(1.0, L):
        return ALIGNED, info
    d_goal = _seg_to_obstacles(P, vg, A, B)
    info["goal_clearance"] = d_goal
    if d_goal <= block_tol:
        return INTERSECTED, info
    d_sector = _sector_clear(P, T, vg, A, B, block_tol)
    info["sector_clearance"] = d_sector
    if d_sector <= block_tol:
        return OBSTRUCTED, info
    return FREE, info


def _first_joint(chain: Chain):
    V = chain.vertices
    if chain.closed or chain.n < 2:
        raise GeometryError("expected an open chain with at least 2 links")
    A, B = _obstacle_arrays(V, 1)
    return V, A, B


def classify_goal(chain: Chain, block_tol=BLOCK_TOL):
    """Goal classification for the chain's first joint (v1).

    An already-straight joint reports ``free`` (its goal is reached by
    the zero rotation).
    """
    V, A, B = _first_joint(chain)
    state, info = classify_state(V[0], V[1], V[2], A, B, block_tol)
    cls = FREE if state == ALIGNED else state
    return GoalState(info["vg"], Segment(V[1], info["vg"]), cls)


# ---------------------------------------------------------------------------
# moves


def _tail_rotation(V, moved, P, w0, target_dir, rng, kind, joint):
    """CircularMove rotating the rigid tail about the pivot onto
    ``target_dir`` (one planar rotation)."""
    e1, e2, ang = rotation_to(w0, target_dir, rng=rng)
    k = len(moved)
    radii = np.linalg.norm(V[moved] - P, axis=1)
    centers = np.repeat(np.asarray(P, float)[None], k, axis=0)
    return CircularMove(list(moved), centers, radii, e1, e2, ang,
                        meta={"kind": kind, "joint": int(joint)})


def _apply_move(V, move):
    return move.apply(V, [1.0])[0]


def _path_ok(V, move, tip, piv, nxt, A, B, samples, eps, pivot_moves=False,
             adj_rows=(0,)):
    """Direct sampled collision check of a candidate move against the
    stationary segments (the verifier's view, coarser sampling).

    The moving material is the rod [tip, pivot] and -- when the pivot
    itself moves -- the edge [pivot, next].  That edge shares a vertex
    with the first stationary segment, which gets the far-endpoint
    treatment instead of a raw distance."""
    if A.shape[0] == 0:
        return True
    taus = np.linspace(0.0, 1.0, samples)
    confs = move.apply(V, taus)
    m = A.shape[0]
    for s in range(confs.shape[0]):
        W = confs[s]
        p, q = W[tip], W[piv]
        P2 = np.repeat(p[None], m, axis=0)
        Q2 = np.repeat(q[None], m, axis=0)
        if float(np.min(segment_pairs_distance(P2, Q2, A, B))) <= eps:
            return False
        if pivot_moves:
            p, q = W[piv], W[nxt]
            keep = np.ones(m, dtype=bool)
            keep[list(adj_rows)] = False
            if keep.any():
                P2 = np.repeat(p[None], int(keep.sum()), axis=0)
                Q2 = np.repeat(q[None], int(keep.sum()), axis=0)
                if float(np.min(segment_pairs_distance(
                        P2, Q2, A[keep], B[keep]))) <= eps:
                    return False
            # adjacent pairs (pivot edge vs stationary edges sharing the
            # next vertex): the far endpoints must clear the other edge
            for r in adj_rows:
                far_obs = B[r] if norm(A[r] - q) <= norm(B[r] - q) else A[r]
                far1 = np.min(segment_pairs_distance(
                    p[None], p[None], A[r][None], B[r][None]))
                far2 = np.min(segment_pairs_distance(
                    far_obs[None], far_obs[None], p[None], q[None]))
                if min(float(far1), float(far2)) <= eps:
                    return False
    return True


def _workspace_flat(V, j, info):
    """A 4-flat through the pivot spanned by the local chain geometry.

    Built only from chain-derived directions so that a chain embedded
    isometrically in a higher-dimensional space yields the embedded
    version of the same flat (runs agree across the embedding).
    """
    P = info["P"]
    cands = [info["w0"], info["wg"]]
    for k in range(j + 1, V.shape[0] - 1):
        cands.append(V[k + 1] - V[k])
    for k in range(j - 1):
        cands.append(V[k + 1] - V[k])
    Bas = gram_schmidt(cands, eps=1e-9)
    if Bas.shape[0] < 4:
        Bas = complete_basis(list(Bas), V.shape[1])[:4]
    return Flat(P, Bas[:4])


# step 2: one small lean into a clear rotation plane


def _skirt_move(V, info, moved, tip, piv, nxt, A, B, H, tables, rng, eps,
                block_tol, adj_rows=(0,)):
    """One rotation around an obstructed direct plane.

    The rod direction is w0 = cos(psi) wg + sin(psi) u.  Replacing u by
    a nearby clear direction u' tilts the rod by at most
    psi_u * sin(psi); keeping that tilt below half the rod's current
    clearance over its length makes the lean safe, and u' is chosen off
    the blocked-direction diagram so the direct rotation plane is clear
    afterwards (the joint re-classifies as free).  The home rotation is
    validated here as well, so the follow-up step cannot dead-end.
    """
    T, P = info["T"], info["P"]
    L, wg, vg, psi = info["L"], info["wg"], info["vg"], info["psi"]
    w0 = info["w0"]
    c = float(np.clip(w0 @ wg, -1.0, 1.0))
    u = w0 - c * wg
    un = norm(u)
    if un <= 1e-12:
        raise DegenerateGeometry("rod already aligned with the goal")
    u = u / un
    d_rod = _seg_to_obstacles(T, P, A, B)
    beta = min(d_rod / (2.0 * L), math.pi / 8.0)
    perp = [b - float(b @ wg) * wg for b in H.basis]
    perp = gram_schmidt(perp)
    if perp.shape[0] < 3:
        raise PlanningError("workspace too thin for a lean direction")
    host = Flat(vg, perp[:3])
    sphere = Sphere(vg, L, host)
    try:
        diag = goal_direction_diagram(P, wg, L, _obstacle_objects(A, B),
                                      sphere)
    except GeometryError:
        diag = ObstructionDiagram(sphere)
    u_in_host = unit(host.project(vg + u) - vg)
    p_u = vg + L * u_in_host
    max_step = L * min(beta / max(math.sin(psi), 1e-6), math.pi / 4.0)

    def try_direction(u_new):
        w0p = math.cos(psi) * wg + math.sin(psi) * u_new
        Tp = P + L * w0p
        lean_ang = math.acos(float(np.clip(w0 @ w0p, -1.0, 1.0)))
        if lean_ang <= 1e-12:
            return None
        if _sector_clear(P, T, Tp, A, B, block_tol) <= block_tol:
            return None
        if _sector_clear(P, Tp, vg, A, B, block_tol) <= block_tol:
            return None
        m1 = _tail_rotation(V, moved, P, w0, w0p, rng, "lean", piv)
        if not _path_ok(V, m1, tip, piv, nxt, A, B, 33, eps):
            return None
        V1 = _apply_move(V, m1)
        m2 = _tail_rotation(V1, moved, P, w0p, wg, rng, "rotate", piv)
        if not _path_ok(V1, m2, tip, piv, nxt, A, B, 33, eps):
            return None
        V2 = _apply_move(V1, m2)
        if simplicity_violation(V2, None, eps, tables=tables) is not None:
            return None
        return m1, V1

    try:
        cand = free_point_near(p_u, diag, max_step=max_step, rng=rng)
        got = try_direction(unit(cand - vg))
        if got is not None:
            return got
    except (DegenerateGeometry, GeometryError):
        pass
    # seeded fallback: sample lean directions with growing tilt
    frame = SphereFrame(sphere)
    nloc = unit(frame.to_local(p_u))
    t1, t2 = _tangent_basis(nloc)
    for trial in range(400):
        ang = min((0.1 + 0.02 * trial), math.pi * 0.9)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        dirloc = math.cos(phi) * t1 + math.sin(phi) * t2
        q = frame.from_local(L * (math.cos(ang) * nloc + math.sin(ang) * dirloc))
        got = try_direction(unit(q - vg))
        if got is not None:
            return got
    raise PlanningError("no clear rotation plane found at joint %d" % piv)


# step 3: slide the pivot on its elbow sphere to unpin the goal


def _elbow_move(V, j, info, A, B, H, tables, rng, eps, block_tol):
    """One short arc of the pivot on its elbow sphere.

    The tail scales along rigidly (tip fixed), the next edge pivots
    about its far vertex; afterwards the goal must classify as free
    (with a clear direct rotation) or obstructed, which the remaining
    budget of two moves covers.
    """
    T, P, N = info["T"], info["P"], info["N"]
    L = info["L"]
    l_j = norm(P - N)
    S = elbow_sphere(T, N, L, l_j, workspace=H)
    diagram = build_ob_elbow(T, N, S, _obstacle_objects(A, B))
    frame = SphereFrame(S)
    nloc = unit(frame.to_local(P))
    t1, t2 = _tangent_basis(nloc)
    delta0 = math.pi / 8.0

    for trial in range(50):
        delta = delta0 * (0.5 ** min(trial // 4, 20))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        u = math.cos(phi) * t1 + math.sin(phi) * t2
        crossing = _nearest_crossing(S, frame, diagram.components, [], nloc, u)
        step = min(delta, crossing / 2.0)
        if step <= 1e-10:
            continue
        Pp = frame.from_local(
            S.radius * (math.cos(step) * nloc + math.sin(step) * u))
        if diagram.blocked(Pp):
            continue
        move = _pivot_arc_move(V, j, T, P, Pp, S, L, rng)
        if move is None:
            continue
        if not _path_ok(V, move, 0, j, j + 1, A, B, 65, eps,
                        pivot_moves=True):
            continue
        Vp = _apply_move(V, move)
        if simplicity_violation(Vp, None, eps, tables=tables) is not None:
            continue
        state, info_p = classify_state(Vp[0], Vp[j], Vp[j + 1], A, B,
                                       block_tol)
        if state == INTERSECTED:
            continue
        if state == FREE:
            home = _tail_rotation(Vp, list(range(j)), info_p["P"],
                                  info_p["w0"], info_p["wg"], rng,
                                  "rotate", j)
            if not _path_ok(Vp, home, 0, j, j + 1, A, B, 33, eps):
                continue
        return move, Vp
    raise PlanningError("could not unpin the goal at joint %d" % j)


def _pivot_arc_move(V, j, T, P, Pp, S, L, rng):
    """Great-circle arc of the pivot with the tail scaling along."""
    r0 = unit(P - S.center)
    r1 = unit(Pp - S.center)
    try:
        e1, e2, ang = rotation_to(r0, r1, rng=rng)
    except DegenerateGeometry:
        return None
    if ang <= 1e-14:
        return None
    moved = list(range(j + 1))
    centers = []
    radii = []
    for k in range(j + 1):
        f = norm(V[k] - T) / L  # tail is straight: fraction toward the pivot
        centers.append(T + f * (S.center - T))
        radii.append(f * S.radius)
    return CircularMove(moved, np.array(centers), np.array(radii), e1, e2,
                        ang, meta={"kind": "elbow", "joint": int(j)})


# ---------------------------------------------------------------------------
# single-joint operations on a chain's first joint


def step1_rotate_to_goal(chain: Chain, seed=0, eps=None, block_tol=BLOCK_TOL):
    """One rotation of v0 onto the goal position (classification free)."""
    eps = config.EPS if eps is None else eps
    V, A, B = _first_joint(chain)
    rng = np.random.default_rng(seed)
    state, info = classify_state(V[0], V[1], V[2], A, B, block_tol)
    if state != FREE:
        raise PlanningError("step 1 requires a free goal (got %s)" % state)
    move = _tail_rotation(V, [0], info["P"], info["w0"], info["wg"], rng,
                          "rotate", 1)
    if not _path_ok(V, move, 0, 1, 2, A, B, 33, eps):
        raise PlanningError("direct rotation is blocked; classify first")
    return move


def step2_skirt(chain: Chain, seed=0, eps=None, block_tol=BLOCK_TOL):
    """One small lean of v0 making the direct rotation plane clear."""
    eps = config.EPS if eps is None else eps
    V, A, B = _first_joint(chain)
    rng = np.random.default_rng(seed)
    state, info = classify_state(V[0], V[1], V[2], A, B, block_tol)
    if state != OBSTRUCTED:
        raise PlanningError("step 2 requires an obstructed goal (got %s)"
                            % state)
    H = _workspace_flat(V, 1, info)
    tables = _pair_tables(chain.edge_index_array())
    move, _ = _skirt_move(V, info, [0], 0, 1, 2, A, B, H, tables, rng, eps,
                          block_tol)
    return move


def step3_unblock_goal(chain: Chain, seed=0, eps=None, block_tol=BLOCK_TOL):
    """One arc of v1 on its elbow sphere freeing the goal segment."""
    eps = config.EPS if eps is None else eps
    V, A, B = _first_joint(chain)
    rng = np.random.default_rng(seed)
    state, info = classify_state(V[0], V[1], V[2], A, B, block_tol)
    if state != INTERSECTED:
        raise PlanningError("step 3 requires an intersected goal (got %s)"
                            % state)
    H = _workspace_flat(V, 1, info)
    tables = _pair_tables(chain.edge_index_array())
    move, _ = _elbow_move(V, 1, info, A, B, H, tables, rng, eps, block_tol)
    return move


# ---------------------------------------------------------------------------
# driver


def _process_joint(V, j, tables, trace, rng, eps, block_tol):
    d = V.shape[1]
    moves = 0
    for _ in range(3):
        A, B = _obstacle_arrays(V, j)
        state, info = classify_state(V[0], V[j], V[j + 1], A, B, block_tol)
        H = None
        if d > 4 and state != ALIGNED:
            H = _workspace_flat(V, j, info)
            A, B = _clip_obstacles(A, B, H, eps)
            state, info = classify_state(V[0], V[j], V[j + 1], A, B,
                                         block_tol)
        if state == ALIGNED:
            trace.meta.setdefault("classes", []).append([int(j), state])
            return V, moves
        if state == FREE:
            m = _tail_rotation(V, list(range(j)), info["P"], info["w0"],
                               info["wg"], rng, "rotate", j)
            if not _path_ok(V, m, 0, j, j + 1, A, B, 33, eps):
                # classification said free; fall back to the careful step
                state = OBSTRUCTED
            else:
                trace.append(m)
                trace.meta.setdefault("classes", []).append([int(j), FREE])
                return _apply_move(V, m), moves + 1
        if H is None:
            H = _workspace_flat(V, j, info)
        if state == OBSTRUCTED:
            m, V = _skirt_move(V, info, list(range(j)), 0, j, j + 1, A, B, H,
                               tables, rng, eps, block_tol)
            trace.append(m)
            trace.meta.setdefault("classes", []).append([int(j), OBSTRUCTED])
            moves += 1
            continue
        # intersected: unpin and re-classify
        m, V = _elbow_move(V, j, info, A, B, H, tables, rng, eps, block_tol)
        trace.append(m)
        trace.meta.setdefault("classes", []).append([int(j), INTERSECTED])
        moves += 1
    raise PlanningError("joint %d exceeded its move budget" % j)


def straighten_open_rd(chain: Chain, seed=0, eps=None, block_tol=BLOCK_TOL):
    """Straighten an open chain in R^d (d >= 4) into a single segment.

    Returns a verified-construction MotionTrace; per-joint move counts
    land in ``trace.meta['joint_moves']``.  Generic inputs take exactly
    one move per interior joint, and no joint ever takes more than 3.
    """
    eps = config.EPS if eps is None else eps
    if chain.closed:
        raise GeometryError("straighten_open_rd expects an open chain")
    rng = np.random.default_rng(seed)
    V = chain.vertices.copy()
    tables = _pair_tables(chain.edge_index_array())
    trace = MotionTrace.for_chain(chain)
    trace.meta["seed"] = int(seed)
    joint_moves = {}
    n = chain.n
    for j in range(1, n):
        V, used = _process_joint(V, j, tables, trace, rng, eps, block_tol)
        joint_moves[int(j)] = used
    trace.final = V
    trace.meta["joint_moves"] = joint_moves
    trace.meta["total_moves"] = int(sum(joint_moves.values()))
    return trace


def straighten_open(chain: Chain, seed=0, eps=None, block_tol=BLOCK_TOL):
    """Straighten an open chain in R^4 (see straighten_open_rd)."""
    if chain.d != 4:
        raise GeometryError("straighten_open expects d == 4; "
                            "use straighten_open_rd for higher dimensions")
    return straighten_open_rd(chain, seed=seed, eps=eps, block_tol=block_tol)
