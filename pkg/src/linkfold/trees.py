"""Straightening planner for tree linkages in R^4.

The root must be a leaf; the tree is flattened onto the ray leaving the
root.  Internal nodes are processed bottom-up (deepest first).  By the
time a node x with parent y is reached, each child subtree of x is
already a straight rod through its child, so the work at x is *parking*:
rotate every child rod, innermost angle first, onto the goal ray that
extends the edge y -> x beyond x.  Parked rods overlap deliberately;
their edges are declared as an exempt group on the move that creates the
first overlap, and the verifier holds them to collinearity instead of
separation from then on.

Parking a rod reuses the per-joint machinery of the chain planner
(classify / rotate / lean / elbow) with tree-shaped moved sets.  The one
genuinely new move is the star elbow: when the goal ray itself is
occupied, x slides a short arc on its elbow sphere while the current rod
scales about its pinned tip and every other child subtree of x
translates rigidly along -- a single CircularMove.  Rods parked before
such a move leave the (relocated) ray together; they are merged into one
rigid pseudo-rod and re-parked as a whole.

Every emitted move is pre-checked with the verifier's own batched
simplicity test, so traces re-verify by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .geom import (
    Arc,
    DegenerateGeometry,
    Flat,
    GeometryError,
    Segment,
    SphereFrame,
    norm,
    rotation_to,
    unit,
)
from .intersect import elbow_sphere, parallelogram_sphere_intersect
from .model import (
    CircularMove,
    MotionTrace,
    Tree,
    _batched_violation,
    _merge_groups,
    _pair_tables,
)
from .obstruction import (
    _nearest_crossing,
    _tangent_basis,
    build_ob_elbow,
)
from .straighten import (
    ALIGNED,
    BLOCK_TOL,
    FREE,
    INTERSECTED,
    OBSTRUCTED,
    PlanningError,
    _apply_move,
    _obstacle_objects,
    _skirt_move,
    _tail_rotation,
    classify_state,
)

# fraction of a sibling edge clipped off at the shared hub before it is
# used as an obstacle (the hub itself always touches the moving rod)
HUB_SHRINK = 1e-3


# ---------------------------------------------------------------------------
# structure helpers


def _depths(tree: Tree):
    kids = tree.children()
    depth = {tree.root: 0}
    stack = [tree.root]
    while stack:
        i = stack.pop()
        for c in kids[i]:
            depth[c] = depth[i] + 1
            stack.append(c)
    return depth


def _descendants(tree: Tree):
    """Strict descendant sets, computed leaves-first."""
    kids = tree.children()
    depth = _depths(tree)
    out = {i: set() for i in range(tree.vertices.shape[0])}
    for i in sorted(depth, key=lambda k: -depth[k]):
        for c in kids[i]:
            out[i] |= {c} | out[c]
    return out


# ---------------------------------------------------------------------------
# star nodes and their obstruction diagram


@dataclass(frozen=True)
class StarNode:
    """A hub whose child subtrees are all simple paths.

    ``chains`` lists each child path outward from ``x`` (excluding x
    itself); ``distinguished`` indexes the longest chain, the one that
    scales about its pinned tip when x slides on its elbow sphere while
    the remaining chains ride along rigidly.
    """

    x: int
    y: int
    chains: tuple
    distinguished: int


def find_star(tree: Tree) -> StarNode:
    """Deepest hub whose child subtrees are all paths (ties: lowest index).

    A path tree has no hub; the parent of its deepest leaf is returned
    with a single chain.
    """
    kids = tree.children()
    depth = _depths(tree)
    desc = _descendants(tree)
    nv = tree.vertices.shape[0]

    def all_paths(i):
        return all(len(kids[v]) <= 1 for c in kids[i] for v in {c} | desc[c])

    cands = [i for i in range(nv)
             if i != tree.root and len(kids[i]) >= 2 and all_paths(i)]
    if cands:
        x = min(cands, key=lambda i: (-depth[i], i))
    else:
        leaves = [i for i in range(nv) if i != tree.root and not kids[i]]
        leaf = min(leaves, key=lambda i: (-depth[i], i))
        x = tree.parents[leaf]
    chains = []
    for c in sorted(kids[x]):
        path = [c]
        while kids[path[-1]]:
            path.append(kids[path[-1]][0])
        chains.append(tuple(path))
    dist = max(range(len(chains)), key=lambda i: (len(chains[i]), -i))
    return StarNode(x, tree.parents[x], tuple(chains), dist)


def _sphere_snap(p, S, tol=1e-6):
    rel = np.asarray(p, float) - S.center
    if S.host is not None:
        local = rel @ S.host.basis.T
        off = rel - local @ S.host.basis
        if norm(off) > tol:
            return None
        rel = local @ S.host.basis
    r = norm(rel)
    if abs(r - S.radius) > tol or r <= tol:
        return None
    return S.center + S.radius * rel / r


def build_ob_x(star: StarNode, tree: Tree, eps=None):
    """Blocked positions of the hub x on its elbow sphere.

    Three obstruction sources: shadow cones of the static links against
    the tie segments to the pinned tip and to y; one parallelogram sweep
    per (riding edge, static link) pair -- the Minkowski offset of the
    static link by the edge's fixed displacement from x, at most 4
    components each; and isolated points where a riding vertex would
    land exactly on y or on the pinned tip.
    """
    eps = config.EPS if eps is None else eps
    V = tree.vertices
    x, y = star.x, star.y
    tip = star.chains[star.distinguished][-1]
    L = norm(V[tip] - V[x])
    l2 = norm(V[x] - V[y])
    S = elbow_sphere(V[tip], V[y], L, l2)

    moving = {x}
    for ch in star.chains:
        moving |= set(ch)
    static = []
    for c, p in tree.edge_index_array():
        if c in moving:
            continue
        static.append(Segment(V[c], V[p]))
    diag = build_ob_elbow(V[tip], V[y], S, static, eps)

    riders = []
    rider_verts = []
    for idx, ch in enumerate(star.chains):
        if idx == star.distinguished:
            continue
        prev = x
        for v in ch:
            riders.append((prev, v))
            rider_verts.append(v)
            prev = v
    for ua, ub in riders:
        off_a = V[ua] - V[x]
        off_b = V[ub] - V[x]
        for i, seg in enumerate(static):
            comps = parallelogram_sphere_intersect(
                seg.a - off_a, seg.b - seg.a, -(off_b - off_a), S, eps)
            diag.add(comps, source=i)
    for v in rider_verts:
        for target in (V[y], V[tip]):
            q = _sphere_snap(V[x] + (target - V[v]), S)
            if q is not None:
                diag.add([Arc.point(q)])
    bound = (6 * max(len(static), 1) + 4 * len(riders) * len(static)
             + 2 * len(rider_verts))
    if diag.component_count > bound:
        raise GeometryError("star diagram exceeds its component bound")
    return diag


# ---------------------------------------------------------------------------
# parking machinery


def _move_ok(V, move, tables, eps, samples=65):
    confs = move.apply(V, np.linspace(0.0, 1.0, samples))
    return _batched_violation(confs, tables, eps) is None


def _rod_tip(V, rod, x):
    return max(rod["moved"], key=lambda v: (norm(V[v] - V[x]), v))


def _static_rows(V, E, moving_verts, skip_rows, hub, shrink=HUB_SHRINK):
    """Stationary obstacle endpoint arrays for a move pivoting at ``hub``.

    Edges that meet the hub are clipped by ``shrink`` of their length at
    the hub end (every rod through the hub touches them there by
    construction; the adjacency rules of the simplicity check cover that
    contact exactly, the clipped rows steer the planner)."""
    rows_a, rows_b = [], []
    for r, (c, p) in enumerate(E):
        if c in moving_verts or r in skip_rows:
            continue
        a = V[c].copy()
        b = V[p].copy()
        if p == hub:
            b = a + (1.0 - shrink) * (b - a)
        elif c == hub:
            a = b + (1.0 - shrink) * (a - b)
        rows_a.append(a)
        rows_b.append(b)
    d = V.shape[1]
    if not rows_a:
        return np.zeros((0, d)), np.zeros((0, d))
    return np.array(rows_a), np.array(rows_b)


def _star_arc_move(V, x, tip, rod_moved, ride_verts, S, L, Pp, rng):
    """One CircularMove of the hub arc: x rides the elbow sphere, the
    current rod scales about its pinned tip, everything else attached to
    x translates rigidly."""
    r0 = unit(V[x] - S.center)
    r1 = unit(Pp - S.center)
    try:
        e1, e2, ang = rotation_to(r0, r1, rng=rng)
    except DegenerateGeometry:
        return None
    if ang <= 1e-14:
        return None
    moved = [x]
    centers = [S.center]
    radii = [S.radius]
    T = V[tip]
    for v in rod_moved:
        f = norm(V[v] - T) / L
        moved.append(v)
        centers.append(T + f * (S.center - T))
        radii.append(f * S.radius)
    for v in ride_verts:
        moved.append(v)
        centers.append(S.center + (V[v] - V[x]))
        radii.append(S.radius)
    return CircularMove(moved, np.array(centers), np.array(radii), e1, e2,
                        ang, meta={"kind": "star-elbow", "node": int(x)})


def _hub_elbow_move(V, E, x, y, rod, sub_x, edge_row, tables, rng, eps,
                    block_tol):
    """Short arc of the hub on its elbow sphere, unpinning the goal ray."""
    tip = _rod_tip(V, rod, x)
    T = V[tip]
    N = V[y]
    L = norm(T - V[x])
    l2 = norm(V[x] - N)
    S = elbow_sphere(T, N, L, l2)
    ride = sorted(sub_x - set(rod["moved"]))
    moving_all = sub_x | {x}
    A, B = _static_rows(V, E, moving_all, {edge_row[x]}, y)
    diagram = build_ob_elbow(T, N, S, _obstacle_objects(A, B))
    frame = SphereFrame(S)
    nloc = unit(frame.to_local(V[x]))
    t1, t2 = _tangent_basis(nloc)

    for trial in range(60):
        delta = (math.pi / 8.0) * (0.5 ** min(trial // 4, 20))
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
        move = _star_arc_move(V, x, tip, rod["moved"], ride, S, L, Pp, rng)
        if move is None:
            continue
        if not _move_ok(V, move, tables, eps):
            continue
        Vp = _apply_move(V, move)
        A2, B2 = _static_rows(Vp, E, set(rod["moved"]),
                              {edge_row[x]}, x)
        state, info = classify_state(Vp[tip], Vp[x], Vp[y], A2, B2, block_tol)
        if state == INTERSECTED:
            continue
        if state == FREE:
            home = _tail_rotation(Vp, rod["moved"], info["P"], info["w0"],
                                  info["wg"], rng, "rotate", x)
            if not _move_ok(Vp, home, tables, eps):
                continue
        return move, Vp
    raise PlanningError("could not unpin the goal ray at node %d" % x)


def _park_node(V, tree, x, E, edge_row, desc, kids, trace, groups, rng, eps,
               block_tol):
    """Park every child rod of x onto the ray extending parent -> x."""
    y = tree.parents[x]
    sub_x = desc[x]
    xy_row = edge_row[x]
    pending = []
    for c in sorted(kids[x]):
        mv = sorted(desc[c] | {c})
        pending.append({"moved": mv,
                        "edges": sorted(edge_row[v] for v in mv)})
    parked_edges = set()
    parked_moved = set()
    n_parked = 0
    budget = 8 * len(pending) + 8
    moves_used = 0

    def tables_with(extra_group):
        gs = groups if extra_group is None else _merge_groups(
            groups, [extra_group])
        return _pair_tables(E, gs)

    def commit(move, group):
        nonlocal moves_used
        trace.append(move, exempt_groups=None if group is None else [group])
        if group is not None:
            groups[:] = _merge_groups(groups, [group])
        moves_used += 1

    while pending:
        if moves_used > budget:
            raise PlanningError("node %d exceeded its parking budget" % x)
        wg = unit(V[x] - V[y])

        def angle_key(r):
            tip = _rod_tip(V, r, x)
            c = float(np.clip(unit(V[tip] - V[x]) @ wg, -1.0, 1.0))
            return (math.acos(c), r["moved"][0])

        pending.sort(key=angle_key)
        rod = pending.pop(0)
        moving = set(rod["moved"])
        # the landing overlaps parked material; exempting that pair set on
        # the landing move is what lets the rods coalesce
        land_group = (sorted(parked_edges | set(rod["edges"]))
                      if n_parked else None)

        done = False
        for _ in range(4):
            tip = _rod_tip(V, rod, x)
            A, B = _static_rows(V, E, moving,
                                parked_edges | {xy_row}, x)
            state, info = classify_state(V[tip], V[x], V[y], A, B, block_tol)
            if state == ALIGNED:
                if n_parked and not set(rod["edges"]) <= parked_edges:
                    raise PlanningError(
                        "rod aligned onto an occupied ray without a move")
                done = True
                break
            if state == FREE:
                m = _tail_rotation(V, rod["moved"], info["P"], info["w0"],
                                   info["wg"], rng, "rotate", x)
                if _move_ok(V, m, tables_with(land_group), eps):
                    commit(m, land_group)
                    V = _apply_move(V, m)
                    done = True
                    break
                state = OBSTRUCTED
            if state == OBSTRUCTED:
                try:
                    H = Flat(info["vg"], np.eye(V.shape[1]))
                    m1, V1 = _skirt_move(V, info, rod["moved"], tip, x, y,
                                         A, B, H, tables_with(land_group),
                                         rng, eps, block_tol)
                    if _move_ok(V, m1, tables_with(None), eps):
                        commit(m1, None)
                        V = V1
                        continue
                except (PlanningError, DegenerateGeometry):
                    pass
            # goal ray pinned (or lean unavailable): slide the hub
            m, V = _hub_elbow_move(V, E, x, y, rod, sub_x, edge_row,
                                   tables_with(None), rng, eps, block_tol)
            commit(m, None)
            if n_parked:
                # parked rods rode along rigidly; they left the relocated
                # ray as one straight unit -- re-park them as a whole
                pending.append({"moved": sorted(parked_moved),
                                "edges": sorted(parked_edges)})
                parked_edges = set()
                parked_moved = set()
                n_parked = 0
                land_group = None
        if not done:
            raise PlanningError("rod at node %d exceeded its round budget"
                                % x)
        parked_edges |= set(rod["edges"])
        parked_moved |= set(rod["moved"])
        n_parked += 1
    return V, moves_used


def straighten_tree(tree: Tree, seed=0, eps=None, block_tol=BLOCK_TOL):
    """Flatten a tree linkage onto the ray leaving its (leaf) root.

    Internal nodes are parked deepest-first; the returned trace carries
    the coalescing exempt groups and per-node move counts in
    ``trace.meta['node_moves']``.  The final configuration is collinear.
    """
    eps = config.EPS if eps is None else eps
    if tree.d != 4:
        raise GeometryError("straighten_tree expects d == 4")
    rng = np.random.default_rng(seed)
    V = tree.vertices.copy()
    E = tree.edge_index_array()
    edge_row = {int(c): r for r, (c, p) in enumerate(E)}
    kids = tree.children()
    desc = _descendants(tree)
    depth = _depths(tree)
    order = sorted(
        (i for i in range(V.shape[0]) if i != tree.root and kids[i]),
        key=lambda i: (-depth[i], i))
    trace = MotionTrace.for_tree(tree)
    trace.meta["seed"] = int(seed)
    groups = []
    node_moves = {}
    for x in order:
        V, used = _park_node(V, tree, x, E, edge_row, desc, kids, trace,
                             groups, rng, eps, block_tol)
        node_moves[int(x)] = used
    trace.final = V
    trace.meta["node_moves"] = node_moves
    trace.meta["total_moves"] = int(sum(node_moves.values()))
    return trace
