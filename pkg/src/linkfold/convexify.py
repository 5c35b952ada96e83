"""Convexifier for simple closed chains in R^4.

A closed chain is reduced to a triangle by repeated *line tracking*: a
window of five consecutive effective corners v0..v4 is chosen, a point q
is sampled with |q - v0| = l(v0v1) + l(v1v2) (or the mirror condition at
v4), and v2 is dragged along the straight segment toward q.  Both window
elbows open monotonically along the way, and at t = 1 the targeted elbow
is exactly straight; that joint is then frozen -- merged into a longer
rigid link whose interior vertices ride at fixed fractions.  Each
iteration removes one corner (two, when both elbows straighten at once),
so at most n - 3 iterations remain before only a triangle is left.

The sampler replaces an exact arrangement computation: candidate points
q are drawn on the admissible sphere, and the four admissibility
conditions (monotonicity half-spaces, radius, clearance of the
straightened segment, clearance of the drag segment) are re-verified
explicitly for every accepted q.  The elbow carriers v1(t), v3(t) are
advanced with an adaptive step: blocked positions are detoured around
their obstruction diagrams, the v3 diagram seeing the already-planned
moving links s0(t), s1(t) in addition to the fixed ones, and every
substep is checked with the verifier's own simplicity test.  Flat
triangles (e.g. the unit square collapses to sides 2,1,1) are detected
at the last instant and recorded with a collinearity exemption.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .geom import (
    DegenerateGeometry,
    GeometryError,
    Segment,
    norm,
    segment_pairs_distance,
    unit,
)
from .intersect import elbow_sphere
from .model import (
    Chain,
    LineTrackMove,
    MotionTrace,
    _batched_violation,
    _pair_tables,
    elbow_project,
    simplicity_violation,
)
from .obstruction import build_ob_linetrack, free_point_near
from .straighten import PlanningError

DT_INIT = 1.0 / 64.0
DT_MIN = 2.0 ** -20
DT_MAX = 1.0 / 16.0
DELTA_MIN = 1e-4      # halving distance to diagram obstructions
CLEAR_MIN = 1e-6      # required clearance for conditions 3 and 4


class SamplingExhausted(PlanningError):
    """The q-sampler ran out of budget for this window."""


class StepCollision(PlanningError):
    """A tracking substep could not be cleared within its budget."""


@dataclass
class LineTrackSetup:
    """A validated drag target for one window.

    ``window`` holds five original vertex indices (the last may repeat
    the first on a 4-corner chain); ``target`` is 1 or 3 for the elbow
    that is straight when v2 reaches ``q``.
    """

    window: tuple
    q: np.ndarray
    target: int
    r0: float
    r4: float
    conditions: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# window bookkeeping


def _cyclic_between(a, b, nv):
    """Original indices strictly between a and b walking forward mod nv."""
    out = []
    i = (a + 1) % nv
    while i != b:
        out.append(i)
        i = (i + 1) % nv
    return out


def _window_corners(act, k):
    m = len(act)
    return tuple(act[(k + i) % m] for i in range(5))


def _interior_slots(V, corners, nv):
    slots = []
    for a, b in zip(corners[:-1], corners[1:]):
        slot = []
        L = norm(V[b] - V[a])
        for i in _cyclic_between(a, b, nv):
            slot.append((int(i), float(norm(V[i] - V[a]) / L)))
        slots.append(slot)
    return slots


def _fixed_segments(V, act, k, nv):
    """Composed links outside the window, as (start, end, row) triples."""
    m = len(act)
    out = []
    for e in range(m):
        if (e - k) % m < 4:
            continue
        a, b = act[e], act[(e + 1) % m]
        out.append((a, b, Segment(V[a], V[b])))
    return out


def _set_window(W, V, corners, slots, v1, v2, v3):
    W[corners[1]] = v1
    W[corners[2]] = v2
    W[corners[3]] = v3
    cs = [V[corners[0]], v1, v2, v3, V[corners[4]]]
    for slot, (a, b) in zip(slots, zip(cs[:-1], cs[1:])):
        for i, f in slot:
            W[i] = a + f * (b - a)
    return W


def _seg_clear(p, q, segs):
    if not segs:
        return math.inf
    m = len(segs)
    P = np.repeat(np.asarray(p, float)[None], m, axis=0)
    Q = np.repeat(np.asarray(q, float)[None], m, axis=0)
    A = np.array([s.a for s in segs])
    B = np.array([s.b for s in segs])
    return float(np.min(segment_pairs_distance(P, Q, A, B)))


# ---------------------------------------------------------------------------
# choosing the drag target


def _q_conditions(V, corners, q, target, fixed, r0, r4):
    v0, v2, v4 = V[corners[0]], V[corners[2]], V[corners[4]]
    c1a = float((q - v2) @ (v2 - v0))
    c1b = float((q - v2) @ (v2 - v4))
    anchor = corners[0] if target == 1 else corners[4]
    r = r0 if target == 1 else r4
    c2 = abs(norm(q - V[anchor]) - r)
    segs3 = [s for a, b, s in fixed if a != anchor and b != anchor]
    c3 = _seg_clear(q, V[anchor], segs3)
    c4 = _seg_clear(V[corners[2]], q, [s for _, _, s in fixed])
    return {"half_space_0": c1a, "half_space_4": c1b, "radius_err": c2,
            "straight_clearance": c3, "drag_clearance": c4}


def _sample_q(V, corners, target, fixed, r0, r4, rng, budget=512):
    """Best admissible q on one sphere, or None."""
    v0, v2, v4 = V[corners[0]], V[corners[2]], V[corners[4]]
    center = V[corners[0]] if target == 1 else V[corners[4]]
    r = r0 if target == 1 else r4
    d = V.shape[1]
    u1 = v2 - v0
    u2 = v2 - v4
    # exactly opposed half-spaces leave only their shared boundary flat
    flat_n = None
    n1, n2 = norm(u1), norm(u2)
    if n1 > 0 and n2 > 0 and norm(u1 / n1 + u2 / n2) < 1e-6:
        flat_n = u1 / n1
    best = None
    for start in range(0, budget, 64):
        dirs = rng.standard_normal((64, d))
        if flat_n is not None:
            # restrict to the sphere's section by the boundary 3-flat
            h = float((v2 - center) @ flat_n)
            if abs(h) > r:
                return None
            sec_c = center + h * flat_n
            sec_r = math.sqrt(max(r * r - h * h, 0.0))
            dirs = dirs - np.outer(dirs @ flat_n, flat_n)
            Q = sec_c + sec_r * (dirs / np.linalg.norm(dirs, axis=1)[:, None])
        else:
            Q = center + r * (dirs / np.linalg.norm(dirs, axis=1)[:, None])
        for q in Q:
            # q must stay reachable by both elbows: inside both balls
            # (equality on the far one is the simultaneous case)
            if norm(q - v0) > r0 + 1e-12 or norm(q - v4) > r4 + 1e-12:
                continue
            cond = _q_conditions(V, corners, q, target, fixed, r0, r4)
            if cond["half_space_0"] < 0.0 or cond["half_space_4"] < 0.0:
                continue
            if cond["straight_clearance"] <= CLEAR_MIN:
                continue
            if cond["drag_clearance"] <= CLEAR_MIN:
                continue
            if norm(q - v2) <= 1e-9:
                continue
            if best is None or cond["straight_clearance"] > \
                    best[1]["straight_clearance"]:
                best = (q.copy(), cond)
        if best is not None:
            return best
    return None


def _choose_q(V, act, k, nv, rng, eps):
    corners = _window_corners(act, k)
    fixed = _fixed_segments(V, act, k, nv)
    l01 = norm(V[corners[1]] - V[corners[0]])
    l12 = norm(V[corners[2]] - V[corners[1]])
    l23 = norm(V[corners[3]] - V[corners[2]])
    l34 = norm(V[corners[4]] - V[corners[3]])
    r0 = l01 + l12
    r4 = l23 + l34
    cands = []
    for target in (1, 3):
        got = _sample_q(V, corners, target, fixed, r0, r4, rng)
        if got is not None:
            cands.append((target, got[0], got[1]))
    if not cands:
        raise SamplingExhausted("no admissible q for window at corner %d"
                                % corners[0])
    target, q, cond = max(
        cands, key=lambda c: (c[2]["straight_clearance"], -c[0]))
    return LineTrackSetup(corners, q, target, r0, r4, cond)


def choose_L(chain: Chain, window_index, seed=0, eps=None):
    """Drag target for the window starting at ``window_index``.

    Both window elbows must be strictly bent.  The returned setup's
    ``conditions`` record the re-verified admissibility values.
    """
    eps = config.EPS if eps is None else eps
    if not chain.closed:
        raise GeometryError("choose_L expects a closed chain")
    V = chain.vertices
    nv = V.shape[0]
    act = list(range(nv))
    corners = _window_corners(act, window_index % nv)
    for j in (1, 3):
        a = unit(V[corners[j - 1]] - V[corners[j]])
        b = unit(V[corners[j + 1]] - V[corners[j]])
        c = float(np.clip(a @ b, -1.0, 1.0))
        if c <= -1.0 + 1e-9:
            raise DegenerateGeometry("window elbow already straight")
        if c >= 1.0 - 1e-9:
            raise DegenerateGeometry("window elbow folded")
    rng = np.random.default_rng(seed)
    return _choose_q(V, act, window_index % nv, nv, rng, eps)


# ---------------------------------------------------------------------------
# tracking one episode


def _collinear_error(W):
    rel = W - W.mean(axis=0)
    s = np.linalg.svd(rel, compute_uv=False)
    return float(s[1]) if s.size > 1 else 0.0


def _track(V, act, setup, nv, tables, rng, eps, dt0=DT_INIT):
    """Advance the window to t = 1; returns (move, degenerate_flag)."""
    corners = setup.window
    w0, w1, w2, w3, w4 = corners
    slots = _interior_slots(V, corners, nv)
    k = act.index(w0)
    fixed = [s for _, _, s in _fixed_segments(V, act, k, nv)]
    l01 = norm(V[w1] - V[w0])
    l12 = norm(V[w2] - V[w1])
    l23 = norm(V[w3] - V[w2])
    l34 = norm(V[w4] - V[w3])
    v0 = V[w0].copy()
    v4g = V[w4].copy()
    v2s = V[w2].copy()
    v2e = np.asarray(setup.q, float)
    v1 = V[w1].copy()
    v3 = V[w3].copy()
    knots = [(0.0, v1.copy(), v3.copy())]
    t = 0.0
    dt = dt0
    clean = 0
    degenerate = False
    guard = 0

    def carrier(prev, a, b, la, lb, obstacles, forced):
        if forced:
            return a + la * unit(b - a), True
        cand = elbow_project(prev, a, b, la, lb)
        try:
            S = elbow_sphere(a, b, la, lb)
        except DegenerateGeometry:
            return cand, True
        diag = build_ob_linetrack(a, b, la, lb, obstacles, S)
        if diag.blocked(cand):
            cand = free_point_near(cand, diag, max_step=0.25 * S.radius,
                                   rng=rng)
        elif diag.blocked(cand, eps=DELTA_MIN):
            return cand, False      # too close: caller halves the step
        return cand, True

    def window_config(v1n, v2n, v3n):
        W = V.copy()
        return _set_window(W, V, corners, slots, v1n, v2n, v3n)

    while t < 1.0:
        guard += 1
        if guard > 20000:
            raise StepCollision("tracking stalled near t=%.6g" % t)
        tn = min(t + dt, 1.0)
        v2n = v2s + tn * (v2e - v2s)
        at_end = tn >= 1.0
        try:
            v1n, ok1 = carrier(v1, v0, v2n, l01, l12, fixed,
                               at_end and setup.target == 1)
            if not ok1 and dt > DT_MIN:
                dt *= 0.5
                clean = 0
                continue
            moving = fixed + [Segment(v0, v1n), Segment(v1n, v2n)]
            v3n, ok3 = carrier(v3, v2n, v4g, l23, l34, moving,
                               at_end and setup.target == 3)
            if not ok3 and dt > DT_MIN:
                dt *= 0.5
                clean = 0
                continue
        except (DegenerateGeometry, GeometryError):
            if dt > DT_MIN:
                dt *= 0.5
                clean = 0
                continue
            raise StepCollision("carrier blocked near t=%.6g" % t)
        W = window_config(v1n, v2n, v3n)
        viol = simplicity_violation(W, None, eps, tables=tables)
        if viol is None:
            # the replay interpolates between knots and snaps back onto
            # the elbow spheres; check that reconstruction mid-step too
            tm = 0.5 * (t + tn)
            v2m = v2s + tm * (v2e - v2s)
            v1m = elbow_project(0.5 * (v1 + v1n), v0, v2m, l01, l12)
            v3m = elbow_project(0.5 * (v3 + v3n), v2m, v4g, l23, l34)
            viol = simplicity_violation(window_config(v1m, v2m, v3m), None,
                                        eps, tables=tables)
        if viol is not None:
            if at_end and _collinear_error(W) <= 1e-6:
                degenerate = True       # flat final triangle, coalesced
            elif dt > DT_MIN:
                dt *= 0.5
                clean = 0
                continue
            else:
                raise StepCollision(
                    "unclearable contact near t=%.6g (edges %d, %d)"
                    % (tn, viol[0], viol[1]))
        t = tn
        v1, v3 = v1n, v3n
        knots.append((t, v1.copy(), v3.copy()))
        clean += 1
        if clean >= 8:
            dt = min(dt * 2.0, DT_MAX)
            clean = 0
    move = LineTrackMove(
        corners=list(corners), interior=slots, v2_start=v2s, v2_end=v2e,
        radii=[l01, l12, l23, l34], knots=knots,
        meta={"kind": "linetrack", "target": int(setup.target),
              "straightened": int(corners[setup.target])})
    return move, degenerate


def line_track(chain: Chain, setup: LineTrackSetup, seed=0, eps=None):
    """Run one tracking episode on a closed chain (all joints active).

    Returns (move, straightened joint index).
    """
    eps = config.EPS if eps is None else eps
    V = chain.vertices
    nv = V.shape[0]
    act = list(range(nv))
    tables = _pair_tables(chain.edge_index_array())
    rng = np.random.default_rng(seed)
    move, _ = _track(V, act, setup, nv, tables, rng, eps)
    return move, int(setup.window[setup.target])


# ---------------------------------------------------------------------------
# driver


def _joint_angle_in(V, act, pos):
    m = len(act)
    p = V[act[(pos - 1) % m]] - V[act[pos]]
    q = V[act[(pos + 1) % m]] - V[act[pos]]
    return math.acos(float(np.clip(unit(p) @ unit(q), -1.0, 1.0)))


def _validate_move(V, move, tables, eps, samples=201):
    confs = move.apply(V, np.linspace(0.0, 1.0, samples))
    return _batched_violation(confs, tables, eps) is None


def convexify(chain: Chain, seed=0, eps=None):
    """Reduce a simple closed chain to a triangle.

    One tracking episode per iteration; the straightened corner is
    frozen into its composed link.  A triangle input yields an empty
    trace.  Episode records (window, q, target, condition values) land
    in ``trace.meta['episodes']``.
    """
    eps = config.EPS if eps is None else eps
    if not chain.closed:
        raise GeometryError("convexify expects a closed chain")
    rng = np.random.default_rng(seed)
    V = chain.vertices.copy()
    nv = V.shape[0]
    E = chain.edge_index_array()
    act = list(range(nv))
    trace = MotionTrace.for_chain(chain)
    trace.meta["seed"] = int(seed)
    episodes = []
    groups = []
    iters = 0
    while len(act) > 3:
        if iters >= nv - 3:
            raise PlanningError("iteration budget n-3 exceeded")
        tables = _pair_tables(E, groups)
        m = len(act)
        k0 = act.index(min(act))
        last_err = None
        done = False
        for off in range(m):
            k = (k0 + off) % m
            corners = _window_corners(act, k)
            bent = True
            for j in (1, 3):
                ang = _joint_angle_in(V, act, (k + j) % m)
                if ang >= math.pi - 1e-9 or ang <= 1e-9:
                    bent = False
            if not bent:
                continue
            try:
                setup = _choose_q(V, act, k, nv, rng, eps)
                move, degenerate = _track(V, act, setup, nv, tables, rng, eps)
            except PlanningError as exc:
                last_err = exc
                continue
            group = None
            if degenerate:
                group = [int(r) for r in range(E.shape[0])]
                tables_d = _pair_tables(E, _merge(groups, group))
                ok = _validate_move(V, move, tables_d, eps)
            else:
                ok = _validate_move(V, move, tables, eps)
            if not ok:
                last_err = PlanningError("episode failed re-validation")
                continue
            trace.append(move, exempt_groups=None if group is None
                         else [group])
            if group is not None:
                groups = _merge(groups, group)
            V = move.apply(V, [1.0])[0]
            frozen = [int(setup.window[setup.target])]
            other = 3 if setup.target == 1 else 1
            act.remove(frozen[0])
            if len(act) > 3 and \
                    _joint_angle_in(V, act, act.index(setup.window[other])) \
                    >= math.pi - 1e-9:
                act.remove(setup.window[other])
                frozen.append(int(setup.window[other]))
            episodes.append({
                "iteration": iters,
                "window": [int(c) for c in setup.window],
                "q": [float(x) for x in setup.q],
                "target": int(setup.target),
                "frozen": frozen,
                "conditions": {kk: float(vv)
                               for kk, vv in setup.conditions.items()},
                "degenerate": bool(degenerate),
            })
            done = True
            break
        if not done:
            raise last_err or PlanningError("no workable window found")
        iters += 1
    trace.final = V
    trace.meta["episodes"] = episodes
    trace.meta["iterations"] = iters
    trace.meta["triangle"] = [int(i) for i in act]
    return trace


def _merge(groups, group):
    from .model import _merge_groups
    return _merge_groups(groups, [group])
