"""Linkages, motions and verifiable traces.

A linkage is a set of vertices in R^d joined by unit-rigidity edges:
open chains, closed chains and trees all reduce to a vertex array plus
an edge index list.  Motions are sequences of moves, each replayable
from stored parameters alone, so a trace can be re-verified by an
independent process: sample every move densely, check edge-length drift
and simplicity at every sample.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .geom import (
    DegenerateGeometry,
    GeometryError,
    Segment,
    as_point,
    norm,
    segment_pairs_distance,
    unit,
)


class NotSimpleError(GeometryError):
    """The linkage self-intersects (non-adjacent edges touch)."""


# ---------------------------------------------------------------------------
# linkages


def _as_vertex_array(vertices):
    V = np.array(vertices, dtype=float)
    if V.ndim != 2 or V.shape[0] < 2:
        raise GeometryError("need at least two vertices, shape (k, d)")
    if V.shape[1] < 4:
        raise GeometryError("ambient dimension must be at least 4")
    if not np.all(np.isfinite(V)):
        raise GeometryError("vertices must be finite")
    return V


class Chain:
    """A polygonal chain: ``n`` edges over ``n+1`` (open) or ``n``
    (closed, stored without the duplicate) vertices."""

    def __init__(self, vertices, closed=False, unchecked=False):
        self.vertices = _as_vertex_array(vertices)
        self.closed = bool(closed)
        if self.closed and self.vertices.shape[0] < 3:
            raise GeometryError("closed chain needs at least 3 vertices")
        for i, j in self.edge_index_array():
            if norm(self.vertices[i] - self.vertices[j]) <= config.EPS:
                raise GeometryError("zero-length edge at index %d" % i)
        if not unchecked:
            viol = simplicity_violation(self.vertices, self.edge_index_array())
            if viol is not None:
                raise NotSimpleError("chain is not simple: edges %d, %d at "
                                     "distance %.3g" % viol)

    @property
    def d(self):
        return self.vertices.shape[1]

    @property
    def n(self):
        """Number of edges."""
        k = self.vertices.shape[0]
        return k if self.closed else k - 1

    def edge_index_array(self):
        k = self.vertices.shape[0]
        i = np.arange(self.n)
        j = (i + 1) % k if self.closed else i + 1
        return np.stack([i, j], axis=1)

    def edge_lengths(self):
        E = self.edge_index_array()
        return np.linalg.norm(self.vertices[E[:, 1]] - self.vertices[E[:, 0]], axis=1)

    def segments(self):
        return [Segment(self.vertices[i], self.vertices[j])
                for i, j in self.edge_index_array()]

    def with_vertices(self, V):
        out = Chain.__new__(Chain)
        out.vertices = _as_vertex_array(V)
        out.closed = self.closed
        return out

    def copy(self):
        return self.with_vertices(self.vertices.copy())


class Tree:
    """A tree linkage: vertex i (other than the root) joins its parent."""

    def __init__(self, vertices, parents, unchecked=False):
        self.vertices = _as_vertex_array(vertices)
        self.parents = [int(p) for p in parents]
        k = self.vertices.shape[0]
        if len(self.parents) != k:
            raise GeometryError("one parent entry per vertex (-1 at the root)")
        roots = [i for i, p in enumerate(self.parents) if p == -1]
        if len(roots) != 1:
            raise GeometryError("exactly one root required")
        self.root = roots[0]
        seen = set()
        for i in range(k):
            j, path = i, set()
            while j != self.root:
                if j in path:
                    raise GeometryError("parent pointers contain a cycle")
                path.add(j)
                j = self.parents[j]
                if not (0 <= j < k):
                    raise GeometryError("parent index out of range")
            seen.add(i)
        if len(seen) != k:
            raise GeometryError("tree is not connected")
        if sum(1 for p in self.parents if p == self.root) != 1:
            raise GeometryError("root must be a leaf (degree 1)")
        if not unchecked:
            viol = simplicity_violation(self.vertices, self.edge_index_array())
            if viol is not None:
                raise NotSimpleError("tree is not simple: edges %d, %d at "
                                     "distance %.3g" % viol)

    @property
    def d(self):
        return self.vertices.shape[1]

    @property
    def n(self):
        return self.vertices.shape[0] - 1

    def edge_index_array(self):
        pairs = [(i, p) for i, p in enumerate(self.parents) if p != -1]
        return np.array(pairs, dtype=int).reshape(-1, 2)

    def children(self):
        out = {i: [] for i in range(self.vertices.shape[0])}
        for i, p in enumerate(self.parents):
            if p != -1:
                out[p].append(i)
        return out

    def edge_lengths(self):
        E = self.edge_index_array()
        return np.linalg.norm(self.vertices[E[:, 1]] - self.vertices[E[:, 0]], axis=1)

    def with_vertices(self, V):
        out = Tree.__new__(Tree)
        out.vertices = _as_vertex_array(V)
        out.parents = list(self.parents)
        out.root = self.root
        return out


def joint_angle(V, i, prev=None, nxt=None):
    """Interior angle at vertex i (pi means straight)."""
    V = np.asarray(V, float)
    a = V[i - 1 if prev is None else prev] - V[i]
    b = V[i + 1 if nxt is None else nxt] - V[i]
    c = float(unit(a) @ unit(b))
    return math.acos(min(max(c, -1.0), 1.0))


# ---------------------------------------------------------------------------
# simplicity


def _adjacency(edges):
    E = np.asarray(edges, int)
    m = E.shape[0]
    ii, jj = np.triu_indices(m, k=1)
    shared = (
        (E[ii, 0] == E[jj, 0]) | (E[ii, 0] == E[jj, 1])
        | (E[ii, 1] == E[jj, 0]) | (E[ii, 1] == E[jj, 1])
    )
    return ii, jj, shared


def _pair_tables(edges, exempt_groups=None):
    """Index tables for the simplicity check over an edge list."""
    E = np.asarray(edges, int)
    ii, jj, shared = _adjacency(E)
    exempt = np.zeros(ii.shape[0], dtype=bool)
    if exempt_groups:
        group_of = {}
        for g, members in enumerate(exempt_groups):
            for e in members:
                group_of[int(e)] = g
        gi = np.array([group_of.get(int(e), -1) for e in ii])
        gj = np.array([group_of.get(int(e), -1) for e in jj])
        exempt = (gi >= 0) & (gi == gj)
    nonadj = ~shared & ~exempt
    adj = shared & ~exempt
    return E, (ii[nonadj], jj[nonadj]), (ii[adj], jj[adj], E[ii[adj]], E[jj[adj]])


def simplicity_violation(V, edges, eps=None, exempt_groups=None, tables=None):
    """Return a violation record (i, j, dist) or None if the layout is simple.

    Non-adjacent edges must stay at least ``eps`` apart.  For edges
    sharing a vertex the infimum over open sub-segments is always zero,
    so the test used is: the far endpoint of each edge must clear the
    other edge (this rejects folded and near-folded joints while letting
    straight joints pass).  Edges inside one exempt group are skipped
    pairwise; callers assert collinearity of such groups separately.
    """
    eps = config.EPS if eps is None else eps
    V = np.asarray(V, float)
    if tables is None:
        tables = _pair_tables(edges, exempt_groups)
    E, (ni, nj), (ai, aj, Ea, Eb) = tables
    if ni.size:
        d = segment_pairs_distance(
            V[E[ni, 0]], V[E[ni, 1]], V[E[nj, 0]], V[E[nj, 1]]
        )
        k = int(np.argmin(d))
        if d[k] < eps:
            return (int(ni[k]), int(nj[k]), float(d[k]))
    if ai.size:
        # far endpoint of edge a = the endpoint not shared with edge b
        shared_is_a0 = (Ea[:, 0:1] == Eb).any(axis=1)
        far_a = np.where(shared_is_a0, Ea[:, 1], Ea[:, 0])
        shared_is_b0 = (Eb[:, 0:1] == Ea).any(axis=1)
        far_b = np.where(shared_is_b0, Eb[:, 1], Eb[:, 0])
        pa = V[far_a]
        pb = V[far_b]
        da = segment_pairs_distance(pa, pa, V[Eb[:, 0]], V[Eb[:, 1]])
        db = segment_pairs_distance(pb, pb, V[Ea[:, 0]], V[Ea[:, 1]])
        d = np.minimum(da, db)
        k = int(np.argmin(d))
        if d[k] < eps:
            return (int(ai[k]), int(aj[k]), float(d[k]))
    return None


def is_simple(V, edges, eps=None, exempt_groups=None):
    return simplicity_violation(V, edges, eps, exempt_groups) is None


def _split_tables(tables, E, move):
    """Split pair tables into pairs touching a moving edge and the rest."""
    moved = set(int(i) for i in move.moved)
    edge_moves = np.array([int(a) in moved or int(b) in moved for a, b in E])
    Et, (ni, nj), (ai, aj, Ea, Eb) = tables
    nm = edge_moves[ni] | edge_moves[nj]
    am = edge_moves[ai] | edge_moves[aj]
    moving = (Et, (ni[nm], nj[nm]), (ai[am], aj[am], Ea[am], Eb[am]))
    static = (Et, (ni[~nm], nj[~nm]), (ai[~am], aj[~am], Ea[~am], Eb[~am]))
    return moving, static


def _circular_near_tables(V, E, move: CircularMove, tables, L0, eps):
    """Prune pairs that provably stay clear for the entire circular move.

    Every vertex (moving or not) sits on a circle with the move's shared
    frame and phase -- stationary vertices have radius zero.  Edge
    midpoints then travel circles too, and the minimum midpoint distance
    over a full turn has a closed form; subtracting the half-lengths
    lower-bounds the segment distance for the whole move.  Only pairs
    whose bound comes near ``eps`` are sampled exactly.
    """
    nv = V.shape[0]
    C = V.copy()
    R = np.zeros(nv)
    C[move.moved] = move.centers
    R[move.moved] = move.radii
    cm = 0.5 * (C[E[:, 0]] + C[E[:, 1]])
    rm = 0.5 * (R[E[:, 0]] + R[E[:, 1]])
    Et, (ni, nj), adj = tables
    dc = cm[ni] - cm[nj]
    dr = rm[ni] - rm[nj]
    a = dc @ move.e1
    b = dc @ move.e2
    min2 = (np.einsum("ij,ij->i", dc, dc) + dr * dr
            - 2.0 * np.abs(dr) * np.hypot(a, b))
    lb = np.sqrt(np.maximum(min2, 0.0)) - 0.5 * (L0[ni] + L0[nj])
    keep = lb < 8.0 * eps + 1e-7
    return (Et, (ni[keep], nj[keep]), adj)


def _batched_violation(confs, tables, eps, chunk=20):
    """First simplicity violation across stacked configurations.

    ``confs`` has shape (S, n_verts, d); pair distances for all samples
    in a chunk are computed in one vectorized call.  Returns
    (sample, edge_i, edge_j, dist) or None.
    """
    E, (ni, nj), (ai, aj, Ea, Eb) = tables
    S = confs.shape[0]
    if ai.size:
        shared_is_a0 = (Ea[:, 0:1] == Eb).any(axis=1)
        far_a = np.where(shared_is_a0, Ea[:, 1], Ea[:, 0])
        shared_is_b0 = (Eb[:, 0:1] == Ea).any(axis=1)
        far_b = np.where(shared_is_b0, Eb[:, 1], Eb[:, 0])
    for s0 in range(0, S, chunk):
        C = confs[s0:s0 + chunk]
        k = C.shape[0]
        if ni.size:
            p1 = C[:, E[ni, 0], :].reshape(-1, C.shape[2])
            q1 = C[:, E[ni, 1], :].reshape(-1, C.shape[2])
            p2 = C[:, E[nj, 0], :].reshape(-1, C.shape[2])
            q2 = C[:, E[nj, 1], :].reshape(-1, C.shape[2])
            d = segment_pairs_distance(p1, q1, p2, q2)
            m = int(np.argmin(d))
            if d[m] < eps:
                return (s0 + m // ni.size, int(ni[m % ni.size]),
                        int(nj[m % ni.size]), float(d[m]))
        if ai.size:
            pa = C[:, far_a, :].reshape(-1, C.shape[2])
            pb = C[:, far_b, :].reshape(-1, C.shape[2])
            b1 = C[:, Eb[:, 0], :].reshape(-1, C.shape[2])
            b2 = C[:, Eb[:, 1], :].reshape(-1, C.shape[2])
            a1 = C[:, Ea[:, 0], :].reshape(-1, C.shape[2])
            a2 = C[:, Ea[:, 1], :].reshape(-1, C.shape[2])
            da = segment_pairs_distance(pa, pa, b1, b2)
            db = segment_pairs_distance(pb, pb, a1, a2)
            d = np.minimum(da, db)
            m = int(np.argmin(d))
            if d[m] < eps:
                return (s0 + m // ai.size, int(ai[m % ai.size]),
                        int(aj[m % ai.size]), float(d[m]))
    return None


# ---------------------------------------------------------------------------
# moves


@dataclass
class CircularMove:
    """Simultaneous circular motion of several vertices.

    Every moving vertex k travels on its own circle (center ``centers[k]``,
    radius ``radii[k]``) but all circles share one rotation frame: at
    motion parameter tau in [0, 1],

        v_k(tau) = centers[k] + radii[k] * (cos(tau*angle) e1
                                            + sin(tau*angle) e2).

    This one shape covers a rigid rotation of a straight tail, a joint
    travelling a great-circle geodesic with its tail scaling along, and a
    rigid translation of a subtree (radius shared, centers offset).
    """

    moved: list
    centers: np.ndarray
    radii: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    angle: float
    clearance: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, float))
        self.radii = np.atleast_1d(np.asarray(self.radii, float))
        self.e1 = as_point(self.e1)
        self.e2 = as_point(self.e2)
        if abs(norm(self.e1) - 1.0) > 1e-9 or abs(norm(self.e2) - 1.0) > 1e-9:
            raise GeometryError("rotation frame vectors must be unit")
        if abs(float(self.e1 @ self.e2)) > 1e-9:
            raise GeometryError("rotation frame vectors must be orthogonal")
        if len(self.moved) != self.centers.shape[0] or len(self.moved) != self.radii.size:
            raise GeometryError("moved/centers/radii length mismatch")

    def positions(self, taus):
        """Moving-vertex positions, shape (len(taus), k, d)."""
        taus = np.atleast_1d(np.asarray(taus, float))
        th = taus * self.angle
        circ = (np.cos(th)[:, None, None] * self.e1[None, None, :]
                + np.sin(th)[:, None, None] * self.e2[None, None, :])
        return self.centers[None, :, :] + self.radii[None, :, None] * circ

    def apply(self, V, taus):
        """Full configurations at each tau, shape (len(taus), n_verts, d)."""
        taus = np.atleast_1d(np.asarray(taus, float))
        out = np.repeat(np.asarray(V, float)[None], taus.size, axis=0)
        out[:, self.moved, :] = self.positions(taus)
        return out

    def to_dict(self):
        return {
            "type": "circular",
            "moved": [int(i) for i in self.moved],
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "e1": self.e1.tolist(),
            "e2": self.e2.tolist(),
            "angle": float(self.angle),
            "clearance": float(self.clearance),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, rec):
        return cls(
            moved=rec["moved"],
            centers=np.array(rec["centers"], float),
            radii=np.array(rec["radii"], float),
            e1=np.array(rec["e1"], float),
            e2=np.array(rec["e2"], float),
            angle=rec["angle"],
            clearance=rec.get("clearance", 0.0),
            meta=rec.get("meta", {}),
        )


def elbow_project(p, a, b, l1, l2):
    """Closest point to p among {z : |z-a|=l1, |z-b|=l2} (closed form).

    Used to replay tracked joints: interpolated guesses are snapped back
    onto the exact elbow sphere so edge lengths are preserved at every
    sampled instant, not only at knots.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    p = np.asarray(p, float)
    w = b - a
    D = norm(w)
    if D <= config.EPS_UNIT:
        raise DegenerateGeometry("coincident elbow endpoints")
    u = w / D
    x = (D * D + l1 * l1 - l2 * l2) / (2.0 * D)
    rho2 = l1 * l1 - x * x
    center = a + x * u
    if rho2 <= 1e-24:
        return center
    rel = p - center
    perp = rel - float(rel @ u) * u
    np_ = norm(perp)
    if np_ <= 1e-15:
        # interpolant landed on the axis; any sphere point preserves
        # lengths, pick deterministically
        d = a.size
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1.0
            perp = e - float(e @ u) * u
            np_ = norm(perp)
            if np_ > 1e-6:
                break
    return center + math.sqrt(rho2) * perp / np_


@dataclass
class LineTrackMove:
    """One window step of the convexifying line tracker.

    Five effective corners w0..w4 (original vertex indices); w0 and w4
    stay fixed, w2 translates linearly from ``v2_start`` to ``v2_end``,
    and w1/w3 ride their elbow spheres.  Their paths are stored as knot
    positions; replay interpolates linearly between knots and snaps back
    onto the exact elbow spheres, so edge lengths hold at every sample.
    Straightened joints interior to a composed edge follow at fixed
    fractions.
    """

    corners: list          # 5 original vertex indices
    interior: list         # per composed edge: list of (orig index, fraction)
    v2_start: np.ndarray
    v2_end: np.ndarray
    radii: list            # |w0w1|, |w1w2|, |w2w3|, |w3w4|
    knots: list            # (t, v1, v3), t ascending, t[0]=0, t[-1]=1
    clearance: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.v2_start = as_point(self.v2_start)
        self.v2_end = as_point(self.v2_end, d=self.v2_start.size)
        self.knots = [
            (float(t), as_point(v1), as_point(v3)) for t, v1, v3 in self.knots
        ]
        if len(self.knots) < 2 or self.knots[0][0] != 0.0 or self.knots[-1][0] != 1.0:
            raise GeometryError("knots must span [0, 1]")

    @property
    def moved(self):
        out = [self.corners[1], self.corners[2], self.corners[3]]
        for slot in self.interior:
            out.extend(int(i) for i, _ in slot)
        return out

    def _corner_positions(self, t, v0, v4):
        v2 = self.v2_start + t * (self.v2_end - self.v2_start)
        ts = [k[0] for k in self.knots]
        j = min(max(np.searchsorted(ts, t, side="right") - 1, 0), len(ts) - 2)
        t0, p10, p30 = self.knots[j]
        t1, p11, p31 = self.knots[j + 1]
        f = 0.0 if t1 <= t0 else (t - t0) / (t1 - t0)
        g1 = p10 + f * (p11 - p10)
        g3 = p30 + f * (p31 - p30)
        r01, r12, r23, r34 = self.radii
        # elbow may be straight at the ends of the step: snap handles it
        v1 = elbow_project(g1, v0, v2, r01, r12)
        v3 = elbow_project(g3, v2, v4, r23, r34)
        return v1, v2, v3

    def apply(self, V, taus):
        taus = np.atleast_1d(np.asarray(taus, float))
        V = np.asarray(V, float)
        v0 = V[self.corners[0]]
        v4 = V[self.corners[4]]
        out = np.repeat(V[None], taus.size, axis=0)
        for s, t in enumerate(taus):
            v1, v2, v3 = self._corner_positions(float(t), v0, v4)
            cs = [v0, v1, v2, v3, v4]
            out[s, self.corners[1]] = v1
            out[s, self.corners[2]] = v2
            out[s, self.corners[3]] = v3
            for slot, (a, b) in zip(self.interior, zip(cs[:-1], cs[1:])):
                for idx, frac in slot:
                    out[s, int(idx)] = a + frac * (b - a)
        return out

    def positions(self, taus):
        raise NotImplementedError("use apply(); tracked windows need v0/v4")

    def to_dict(self):
        return {
            "type": "linetrack",
            "corners": [int(i) for i in self.corners],
            "interior": [[[int(i), float(f)] for i, f in slot]
                         for slot in self.interior],
            "v2_start": self.v2_start.tolist(),
            "v2_end": self.v2_end.tolist(),
            "radii": [float(r) for r in self.radii],
            "knots": [[t, v1.tolist(), v3.tolist()] for t, v1, v3 in self.knots],
            "clearance": float(self.clearance),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, rec):
        return cls(
            corners=rec["corners"],
            interior=[[(i, f) for i, f in slot] for slot in rec["interior"]],
            v2_start=np.array(rec["v2_start"], float),
            v2_end=np.array(rec["v2_end"], float),
            radii=rec["radii"],
            knots=[(t, np.array(v1, float), np.array(v3, float))
                   for t, v1, v3 in rec["knots"]],
            clearance=rec.get("clearance", 0.0),
            meta=rec.get("meta", {}),
        )


def move_from_dict(rec):
    if rec["type"] == "circular":
        return CircularMove.from_dict(rec)
    if rec["type"] == "linetrack":
        return LineTrackMove.from_dict(rec)
    raise GeometryError("unknown move type %r" % rec["type"])


# ---------------------------------------------------------------------------
# traces


@dataclass
class TraceStep:
    move: object
    exempt_groups: list = field(default_factory=list)


class MotionTrace:
    """A replayable motion: initial layout, moves, claimed final layout.

    ``exempt_groups`` per step lists edge-index groups that are allowed
    to touch during (and after) that step because they have been
    deliberately straightened onto a common line.
    """

    def __init__(self, vertices, edges, steps=None, final=None, meta=None):
        self.initial = _as_vertex_array(vertices)
        self.edges = np.asarray(edges, int).reshape(-1, 2)
        self.steps = list(steps or [])
        self.final = None if final is None else _as_vertex_array(final)
        self.meta = dict(meta or {})

    @classmethod
    def for_chain(cls, chain: Chain, **kw):
        t = cls(chain.vertices, chain.edge_index_array(), **kw)
        t.meta.setdefault("topology", "closed" if chain.closed else "open")
        return t

    @classmethod
    def for_tree(cls, tree: Tree, **kw):
        t = cls(tree.vertices, tree.edge_index_array(), **kw)
        t.meta.setdefault("topology", "tree")
        t.meta.setdefault("parents", list(tree.parents))
        return t

    def append(self, move, exempt_groups=None):
        self.steps.append(TraceStep(move, [list(g) for g in (exempt_groups or [])]))

    @property
    def moves(self):
        return [s.move for s in self.steps]

    def replay(self):
        """Final configuration obtained by applying every move at tau=1."""
        V = self.initial.copy()
        for step in self.steps:
            V = step.move.apply(V, [1.0])[0]
        return V

    def to_dict(self):
        return {
            "format": "linkfold-trace-1",
            "edges": self.edges.tolist(),
            "initial": self.initial.tolist(),
            "moves": [s.move.to_dict() for s in self.steps],
            "exempt_groups": [s.exempt_groups for s in self.steps],
            "final": None if self.final is None else self.final.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, rec):
        t = cls(
            np.array(rec["initial"], float),
            np.array(rec["edges"], int),
            final=None if rec.get("final") is None
            else np.array(rec["final"], float),
            meta=rec.get("meta", {}),
        )
        groups = rec.get("exempt_groups", [[] for _ in rec["moves"]])
        for mrec, g in zip(rec["moves"], groups):
            t.steps.append(TraceStep(move_from_dict(mrec), g))
        return t

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class VerificationFailure:
    move_index: int
    tau: float
    reason: str
    detail: tuple = ()

    def __str__(self):
        return "move %d @ tau=%.6g: %s %r" % (
            self.move_index, self.tau, self.reason, self.detail,
        )


@dataclass
class VerificationReport:
    ok: bool
    failures: list
    moves_checked: int
    samples_per_move: int

    def __str__(self):
        if self.ok:
            return "OK: %d moves x %d samples" % (
                self.moves_checked, self.samples_per_move)
        head = self.failures[:5]
        return "FAIL (%d failures):\n  " % len(self.failures) + "\n  ".join(
            str(f) for f in head)


def verify_trace(trace: MotionTrace, samples=100, eps=None, max_failures=25,
                 final_tol=None):
    """Independently re-verify a motion trace.

    For every move, ``samples`` evenly spaced instants (endpoints
    included) are checked for edge-length drift against the initial
    lengths and for simplicity.  Exempt groups declared for a step are
    honored during it and afterwards; their edges must stay collinear
    instead.  The claimed final configuration, if present, must match
    the replayed one.
    """
    eps = config.EPS if eps is None else eps
    final_tol = eps if final_tol is None else final_tol
    E = trace.edges
    L0 = np.linalg.norm(
        trace.initial[E[:, 1]] - trace.initial[E[:, 0]], axis=1)
    scale = np.maximum(L0, 1.0)
    failures = []
    taus = np.linspace(0.0, 1.0, max(samples, 2))
    V = trace.initial.copy()
    groups_so_far = []
    tables = _pair_tables(E, None)
    for mi, step in enumerate(trace.steps):
        if step.exempt_groups:
            groups_so_far = _merge_groups(groups_so_far, step.exempt_groups)
            tables = _pair_tables(E, groups_so_far)
        move = step.move
        start = move.apply(V, [0.0])[0]
        if np.max(np.abs(start - V)) > 1e-7 * max(1.0, np.max(np.abs(V))):
            failures.append(VerificationFailure(mi, 0.0, "discontinuous start"))
            if len(failures) >= max_failures:
                break
        confs = move.apply(V, taus)
        lens = np.linalg.norm(
            confs[:, E[:, 1], :] - confs[:, E[:, 0], :], axis=2)
        drift = np.abs(lens - L0[None, :]) / scale[None, :]
        bad = np.argwhere(drift > eps)
        for s, e in bad[:3]:
            failures.append(VerificationFailure(
                int(mi), float(taus[s]), "edge length drift",
                (int(e), float(drift[s, e]))))
        if isinstance(move, CircularMove):
            near = _circular_near_tables(V, E, move, tables, L0, eps)
            viol = _batched_violation(confs, near, eps)
        else:
            moving, static = _split_tables(tables, E, move)
            viol = _batched_violation(confs, moving, eps)
            if viol is None:
                # pairs of stationary edges cannot change during the move
                viol = _batched_violation(confs[:1], static, eps)
        if viol is not None:
            s, i, j, dv = viol
            failures.append(VerificationFailure(
                mi, float(taus[s]), "simplicity violation", (i, j, dv)))
        for g in groups_so_far:
            err = _collinearity_error(confs[-1], E, g)
            if err > 1e-6:
                failures.append(VerificationFailure(
                    mi, 1.0, "exempt group not collinear", (list(g), err)))
        if len(failures) >= max_failures:
            break
        V = confs[-1]
    if trace.final is not None and not failures:
        err = float(np.max(np.abs(V - trace.final)))
        if err > final_tol * max(1.0, float(np.max(np.abs(V)))):
            failures.append(VerificationFailure(
                len(trace.steps), 1.0, "final configuration mismatch", (err,)))
    return VerificationReport(not failures, failures, len(trace.steps),
                              max(samples, 2))


def _merge_groups(old, new):
    """Union overlapping edge groups so exemptions accumulate."""
    pool = [set(int(e) for e in g) for g in old] + \
           [set(int(e) for e in g) for g in new]
    out = []
    for g in pool:
        merged = g
        rest = []
        for h in out:
            if merged & h:
                merged = merged | h
            else:
                rest.append(h)
        out = rest + [merged]
    return [sorted(g) for g in out]


def _collinearity_error(V, E, group):
    idx = sorted({int(v) for e in group for v in E[int(e)]})
    P = V[idx]
    rel = P - P.mean(axis=0)
    if rel.shape[0] < 3:
        return 0.0
    s = np.linalg.svd(rel, compute_uv=False)
    return float(s[1]) if s.size > 1 else 0.0


def straightness_error(V, order=None):
    """Largest distance of any vertex from the line through the extremes."""
    V = np.asarray(V, float)
    if order is not None:
        V = V[list(order)]
    u = unit(V[-1] - V[0])
    rel = V - V[0]
    perp = rel - (rel @ u)[:, None] * u[None, :]
    return float(np.max(np.linalg.norm(perp, axis=1)))


# ---------------------------------------------------------------------------
# file formats


def _read_tokens(path):
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append(line.split())
    return rows


def read_chain(path):
    """Read a chain file: header ``d n closed|open``, then n+1 vertex rows
    (for a closed chain the last row must repeat the first)."""
    rows = _read_tokens(path)
    if not rows:
        raise GeometryError("empty chain file")
    if len(rows[0]) != 3:
        raise GeometryError("header must be: d n closed|open")
    d, n = int(rows[0][0]), int(rows[0][1])
    kind = rows[0][2]
    if kind not in ("open", "closed"):
        raise GeometryError("chain kind must be 'open' or 'closed'")
    body = rows[1:]
    if len(body) != n + 1:
        raise GeometryError("expected %d vertex rows, got %d" % (n + 1, len(body)))
    V = np.array([[float(x) for x in r] for r in body])
    if V.shape[1] != d:
        raise GeometryError("vertex rows must have %d coordinates" % d)
    if kind == "closed":
        if norm(V[0] - V[-1]) > 1e-12 * max(1.0, float(np.max(np.abs(V)))):
            raise GeometryError("closed chain must end where it starts")
        V = V[:-1]
    return Chain(V, closed=(kind == "closed"))


def write_chain(chain: Chain, path):
    with open(path, "w") as fh:
        kind = "closed" if chain.closed else "open"
        fh.write("%d %d %s\n" % (chain.d, chain.n, kind))
        V = chain.vertices
        rows = np.vstack([V, V[:1]]) if chain.closed else V
        for v in rows:
            fh.write(" ".join("%.17g" % x for x in v) + "\n")


def read_tree(path):
    """Read a tree file: ``d n tree``, n+1 vertex rows, then a final
    ``parents`` row with one index per vertex (-1 at the root)."""
    rows = _read_tokens(path)
    if not rows or len(rows[0]) != 3 or rows[0][2] != "tree":
        raise GeometryError("header must be: d n tree")
    d, n = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != n + 2 or body[-1][0] != "parents":
        raise GeometryError("expected %d vertex rows plus a parents row" % (n + 1))
    V = np.array([[float(x) for x in r] for r in body[:-1]])
    if V.shape != (n + 1, d):
        raise GeometryError("vertex rows must be (n+1) x d")
    parents = [int(x) for x in body[-1][1:]]
    return Tree(V, parents)


def write_tree(tree: Tree, path):
    with open(path, "w") as fh:
        fh.write("%d %d tree\n" % (tree.d, tree.n))
        for v in tree.vertices:
            fh.write(" ".join("%.17g" % x for x in v) + "\n")
        fh.write("parents " + " ".join(str(p) for p in tree.parents) + "\n")
