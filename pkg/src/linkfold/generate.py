"""Seeded input generators: random chains, random trees, and the
degenerate fixtures used to exercise the planners' careful paths.

All generators are deterministic in (n, d, seed) and reject non-simple
draws, so callers always receive a valid linkage.
"""
from __future__ import annotations

import math

import numpy as np

from .geom import GeometryError
from .model import Chain, NotSimpleError, Tree


class GenerationError(GeometryError):
    """The rejection sampler ran out of budget."""


def random_open_chain(n, d=4, seed=0, budget=1000):
    """Simple open chain with n edges, vertices uniform in [0, 1]^d."""
    if n < 1 or d < 4:
        raise GeometryError("need n >= 1 and d >= 4")
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        V = rng.random((n + 1, d))
        try:
            return Chain(V)
        except (NotSimpleError, GeometryError):
            continue
    raise GenerationError("open-chain rejection budget exhausted")


def random_closed_chain(n, d=4, seed=0, budget=1000, crumple=0.25):
    """Simple closed chain with n vertices.

    A perturbed convex polygon in the first two coordinates is crumpled
    with small components in the remaining ones; the planar skeleton
    keeps the rejection rate low while the crumple makes the input
    genuinely non-planar.
    """
    if n < 3 or d < 4:
        raise GeometryError("need n >= 3 and d >= 4")
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        th = np.sort(rng.uniform(0.0, 2.0 * math.pi, n))
        if float(np.min(np.diff(th))) < 0.6 / n:
            continue
        r = 1.0 + 0.2 * rng.uniform(-1.0, 1.0, n)
        V = np.zeros((n, d))
        V[:, 0] = r * np.cos(th)
        V[:, 1] = r * np.sin(th)
        if n > 3:
            V[:, 2] = crumple * rng.uniform(-1.0, 1.0, n)
            V[:, 3] = crumple * rng.uniform(-1.0, 1.0, n)
        try:
            return Chain(V, closed=True)
        except (NotSimpleError, GeometryError):
            continue
    raise GenerationError("closed-chain rejection budget exhausted")


def random_tree(n, d=4, seed=0, budget=1000):
    """Simple tree with n edges (n + 1 vertices) and a leaf root.

    Vertex 0 is the root with single child 1; every later vertex
    attaches to a uniformly chosen earlier non-root vertex.
    """
    if n < 1 or d < 4:
        raise GeometryError("need n >= 1 and d >= 4")
    rng = np.random.default_rng(seed)
    nv = n + 1
    for _ in range(budget):
        parents = [-1, 0] + [int(rng.integers(1, i)) for i in range(2, nv)]
        V = rng.random((nv, d))
        try:
            return Tree(V, parents)
        except (NotSimpleError, GeometryError):
            continue
    raise GenerationError("tree rejection budget exhausted")


# ---------------------------------------------------------------------------
# fixtures


def fixture_intersected_goal():
    """Open chain whose first joint's goal segment is occupied.

    The straightening target of v0 about v1 lies exactly on the last
    link, so the pivot must leave its position before the goal rotation
    can run.
    """
    V = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [-1.0, -1.0, 0.0, 0.0],
        [0.5, -1.0, 0.0, 0.0],
        [0.5, 1.0, 0.0, 0.0],
    ])
    return Chain(V)


def fixture_obstructed_goal():
    """Open chain whose first joint's goal is clear but the direct
    rotation plane is blocked, forcing a lean move first."""
    V = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [-1.0, 0.0, -1.0, 0.0],
        [0.4, 0.4, -1.0, 0.0],
        [0.4, 0.4, 1.0, 0.0],
    ])
    return Chain(V)


def fixture_flat_instant():
    """Closed chain whose first window starts past a right angle.

    (v2 - v0) . (v1 - v0) < 0 initially; any episode that straightens
    the v1 elbow ends with the two vectors parallel, so the dot product
    crosses zero at some instant of the track.
    """
    V = np.array([
        [0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [-0.2, 0.8, 0.0, 0.0],
        [-0.9, -0.3, 0.3, 0.0],
        [0.2, -1.0, 0.0, 0.2],
    ])
    ch = Chain(V, closed=True)
    d0 = float((V[2] - V[0]) @ (V[1] - V[0]))
    if d0 >= 0.0:
        raise GeometryError("fixture lost its obtuse start")
    return ch


FIXTURES = {
    "intersected-goal": fixture_intersected_goal,
    "obstructed-goal": fixture_obstructed_goal,
    "flat-instant": fixture_flat_instant,
}


def fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise GeometryError("unknown fixture %r (have: %s)"
                            % (name, ", ".join(sorted(FIXTURES))))
