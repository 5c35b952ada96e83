"""Obstruction diagrams: component bounds and free-point queries.

Each builder is run on 100 seeded random instances and its component
count checked against the certified bound; the current (legal) position
of the moving joint must never be reported as blocked.
"""
import math

import numpy as np
import pytest

from linkfold.geom import (
    DegenerateGeometry,
    Flat,
    GeometryError,
    Segment,
    Sphere,
    norm,
    orthonormal_complement,
    unit,
)
from linkfold.generate import random_open_chain
from linkfold.intersect import elbow_sphere
from linkfold.obstruction import (
    ObstructionDiagram,
    build_ob_elbow,
    build_ob_goal_directions,
    build_ob_linetrack,
    build_ob_v0,
    free_point_near,
)


def test_free_end_diagram_bound():
    done = 0
    seed = 0
    while done < 100:
        seed += 1
        n = 3 + seed % 10
        chain = random_open_chain(n, 4, seed=seed)
        ob = build_ob_v0(chain)
        assert ob.component_count <= n - 1
        # the chain is simple, so its own free end is a legal position
        assert not ob.blocked(chain.vertices[0], eps=1e-9)
        done += 1


def test_elbow_diagram_bound():
    rng = np.random.default_rng(40)
    done = 0
    while done < 100:
        n = int(rng.integers(6, 13))
        chain = random_open_chain(n, 4, seed=int(rng.integers(0, 10 ** 6)))
        V = chain.vertices
        j = int(rng.integers(2, n - 1))
        l1 = norm(V[j] - V[j - 1])
        l2 = norm(V[j + 1] - V[j])
        try:
            S = elbow_sphere(V[j - 1], V[j + 1], l1, l2)
        except DegenerateGeometry:
            continue
        obstacles = [Segment(V[i], V[i + 1]) for i in range(n)
                     if i not in (j - 1, j)]
        ob = build_ob_elbow(V[j - 1], V[j + 1], S, obstacles)
        assert ob.component_count <= 6 * len(obstacles)
        assert not ob.blocked(V[j], eps=1e-9)
        done += 1


def test_goal_direction_diagram_bound():
    done = 0
    seed = 100
    while done < 100:
        seed += 1
        n = 4 + seed % 9
        chain = random_open_chain(n, 4, seed=seed)
        try:
            ob = build_ob_goal_directions(chain)
        except GeometryError:
            continue  # goal segment occupied for this draw
        assert ob.component_count <= chain.n
        assert len(ob.arcs) <= chain.n
        done += 1


def _generic_track_instance(rng):
    """Elbow data with both apex angles away from the flat instant."""
    d = 4
    v_a = rng.standard_normal(d)
    u = unit(rng.standard_normal(d))
    D = rng.uniform(0.8, 1.6)
    v_b = v_a + D * u
    for _ in range(50):
        l_a = rng.uniform(0.6, 1.2) * D
        l_b = rng.uniform(0.6, 1.2) * D
        if not abs(l_a - l_b) + 0.05 * D < D < l_a + l_b - 0.05 * D:
            continue
        # keep both cone half-angles clear of pi/2
        if abs(D * D + l_a * l_a - l_b * l_b) < 0.1 * D * D:
            continue
        if abs(D * D + l_b * l_b - l_a * l_a) < 0.1 * D * D:
            continue
        return v_a, v_b, l_a, l_b
    return None


def test_linetrack_diagram_generic_points():
    rng = np.random.default_rng(41)
    done = 0
    while done < 100:
        inst = _generic_track_instance(rng)
        if inst is None:
            continue
        v_a, v_b, l_a, l_b = inst
        S = elbow_sphere(v_a, v_b, l_a, l_b)
        obstacles = []
        mid = 0.5 * (v_a + v_b)
        for _ in range(3):
            c = mid + 0.6 * rng.standard_normal(4)
            obstacles.append(Segment(c, c + rng.standard_normal(4)))
        ob = build_ob_linetrack(v_a, v_b, l_a, l_b, obstacles, S)
        # away from a flat instant every component is an isolated point
        assert len(ob.arcs) == 0
        per_source = {}
        for idx, src in ob.provenance.items():
            per_source[src] = per_source.get(src, 0) + 1
        for src, count in per_source.items():
            assert count <= 4
        done += 1


def test_linetrack_diagram_flat_instant_arcs():
    # l_b^2 = D^2 + l_a^2 puts the v_a cone exactly at half-angle pi/2:
    # its swept surface is a disk, and an obstacle segment inside that
    # disk's flat shadows arcs instead of isolated points
    rng = np.random.default_rng(42)
    d = 4
    v_a = np.zeros(d)
    u = np.array([1.0, 0.0, 0.0, 0.0])
    D = 1.0
    v_b = v_a + D * u
    l_a = 1.0
    l_b = math.sqrt(D * D + l_a * l_a)
    S = elbow_sphere(v_a, v_b, l_a, l_b)
    assert norm(S.center - v_a) < 1e-12
    # an in-disk obstacle: lies in the flat through v_a orthogonal to u
    seg_in = Segment(np.array([0.0, 0.3, -0.4, 0.0]),
                     np.array([0.0, 0.3, 0.4, 0.1]))
    ob = build_ob_linetrack(v_a, v_b, l_a, l_b, [seg_in], S)
    assert len(ob.arcs) >= 1
    # an off-disk obstacle at the same instant still yields only points
    seg_off = Segment(np.array([0.4, 0.3, -0.4, 0.0]),
                      np.array([0.5, 0.3, 0.4, 0.1]))
    ob2 = build_ob_linetrack(v_a, v_b, l_a, l_b, [seg_off], S)
    assert len(ob2.arcs) == 0


def test_free_point_near_escapes_arcs():
    rng = np.random.default_rng(43)
    for trial in range(20):
        center = rng.standard_normal(4)
        B = orthonormal_complement([unit(rng.standard_normal(4))], 4)
        host = Flat(center, B)
        S = Sphere(center, rng.uniform(0.5, 2.0), host)
        p = center + S.radius * unit(rng.standard_normal(3) @ B)
        # block p with a few great-circle arcs through it
        diag = ObstructionDiagram(S)
        from linkfold.geom import Arc, Circle
        for _ in range(2):
            other = center + S.radius * unit(rng.standard_normal(3) @ B)
            uu = unit(p - center)
            vv = other - center
            vv = unit(vv - float(vv @ uu) * uu)
            circ = Circle(center, S.radius, uu, vv)
            diag.add([Arc(circ, circ.angle_of(p) - 0.2, 0.4)])
        assert diag.blocked(p)
        q = free_point_near(p, diag, rng=np.random.default_rng(trial))
        assert not diag.blocked(q)
        assert abs(norm(q - center) - S.radius) <= 1e-9
        assert host.contains(q, eps=1e-9)


def test_diagram_provenance_roundtrip():
    chain = random_open_chain(8, 4, seed=3)
    ob = build_ob_v0(chain)
    for comp in ob.components:
        src = ob.source_of(comp)
        assert src is None or 1 <= src < chain.n
