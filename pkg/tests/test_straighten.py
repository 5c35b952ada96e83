"""Open-chain straightening: goal directions, classification, drivers."""
import math

import numpy as np
import pytest

from linkfold.generate import (
    fixture_intersected_goal,
    fixture_obstructed_goal,
    random_open_chain,
)
from linkfold.geom import norm, unit
from linkfold.model import Chain, straightness_error, verify_trace
from linkfold.straighten import (
    AntipodalDegenerate,
    AtGoal,
    PlanningError,
    classify_goal,
    goal_direction,
    step1_rotate_to_goal,
    step2_skirt,
    step3_unblock_goal,
    straighten_open,
    straighten_open_rd,
)


def test_goal_direction_right_angle():
    # right-angle joint: w0 = (0,1,0,0), wg = (1,0,0,0)
    v1 = np.zeros(4)
    v0 = np.array([0.0, 1.0, 0.0, 0.0])
    v2 = np.array([-1.0, 0.0, 0.0, 0.0])
    g = goal_direction(v0, v1, v2)
    assert norm(g.w - np.array([0.0, -1.0, 0.0, 0.0])) < 1e-12
    assert abs(g.a1 - 1.0) < 1e-12
    assert abs(g.b1 - 1.0) < 1e-12
    assert not g.degenerate


def test_goal_direction_decomposition_property():
    rng = np.random.default_rng(60)
    for _ in range(500):
        v1 = rng.standard_normal(4)
        v0 = v1 + rng.uniform(0.2, 2.0) * unit(rng.standard_normal(4))
        v2 = v1 + rng.uniform(0.2, 2.0) * unit(rng.standard_normal(4))
        w0 = unit(v0 - v1)
        wg = unit(v1 - v2)
        if abs(float(w0 @ wg)) > 1.0 - 1e-6:
            continue
        g = goal_direction(v0, v1, v2)
        assert g.a1 > 0.0 and g.b1 > 0.0
        assert abs(float(g.w @ wg)) < 1e-9
        assert abs(norm(g.w) - 1.0) < 1e-9
        rec = g.a1 * wg + g.b1 * g.w
        assert norm(rec - (wg - w0)) < 1e-9


def test_goal_direction_degenerate_cases():
    v1 = np.zeros(4)
    v2 = np.array([-1.0, 0.0, 0.0, 0.0])
    straight = np.array([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(AtGoal):
        goal_direction(straight, v1, v2)
    folded = np.array([-0.5, 0.0, 0.0, 0.0])
    with pytest.raises(AntipodalDegenerate):
        goal_direction(folded, v1, v2)
    g = goal_direction(folded, v1, v2, rng=np.random.default_rng(0))
    assert g.degenerate
    assert abs(float(g.w @ np.array([1.0, 0, 0, 0]))) < 1e-9
    # same seed, same tie-break
    g2 = goal_direction(folded, v1, v2, rng=np.random.default_rng(0))
    assert norm(g.w - g2.w) < 1e-15


def test_classify_goal_generic_chains_free():
    free = 0
    for seed in range(1, 31):
        chain = random_open_chain(10, 4, seed=seed)
        state = classify_goal(chain)
        v1 = chain.vertices[1]
        l0 = norm(chain.vertices[0] - v1)
        assert abs(norm(state.v_g - v1) - l0) < 1e-9
        # the goal extends the second link straight through v1
        ext = unit(v1 - chain.vertices[2])
        assert norm(state.v_g - (v1 + l0 * ext)) < 1e-9
        if state.classification == "free":
            free += 1
    assert free >= 28  # blocked goals have measure ~0 for random draws


def test_fixture_classifications():
    assert classify_goal(fixture_intersected_goal()).classification == \
        "intersected"
    assert classify_goal(fixture_obstructed_goal()).classification == \
        "obstructed"


def test_step_preconditions_enforced():
    with pytest.raises(PlanningError):
        step1_rotate_to_goal(fixture_obstructed_goal())
    with pytest.raises(PlanningError):
        step2_skirt(fixture_intersected_goal())
    with pytest.raises(PlanningError):
        step3_unblock_goal(fixture_obstructed_goal())


def test_step2_lean_frees_the_goal():
    chain = fixture_obstructed_goal()
    move = step2_skirt(chain, seed=0)
    V = move.apply(chain.vertices, [1.0])[0]
    after = classify_goal(Chain(V))
    assert after.classification == "free"


def test_step3_elbow_clears_the_goal_segment():
    chain = fixture_intersected_goal()
    move = step3_unblock_goal(chain, seed=0)
    V = move.apply(chain.vertices, [1.0])[0]
    after = classify_goal(Chain(V))
    assert after.classification != "intersected"


def test_small_chains_straighten_and_verify():
    for seed in range(1, 21):
        chain = random_open_chain(6, 4, seed=seed)
        trace = straighten_open(chain, seed=seed)
        assert len(trace.steps) <= 3 * chain.n
        report = verify_trace(trace)
        assert report.ok, "seed %d: %s" % (seed, report)
        assert straightness_error(trace.final) <= 1e-9
        # edge lengths preserved end to end
        E = chain.edge_index_array()
        L0 = chain.edge_lengths()
        L1 = np.linalg.norm(trace.final[E[:, 1]] - trace.final[E[:, 0]],
                            axis=1)
        assert np.max(np.abs(L1 - L0)) <= 1e-9


def test_straighten_rejects_wrong_inputs():
    from linkfold.geom import GeometryError
    sq = Chain(np.array([
        [0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]), closed=True)
    with pytest.raises(GeometryError):
        straighten_open(sq)
    five = random_open_chain(5, 5, seed=1)
    with pytest.raises(GeometryError):
        straighten_open(five)  # d > 4 must go through the r^d driver


def test_straighten_r5_chain():
    chain = random_open_chain(8, 5, seed=2)
    trace = straighten_open_rd(chain, seed=2)
    report = verify_trace(trace)
    assert report.ok, str(report)
    assert straightness_error(trace.final) <= 1e-9


def test_straighten_deterministic():
    chain = random_open_chain(8, 4, seed=9)
    t1 = straighten_open(chain, seed=9)
    t2 = straighten_open(chain, seed=9)
    assert len(t1.steps) == len(t2.steps)
    assert np.max(np.abs(t1.final - t2.final)) == 0.0
    for s1, s2 in zip(t1.steps, t2.steps):
        assert s1.move.to_dict() == s2.move.to_dict()
