"""Serialized subgoal search and greedy policy execution."""

import pytest

from widthplan import Outcome, bfs_optimal, domains, is_goal, replay
from widthplan.siw import policy_reachable, run_policy, siw_r
from widthplan.sketches import parse_sketch, relation
from tests.conftest import bundle_features, bundle_sketch, ground_bundle


def _replay_serialized(problem, result):
    states = replay(problem, result.plan)
    assert is_goal(problem, states[-1])


def test_siwr_delivery_r5_segments_width_one(delivery_small):
    g, bundle = delivery_small
    res = siw_r(g, bundle_sketch(bundle, "r5"), bundle_features(bundle), k_max=1)
    assert res.solved
    assert all(seg.k <= 1 for seg in res.segments)
    _replay_serialized(g, res)


def test_siwr_r0_single_segment_plain_iw(delivery_one):
    g, bundle = delivery_one
    res = siw_r(g, bundle_sketch(bundle, "r0"), bundle_features(bundle), k_max=2)
    assert res.solved and len(res.segments) == 1
    assert res.segments[0].k == 2
    assert len(res.plan) == len(bfs_optimal(g).plan)


def test_siwr_r8_zero_width_unit_segments(delivery_small):
    g, bundle = delivery_small
    res = siw_r(g, bundle_sketch(bundle, "r8"), bundle_features(bundle), k_max=0)
    assert res.solved
    assert all(len(seg.plan) == 1 for seg in res.segments)
    _replay_serialized(g, res)


def test_siwr_hanoi_exponential_segments(hanoi3):
    g, bundle = hanoi3
    res = siw_r(g, bundle_sketch(bundle), bundle_features(bundle), k_max=0)
    assert res.solved and len(res.segments) == 7
    assert all(len(seg.plan) == 1 for seg in res.segments)


def test_siwr_segment_endpoints_relate(delivery_small):
    g, bundle = delivery_small
    sketch = bundle_sketch(bundle, "r5")
    res = siw_r(g, sketch, bundle_features(bundle), k_max=1)
    assert is_goal(g, replay(g, res.plan)[-1])
    for seg in res.segments[:-1]:
        assert relation(sketch, seg.start_values, seg.end_values)


def test_siwr_inner_exhaustion_reported(delivery_one):
    g, bundle = delivery_one
    res = siw_r(g, bundle_sketch(bundle, "r0"), bundle_features(bundle), k_max=1)
    assert res.outcome is Outcome.FAILURE
    assert res.reason.startswith("inner")


def test_siwr_cycle_guard_on_non_acyclic_rules(delivery_one):
    g, bundle = delivery_one
    res = siw_r(g, bundle_sketch(bundle, "r3"), bundle_features(bundle), k_max=1)
    assert res.outcome is Outcome.FAILURE
    assert res.reason.startswith("cycle")


def test_run_policy_qclear_length():
    bundle = domains.blocks_clear(3)
    g = ground_bundle(bundle)
    run = run_policy(g, bundle_sketch(bundle), bundle_features(bundle))
    assert run.reached_goal
    assert len(run.actions) == 5  # confirmed optimal by search
    assert len(bfs_optimal(g).plan) == 5


def test_run_policy_marbles_length():
    for counts in ([3], [2, 2], [1, 2, 1]):
        bundle = domains.marbles(counts)
        g = ground_bundle(bundle)
        run = run_policy(g, bundle_sketch(bundle), bundle_features(bundle))
        assert run.reached_goal
        assert len(run.actions) == sum(counts) + len(counts)


def test_run_policy_empty_sketch_stuck(delivery_one):
    g, bundle = delivery_one
    run = run_policy(g, bundle_sketch(bundle, "r0"), bundle_features(bundle))
    assert run.status == "stuck" and run.states == [g.init]


def test_run_policy_trajectory_is_valid(delivery_small):
    g, bundle = delivery_small
    run = run_policy(g, bundle_sketch(bundle), bundle_features(bundle))
    assert run.reached_goal
    assert replay(g, run.actions)[-1] == run.states[-1]


def test_policy_reachable_qclear(qclear2):
    g, bundle = qclear2
    states = policy_reachable(g, bundle_sketch(bundle), bundle_features(bundle))
    assert len(states) == 4  # start, lift top, top on table, lift second


def test_policy_reachable_empty_sketch(delivery_one):
    g, bundle = delivery_one
    sketch = parse_sketch(bundle.sketches["r0"])
    assert policy_reachable(g, sketch, bundle_features(bundle)) == {g.init}


def test_policy_reachable_marbles_diamond():
    # two marbles can leave the box in either order before it is removed
    bundle = domains.marbles([2])
    g = ground_bundle(bundle)
    states = policy_reachable(g, bundle_sketch(bundle), bundle_features(bundle))
    assert len(states) == 5


ZERO_WIDTH_PAIRS = [
    ("blocks-clear", lambda: domains.blocks_clear(3), "policy"),
    ("marbles", lambda: domains.marbles([2, 1]), "policy"),
    ("delivery-r8", lambda: domains.delivery(3, 2, [2, 6], target=1, start=4), "r8"),
    ("hanoi", lambda: domains.hanoi_odd(3), "policy"),
]


@pytest.mark.parametrize("name,make,key", ZERO_WIDTH_PAIRS, ids=lambda v: v if isinstance(v, str) else "")
def test_zero_width_matches_policy_success(name, make, key):
    bundle = make()
    g = ground_bundle(bundle)
    sketch = parse_sketch(bundle.sketches[key])
    phi = bundle_features(bundle)
    assert run_policy(g, sketch, phi).reached_goal
    res = siw_r(g, sketch, phi, k_max=0)
    assert res.solved


def test_zero_width_fails_where_policy_stuck(delivery_one):
    g, bundle = delivery_one
    sketch = parse_sketch(bundle.sketches["r2"])  # helps until holding, then stalls
    phi = bundle_features(bundle)
    assert run_policy(g, sketch, phi).status == "stuck"
    assert not siw_r(g, sketch, phi, k_max=0).solved
