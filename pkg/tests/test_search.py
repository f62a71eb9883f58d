"""Search engines: optimality, pruning bounds, accounting, goal-test order."""

from math import comb

import pytest

from widthplan import (
    Outcome,
    bfs_optimal,
    domains,
    ground,
    is_goal,
    iw,
    iw_k,
    iw_phi,
    iw_t,
    parse_domain,
    parse_problem,
    replay,
)
from widthplan.features import parse_features
from widthplan.novelty import TupleSet, parse_tuple_set
from tests.conftest import ground_bundle


def _check_plan(problem, result, goal_test=None):
    states = replay(problem, result.plan)
    final = states[-1]
    assert goal_test(final) if goal_test else is_goal(problem, final)
    assert result.stats.expanded <= result.stats.generated


def test_bfs_grid_line():
    g = ground_bundle(domains.grid(4, 1, 1, 4))
    r = bfs_optimal(g)
    assert len(r.plan) == 3
    _check_plan(g, r)


def test_bfs_hanoi3():
    g = ground_bundle(domains.hanoi(3))
    r = bfs_optimal(g)
    assert len(r.plan) == 7  # 2^n - 1
    _check_plan(g, r)


def test_bfs_qclear2(qclear2):
    g, _ = qclear2
    assert len(bfs_optimal(g).plan) == 3


def test_bfs_node_limit():
    g = ground_bundle(domains.grid(5, 5, 1, 25))
    r = bfs_optimal(g, max_nodes=3)
    assert r.outcome is Outcome.FAILURE and "limit" in r.reason


def test_iwt_on_admissible_set_is_optimal(qclear2):
    g, bundle = qclear2
    tuples = parse_tuple_set(bundle.tuple_sets["walk"], g)
    r = iw_t(g, tuples)
    assert len(r.plan) == len(bfs_optimal(g).plan)
    assert r.stats.expanded <= len(tuples)
    _check_plan(g, r)


def test_iwt_superset_still_optimal(qclear2):
    g, bundle = qclear2
    base = parse_tuple_set(bundle.tuple_sets["walk"], g)
    extra = TupleSet.from_iterable(list(base.tuples) + [(0, 1), (2,)])
    r = iw_t(g, extra)
    assert len(r.plan) == len(bfs_optimal(g).plan)
    assert r.stats.expanded <= len(extra)


def test_iwt_empty_set_fails_without_expanding(qclear2):
    g, _ = qclear2
    r = iw_t(g, TupleSet.from_iterable([]))
    assert r.outcome is Outcome.FAILURE
    assert r.stats.expanded == 0


@pytest.mark.parametrize("height", [1, 2, 3])
def test_iw1_solves_clear_goal_optimally(height):
    g = ground_bundle(domains.blocks_clear(height))
    r = iw_k(g, 1)
    assert len(r.plan) == len(bfs_optimal(g).plan)
    assert r.stats.expanded <= g.n_atoms


def test_iw2_solves_on_goal_optimally():
    g = ground_bundle(domains.blocks_on(2, 1))
    r = iw_k(g, 2)
    assert len(r.plan) == len(bfs_optimal(g).plan)
    assert r.stats.expanded <= comb(g.n_atoms, 1) + comb(g.n_atoms, 2)


def test_iw0_goal_in_initial_state():
    g = ground_bundle(domains.grid(3, 1, 2, 2))
    r = iw_k(g, 0)
    assert r.solved and r.plan == []


def test_iw0_one_step_plan():
    g = ground_bundle(domains.grid(3, 1, 1, 2))
    r = iw_k(g, 0)
    assert r.solved and len(r.plan) == 1
    assert r.stats.expanded == 1


def test_iw0_fails_on_two_step_problem():
    g = ground_bundle(domains.grid(3, 1, 1, 3))
    assert iw_k(g, 0).outcome is Outcome.FAILURE


def test_iw_terminates_small_k_on_grid2():
    g = ground_bundle(domains.grid2(3, 2, (1, 1), (3, 2)))
    r = iw(g)
    assert r.solved and r.k <= 2
    _check_plan(g, r)


def test_iw_unsolvable_early_stop():
    text = """(define (domain t) (:predicates (p) (q) (r))
      (:action a :parameters () :precondition (and (p)) :effect (and (q))))"""
    d = parse_domain(text)
    p = parse_problem(
        "(define (problem i) (:domain t) (:objects o) (:init (p)) (:goal (and (r))))"
    )
    g = ground(d, p)
    r = iw(g)
    assert r.outcome is Outcome.NO_PLAN
    assert "duplicate" in r.reason  # stopped before exhausting k = n_atoms
    assert r.k < g.n_atoms


def test_iw_plan_valid_but_possibly_suboptimal():
    g = ground_bundle(domains.delivery(3, 1, [2], target=3, start=1))
    r = iw(g)
    assert r.solved
    _check_plan(g, r)


def test_iwphi_qclear_valuation_budget():
    bundle = domains.blocks_clear(3)
    g = ground_bundle(bundle)
    phi = parse_features(bundle.features_text)
    r = iw_phi(g, phi)
    blocks = 4  # b1..b3 and x
    assert len(r.plan) == len(bfs_optimal(g).plan)
    assert r.stats.expanded <= 2 * (blocks + 1)


def test_iwphi_marbles_optimal():
    bundle = domains.marbles([3])
    g = ground_bundle(bundle)
    r = iw_phi(g, parse_features(bundle.features_text))
    assert len(r.plan) == 4  # marbles plus boxes
    _check_plan(g, r)


def test_iwphi_pigeonhole_failure():
    # two valuations cannot carry a search past depth two
    bundle = domains.delivery(3, 1, [3], target=1, start=1)
    g = ground_bundle(bundle)
    phi = parse_features("feature H bool = nonzero(count(holding(_)))\n")
    assert len(bfs_optimal(g).plan) >= 3
    r = iw_phi(g, phi)
    assert r.outcome is Outcome.FAILURE
    assert r.stats.expanded <= 2


def test_goal_test_at_dequeue_not_generation():
    # a one-step goal is found by width 0 even though every successor is
    # pruned: the dequeued node is goal-tested before the novelty check
    g = ground_bundle(domains.grid(2, 1, 1, 2))
    r = iw_k(g, 0)
    assert r.solved and len(r.plan) == 1


def test_expansion_counts_montone_without_duplicates():
    instances = [
        domains.grid(4, 1, 1, 4),
        domains.blocks_clear(2),
        domains.delivery(2, 2, [2], target=4, start=1),
    ]
    for bundle in instances:
        g = ground_bundle(bundle)
        runs = [iw_k(g, k) for k in (1, 2, 3)]
        for a, b in zip(runs, runs[1:]):
            if a.stats.pruned_duplicate == 0 and b.stats.pruned_duplicate == 0:
                assert a.stats.expanded <= b.stats.expanded


def test_iwk_dequeues_within_bfs_horizon():
    from widthplan import oracle

    bundle = domains.delivery(2, 2, [2], target=4, start=1)
    g = ground_bundle(bundle)
    space = oracle.enumerate_space(g)
    optimal = len(bfs_optimal(g).plan)
    seen = []

    def recording_goal(s):
        seen.append(s)
        return is_goal(g, s)

    r = iw_k(g, 2, recording_goal)
    assert r.solved
    assert all(space.cost[space.index[s]] <= optimal for s in seen)
    assert r.stats.expanded <= bfs_optimal(g).stats.expanded
