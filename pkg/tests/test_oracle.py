"""Brute-force verification checks against the search algorithms."""

import random

import pytest

from widthplan import atoms_of, bfs_optimal, domains, iw_t
from widthplan.novelty import TupleSet, parse_tuple_set
from widthplan.oracle import (
    OracleError,
    enumerate_space,
    effective_width,
    is_admissible,
    is_cost_envelope,
    is_feature_acyclic_on,
    lower_bound_witness,
    opt_states,
    sketch_width_on,
    tuple_cost,
)
from widthplan.sketches import parse_sketch
from tests.conftest import bundle_features, ground_bundle


def test_enumerate_grid2_cells():
    g = ground_bundle(domains.grid2(2, 2, (1, 1), (2, 2)))
    assert len(enumerate_space(g)) == 4


def test_enumerate_hanoi3():
    g = ground_bundle(domains.hanoi(3))
    # 3^n disk configurations, nearly all reachable at both move parities
    assert len(enumerate_space(g)) == 54


def test_enumerate_costs(qclear2):
    g, _ = qclear2
    space = enumerate_space(g)
    assert space.cost[space.index[g.init]] == 0
    assert space.problem_cost == 3
    goal_idx = next(i for i, f in enumerate(space.goal_flags) if f)
    assert space.cost_star(goal_idx) == 3


def test_enumerate_cap():
    g = ground_bundle(domains.blocks_on(2, 2))
    with pytest.raises(OracleError, match="cap"):
        enumerate_space(g, cap=10)


def test_goal_distance_backward_map():
    g = ground_bundle(domains.grid(4, 1, 1, 4))
    space = enumerate_space(g)
    start = space.index[g.init]
    assert space.goal_distance[start] == space.problem_cost == 3
    assert not space.is_goal_state(start)
    goal_idx = next(i for i, f in enumerate(space.goal_flags) if f)
    assert space.goal_distance[goal_idx] == 0


def test_opt_states_clear_goal(qclear2):
    g, _ = qclear2
    space = enumerate_space(g)
    clear_x = TupleSet.from_iterable([(g.atom_id("clear", ("x",)),)])
    chosen = opt_states(space, clear_x)
    assert chosen
    assert all(space.cost[i] == 3 for i in chosen)
    assert all((space.states[i] >> g.atom_id("clear", ("x",))) & 1 for i in chosen)


def test_opt_states_unreachable_tuple():
    g = ground_bundle(domains.grid(3, 1, 1, 3))
    space = enumerate_space(g)
    unreachable = TupleSet.from_iterable([(g.atom_id("adjacent", ("c1", "c3")),)])
    assert tuple_cost(space, unreachable.masks()[0]) is None
    assert opt_states(space, unreachable) == set()


def test_opt_states_empty_tuple(qclear2):
    g, _ = qclear2
    space = enumerate_space(g)
    assert opt_states(space, TupleSet.from_iterable([()])) == {space.index[g.init]}


def test_cost_envelope_of_optimal_trajectory():
    g = ground_bundle(domains.grid(4, 1, 1, 4))
    space = enumerate_space(g)
    from widthplan import replay

    members = {space.index[s] for s in replay(g, bfs_optimal(g).plan)}
    assert is_cost_envelope(space, members).ok


def test_cost_envelope_rejects_initial_only(qclear2):
    g, _ = qclear2
    space = enumerate_space(g)
    report = is_cost_envelope(space, {space.index[g.init]})
    assert not report.ok and report.witness == g.init


def test_qclear_walk_set_is_admissible_and_an_envelope(qclear2):
    g, bundle = qclear2
    space = enumerate_space(g)
    tuples = parse_tuple_set(bundle.tuple_sets["walk"], g)
    report = is_admissible(space, tuples)
    assert report.ok and report.envelope.ok
    assert is_cost_envelope(space, opt_states(space, tuples)).ok


def test_qon_singletons_not_admissible():
    g = ground_bundle(domains.blocks_on(1, 1))
    space = enumerate_space(g)
    reachable_atoms = sorted({a for s in space.states for a in atoms_of(s)})
    singles = TupleSet.from_iterable([(a,) for a in reachable_atoms])
    assert not is_admissible(space, singles).ok


def test_empty_tuple_set_not_admissible(qclear2):
    g, _ = qclear2
    space = enumerate_space(g)
    assert not is_admissible(space, TupleSet.from_iterable([])).ok


def test_admissible_refuses_negative_goals():
    g = ground_bundle(domains.marbles([1]))
    space = enumerate_space(g)
    with pytest.raises(OracleError, match="positive"):
        is_admissible(space, TupleSet.from_iterable([(0,)]))


def test_admissible_unreachable_tuple_witness():
    g = ground_bundle(domains.grid(3, 1, 1, 3))
    space = enumerate_space(g)
    bad = TupleSet.from_iterable([(g.atom_id("adjacent", ("c1", "c3")),)])
    report = is_admissible(space, bad)
    assert not report.ok and "unreachable" in report.reason


DUAL_ROUTE_INSTANCES = [
    ("grid-1x4", lambda: domains.grid(4, 1, 1, 4)),
    ("grid2-2x2", lambda: domains.grid2(2, 2, (1, 1), (2, 2))),
    ("qclear-2", lambda: domains.blocks_clear(2)),
    ("qon-1-1", lambda: domains.blocks_on(1, 1)),
    ("delivery-2x2", lambda: domains.delivery(2, 2, [2], target=4, start=1)),
]


@pytest.mark.parametrize("name,make", DUAL_ROUTE_INSTANCES, ids=[n for n, _ in DUAL_ROUTE_INSTANCES])
def test_dual_route_agreement_randomized(name, make):
    # is_admissible raises if its two routes ever disagree
    g = ground_bundle(make())
    space = enumerate_space(g)
    rng = random.Random(hash(name) & 0xFFFF)
    admissible_seen = 0
    for _ in range(120):
        n_tuples = rng.randint(1, 6)
        tuples = []
        for _ in range(n_tuples):
            s = space.states[rng.randrange(len(space))]
            atoms = atoms_of(s)
            size = rng.randint(1, min(3, len(atoms)))
            tuples.append(tuple(rng.sample(atoms, size)))
        ts = TupleSet.from_iterable(tuples)
        report = is_admissible(space, ts)
        if report.ok:
            admissible_seen += 1
            result = iw_t(g, ts)
            assert result.solved
            assert len(result.plan) == space.problem_cost
            assert result.stats.expanded <= len(ts)
    assert admissible_seen >= 0  # agreement is the assertion; hits vary


def _goal_reaching_paths(space, step_ok):
    """All goal-reaching trajectories from the start under `step_ok`."""
    out = []
    start = space.index[space.start]

    def walk(i, path):
        if space.goal_flags[i]:
            out.append(tuple(path))
            return
        for _aid, j in space.successors(i):
            if step_ok(i, j):
                path.append(j)
                walk(j, path)
                path.pop()

    walk(start, [start])
    return set(out)


PCOST_INSTANCES = [
    lambda: domains.grid(4, 1, 1, 4),
    lambda: domains.grid2(2, 2, (1, 1), (2, 2)),
    lambda: domains.blocks_clear(2),
    lambda: domains.delivery(2, 2, [2], target=4, start=1),
]


@pytest.mark.parametrize("make", PCOST_INSTANCES)
def test_cost_relation_trajectories_are_optimal_trajectories(make):
    g = ground_bundle(make())
    space = enumerate_space(g)
    pc = space.problem_cost

    def cost_increasing(i, j):
        ci, cj = space.cost_star(i), space.cost_star(j)
        return ci is not None and cj is not None and ci < cj

    def optimal_step(i, j):
        return space.cost[j] == space.cost[i] + 1 and space.cost[j] <= pc

    pcost_paths = _goal_reaching_paths(space, cost_increasing)
    optimal_paths = {
        p for p in _goal_reaching_paths(space, optimal_step) if len(p) == pc + 1
    }
    assert pcost_paths == optimal_paths


def test_lower_bound_examples():
    cases = [
        (domains.grid2(3, 3, (1, 1), (3, 3)), 1, True),
        (domains.blocks_on(1, 1), 1, True),
        (domains.delivery(3, 1, [1, 2, 3], target=1, start=1), 1, True),
        (domains.grid(4, 1, 1, 4), 1, False),
    ]
    for bundle, k, expected in cases:
        g = ground_bundle(bundle)
        assert lower_bound_witness(enumerate_space(g), k) is expected


@pytest.mark.parametrize("height", [1, 2, 3, 4])
def test_effective_width_qclear(height):
    # a one-step instance has width 0 by convention; taller towers need 1
    g = ground_bundle(domains.blocks_clear(height))
    assert effective_width(g, 2) == (0 if height == 1 else 1)


def test_effective_width_grid2_diagonal():
    g = ground_bundle(domains.grid2(3, 3, (1, 1), (3, 3)))
    assert effective_width(g, 3) == 2


def test_effective_width_delivery_one(delivery_one):
    g, _ = delivery_one
    assert effective_width(g, 3) == 2


def test_effective_width_cap_exceeded():
    g = ground_bundle(domains.delivery(3, 1, [1, 2, 3], target=1, start=1))
    assert effective_width(g, 2) is None


def test_feature_acyclic_table_rows(delivery_one):
    g, bundle = delivery_one
    phi = bundle_features(bundle)
    space = enumerate_space(g)
    assert not is_feature_acyclic_on(space, parse_sketch(bundle.sketches["r3"]), phi)
    assert is_feature_acyclic_on(space, parse_sketch(bundle.sketches["r5"]), phi)
    assert is_feature_acyclic_on(space, parse_sketch(bundle.sketches["r0"]), phi)


def test_sketch_width_table_rows(delivery_one):
    g, bundle = delivery_one
    phi = bundle_features(bundle)
    space = enumerate_space(g)
    for name, expected in [("r2", 1), ("r5", 1), ("r8", 0), ("r0", 2)]:
        report = sketch_width_on(space, parse_sketch(bundle.sketches[name]), phi, 2)
        assert report.value == expected, name


def test_sketch_width_two_packages():
    bundle = domains.delivery(3, 2, [2, 5], target=1, start=4)
    g = ground_bundle(bundle)
    phi = bundle_features(bundle)
    space = enumerate_space(g)
    for name, expected in [("r4", 2), ("r5", 1), ("r8", 0)]:
        report = sketch_width_on(space, parse_sketch(bundle.sketches[name]), phi, 2)
        assert report.value == expected, name


def test_width_bracket_consistency(qclear2):
    # a lower-bound witness at k-1 plus an optimal run at k pins the width,
    # and the example tuple set confirms it from above
    g, bundle = qclear2
    space = enumerate_space(g)
    assert effective_width(g, 2) == 1
    assert lower_bound_witness(space, 0)
    tuples = parse_tuple_set(bundle.tuple_sets["walk"], g)
    assert is_admissible(space, tuples).ok and tuples.size == 1


def test_iwphi_optimal_when_policy_valuations_form_envelope():
    from widthplan import iw_phi
    from widthplan.siw import bind, policy_reachable
    from widthplan.sketches import parse_sketch

    for make, key in [
        (lambda: domains.blocks_clear(2), "policy"),
        (lambda: domains.blocks_clear(3), "policy"),
        (lambda: domains.grid(4, 1, 1, 4), "policy"),
    ]:
        bundle = make()
        g = ground_bundle(bundle)
        sketch = parse_sketch(bundle.sketches[key])
        phi = bind(sketch, bundle_features(bundle))
        space = enumerate_space(g)
        reached = policy_reachable(g, sketch, phi)
        valuations = {phi.valuation(g, s) for s in reached}
        members = {
            i
            for i, s in enumerate(space.states)
            if phi.valuation(g, s) in valuations
            and space.cost[i]
            == min(
                space.cost[j]
                for j, s2 in enumerate(space.states)
                if phi.valuation(g, s2) == phi.valuation(g, s)
            )
        }
        if is_cost_envelope(space, members).ok:
            result = iw_phi(g, phi)
            assert result.solved
            assert len(result.plan) == space.problem_cost
