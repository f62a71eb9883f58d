"""Rule language semantics, the Boolean policy graph, and the sieve check."""

import random

import pytest

from widthplan.features import boolean_projection, parse_features
from widthplan.oracle import enumerate_space
from widthplan.siw import bind
from widthplan.sketches import (
    SketchError,
    build_policy_graph,
    format_sketch,
    parse_sketch,
    relation,
    sieve,
    strongly_connected_components,
)

CLEAR_SKETCH = "features { H: bool; n: num; }\nrules { { !H, n>0 } => { H, n-- }; }\n"
DELIVERY_HEADER = "features { H: bool; p: num; t: num; u: num; }\n"


def test_parse_single_rule():
    sk = parse_sketch(CLEAR_SKETCH)
    assert len(sk.rules) == 1
    assert sk.names_kinds == [("H", "bool"), ("n", "num")]


def test_parse_empty_rules_block():
    sk = parse_sketch(DELIVERY_HEADER + "rules { }\n")
    assert sk.rules == ()


def test_parse_undeclared_feature():
    with pytest.raises(SketchError, match="undeclared"):
        parse_sketch("features { H: bool; }\nrules { { m>0 } => { H }; }\n")


def test_parse_duplicate_mention():
    with pytest.raises(SketchError, match="twice"):
        parse_sketch("features { n: num; }\nrules { { n>0, n=0 } => { n-- }; }\n")


def test_kind_checked_ops():
    with pytest.raises(SketchError, match="invalid"):
        parse_sketch("features { H: bool; }\nrules { { H>0 } => { H }; }\n")
    with pytest.raises(SketchError, match="invalid"):
        parse_sketch("features { n: num; }\nrules { { n>0 } => { n }; }\n")


def test_format_round_trip():
    for text in [CLEAR_SKETCH, DELIVERY_HEADER + "rules { { u>0 } => { u--, H?, p?, t? }; }\n"]:
        sk = parse_sketch(text)
        assert parse_sketch(format_sketch(sk)) == sk


def test_pair_satisfies_examples():
    sk = parse_sketch(CLEAR_SKETCH)
    rule = sk.rules[0]
    from widthplan.sketches import pair_satisfies

    assert pair_satisfies(rule, (0, 2), (1, 1))
    assert not pair_satisfies(rule, (0, 2), (1, 2))  # n must strictly decrease
    assert not pair_satisfies(rule, (1, 2), (0, 1))  # condition !H fails


def test_unmentioned_features_must_hold_value():
    sk = parse_sketch("features { H: bool; n: num; }\nrules { { H } => { !H }; }\n")
    rule = sk.rules[0]
    from widthplan.sketches import pair_satisfies

    assert pair_satisfies(rule, (1, 3), (0, 3))
    assert not pair_satisfies(rule, (1, 3), (0, 2))


def test_relation_table_rows():
    r2 = parse_sketch(DELIVERY_HEADER + "rules { { !H } => { H, p?, t? }; }\n")
    r1 = parse_sketch(DELIVERY_HEADER + "rules { { H } => { !H, p?, t? }; }\n")
    r0 = parse_sketch(DELIVERY_HEADER + "rules { }\n")
    a, b = (0, 1, 2, 1), (1, 0, 2, 1)
    assert relation(r2, a, b)
    assert not relation(r1, a, b)
    assert not relation(r0, a, b)


def test_policy_graph_no_rules():
    sk = parse_sketch(DELIVERY_HEADER + "rules { }\n")
    graph = build_policy_graph(sk)
    assert graph.n_vertices == 16 and graph.edges == []


def test_policy_graph_single_decrement():
    sk = parse_sketch("features { n: num; }\nrules { { n>0 } => { n-- }; }\n")
    graph = build_policy_graph(sk)
    # vertex bit set encodes n=0; edges leave only the n>0 vertex
    assert sorted((u, v) for u, v, _ in graph.edges) == [(0, 0), (0, 1)]


def test_policy_graph_feature_cap():
    names = "".join(f"b{i}: bool; " for i in range(17))
    with pytest.raises(SketchError, match="cap"):
        build_policy_graph(parse_sketch("features { " + names + "}\nrules { }\n"))


def test_policy_graph_parallel_edges_per_rule():
    sk = parse_sketch(
        "features { H: bool; }\nrules { { H } => { !H }; { H } => { !H }; }\n"
    )
    graph = build_policy_graph(sk)
    assert sorted(graph.edges) == [(1, 0, 0), (1, 0, 1)]


def test_tarjan_components():
    # 0 -> 1 -> 2 -> 0 plus a tail 3 -> 0
    sccs = strongly_connected_components(4, [[1], [2], [0], [0]])
    assert sorted(map(tuple, sccs)) == [(0, 1, 2), (3,)]


TABLE_VERDICTS = {
    "r0": True, "r1": True, "r2": True, "r3": False, "r4": True,
    "r5": True, "r6": True, "r7": True, "r8": True,
}


@pytest.mark.parametrize("name", sorted(TABLE_VERDICTS))
def test_sieve_verdicts(name, delivery_small):
    _, bundle = delivery_small
    sk = parse_sketch(bundle.sketches[name])
    assert sieve(build_policy_graph(sk)).accepted == TABLE_VERDICTS[name]


def test_sieve_accepts_empty_graph():
    sk = parse_sketch(DELIVERY_HEADER + "rules { }\n")
    result = sieve(build_policy_graph(sk))
    assert result.accepted and result.steps == []


def test_sieve_delivery_policy_removes_u_first(delivery_small):
    _, bundle = delivery_small
    sk = parse_sketch(bundle.sketches["policy"])
    graph = build_policy_graph(sk)
    result = sieve(graph)
    assert result.accepted
    u_index = [f.name for f in sk.features].index("u")
    big = max(result.steps, key=lambda step: len(step.component))
    assert big.feature == u_index
    # that big component is the strongly connected core of the graph
    assert len(big.component) >= 6


def test_sieve_confluent_under_choice_order(delivery_small):
    _, bundle = delivery_small
    for name, expected in TABLE_VERDICTS.items():
        sk = parse_sketch(bundle.sketches[name])
        for seed in range(5):
            rng = random.Random(seed)
            res = sieve(build_policy_graph(sk), choice=lambda c: c[rng.randrange(len(c))])
            assert res.accepted == expected


@pytest.mark.parametrize(
    "family",
    ["qclear", "delivery"],
)
def test_concrete_pairs_project_to_graph_edges(family, qclear2, delivery_one):
    problem, bundle = qclear2 if family == "qclear" else delivery_one
    sketch = parse_sketch(bundle.sketches["policy"])
    phi = bind(sketch, parse_features(bundle.features_text))
    graph = build_policy_graph(sketch)
    edge_set = {(u, v) for u, v, _ in graph.edges}
    space = enumerate_space(problem)
    vals = [phi.valuation(problem, s) for s in space.states]

    def vertex(values):
        bits = boolean_projection(phi, values)
        return sum(1 << i for i, b in enumerate(bits) if b)

    for a in range(len(space)):
        for b in range(len(space)):
            if relation(sketch, vals[a], vals[b]):
                assert (vertex(vals[a]), vertex(vals[b])) in edge_set
