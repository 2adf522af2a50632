import json
from fractions import Fraction

import pytest

from formalstar.exact import Poly
from formalstar.graphs import (Graph, GraphError, MissingWeightError, WeightTable, canonical, default_table,
                               enumerate_graphs, graph_operator, relabel, structural_zero)
from formalstar.polydiff import PolyDiffOp, hkr_inclusion
from formalstar.polyvector import random_polyvec

from conftest import d, vec, x

ORDER1 = Graph(1, 2, ((1, 2),))
CYCLE = Graph(2, 0, ((1,), (0,)))


def test_enumeration_examples():
    assert enumerate_graphs([2]) == [ORDER1]
    assert enumerate_graphs([0]) == [Graph(1, 0, ((),))]
    assert enumerate_graphs([1, 1]) == [CYCLE]


def test_enumeration_counts():
    # each bivector vertex picks 2 of the 3 other vertices
    assert len(enumerate_graphs([2, 2])) == 9
    assert len(enumerate_graphs([2, 1])) == 2
    assert len(enumerate_graphs([2, 2, 0])) == 1


def test_degree_impossible_request():
    with pytest.raises(GraphError):
        enumerate_graphs([1, 0, 0])
    with pytest.raises(GraphError):
        enumerate_graphs([2], m=1)


def test_order_one_graph_weighted_gives_hkr():
    gamma = d(0, 1)
    B = graph_operator(ORDER1, [gamma])
    assert B == PolyDiffOp.partials(2, [[0], [1]]) - PolyDiffOp.partials(2, [[1], [0]])
    assert B * default_table().weight(ORDER1) == hkr_inclusion(gamma)


def test_edge_into_constant_vertex_vanishes():
    g = Graph(2, 2, ((1, 2), (2, 3)))  # vertex 1 differentiates vertex 2
    assert not graph_operator(g, [d(0, 1, coeff=x(0)), d(0, 1)])


def test_two_cycle_on_constant_fields_vanishes():
    assert not graph_operator(CYCLE, [vec(1, 2), vec(3, 0)])
    out = graph_operator(CYCLE, [vec(x(1), 0), vec(0, x(0))])
    assert out.arity == 0 and out.as_function() == Poly.one(2)


def test_arity_mismatch():
    with pytest.raises(GraphError):
        graph_operator(ORDER1, [vec(1, 0)])


def test_table_lookups():
    t = default_table()
    assert t.weight(ORDER1) == Fraction(1, 2)
    assert t.weight(CYCLE) == 0
    assert t.weight(Graph(2, 2, ((2, 3), (2, 3)))) == Fraction(1, 4)
    weights = sorted(t.weight(g) for g in enumerate_graphs([2, 2]))
    assert weights == sorted(Fraction(v) for v in ["0", "-1/24", "-1/12", "-1/24", "0", "1/12", "-1/12",
                                                    "1/12", "1/4"])


def test_relabeling_sign_is_consistent_with_table():
    t = default_table()
    for g in enumerate_graphs([2, 2]):
        h, s = relabel(g, [1, 0])
        assert t.weight(h) == s * t.weight(g)


def test_structural_zero_rules():
    assert structural_zero(Graph(2, 2, ((1, 2), (0, 2)))) is not None  # right ground point unused
    assert structural_zero(Graph(2, 1, ((1,), (0, 2)))) is not None
    assert structural_zero(ORDER1) is None


def test_missing_weight_raises():
    g = Graph(3, 2, ((1, 3), (0, 3), (3, 4)))
    with pytest.raises(MissingWeightError) as exc:
        default_table().lookup(g)
    assert "edges" in str(exc.value)


def test_graph_json_round_trip_with_sign():
    g, s = Graph.from_json({"n": 1, "m": 2, "edges": [[1, "R"], [1, "L"]]})
    assert g == ORDER1 and s == -1
    g2, s2 = Graph.from_json(json.loads(json.dumps(CYCLE.to_json())))
    assert g2 == CYCLE and s2 == 1
    with pytest.raises(GraphError):
        Graph.from_json({"n": 1, "m": 2, "edges": [[1, "L"], [1, "L"]]})


def test_weight_table_round_trip_and_conflicts():
    t = default_table()
    t2 = WeightTable.from_json(json.loads(json.dumps(t.to_json())))
    for g, e in t:
        assert t2.weight(g) == e.value
    with pytest.raises(ValueError):
        t2.add(ORDER1, Fraction(1, 3), "bad")


def test_canonical_is_invariant():
    import random

    rng = random.Random(0)
    for g in enumerate_graphs([2, 1, 1]):
        perm = list(range(3))
        rng.shuffle(perm)
        h, s = relabel(g, perm)
        c1, s1 = canonical(g)
        c2, s2 = canonical(h)
        assert c1 == c2 and s1 == s * s2


def test_graph_operator_graded_symmetry():
    import random

    rng = random.Random(4)
    X, Y = random_polyvec(rng, 2, 1), random_polyvec(rng, 2, 1)
    for g in enumerate_graphs([1, 1, 2]):
        h, s = relabel(g, [1, 0, 2])
        gam = d(0, 1, coeff=x(0))
        assert graph_operator(g, [X, Y, gam]) * s == graph_operator(h, [Y, X, gam])
