from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphmc.dsl import DSLSyntaxError, parse_graph, serialize
from graphmc.graphs import DirectedGraph, GraphError, GraphSum
from graphmc.mc import fixture_names, load_fixture
from tests.conftest import admissible_graphs


@pytest.mark.parametrize("name", fixture_names())
def test_fixture_round_trip(name):
    x = load_fixture(name).value
    assert parse_graph(serialize(x)) == x


@given(st.lists(st.tuples(admissible_graphs(), st.fractions(max_denominator=12)), max_size=4))
def test_random_sum_round_trip(terms):
    x = GraphSum()
    for g, c in terms:
        x = x + GraphSum.from_graph(g, c)
    assert parse_graph(serialize(x)) == x


def test_edge_spellings_agree():
    a = parse_graph("G(n=2; I=1; e=[(i1->1), (i1->2)])")
    b = parse_graph("G(n=2;I=1;e=[(i1,1),(i1,2)])")
    assert a == b


def test_coefficients_and_comments():
    x = parse_graph("""
        # a comment line
        1/2*G(n=2; I=0; e=[]) - 3*G(n=2; I=0; e=[(1->2)])
    """)
    assert sorted(x.values()) == [Fraction(-3), Fraction(1, 2)]


def test_zero():
    assert not parse_graph("0")
    assert serialize(GraphSum()) == "0"


def test_undirected_edge_sums_orientations():
    x = parse_graph("G(n=2; I=0; e=[(1--2)])")
    y = parse_graph("G(n=2; I=0; e=[(1->2)]) + G(n=2; I=0; e=[(2->1)])")
    assert x == y


def test_undirected_edge_drops_inadmissible_orientations():
    # the internal vertex already has an incoming edge, so only i1->2 survives
    x = parse_graph("G(n=2; I=1; e=[(1->i1), (i1--2)])")
    assert x == parse_graph("G(n=2; I=1; e=[(1->i1), (i1->2)])")


def test_inadmissible_term_is_named():
    with pytest.raises(GraphError, match="G\\(n=1"):
        parse_graph("G(n=1; I=0; e=[(1->1)])")


def test_syntax_error_reports_position():
    with pytest.raises(DSLSyntaxError) as info:
        parse_graph("G(n=2; I=0; e=[(1->2)")
    assert "line 1" in str(info.value)
    assert "column" in str(info.value)


def test_vertex_out_of_range():
    with pytest.raises(DSLSyntaxError):
        parse_graph("G(n=2; I=0; e=[(1->3)])")


def test_serialize_is_deterministic():
    x = parse_graph("G(n=2; I=0; e=[(2->1)]) + G(n=2; I=0; e=[(1->2)])")
    y = parse_graph("G(n=2; I=0; e=[(1->2)]) + G(n=2; I=0; e=[(2->1)])")
    assert serialize(x) == serialize(y)


def test_parse_graph_builds_directed_graph():
    (g, c), = parse_graph("-G(n=1; I=1; e=[(i1->1)])").terms()
    assert g == DirectedGraph(1, 1, ((1, 0),))
    assert c == -1
