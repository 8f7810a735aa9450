from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphmc.graphs import (
    DirectedGraph,
    GraphError,
    GraphSum,
    admissibility_violation,
    brute_force_canonical,
    canonical_key,
    canonicalize,
    decode_key,
    degree,
    encode_key,
    lie_degree,
    permutation_parity,
    second_grading,
)
from tests.conftest import admissible_graphs


@pytest.mark.parametrize("edges, m, fragment", [
    ([(0, 0)], 0, "loop"),
    ([(0, 1), (0, 1)], 0, "double edge"),
    ([(2, 0), (2, 1), (3, 2), (1, 2)], 2, "valence"),
    ([(0, 2), (1, 2)], 1, "in-degree"),
    ([(2, 3), (3, 2)], 2, "disconnected"),
])
def test_admissibility_violations(edges, m, fragment):
    g = DirectedGraph(2, m, tuple(edges))
    assert fragment in admissibility_violation(g)


def test_two_cycle_between_externals_is_admissible():
    assert admissibility_violation(DirectedGraph(2, 0, ((0, 1), (1, 0)))) is None


def test_three_outgoing_edges_rejected():
    g = DirectedGraph(3, 1, ((3, 0), (3, 1), (3, 2)))
    assert "out-degree" in admissibility_violation(g)


def test_degrees():
    wedge = DirectedGraph(2, 1, ((2, 0), (2, 1)))
    assert degree(wedge) == 0
    assert lie_degree(wedge) == 1
    assert second_grading(wedge) == 2


def test_symmetric_internal_pair_is_zero():
    # swapping the two internal vertices swaps the two edges
    g = DirectedGraph(1, 2, ((1, 0), (2, 0)))
    assert canonical_key(g) == (None, 0)
    assert brute_force_canonical(g) == (None, 0)


def test_canonicalize_checks_admissibility():
    with pytest.raises(GraphError):
        canonicalize(DirectedGraph(1, 0, ((0, 0),)))


def test_key_round_trip():
    key = encode_key(3, 1, [(3, 0), (1, 3)])
    assert key == "3:1:3>0,1>3"
    assert decode_key(key) == DirectedGraph(3, 1, ((3, 0), (1, 3)))


@given(admissible_graphs(max_n=3, max_m=2, max_e=5))
def test_canonical_form_matches_brute_force(g):
    assert canonical_key(g) == brute_force_canonical(g)


@given(admissible_graphs(), st.randoms(use_true_random=False))
def test_edge_permutation_changes_sign_by_parity(g, rnd):
    order = list(range(g.e))
    rnd.shuffle(order)
    key, sign = canonical_key(g)
    key2, sign2 = canonical_key(g.permuted_edges(order))
    assert key == key2
    if key is not None:
        assert sign2 == sign * (-1 if permutation_parity(order) else 1)


@given(admissible_graphs(), st.randoms(use_true_random=False))
def test_internal_relabeling_invariance(g, rnd):
    perm = list(range(g.n, g.n + g.m))
    rnd.shuffle(perm)
    relabel = list(range(g.n)) + perm
    h = DirectedGraph(g.n, g.m, tuple((relabel[s], relabel[t]) for s, t in g.edges))
    assert canonical_key(g) == canonical_key(h)


@given(admissible_graphs())
def test_canonicalization_idempotent(g):
    key, _ = canonical_key(g)
    if key is not None:
        assert canonical_key(decode_key(key)) == (key, 1)


def test_permutation_parity():
    assert permutation_parity([0, 1, 2]) == 0
    assert permutation_parity([1, 0, 2]) == 1
    assert permutation_parity([1, 2, 0]) == 0
    for p in permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        assert permutation_parity(p) == inversions % 2


def test_graph_sum_collects_signs():
    g = DirectedGraph(2, 1, ((2, 0), (2, 1)))
    h = g.permuted_edges([1, 0])
    assert not (GraphSum.from_graph(g) + GraphSum.from_graph(h))
    total = GraphSum.from_graph(g, Fraction(1, 2)) - GraphSum.from_graph(h, Fraction(1, 2))
    assert list(total.values()) == [1]


def test_graph_sum_filters_by_grading():
    wedge = GraphSum.from_graph(DirectedGraph(2, 1, ((2, 0), (2, 1))))
    bare = GraphSum.from_graph(DirectedGraph(2, 0, ()))
    x = wedge + bare
    assert x.truncate(1) == bare
    assert x.graded(2) == wedge
    assert x.gradings() == [1, 2]
