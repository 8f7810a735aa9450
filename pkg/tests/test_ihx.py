from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphmc.graphs import DirectedGraph, GraphSum, admissibility_violation, brute_force_canonical, decode_key
from graphmc.ihx import (
    QuotientSpace,
    SliceError,
    enumerate_slice,
    equal_mod_ihx,
    is_zero_mod_ihx,
    quotient,
    reduce,
    slice_relations,
)
from graphmc.operad import bracket
from tests.test_linalg import dense_rank


def raw_graphs(n, m, e):
    total = n + m
    pairs = [(s, t) for s in range(total) for t in range(total) if s != t]
    for edges in combinations(pairs, e):
        yield DirectedGraph(n, m, edges)


def naive_slice(n, m, e):
    keys = set()
    for g in raw_graphs(n, m, e):
        if admissibility_violation(g) is None:
            key, _ = brute_force_canonical(g)
            if key is not None:
                keys.add(key)
    return keys


def naive_relations(n, m, e, extended):
    """Split one vertex of every parent in the slice below, with independent parent detection."""
    allowed = {(1, 3)} | ({(0, 3)} if extended else set())
    rels = []
    for parent in raw_graphs(n, m - 1, e - 1):
        indeg = [sum(1 for _, t in parent.edges if t == v) for v in range(n + m - 1)]
        outdeg = [sum(1 for s, _ in parent.edges if s == v) for v in range(n + m - 1)]
        if admissibility_violation(parent) is None:
            splittable = range(n, n + m - 1)
        else:
            special = [v for v in range(n, n + m - 1) if (indeg[v], outdeg[v]) in allowed]
            if len(special) != 1:
                continue
            v = special[0]
            loose = admissibility_violation(parent, max_in=1, max_out=3, max_valence=4)
            others_ok = all(indeg[w] <= 1 and outdeg[w] <= 2 and indeg[w] + outdeg[w] <= 3
                            for w in range(n, n + m - 1) if w != v)
            if loose is not None or not others_ok:
                continue
            splittable = [v]
        for v in splittable:
            rel = {}
            incident = [i for i, ed in enumerate(parent.edges) if v in ed]
            new = n + m - 1
            for moved in product((0, 1), repeat=len(incident)):
                edges = list(parent.edges)
                for i, flag in zip(incident, moved):
                    if flag:
                        edges[i] = tuple(new if x == v else x for x in edges[i])
                h = DirectedGraph(n, m, tuple(edges) + ((v, new),))
                if admissibility_violation(h) is None:
                    key, sign = brute_force_canonical(h)
                    if key is not None:
                        rel[key] = rel.get(key, 0) + sign
            rels.append({k: c for k, c in rel.items() if c})
    return rels


def oracle_rank(n, m, e, extended):
    keys = sorted(naive_slice(n, m, e))
    index = {k: i for i, k in enumerate(keys)}
    rels = naive_relations(n, m, e, extended)
    assert all(set(r) <= set(index) for r in rels)
    rows = [{index[k]: c for k, c in r.items()} for r in rels]
    return dense_rank(rows, len(keys)) if rows else 0


SMALL_SLICES = [(1, 1, 1), (1, 2, 2), (2, 1, 2), (2, 2, 3), (2, 2, 4), (3, 1, 3), (3, 2, 4), (2, 3, 5)]


@pytest.mark.parametrize("sl", SMALL_SLICES)
def test_slice_enumeration_matches_naive(sl):
    assert set(enumerate_slice(*sl)) == naive_slice(*sl)


@pytest.mark.parametrize("sl", SMALL_SLICES)
@pytest.mark.parametrize("extended", [False, True])
def test_relation_rank_matches_naive(sl, extended):
    assert QuotientSpace(*sl, extended=extended).rank == oracle_rank(*sl, extended)


# frozen from the naive oracles above
FROZEN = [((1, 2, 2), 4, 2), ((2, 2, 4), 120, 16), ((3, 2, 4), 1173, 171)]


@pytest.mark.parametrize("sl,size,rank", FROZEN)
def test_frozen_slice_sizes(sl, size, rank):
    q = QuotientSpace(*sl, extended=False)
    assert len(q.graph_basis) == size
    assert q.rank == rank
    assert q.dimension == size - rank


def slice_vectors(sl):
    keys = enumerate_slice(*sl)
    coeff = st.integers(-3, 3).map(Fraction)
    return st.lists(st.tuples(st.sampled_from(keys), coeff), max_size=6).map(
        lambda items: GraphSum.from_terms(((decode_key(k), c) for k, c in items)))


@given(slice_vectors((2, 2, 4)), slice_vectors((2, 2, 4)), st.integers(-2, 2))
def test_reduce_is_linear_projection(x, y, c):
    q = quotient(2, 2, 4)
    assert q.reduce(q.reduce(x)) == q.reduce(x)
    assert q.reduce(x + y * c) == q.reduce(x) + q.reduce(y) * c
    assert q.is_zero(x - q.reduce(x))


@pytest.mark.parametrize("sl", [(2, 2, 4), (3, 2, 4), (2, 3, 5)])
def test_relations_reduce_to_zero(sl):
    for rel in slice_relations(*sl):
        assert is_zero_mod_ihx(rel.relation)


def test_witness_reconstructs_relation_combination():
    q = QuotientSpace(3, 2, 4, track=True)
    rels = q.relations
    x = rels[3].relation * 2 - rels[10].relation + rels[-1].relation * Fraction(1, 3)
    coeffs = q.witness(x)
    assert coeffs is not None
    total = GraphSum()
    for i, c in coeffs.items():
        total = total + rels[i].relation * c
    assert total == x
    g = decode_key(q.graph_basis[0])
    if not q.is_zero(GraphSum.from_graph(g)):
        assert q.witness(GraphSum.from_graph(g)) is None


def test_reduce_splits_by_slice():
    a = GraphSum.from_graph(decode_key(enumerate_slice(2, 2, 4)[5]))
    b = GraphSum.from_graph(decode_key(enumerate_slice(3, 2, 4)[7]))
    assert reduce(a + b) == reduce(a) + reduce(b)


def test_quotient_rejects_foreign_terms():
    a = GraphSum.from_graph(decode_key(enumerate_slice(2, 2, 4)[0]))
    with pytest.raises(SliceError):
        quotient(3, 2, 4).reduce(a)


def test_source_star_relations_needed_for_a1_b(fx):
    x = bracket(fx["a1"], fx["b"])
    assert x
    assert not is_zero_mod_ihx(x, extended=False)
    assert is_zero_mod_ihx(x, extended=True)


def test_equal_mod_ihx_on_fixture_bracket(fx):
    assert equal_mod_ihx(bracket(fx["xi1"], fx["a1"]), fx["a3"] * 2)
    assert not equal_mod_ihx(fx["a3"], GraphSum())
