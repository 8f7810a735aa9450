from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings

from graphmc.graphs import (
    DirectedGraph,
    GraphSum,
    admissibility_violation,
    brute_force_canonical,
    lie_degree,
)
from graphmc.ihx import is_zero_mod_ihx
from graphmc.operad import bracket, insert, star, star_sign
from tests.conftest import admissible_graphs


def naive_insert(g1, j, g2):
    """Independent insertion: vertices named by (source graph, old id), internals of g2 numbered first."""
    slot = j - 1
    ext = [("1", v) for v in range(slot)] + [("2", v) for v in range(g2.n)] + \
          [("1", v) for v in range(slot + 1, g1.n)]
    ints = [("2", v) for v in range(g2.n, g2.n + g2.m)] + [("1", v) for v in range(g1.n, g1.n + g1.m)]
    number = {name: i for i, name in enumerate(ext + ints)}
    g2_vertices = [("2", v) for v in range(g2.n + g2.m)]
    loose = [(i, end) for i, e in enumerate(g1.edges) for end in (0, 1) if e[end] == slot]
    out = {}
    for choice in product(g2_vertices, repeat=len(loose)):
        ends = [[("1", s), ("1", t)] for s, t in g1.edges]
        for (i, end), target in zip(loose, choice):
            ends[i][end] = target
        edges = [(number[s], number[t]) for s, t in ends]
        edges += [(number[("2", s)], number[("2", t)]) for s, t in g2.edges]
        g = DirectedGraph(g1.n + g2.n - 1, g1.m + g2.m, tuple(edges))
        if admissibility_violation(g):
            continue
        key, sign = brute_force_canonical(g)
        if key is not None:
            out[key] = out.get(key, 0) + sign
    return GraphSum({k: v for k, v in out.items() if v})


small = admissible_graphs(max_n=2, max_m=1, max_e=3)


@settings(max_examples=40)
@given(small, small)
def test_insertion_matches_naive_oracle(g1, g2):
    for j in range(1, g1.n + 1):
        assert insert(GraphSum.from_graph(g1), j, GraphSum.from_graph(g2)) == naive_insert(g1, j, g2)


def test_fixture_insertions_match_oracle(fx):
    for a in ("xi1", "xi2", "a1", "a3"):
        for b in ("a1", "a2", "a3", "xi1"):
            for k1, c1 in fx[a].terms():
                for k2, c2 in fx[b].terms():
                    for j in range(1, k1.n + 1):
                        got = insert(GraphSum.from_graph(k1), j, GraphSum.from_graph(k2))
                        assert got == naive_insert(k1, j, k2)


@given(small, small, small)
def test_bilinearity(g1, g2, g3):
    x, y, z = (GraphSum.from_graph(g) for g in (g1, g2, g3))
    assert star(x + y * 2, z) == star(x, z) + star(y, z) * 2
    assert bracket(x, y * Fraction(1, 3) - z) == bracket(x, y) * Fraction(1, 3) - bracket(x, z)


@given(admissible_graphs(max_n=2, max_m=2, max_e=4), admissible_graphs(max_n=2, max_m=2, max_e=4))
def test_graded_antisymmetry(g1, g2):
    x, y = GraphSum.from_graph(g1), GraphSum.from_graph(g2)
    sign = -1 if (lie_degree(g1) * lie_degree(g2)) % 2 else 1
    assert bracket(x, y) == bracket(y, x) * (-sign)


JACOBI_TRIPLES = [("xi1", "a1", "a2"), ("xi1", "xi1", "a1"), ("a1", "a2", "xi1"),
                  ("xi1", "a2", "a3"), ("a2", "a2", "xi1")]


@pytest.mark.parametrize("names", JACOBI_TRIPLES)
def test_jacobi_mod_ihx(fx, names):
    x, y, z = (fx[n] for n in names)
    dx, dy, dz = (lie_degree(next(iter(v.terms()))[0]) for v in (x, y, z))

    def s(a, b):
        return -1 if (a * b) % 2 else 1

    total = (bracket(x, bracket(y, z)) * s(dx, dz) + bracket(y, bracket(z, x)) * s(dy, dx)
             + bracket(z, bracket(x, y)) * s(dz, dy))
    assert is_zero_mod_ihx(total)


def test_star_sign_values():
    # exponent = deg(g2) * (1 - n1) + (i + 1) * (n2 - 1); deg(a1) = 1, deg(a2) = 0
    a1 = DirectedGraph(1, 1, ((1, 0),))
    a2 = DirectedGraph(2, 0, ())
    assert star_sign(a1, 1, a2) == 1    # 0 + 2 * 1
    assert star_sign(a2, 1, a1) == -1   # 1 * (-1) + 0
    assert star_sign(a2, 2, a1) == -1   # 1 * (-1) + 0
    assert star_sign(a2, 1, a2) == 1    # 0 + 2 * 1
    assert star_sign(a2, 2, a2) == -1   # 0 + 3 * 1


def test_first_bracket_identity_raw(fx):
    assert bracket(fx["xi1"], fx["a1"]) == fx["a3"] * 2


def test_a1_squared_nonzero_raw_but_zero_mod_ihx(fx):
    sq = bracket(fx["a1"], fx["a1"])
    assert sq
    assert is_zero_mod_ihx(sq)


def test_insert_rejects_bad_position(fx):
    from graphmc.operad import reattachments
    with pytest.raises(ValueError):
        list(reattachments(DirectedGraph(1, 0, ()), 2, DirectedGraph(1, 0, ())))
