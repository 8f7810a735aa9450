"""Operadic insertion of graphs, the signed pre-Lie product and the Lie bracket."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Tuple

from .graphs import (
    DirectedGraph,
    GraphSum,
    admissibility_violation,
    canonical_key,
    decode_key,
    degree,
    lie_degree,
)
from .linalg import add_into


def reattachments(g1: DirectedGraph, j: int, g2: DirectedGraph) -> Iterator[DirectedGraph]:
    """All graphs (admissible or not) obtained by substituting ``g2`` for external ``j`` of ``g1``.

    ``j`` is 1-based.  Each edge endpoint that sat on vertex ``j`` is
    reattached independently to any vertex of ``g2``.
    """
    if not 1 <= j <= g1.n:
        raise ValueError(f"insertion position {j} outside 1..{g1.n}")
    n = g1.n + g2.n - 1
    m = g1.m + g2.m
    slot = j - 1

    def map1(v: int) -> int:
        if v < slot:
            return v
        if v < g1.n:
            return v + g2.n - 1
        return n + (v - g1.n)

    def map2(v: int) -> int:
        if v < g2.n:
            return slot + v
        return n + g1.m + (v - g2.n)

    targets = [map2(v) for v in range(g2.n + g2.m)]
    loose: List[Tuple[int, int]] = []  # (edge index, endpoint 0=source 1=target)
    base: List[List[int]] = []
    for idx, (s, t) in enumerate(g1.edges):
        pair = [None, None]
        for end, v in enumerate((s, t)):
            if v == slot:
                loose.append((idx, end))
            else:
                pair[end] = map1(v)
        base.append(pair)
    tail = tuple((map2(s), map2(t)) for s, t in g2.edges)
    for choice in product(targets, repeat=len(loose)):
        edges = [list(p) for p in base]
        for (idx, end), target in zip(loose, choice):
            edges[idx][end] = target
        yield DirectedGraph(n, m, tuple((s, t) for s, t in edges) + tail)


@lru_cache(maxsize=200_000)
def _insert_keys(key1: str, j: int, key2: str) -> Tuple[Tuple[str, Fraction], ...]:
    out: Dict[str, Fraction] = {}
    for g in reattachments(decode_key(key1), j, decode_key(key2)):
        if admissibility_violation(g):
            continue
        key, sign = canonical_key(g)
        if key is not None:
            add_into(out, {key: Fraction(sign)})
    return tuple(sorted(out.items()))


def insert(x: GraphSum, j: int, y: GraphSum) -> GraphSum:
    """Bilinear extension of ``g1 o_j g2``; terms of ``x`` with arity below ``j`` are skipped."""
    out: Dict[str, Fraction] = {}
    for k1, c1 in x.items():
        if decode_key(k1).n < j:
            continue
        for k2, c2 in y.items():
            for key, c in _insert_keys(k1, j, k2):
                add_into(out, {key: c}, c1 * c2)
    return GraphSum._from_clean(out)


def star_sign(g1: DirectedGraph, i: int, g2: DirectedGraph) -> int:
    exponent = degree(g2) * (1 - g1.n) + (i + 1) * (g2.n - 1)
    return -1 if exponent % 2 else 1


@lru_cache(maxsize=200_000)
def _star_keys(key1: str, key2: str) -> Tuple[Tuple[str, Fraction], ...]:
    g1, g2 = decode_key(key1), decode_key(key2)
    out: Dict[str, Fraction] = {}
    for i in range(1, g1.n + 1):
        sign = star_sign(g1, i, g2)
        for key, c in _insert_keys(key1, i, key2):
            add_into(out, {key: c}, Fraction(sign))
    return tuple(sorted(out.items()))


def star(x: GraphSum, y: GraphSum) -> GraphSum:
    """Pre-Lie product: signed sum over all insertion positions."""
    out: Dict[str, Fraction] = {}
    for k1, c1 in x.items():
        for k2, c2 in y.items():
            for key, c in _star_keys(k1, k2):
                add_into(out, {key: c}, c1 * c2)
    return GraphSum._from_clean(out)


@lru_cache(maxsize=200_000)
def _bracket_keys(key1: str, key2: str) -> Tuple[Tuple[str, Fraction], ...]:
    d1 = lie_degree(decode_key(key1))
    d2 = lie_degree(decode_key(key2))
    out: Dict[str, Fraction] = dict(_star_keys(key1, key2))
    add_into(out, dict(_star_keys(key2, key1)), Fraction(-1 if (d1 * d2) % 2 == 0 else 1))
    return tuple(sorted(out.items()))


def bracket(x: GraphSum, y: GraphSum) -> GraphSum:
    """Graded commutator ``x*y - (-1)^{|x||y|} y*x`` in the Lie grading."""
    out: Dict[str, Fraction] = {}
    for k1, c1 in x.items():
        for k2, c2 in y.items():
            for key, c in _bracket_keys(k1, k2):
                add_into(out, {key: c}, c1 * c2)
    return GraphSum._from_clean(out)


def ad_pow(xi: GraphSum, alpha: GraphSum, k: int, cap: int = None) -> GraphSum:
    """``ad_xi^k(alpha)``; with ``cap`` set, terms above that second grading are discarded after each step."""
    if k < 0:
        raise ValueError("k must be non-negative")
    result = alpha if cap is None else alpha.truncate(cap)
    for _ in range(k):
        if not result:
            break
        result = bracket(xi, result)
        if cap is not None:
            result = result.truncate(cap)
    return result
