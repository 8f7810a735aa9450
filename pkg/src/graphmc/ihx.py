"""Generalized IHX relations and the quotient of graph slices by them.

A slice is a triple ``(n, m, e)``: arity, number of internal vertices, number
of edges.  Splitting a vertex adds one internal vertex and one edge, so every
relation lies in a single slice and the quotient can be computed slice by
slice without truncation error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Dict, Iterable, List, Optional, Tuple

from .graphs import (
    DirectedGraph,
    GraphSum,
    _internals_reach_external,
    admissibility_violation,
    canonical_key,
    decode_key,
    key_slice,
)
from .linalg import RowBasis, add_into, row_reduce

Slice = Tuple[int, int, int]


class SliceError(ValueError):
    """An element is not supported in the slice (or bounds) it was reduced against."""


# ---------------------------------------------------------------- enumeration

def _class_key(g: DirectedGraph) -> Tuple:
    """Isomorphism-class key ignoring edge-order signs (defined for zero graphs too)."""
    best = None
    for perm in permutations(range(g.n, g.n + g.m)):
        relabel = list(range(g.n)) + list(perm)
        cand = tuple(sorted((relabel[s], relabel[t]) for s, t in g.edges))
        if best is None or cand < best:
            best = cand
    return best


def _raw_graphs(n: int, m: int, e: int, max_in: int, max_out: int, max_valence: int,
                max_external: Optional[int] = None):
    """Edge sets (as sorted tuples) satisfying per-vertex bounds on internal vertices.

    ``max_external`` optionally bounds the valence of external vertices as well.
    """
    total = n + m
    pairs = [(s, t) for s in range(total) for t in range(total) if s != t]
    indeg = [0] * total
    outdeg = [0] * total
    chosen: List[Tuple[int, int]] = []

    def fits(s, t):
        if max_external is not None:
            if s < n and indeg[s] + outdeg[s] >= max_external:
                return False
            if t < n and indeg[t] + outdeg[t] >= max_external:
                return False
        if s >= n and (outdeg[s] >= max_out or indeg[s] + outdeg[s] >= max_valence):
            return False
        if t >= n and (indeg[t] >= max_in or indeg[t] + outdeg[t] >= max_valence):
            return False
        return True

    def rec(start):
        if len(chosen) == e:
            yield tuple(chosen)
            return
        for idx in range(start, len(pairs) - (e - len(chosen)) + 1):
            s, t = pairs[idx]
            if not fits(s, t):
                continue
            chosen.append((s, t))
            outdeg[s] += 1
            indeg[t] += 1
            yield from rec(idx + 1)
            chosen.pop()
            outdeg[s] -= 1
            indeg[t] -= 1

    yield from rec(0)


@lru_cache(maxsize=None)
def graph_classes(n: int, m: int, e: int, max_external: Optional[int] = None) -> Tuple[DirectedGraph, ...]:
    """One representative per isomorphism class of admissible graphs, zero graphs included."""
    seen = {}
    for edges in _raw_graphs(n, m, e, 1, 2, 3, max_external):
        g = DirectedGraph(n, m, edges)
        if admissibility_violation(g):
            continue
        key = _class_key(g)
        if key not in seen:
            seen[key] = DirectedGraph(n, m, key)
    return tuple(seen[k] for k in sorted(seen))


@lru_cache(maxsize=None)
def enumerate_slice(n: int, m: int, e: int, max_external: Optional[int] = None) -> Tuple[str, ...]:
    """Canonical keys of all nonzero admissible graphs in the slice, sorted."""
    keys = set()
    for g in graph_classes(n, m, e, max_external):
        key, _ = canonical_key(g)
        if key is not None:
            keys.add(key)
    return tuple(sorted(keys))


def enumerate_graphs(n: int, m_max: int, e_max: int) -> List[str]:
    """All canonical admissible graphs of arity ``n`` with at most ``m_max`` internal vertices and ``e_max`` edges."""
    out = []
    for m in range(m_max + 1):
        for e in range(e_max + 1):
            out.extend(enumerate_slice(n, m, e))
    return out


def _overfull_vertex(g: DirectedGraph, in_degree: int) -> Optional[int]:
    """Return the unique internal vertex with three outgoing and ``in_degree`` incoming edges,
    provided the graph is otherwise admissible."""
    indeg = [0] * (g.n + g.m)
    outdeg = [0] * (g.n + g.m)
    for s, t in g.edges:
        outdeg[s] += 1
        indeg[t] += 1
    special = [v for v in range(g.n, g.n + g.m) if outdeg[v] == 3]
    if len(special) != 1 or indeg[special[0]] != in_degree:
        return None
    v = special[0]
    seen = set()
    for s, t in g.edges:
        if s == t or (s, t) in seen:
            return None
        seen.add((s, t))
    for w in range(g.n, g.n + g.m):
        if w != v and (indeg[w] > 1 or outdeg[w] > 2 or indeg[w] + outdeg[w] > 3):
            return None
    if not _internals_reach_external(g):
        return None
    return v


@lru_cache(maxsize=None)
def overfull_parents(n: int, m: int, e: int, in_degree: int) -> Tuple[Tuple[DirectedGraph, int], ...]:
    """Representatives of graphs with one internal vertex having three outgoing and
    ``in_degree`` incoming edges, admissible otherwise."""
    seen = {}
    for edges in _raw_graphs(n, m, e, 1, 3, 4):
        g = DirectedGraph(n, m, edges)
        if _overfull_vertex(g, in_degree) is None:
            continue
        key = _class_key(g)
        if key not in seen:
            rep = DirectedGraph(n, m, key)
            seen[key] = (rep, _overfull_vertex(rep, in_degree))
    return tuple(seen[k] for k in sorted(seen))


def four_valent_parents(n: int, m: int, e: int) -> Tuple[Tuple[DirectedGraph, int], ...]:
    """Parents with a four-valent vertex having one incoming and three outgoing edges."""
    return overfull_parents(n, m, e, 1)


def source_star_parents(n: int, m: int, e: int) -> Tuple[Tuple[DirectedGraph, int], ...]:
    """Parents with a trivalent vertex having three outgoing and no incoming edges."""
    return overfull_parents(n, m, e, 0)


# ---------------------------------------------------------------- relations

@dataclass(frozen=True)
class IhxRelation:
    parent: DirectedGraph
    vertex: int
    kind: int  # 1: admissible parent, 2: four-valent parent, 3: trivalent source parent
    relation: GraphSum = field(compare=False)

    @property
    def univalent_split(self) -> bool:
        return sum(1 for edge in self.parent.edges if self.vertex in edge) == 1


def split_vertex(g: DirectedGraph, v: int) -> List[DirectedGraph]:
    """All admissible graphs obtained by replacing ``v`` with an edge ``v -> v'`` (new edge last)."""
    new = g.n + g.m
    incident = [idx for idx, edge in enumerate(g.edges) if v in edge]
    out = []
    for choice in product((False, True), repeat=len(incident)):
        edges = list(g.edges)
        for idx, moved in zip(incident, choice):
            if moved:
                s, t = edges[idx]
                edges[idx] = (new if s == v else s, new if t == v else t)
        edges.append((v, new))
        h = DirectedGraph(g.n, g.m + 1, tuple(edges))
        if admissibility_violation(h) is None:
            out.append(h)
    return out


def relation_from_split(g: DirectedGraph, v: int) -> GraphSum:
    data: Dict[str, Fraction] = {}
    for h in split_vertex(g, v):
        key, sign = canonical_key(h)
        if key is not None:
            add_into(data, {key: Fraction(sign)})
    return GraphSum._from_clean(data)


@lru_cache(maxsize=None)
def slice_relations(n: int, m: int, e: int, extended: bool = True) -> Tuple[IhxRelation, ...]:
    """Every generalized IHX relation whose terms lie in the slice ``(n, m, e)``.

    Relations come from splitting an internal vertex of an admissible parent
    (kind 1) or the 1-in/3-out vertex of a four-valent parent (kind 2).  With
    ``extended`` the vertex may also be a trivalent source with three outgoing
    edges (kind 3); such splittings are killed by the representation for the
    same reason as the other two kinds, and they are needed for ``[a1, b] = 0``.
    """
    if m == 0 or e == 0:
        return ()
    rels = []
    for parent in graph_classes(n, m - 1, e - 1):
        for v in range(n, n + m - 1):
            rels.append(IhxRelation(parent, v, 1, relation_from_split(parent, v)))
    for parent, v in four_valent_parents(n, m - 1, e - 1):
        rels.append(IhxRelation(parent, v, 2, relation_from_split(parent, v)))
    if extended:
        for parent, v in source_star_parents(n, m - 1, e - 1):
            rels.append(IhxRelation(parent, v, 3, relation_from_split(parent, v)))
    return tuple(rels)


def generate_ihx(n: int, m_max: int, e_max: int, extended: bool = True) -> List[IhxRelation]:
    """All relations of arity ``n`` whose terms have at most ``m_max`` internals and ``e_max`` edges."""
    out = []
    for m in range(1, m_max + 1):
        for e in range(1, e_max + 1):
            out.extend(slice_relations(n, m, e, extended))
    return out


# ---------------------------------------------------------------- quotient

class QuotientSpace:
    """Row-reduced span of the IHX relations in one slice."""

    def __init__(self, n: int, m: int, e: int, track: bool = False, extended: bool = True):
        self.slice: Slice = (n, m, e)
        self.extended = extended
        self.relations = slice_relations(n, m, e, extended)
        self.basis: RowBasis = row_reduce((r.relation for r in self.relations), track=track)

    @property
    def graph_basis(self) -> Tuple[str, ...]:
        return enumerate_slice(*self.slice)

    @property
    def rank(self) -> int:
        return self.basis.rank

    @property
    def dimension(self) -> int:
        return len(self.graph_basis) - self.rank

    def univalent_split_count(self) -> int:
        return sum(1 for r in self.relations if r.univalent_split)

    def _check_support(self, x: GraphSum) -> None:
        for key in x:
            if key_slice(key) != self.slice:
                raise SliceError(f"term {decode_key(key)} lies outside slice {self.slice}")

    def reduce(self, x: GraphSum) -> GraphSum:
        self._check_support(x)
        rem, _ = self.basis.reduce(x)
        return GraphSum._from_clean(rem)

    def is_zero(self, x: GraphSum) -> bool:
        return not self.reduce(x)

    def witness(self, x: GraphSum) -> Optional[Dict[int, Fraction]]:
        """Coefficients on ``self.relations`` summing to ``x``, or None if ``x`` is nonzero."""
        self._check_support(x)
        ok, coeffs = self.basis.in_span(x)
        if not ok:
            return None
        if not self.basis.track:
            raise ValueError("quotient built without tracking")
        return self.basis.input_combination(coeffs)


@lru_cache(maxsize=None)
def quotient(n: int, m: int, e: int, extended: bool = True) -> QuotientSpace:
    return QuotientSpace(n, m, e, extended=extended)


def reduce(x: GraphSum, q: QuotientSpace = None, extended: bool = True) -> GraphSum:
    """Normal form modulo IHX; with ``q`` given, ``x`` must lie in its slice."""
    if q is not None:
        return q.reduce(x)
    out: Dict[str, Fraction] = {}
    for sl, part in x.by_slice().items():
        add_into(out, quotient(*sl, extended=extended).reduce(part))
    return GraphSum._from_clean(out)


def is_zero_mod_ihx(x: GraphSum, q: QuotientSpace = None, extended: bool = True) -> bool:
    return not reduce(x, q, extended)


def equal_mod_ihx(x: GraphSum, y: GraphSum, extended: bool = True) -> bool:
    return is_zero_mod_ihx(x - y, extended=extended)


def check_bounds(x: GraphSum, m_max: int, e_max: int) -> None:
    for key in x:
        n, m, e = key_slice(key)
        if m > m_max or e > e_max:
            raise SliceError(f"term {decode_key(key)} exceeds bounds m<={m_max}, e<={e_max}")


def relations_as_text(rels: Iterable[IhxRelation]) -> List[str]:
    from .dsl import serialize
    return [serialize(r.relation) for r in rels]
