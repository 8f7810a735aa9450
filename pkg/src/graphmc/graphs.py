"""Admissible directed graphs, canonical forms and linear combinations.

Vertex ids: ``0..n-1`` are the external vertices (printed as ``1..n``) and
``n..n+m-1`` are the internal ones (printed as ``i1..im``).  The edge tuple is
ordered; its order is part of the data and a permutation of it changes the
graph by the sign of the permutation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .linalg import SparseVector, add_into, as_rational

Edge = Tuple[int, int]


class GraphError(ValueError):
    """Malformed or inadmissible graph."""


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    m: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(t)) for s, t in self.edges))

    @property
    def num_vertices(self) -> int:
        return self.n + self.m

    @property
    def e(self) -> int:
        return len(self.edges)

    def is_internal(self, v: int) -> bool:
        return v >= self.n

    def vertex_name(self, v: int) -> str:
        return str(v + 1) if v < self.n else f"i{v - self.n + 1}"

    def permuted_edges(self, order: Sequence[int]) -> "DirectedGraph":
        return DirectedGraph(self.n, self.m, tuple(self.edges[i] for i in order))

    def degree(self) -> int:
        return degree(self)

    def lie_degree(self) -> int:
        return lie_degree(self)

    def __str__(self) -> str:
        edges = ",".join(f"({self.vertex_name(s)}->{self.vertex_name(t)})" for s, t in self.edges)
        return f"G(n={self.n}; I={self.m}; e=[{edges}])"


def degree(g) -> int:
    """Graph degree ``2 * #internal - #edges``."""
    return 2 * g.m - len(g.edges)


def lie_degree(g) -> int:
    return degree(g) + g.n - 1


def second_grading(g) -> int:
    return g.m + g.n - 1


def slice_of(g) -> Tuple[int, int, int]:
    return (g.n, g.m, len(g.edges))


# ---------------------------------------------------------------- admissibility

def _check_structure(g: DirectedGraph) -> None:
    if g.n < 0 or g.m < 0:
        raise GraphError(f"negative vertex count in {g}")
    total = g.n + g.m
    for s, t in g.edges:
        if not (0 <= s < total and 0 <= t < total):
            raise GraphError(f"edge ({s}, {t}) refers to a vertex outside 0..{total - 1}")


def vertex_degrees(g: DirectedGraph) -> Tuple[List[int], List[int]]:
    indeg = [0] * (g.n + g.m)
    outdeg = [0] * (g.n + g.m)
    for s, t in g.edges:
        outdeg[s] += 1
        indeg[t] += 1
    return indeg, outdeg


def admissibility_violation(g: DirectedGraph, max_in: int = 1, max_out: int = 2,
                            max_valence: int = 3) -> Optional[str]:
    """Return a description of the first violated admissibility clause, or None."""
    _check_structure(g)
    seen = set()
    for s, t in g.edges:
        if s == t:
            return f"loop at vertex {g.vertex_name(s)}"
        if (s, t) in seen:
            return f"double edge {g.vertex_name(s)}->{g.vertex_name(t)}"
        seen.add((s, t))
    indeg, outdeg = vertex_degrees(g)
    for v in range(g.n, g.n + g.m):
        if indeg[v] + outdeg[v] > max_valence:
            return f"valence too high: internal vertex {g.vertex_name(v)} has valence {indeg[v] + outdeg[v]}"
    for v in range(g.n, g.n + g.m):
        if indeg[v] > max_in:
            return f"in-degree too high: internal vertex {g.vertex_name(v)} has {indeg[v]} incoming edges"
        if outdeg[v] > max_out:
            return f"out-degree too high: internal vertex {g.vertex_name(v)} has {outdeg[v]} outgoing edges"
    if g.m and not _internals_reach_external(g):
        return "disconnected: an internal vertex is not connected to any external vertex"
    return None


def _internals_reach_external(g: DirectedGraph) -> bool:
    if g.n == 0:
        return g.m == 0
    adj = [[] for _ in range(g.n + g.m)]
    for s, t in g.edges:
        adj[s].append(t)
        adj[t].append(s)
    reached = set(range(g.n))
    stack = list(range(g.n))
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in reached:
                reached.add(w)
                stack.append(w)
    return len(reached) == g.n + g.m


def check_admissible(g: DirectedGraph) -> Tuple[bool, Optional[str]]:
    problem = admissibility_violation(g)
    return problem is None, problem


def is_admissible(g: DirectedGraph) -> bool:
    return admissibility_violation(g) is None


# ---------------------------------------------------------------- canonical form

def permutation_parity(perm: Sequence[int]) -> int:
    """0 for even, 1 for odd."""
    parity = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _canonical_edges(n: int, m: int, edges: Tuple[Edge, ...]) -> Tuple[Optional[Tuple[Edge, ...]], int]:
    best = None
    best_signs = set()
    ne = len(edges)
    for perm in permutations(range(n, n + m)):
        relabel = list(range(n)) + list(perm)
        mapped = [(relabel[s], relabel[t]) for s, t in edges]
        order = sorted(range(ne), key=mapped.__getitem__)
        cand = tuple(mapped[i] for i in order)
        if best is None or cand < best:
            best = cand
            best_signs = {permutation_parity(order)}
        elif cand == best:
            best_signs.add(permutation_parity(order))
    if len(best_signs) > 1:
        return None, 0
    return best, (-1 if best_signs.pop() else 1)


@lru_cache(maxsize=500_000)
def _canonicalize_cached(n: int, m: int, edges: Tuple[Edge, ...]) -> Tuple[Optional[str], int]:
    canon, sign = _canonical_edges(n, m, edges)
    if canon is None:
        return None, 0
    return encode_key(n, m, canon), sign


def encode_key(n: int, m: int, edges: Iterable[Edge]) -> str:
    return f"{n}:{m}:" + ",".join(f"{s}>{t}" for s, t in edges)


@lru_cache(maxsize=500_000)
def decode_key(key: str) -> DirectedGraph:
    n, m, rest = key.split(":")
    edges = []
    if rest:
        for part in rest.split(","):
            s, t = part.split(">")
            edges.append((int(s), int(t)))
    return DirectedGraph(int(n), int(m), tuple(edges))


@dataclass(frozen=True)
class CanonicalGraph:
    graph: DirectedGraph
    key: str


def canonicalize(g: DirectedGraph, check: bool = True) -> Tuple[Optional[CanonicalGraph], int]:
    """Return ``(canonical, sign)`` with ``g = sign * canonical``.

    A graph with an automorphism inducing an odd edge permutation is zero; the
    result is then ``(None, 0)``.
    """
    if check:
        problem = admissibility_violation(g)
        if problem:
            raise GraphError(f"inadmissible graph {g}: {problem}")
    key, sign = _canonicalize_cached(g.n, g.m, g.edges)
    if key is None:
        return None, 0
    return CanonicalGraph(decode_key(key), key), sign


def canonical_key(g: DirectedGraph) -> Tuple[Optional[str], int]:
    """Key and sign without admissibility checking (caller guarantees it)."""
    return _canonicalize_cached(g.n, g.m, g.edges)


def brute_force_canonical(g: DirectedGraph) -> Tuple[Optional[str], int]:
    """Reference canonicalization by exhaustive search over relabelings and edge orders.

    Deliberately independent of :func:`canonicalize`: every internal relabeling and
    every ordering of the edges is enumerated, the minimum serialization is taken,
    and the signs of all realisations of the minimum are compared.
    """
    best = None
    signs = set()
    ne = len(g.edges)
    for perm in permutations(range(g.n, g.n + g.m)):
        relabel = list(range(g.n)) + list(perm)
        mapped = [(relabel[s], relabel[t]) for s, t in g.edges]
        for order in permutations(range(ne)):
            cand = tuple(mapped[i] for i in order)
            if any(cand[i] > cand[i + 1] for i in range(ne - 1)):
                continue
            inversions = sum(1 for i in range(ne) for j in range(i + 1, ne) if order[i] > order[j])
            if best is None or cand < best:
                best, signs = cand, {inversions % 2}
            elif cand == best:
                signs.add(inversions % 2)
    if len(signs) > 1:
        return None, 0
    return encode_key(g.n, g.m, best), (-1 if signs.pop() else 1)


# ---------------------------------------------------------------- linear combinations

def key_slice(key: str) -> Tuple[int, int, int]:
    g = decode_key(key)
    return g.n, g.m, len(g.edges)


def key_lie_degree(key: str) -> int:
    return lie_degree(decode_key(key))


def key_second_grading(key: str) -> int:
    return second_grading(decode_key(key))


class GraphSum(SparseVector):
    """Finite rational combination of canonical admissible graphs, keyed by canonical key."""

    __slots__ = ()

    @classmethod
    def from_graph(cls, g: DirectedGraph, coeff=1) -> "GraphSum":
        canon, sign = canonicalize(g)
        if canon is None:
            return cls()
        return cls({canon.key: as_rational(coeff) * sign})

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[DirectedGraph, object]], check: bool = True) -> "GraphSum":
        data: Dict[str, Fraction] = {}
        for g, coeff in terms:
            if check:
                canon, sign = canonicalize(g)
                key = canon.key if canon else None
            else:
                key, sign = canonical_key(g)
            if key is None:
                continue
            add_into(data, {key: as_rational(coeff) * sign})
        return cls._from_clean(data)

    def __add__(self, other):
        return GraphSum._from_clean(_added(self, other, 1))

    def __sub__(self, other):
        return GraphSum._from_clean(_added(self, other, -1))

    def __neg__(self):
        return GraphSum._from_clean({k: -v for k, v in self.items()})

    def __mul__(self, scalar):
        scalar = as_rational(scalar)
        if not scalar:
            return GraphSum()
        return GraphSum._from_clean({k: v * scalar for k, v in self.items()})

    __rmul__ = __mul__

    def terms(self) -> Iterator[Tuple[DirectedGraph, Fraction]]:
        for key, c in self.items_sorted():
            yield decode_key(key), c

    def by_slice(self) -> Dict[Tuple[int, int, int], "GraphSum"]:
        out: Dict[Tuple[int, int, int], Dict[str, Fraction]] = {}
        for key, c in self.items():
            out.setdefault(key_slice(key), {})[key] = c
        return {s: GraphSum._from_clean(d) for s, d in sorted(out.items())}

    def filter(self, predicate) -> "GraphSum":
        return GraphSum._from_clean({k: v for k, v in self.items() if predicate(decode_key(k))})

    def graded(self, grading: int) -> "GraphSum":
        return self.filter(lambda g: second_grading(g) == grading)

    def truncate(self, cap: int) -> "GraphSum":
        return self.filter(lambda g: second_grading(g) <= cap)

    def arity(self, n: int) -> "GraphSum":
        return self.filter(lambda g: g.n == n)

    def gradings(self) -> List[int]:
        return sorted({key_second_grading(k) for k in self})

    def lie_degrees(self) -> List[int]:
        return sorted({key_lie_degree(k) for k in self})

    def __repr__(self) -> str:
        from .dsl import serialize
        return f"GraphSum({serialize(self)!r})"


def _added(a: Mapping, b: Mapping, scale) -> Dict:
    data = dict(a.items())
    add_into(data, b, Fraction(scale))
    return data


def graph(n: int, m: int, edges: Sequence[Edge]) -> GraphSum:
    """Convenience constructor with 0-based vertex ids."""
    return GraphSum.from_graph(DirectedGraph(n, m, tuple(edges)))
