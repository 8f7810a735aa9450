"""The multilinear cobar complex on ordered set compositions and its gluing to graphs.

A basis element of degree ``k`` is an ordered list of ``k`` disjoint nonempty
blocks covering ``{1..n}``; it stands for the tensor of the suspended
multilinear monomials ``t_B``.  The differential splits one block into an
ordered pair of nonempty blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .graphs import (
    DirectedGraph,
    GraphSum,
    admissibility_violation,
    canonical_key,
    decode_key,
    degree,
    permutation_parity,
    vertex_degrees,
)
from .ihx import enumerate_slice
from .linalg import SparseVector, add_into, row_reduce
from .operad import bracket


# ---------------------------------------------------------------- compositions

@dataclass(frozen=True)
class SetComposition:
    blocks: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(frozenset(b) for b in self.blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def key(self) -> str:
        return "|".join(",".join(str(i) for i in sorted(b)) for b in self.blocks)

    @classmethod
    def from_key(cls, key: str) -> "SetComposition":
        return cls(tuple(frozenset(int(i) for i in part.split(",")) for part in key.split("|")))

    def validate(self, n: int) -> None:
        seen = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if seen & b:
                raise ValueError("blocks overlap")
            seen |= b
        if seen != set(range(1, n + 1)):
            raise ValueError(f"blocks do not cover 1..{n}")

    def permuted(self, sigma: Dict[int, int]) -> "SetComposition":
        return SetComposition(tuple(frozenset(sigma[i] for i in b) for b in self.blocks))

    def __str__(self) -> str:
        return "(" + ", ".join("{" + ",".join(str(i) for i in sorted(b)) + "}" for b in self.blocks) + ")"


class CobarElement(SparseVector):
    """Rational combination of set compositions, keyed by :attr:`SetComposition.key`."""

    __slots__ = ()

    @classmethod
    def of(cls, comp: SetComposition, coeff=1) -> "CobarElement":
        return cls({comp.key: coeff})

    def __add__(self, other):
        data = dict(self.items())
        add_into(data, other)
        return CobarElement._from_clean(data)

    def __sub__(self, other):
        data = dict(self.items())
        add_into(data, other, Fraction(-1))
        return CobarElement._from_clean(data)

    def __mul__(self, scalar):
        return CobarElement(super().__mul__(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return CobarElement._from_clean({k: -v for k, v in self.items()})

    def compositions(self) -> Iterator[Tuple[SetComposition, Fraction]]:
        for key, c in self.items_sorted():
            yield SetComposition.from_key(key), c


def _splits(block: FrozenSet[int]) -> Iterator[Tuple[FrozenSet[int], FrozenSet[int]]]:
    items = sorted(block)
    for r in range(1, len(items)):
        for left in combinations(items, r):
            a = frozenset(left)
            yield a, block - a


@lru_cache(maxsize=None)
def _d_key(key: str) -> Tuple[Tuple[str, int], ...]:
    comp = SetComposition.from_key(key)
    out: Dict[str, Fraction] = {}
    for i, block in enumerate(comp.blocks, start=1):
        sign = -1 if i % 2 else 1
        for a, c in _splits(block):
            new = comp.blocks[:i - 1] + (a, c) + comp.blocks[i:]
            add_into(out, {SetComposition(new).key: Fraction(sign)})
    return tuple(sorted(out.items()))


def cobar_d(x: CobarElement) -> CobarElement:
    """``d = sum_i (-1)^i d_i`` with ``d_i`` splitting block ``i`` into two nonempty blocks."""
    out: Dict[str, Fraction] = {}
    for key, c in x.items():
        for k2, c2 in _d_key(key):
            add_into(out, {k2: c2}, c)
    return CobarElement._from_clean(out)


def _ordered_partitions(items: Tuple[int, ...], k: int) -> Iterator[Tuple[FrozenSet[int], ...]]:
    if k == 0:
        if not items:
            yield ()
        return
    if not items:
        return
    rest_count = len(items)
    for r in range(1, rest_count - k + 2):
        for first in combinations(items, r):
            remaining = tuple(i for i in items if i not in first)
            for tail in _ordered_partitions(remaining, k - 1):
                yield (frozenset(first),) + tail


@lru_cache(maxsize=None)
def cobar_basis(n: int, k: int) -> Tuple[str, ...]:
    """Keys of all ordered set compositions of ``{1..n}`` into ``k`` blocks, sorted."""
    return tuple(sorted(SetComposition(p).key for p in _ordered_partitions(tuple(range(1, n + 1)), k)))


def omega(n: int) -> CobarElement:
    """``1/n! sum_sigma sign(sigma) ({sigma(1)}, ..., {sigma(n)})``."""
    data: Dict[str, Fraction] = {}
    for perm in permutations(range(1, n + 1)):
        sign = -1 if permutation_parity([p - 1 for p in perm]) else 1
        key = SetComposition(tuple(frozenset([p]) for p in perm)).key
        data[key] = Fraction(sign, factorial(n))
    return CobarElement._from_clean(data)


@dataclass
class CobarCohomology:
    n: int
    chain_dims: Dict[int, int]
    ranks: Dict[int, int]  # rank of d: C^k -> C^{k+1}
    dims: Dict[int, int]
    top_class_nonzero: bool
    omega_closed: bool

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def dims_tuple(self) -> Tuple[int, ...]:
        return tuple(self.dims[k] for k in range(1, self.n + 1))


def d_matrix_rank(n: int, k: int) -> int:
    return row_reduce(dict(_d_key(key)) for key in cobar_basis(n, k)).rank


def cobar_cohomology(n: int) -> CobarCohomology:
    """Dimensions of ``H^k`` for ``k = 1..n`` and a check that ``[omega_n]`` spans the top degree."""
    if n < 1:
        raise ValueError("n must be positive")
    chain = {k: len(cobar_basis(n, k)) for k in range(1, n + 1)}
    ranks = {k: (d_matrix_rank(n, k) if k < n else 0) for k in range(0, n + 1)}
    ranks[0] = 0
    dims = {k: chain[k] - ranks[k] - ranks[k - 1] for k in range(1, n + 1)}
    w = omega(n)
    closed = not cobar_d(w)
    top_image = row_reduce(dict(_d_key(key)) for key in cobar_basis(n, n - 1)) if n > 1 else None
    nonzero = True if top_image is None else not top_image.in_span(w)[0]
    return CobarCohomology(n, chain, {k: v for k, v in ranks.items() if k >= 1}, dims, nonzero, closed)


def euler_characteristic(n: int) -> int:
    return sum((-1) ** k * len(cobar_basis(n, k)) for k in range(1, n + 1))


def euler_by_formula(n: int) -> int:
    """``sum_k (-1)^k k! S(n, k)`` with Stirling numbers from their recurrence."""
    stirling = [[0] * (n + 1) for _ in range(n + 1)]
    stirling[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, i + 1):
            stirling[i][k] = k * stirling[i - 1][k] + stirling[i - 1][k - 1]
    return sum((-1) ** k * factorial(k) * stirling[n][k] for k in range(1, n + 1))


# ---------------------------------------------------------------- gluing

class GlueError(ValueError):
    pass


def is_univalent_core(g: DirectedGraph) -> bool:
    indeg, outdeg = vertex_degrees(g)
    return all(indeg[v] + outdeg[v] == 1 for v in range(g.n))


def has_external_edge(g: DirectedGraph) -> bool:
    return any(s < g.n and t < g.n for s, t in g.edges)


def glue_sign(core: DirectedGraph, k: int) -> int:
    exponent = k * degree(core) + k * (k + 1) // 2
    return -1 if exponent % 2 else 1


def glue_graph(core: DirectedGraph, comp: SetComposition) -> DirectedGraph:
    """Merge the core's external vertices block by block (edge order unchanged)."""
    if not is_univalent_core(core):
        raise GlueError(f"core {core} has a non-univalent external vertex")
    comp.validate(core.n)
    k = comp.k
    block_of = {}
    for idx, block in enumerate(comp.blocks):
        for i in block:
            block_of[i - 1] = idx

    def relabel(v: int) -> int:
        return block_of[v] if v < core.n else k + (v - core.n)

    return DirectedGraph(k, core.m, tuple((relabel(s), relabel(t)) for s, t in core.edges))


def glue(core: DirectedGraph, comp: SetComposition) -> GraphSum:
    """Signed glued graph; zero when the merge creates a loop or repeated edge."""
    g = glue_graph(core, comp)
    if admissibility_violation(g):
        return GraphSum()
    key, sign = canonical_key(g)
    if key is None:
        return GraphSum()
    return GraphSum._from_clean({key: Fraction(sign * glue_sign(core, comp.k))})


def glue_linear(core: DirectedGraph, x: CobarElement) -> GraphSum:
    out: Dict[str, Fraction] = {}
    for comp, c in x.compositions():
        add_into(out, glue(core, comp), c)
    return GraphSum._from_clean(out)


def a2() -> GraphSum:
    return GraphSum.from_graph(DirectedGraph(2, 0, ()))


def chain_map_defect(core: DirectedGraph, comp: SetComposition) -> GraphSum:
    """``glue(core, d comp) - [a2, glue(core, comp)]``; zero when gluing intertwines the differentials."""
    lhs = glue_linear(core, cobar_d(CobarElement.of(comp)))
    rhs = bracket(a2(), glue(core, comp))
    return lhs - rhs


@lru_cache(maxsize=None)
def univalent_cores(n: int, m: int, allow_external_edges: bool = False) -> Tuple[str, ...]:
    """Canonical keys of nonzero admissible cores with ``n`` univalent externals and ``m`` internals."""
    keys = []
    max_edges = (n + 3 * m) // 2
    for e in range(0, max_edges + 1):
        for key in enumerate_slice(n, m, e, 1):
            g = decode_key(key)
            if not is_univalent_core(g):
                continue
            if not allow_external_edges and has_external_edge(g):
                continue
            keys.append(key)
    return tuple(keys)


def all_compositions(n: int) -> List[SetComposition]:
    return [SetComposition.from_key(key) for k in range(1, n + 1) for key in cobar_basis(n, k)]


@dataclass
class GlueBijectivity:
    n: int
    m: int
    domain_size: int
    coinvariant_relations_rank: int
    coinvariant_dim: int
    image_rank: int
    target_dim: int
    equivariant: bool

    @property
    def bijective(self) -> bool:
        return self.equivariant and self.coinvariant_dim == self.image_rank == self.target_dim


def _permute_core(core: DirectedGraph, sigma: Sequence[int]) -> DirectedGraph:
    """Relabel externals: old external ``i`` (0-based) becomes ``sigma[i]``."""
    def relabel(v):
        return sigma[v] if v < core.n else v
    return DirectedGraph(core.n, core.m, tuple((relabel(s), relabel(t)) for s, t in core.edges))


def glue_target_slice(k: int, n: int, m: int) -> List[str]:
    """Graphs with ``k`` externals, ``m`` internals, ``n`` edge ends at externals,
    no isolated externals and no edge between two externals."""
    out = []
    for e in range(0, (n + 3 * m) // 2 + 1):
        for key in enumerate_slice(k, m, e):
            g = decode_key(key)
            if has_external_edge(g):
                continue
            indeg, outdeg = vertex_degrees(g)
            ends = sum(indeg[v] + outdeg[v] for v in range(k))
            if ends == n and all(indeg[v] + outdeg[v] > 0 for v in range(k)):
                out.append(key)
    return out


def glue_bijectivity(n: int, m: int) -> GlueBijectivity:
    """Check that gluing induces an isomorphism from the ``S_n``-coinvariants of
    cores (with ``m`` internals, no external-external edges) tensor compositions
    onto the corresponding graph slices."""
    cores = univalent_cores(n, m)
    comps = all_compositions(n)
    domain = [(c, comp) for c in cores for comp in comps]
    relations = []
    equivariant = True
    for c, comp in domain:
        core = decode_key(c)
        for perm in permutations(range(n)):
            moved = _permute_core(core, perm)
            key, sign = canonical_key(moved)
            moved_comp = comp.permuted({i + 1: perm[i] + 1 for i in range(n)})
            # core.sigma (x) sigma.comp is identified with core (x) comp
            vec: Dict[str, Fraction] = {f"{c}#{comp.key}": Fraction(1)}
            if key is not None:
                add_into(vec, {f"{key}#{moved_comp.key}": Fraction(-sign)})
                if glue(core, comp) != glue(moved, moved_comp):
                    equivariant = False
            relations.append(vec)
    rel_basis = row_reduce(relations)
    # glue is constant on orbits, so it factors through the coinvariants; the
    # induced map is injective iff its rank equals the coinvariant dimension
    images = [dict(glue(decode_key(c), comp)) for c, comp in domain]
    image_rank = row_reduce(images).rank
    targets = set()
    for k in range(1, n + 1):
        targets.update(glue_target_slice(k, n, m))
    return GlueBijectivity(
        n=n, m=m, domain_size=len(domain), coinvariant_relations_rank=rel_basis.rank,
        coinvariant_dim=len(domain) - rel_basis.rank, image_rank=image_rank,
        target_dim=len(targets), equivariant=equivariant)


# ---------------------------------------------------------------- cohomology of graph slices

@dataclass
class CorollaryReport:
    n: int
    m: int
    graph_dims: Dict[int, int]  # k externals -> dim H^k of (slice, ad_a2) mod IHX
    antisymmetric_core_dim: int

    @property
    def agrees(self) -> bool:
        total = sum(self.graph_dims.values())
        return total == self.antisymmetric_core_dim and all(
            d == 0 for k, d in self.graph_dims.items() if k != self.n)


def _slice_relations_within(keys: Sequence[str]) -> List[Dict[str, Fraction]]:
    from .ihx import quotient
    from .graphs import key_slice
    allowed = set(keys)
    out = []
    for sl in sorted({key_slice(k) for k in keys}):
        for rel in quotient(*sl).relations:
            support = set(rel.relation)
            if support and support <= allowed:
                out.append(dict(rel.relation))
            elif support & allowed:
                raise ValueError("an IHX relation leaves the glued subcomplex")
    return out


def slice_cohomology_vs_corollary(n: int, m: int) -> CorollaryReport:
    """Compare ``H(graphs with n external edge ends and m internals, ad_a2)`` mod IHX
    with the totally antisymmetric part of the univalent cores.

    Both sides are restricted to graphs without edges between two externals
    and without isolated externals.
    """
    chains = {k: glue_target_slice(k, n, m) for k in range(1, n + 1)}
    rels = {k: _slice_relations_within(chains[k]) for k in chains}
    rel_rank = {k: row_reduce(rels[k]).rank for k in chains}
    d_rank = {0: 0, n: 0}
    a = a2()
    for k in range(1, n):
        images = [dict(bracket(a, GraphSum._from_clean({key: Fraction(1)}))) for key in chains[k]]
        d_rank[k] = row_reduce(rels[k + 1] + images).rank - rel_rank[k + 1]
    dims = {k: len(chains[k]) - rel_rank[k] - d_rank[k] - d_rank[k - 1] for k in range(1, n + 1)}
    # antisymmetric coinvariants of the cores modulo IHX
    cores = univalent_cores(n, m)
    vectors = []
    for c in cores:
        core = decode_key(c)
        for perm in permutations(range(n)):
            key, sign = canonical_key(_permute_core(core, perm))
            vec = {c: Fraction(1)}
            if key is not None:
                parity = -1 if permutation_parity(list(perm)) else 1
                add_into(vec, {key: Fraction(-sign * parity)})
            vectors.append(vec)
    vectors.extend(_slice_relations_within(cores))
    core_dim = len(cores) - row_reduce(vectors).rank
    return CorollaryReport(n, m, dims, core_dim)
