"""Polydifferential operators attached to graphs.

For a Lie algebra with structure constants ``c_ij^k`` the algebra
``A = K[x_1..x_d] (x) Lambda[p^1..p^d]`` carries the element
``pi = c_ij^k x_k p^i p^j``.  A graph with ``m`` internal vertices acts on
``n`` arguments by placing ``pi`` on each internal vertex, applying the odd
operator ``tau = sum_l d/dp^l (x) d/dx_l`` along every edge (first edge first)
and multiplying everything together.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from math import factorial
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .graphs import DirectedGraph, GraphSum, decode_key, degree, second_grading
from .linalg import add_into, as_rational

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

Monomial = Tuple[Tuple[int, ...], Tuple[int, ...]]  # (x exponents, sorted p indices)


class LieDataError(ValueError):
    pass


# ---------------------------------------------------------------- Lie data

@dataclass(frozen=True)
class LieData:
    """Structure constants ``c[(i, j, k)]`` (0-based) with ``[x_i, x_j] = c_ij^k x_k``."""

    dim: int
    c: Tuple[Tuple[Tuple[int, int, int], Fraction], ...]
    name: str = "custom"

    @property
    def table(self) -> Dict[Tuple[int, int, int], Fraction]:
        return dict(self.c)

    def const(self, i: int, j: int, k: int) -> Fraction:
        return self.table.get((i, j, k), Fraction(0))

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[Sequence], name: str = "custom",
                     complete: bool = True, validate: bool = True) -> "LieData":
        """Build from 1-based ``[i, j, k, value]`` entries.

        With ``complete`` each entry also sets ``c_ji^k = -value``.  A
        conflicting pair of entries raises.  With ``validate`` antisymmetry and
        the Jacobi identity are checked.
        """
        table: Dict[Tuple[int, int, int], Fraction] = {}

        def put(key, value):
            if key in table and table[key] != value:
                raise LieDataError(f"conflicting values for c_{key[0] + 1}{key[1] + 1}^{key[2] + 1}")
            table[key] = value

        for entry in entries:
            if len(entry) != 4:
                raise LieDataError(f"entry {entry!r} is not [i, j, k, value]")
            i, j, k = (int(v) - 1 for v in entry[:3])
            for idx in (i, j, k):
                if not 0 <= idx < dim:
                    raise LieDataError(f"index {idx + 1} outside 1..{dim} in entry {entry!r}")
            value = as_rational(Fraction(str(entry[3])) if isinstance(entry[3], str) else entry[3])
            put((i, j, k), value)
            if complete:
                put((j, i, k), -value)
        data = tuple(sorted((key, v) for key, v in table.items() if v))
        lie = cls(dim, data, name)
        if validate:
            lie.validate()
        return lie

    def validate(self) -> None:
        c = self.table
        for (i, j, k), v in c.items():
            if c.get((j, i, k), 0) != -v:
                raise LieDataError(f"antisymmetry fails for c_{i + 1}{j + 1}^{k + 1}")
        bad = jacobi_violation(self)
        if bad:
            i, j, k, l = bad
            raise LieDataError(
                f"Jacobi identity fails at (i,j,k,l) = ({i + 1},{j + 1},{k + 1},{l + 1})")

    def to_json(self) -> str:
        entries = [[i + 1, j + 1, k + 1, str(v)] for (i, j, k), v in self.c if i < j]
        return json.dumps({"dim": self.dim, "entries": entries}, indent=2)


def jacobi_violation(lie: LieData) -> Optional[Tuple[int, int, int, int]]:
    """First ``(i, j, k, l)`` where ``sum_m c_im^l c_jk^m + cyclic`` is nonzero, else None."""
    c = lie.table
    d = lie.dim
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    total = Fraction(0)
                    for m in range(d):
                        total += (c.get((i, m, l), 0) * c.get((j, k, m), 0)
                                  + c.get((j, m, l), 0) * c.get((k, i, m), 0)
                                  + c.get((k, m, l), 0) * c.get((i, j, m), 0))
                    if total:
                        return i, j, k, l
    return None


def abelian(d: int) -> LieData:
    return LieData(d, (), f"abelian{d}")


def heisenberg() -> LieData:
    return LieData.from_entries(3, [[1, 2, 3, 1]], "heisenberg")


def so3() -> LieData:
    return LieData.from_entries(3, [[1, 2, 3, 1], [2, 3, 1, 1], [3, 1, 2, 1]], "so3")


def sl2() -> LieData:
    """Basis ``(e, h, f) = (x_1, x_2, x_3)`` with ``[h,e] = 2e``, ``[h,f] = -2f``, ``[e,f] = h``."""
    return LieData.from_entries(3, [[2, 1, 1, 2], [2, 3, 3, -2], [1, 3, 2, 1]], "sl2")


PRESETS: Dict[str, Callable[[], LieData]] = {
    "abelian2": lambda: abelian(2),
    "abelian3": lambda: abelian(3),
    "heisenberg": heisenberg,
    "so3": so3,
    "sl2": sl2,
}


def presets_dir() -> Path:
    return Path(__file__).parent / "presets"


def load_lie(source: str) -> LieData:
    """Load a preset by name (``so3``, ``abelian2``, ...) or a JSON/TOML config file.

    A path such as ``presets/abelian2`` without suffix is looked up among the
    shipped preset files.
    """
    path = Path(source)
    candidates = [path] if path.suffix else [path.with_suffix(".json"), path.with_suffix(".toml"),
                                             presets_dir() / f"{path.name}.json"]
    for cand in candidates:
        if cand.is_file():
            return load_lie_file(cand)
    if path.name in PRESETS:
        return PRESETS[path.name]()
    if path.name.startswith("abelian") and path.name[7:].isdigit():
        return abelian(int(path.name[7:]))
    raise LieDataError(f"unknown Lie algebra {source!r}")


def load_lie_file(path: Path) -> LieData:
    text = Path(path).read_text(encoding="utf-8")
    if Path(path).suffix == ".toml":
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    if "dim" not in data:
        raise LieDataError(f"{path}: missing 'dim'")
    return LieData.from_entries(int(data["dim"]), data.get("entries", []), Path(path).stem)


# ---------------------------------------------------------------- polynomials

def _merge_p(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, Optional[Tuple[int, ...]]]:
    """Sign and sorted union of two sorted index tuples (None if they overlap)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return 0, None
    inversions = 0
    for x in a:
        for y in b:
            if y < x:
                inversions += 1
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class Poly:
    """Element of ``K[x_1..x_d] (x) Lambda[p^1..p^d]`` as a map monomial -> coefficient."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Optional[Mapping[Monomial, Fraction]] = None):
        self.d = d
        self.terms: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                c = as_rational(c)
                if c:
                    self.terms[mono] = c

    @classmethod
    def one(cls, d: int) -> "Poly":
        return cls(d, {((0,) * d, ()): Fraction(1)})

    @classmethod
    def x(cls, d: int, i: int) -> "Poly":
        exps = [0] * d
        exps[i] = 1
        return cls(d, {(tuple(exps), ()): Fraction(1)})

    @classmethod
    def p(cls, d: int, i: int) -> "Poly":
        return cls(d, {((0,) * d, (i,)): Fraction(1)})

    @classmethod
    def monomial(cls, d: int, mono: Monomial, coeff=1) -> "Poly":
        return cls(d, {mono: coeff})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.one(self.d) * other
        return isinstance(other, Poly) and self.terms == other.terms

    def __add__(self, other: "Poly") -> "Poly":
        out = Poly(self.d)
        out.terms = dict(self.terms)
        add_into(out.terms, other.terms)
        return out

    def __sub__(self, other: "Poly") -> "Poly":
        out = Poly(self.d)
        out.terms = dict(self.terms)
        add_into(out.terms, other.terms, Fraction(-1))
        return out

    def __neg__(self) -> "Poly":
        return self * -1

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            scalar = as_rational(other)
            return Poly(self.d, {m: c * scalar for m, c in self.terms.items()})
        out: Dict[Monomial, Fraction] = {}
        for (xa, pa), ca in self.terms.items():
            for (xb, pb), cb in other.terms.items():
                sign, merged = _merge_p(pa, pb)
                if not sign:
                    continue
                mono = (tuple(u + v for u, v in zip(xa, xb)), merged)
                add_into(out, {mono: ca * cb * sign})
        res = Poly(self.d)
        res.terms = out
        return res

    __rmul__ = __mul__

    def dx(self, l: int) -> "Poly":
        out: Dict[Monomial, Fraction] = {}
        for (xs, ps), c in self.terms.items():
            if xs[l]:
                new = list(xs)
                new[l] -= 1
                out[(tuple(new), ps)] = c * xs[l]
        res = Poly(self.d)
        res.terms = out
        return res

    def dp(self, l: int) -> "Poly":
        """Left derivative: ``d/dp^l`` acts from the left, passing earlier p's with a sign."""
        out: Dict[Monomial, Fraction] = {}
        for (xs, ps), c in self.terms.items():
            if l in ps:
                pos = ps.index(l)
                out[(xs, ps[:pos] + ps[pos + 1:])] = -c if pos % 2 else c
        res = Poly(self.d)
        res.terms = out
        return res

    def homogeneous_parts(self) -> Dict[int, "Poly"]:
        parts: Dict[int, Dict[Monomial, Fraction]] = {}
        for mono, c in self.terms.items():
            parts.setdefault(len(mono[1]), {})[mono] = c
        out = {}
        for k, terms in parts.items():
            p = Poly(self.d)
            p.terms = terms
            out[k] = p
        return out

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return format_poly(self)


def format_monomial(mono: Monomial) -> str:
    xs, ps = mono
    factors = []
    for i, e in enumerate(xs):
        factors.extend([f"x_{i + 1}"] * e)
    factors.extend(f"p^{i + 1}" for i in ps)
    return "*".join(factors) if factors else "1"


def format_poly(f: Poly) -> str:
    if not f.terms:
        return "0"
    parts = []
    for mono in sorted(f.terms, key=lambda m: (len(m[1]) + sum(m[0]), [-e for e in m[0]], m[1])):
        c = f.terms[mono]
        body = format_monomial(mono)
        mag = abs(c)
        if body == "1":
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if not parts:
            parts.append(text if c > 0 else f"-{text}")
        else:
            parts.append(("+ " if c > 0 else "- ") + text)
    return " ".join(parts)


def parse_poly(text: str, d: int) -> Poly:
    """Parse ``2*x_1*x_2 - 1/2*p^1*p^3 + 1``-style text."""
    import re
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty polynomial")
    total = Poly(d)
    for sign, body in re.findall(r"([+-]?)([^+-]+)", src):
        coeff = Fraction(-1 if sign == "-" else 1)
        term = Poly.one(d)
        for factor in body.split("*"):
            m = re.fullmatch(r"x_?(\d+)(?:\^(\d+))?", factor)
            if m:
                i = int(m.group(1)) - 1
                if not 0 <= i < d:
                    raise ValueError(f"variable {factor} outside dimension {d}")
                power = int(m.group(2) or 1)
                for _ in range(power):
                    term = term * Poly.x(d, i)
                continue
            m = re.fullmatch(r"p[\^_]?(\d+)", factor)
            if m:
                i = int(m.group(1)) - 1
                if not 0 <= i < d:
                    raise ValueError(f"variable {factor} outside dimension {d}")
                term = term * Poly.p(d, i)
                continue
            m = re.fullmatch(r"(\d+)(?:/(\d+))?", factor)
            if m:
                coeff *= Fraction(int(m.group(1)), int(m.group(2) or 1))
                continue
            raise ValueError(f"cannot parse factor {factor!r}")
        total = total + term * coeff
    return total


def make_pi(lie: LieData) -> Poly:
    """``pi = c_ij^k x_k p^i p^j``."""
    d = lie.dim
    out = Poly(d)
    for (i, j, k), c in lie.c:
        out = out + Poly.x(d, k) * Poly.p(d, i) * Poly.p(d, j) * c
    return out


# ---------------------------------------------------------------- tensors and tau

Tensor = Dict[Tuple[Monomial, ...], Fraction]


def tensor_of(factors: Sequence[Poly]) -> Tensor:
    out: Tensor = {(): Fraction(1)}
    for f in factors:
        nxt: Tensor = {}
        for key, c in out.items():
            for mono, cf in f.terms.items():
                nxt[key + (mono,)] = c * cf
        out = nxt
    return out


def tau_apply(t: Tensor, i: int, j: int, d: int) -> Tensor:
    """Apply ``tau_ij``: ``d/dp^l`` on factor ``i`` and ``d/dx_l`` on factor ``j``, summed over ``l``.

    The odd derivative picks up the sign of every p it passes, including those
    in earlier factors.
    """
    if i == j:
        raise ValueError("tau needs two distinct factors")
    out: Tensor = {}
    for key, c in t.items():
        xs_i, ps_i = key[i]
        xs_j, ps_j = key[j]
        before = sum(len(key[f][1]) for f in range(i))
        for pos, l in enumerate(ps_i):
            e = xs_j[l]
            if not e:
                continue
            sign = -1 if (before + pos) % 2 else 1
            new = list(key)
            new[i] = (xs_i, ps_i[:pos] + ps_i[pos + 1:])
            xs_new = list(new[j][0])
            xs_new[l] -= 1
            new[j] = (tuple(xs_new), new[j][1])
            add_into(out, {tuple(new): c * sign * e})
    return out


def mu(t: Tensor, d: int) -> Poly:
    """Multiply the tensor factors in order."""
    out: Dict[Monomial, Fraction] = {}
    for key, c in t.items():
        xs = [0] * d
        ps: Tuple[int, ...] = ()
        sign = 1
        for fx, fp in key:
            for l, e in enumerate(fx):
                xs[l] += e
            s, ps = _merge_p(ps, fp)
            if not s:
                sign = 0
                break
            sign *= s
        if sign:
            add_into(out, {(tuple(xs), ps): c * sign})
    res = Poly(d)
    res.terms = out
    return res


# ---------------------------------------------------------------- B

def factor_index(g: DirectedGraph, v: int) -> int:
    """Internal vertices come first in the tensor, then the arguments."""
    return v - g.n if v >= g.n else g.m + v


def B_graph(g: DirectedGraph, args: Sequence[Poly], lie: LieData, pi: Poly = None) -> Poly:
    if len(args) != g.n:
        raise ValueError(f"graph has arity {g.n} but {len(args)} arguments were given")
    d = lie.dim
    pi = make_pi(lie) if pi is None else pi
    t = tensor_of([pi] * g.m + list(args))
    for s, e in g.edges:
        t = tau_apply(t, factor_index(g, s), factor_index(g, e), d)
        if not t:
            return Poly(d)
    return mu(t, d)


def B_eval(gs, args: Sequence[Poly], lie: LieData) -> Poly:
    """``B`` of a graph or graph sum evaluated on the arguments."""
    pi = make_pi(lie)
    if isinstance(gs, DirectedGraph):
        return B_graph(gs, args, lie, pi)
    out = Poly(lie.dim)
    for key, c in gs.items_sorted():
        out = out + B_graph(decode_key(key), args, lie, pi) * c
    return out


def ce_differential(f: Poly, lie: LieData) -> Poly:
    """``(d pi/d p^l)(d f/d x_l) + (d f/d p^l)(d pi/d x_l)``."""
    pi = make_pi(lie)
    out = Poly(lie.dim)
    for l in range(lie.dim):
        out = out + pi.dp(l) * f.dx(l) + f.dp(l) * pi.dx(l)
    return out


def jacobi_poly(lie: LieData) -> Poly:
    """``sum_m (d pi / d x_m)(d pi / d p^m)``."""
    pi = make_pi(lie)
    out = Poly(lie.dim)
    for m in range(lie.dim):
        out = out + pi.dx(m) * pi.dp(m)
    return out


def jacobi_poly_identity(lie: LieData) -> bool:
    return not jacobi_poly(lie)


# ---------------------------------------------------------------- operator tests

def monomials(d: int, x_degree: int, p_count: int) -> List[Monomial]:
    out = []
    for combo in combinations_with_replacement(range(d), x_degree):
        xs = [0] * d
        for i in combo:
            xs[i] += 1
        for ps in combinations(range(d), p_count):
            out.append((tuple(xs), ps))
    return out


def monomials_up_to(d: int, x_max: int, p_max: int) -> List[Monomial]:
    return [m for a in range(x_max + 1) for b in range(p_max + 1) for m in monomials(d, a, b)]


def derivative_profile(g: DirectedGraph) -> Tuple[Tuple[int, int], ...]:
    """Per argument: (number of x-derivatives, number of p-derivatives) it receives."""
    prof = [[0, 0] for _ in range(g.n)]
    for s, t in g.edges:
        if s < g.n:
            prof[s][1] += 1
        if t < g.n:
            prof[t][0] += 1
    return tuple(tuple(p) for p in prof)


def test_tuples(gs: GraphSum, d: int) -> List[Tuple[Monomial, ...]]:
    """Monomial argument tuples on which vanishing of ``B(gs)`` implies it is the zero operator.

    For a single derivative profile the monomials of exactly that profile
    suffice; otherwise every monomial up to the slot-wise maximum is used.
    """
    profiles = {derivative_profile(decode_key(k)) for k in gs}
    if not profiles:
        return []
    n = len(next(iter(profiles)))
    if len(profiles) == 1:
        (prof,) = profiles
        return list(product(*[monomials(d, a, b) for a, b in prof]))
    maxima = [(max(p[i][0] for p in profiles), max(p[i][1] for p in profiles)) for i in range(n)]
    return list(product(*[monomials_up_to(d, a, b) for a, b in maxima]))


def _reorder_sign(seq: Sequence[int]) -> int:
    """Sign of applying left derivatives ``d/dp^seq[0]``, ``d/dp^seq[1]``, ... to ``p^sorted(seq)``."""
    remaining = sorted(seq)
    sign = 1
    for l in seq:
        pos = remaining.index(l)
        if pos % 2:
            sign = -sign
        remaining.pop(pos)
    return sign


SymbolKey = Tuple[Monomial, ...]


def graph_symbol(g: DirectedGraph, lie: LieData, pi: Poly = None) -> Dict[SymbolKey, Poly]:
    """Value of ``B_g`` on every monomial tuple of the graph's exact derivative profile.

    The key is the tuple of argument monomials ``x^a p^S``; only tuples with a
    nonzero value appear.  Computed in one pass by recording which derivatives
    reach each argument instead of evaluating tuple by tuple.
    """
    d = lie.dim
    pi = make_pi(lie) if pi is None else pi
    prof = derivative_profile(g)
    n = g.n
    start_ext = tuple(((0,) * d, ()) for _ in range(n))
    states: Dict[Tuple, Fraction] = {}
    for key, c in tensor_of([pi] * g.m).items():
        states[(key, start_ext)] = c
    for s, t in g.edges:
        nxt: Dict[Tuple, Fraction] = {}
        for (ints, exts), c in states.items():
            if s >= n:
                fi = s - n
                before = sum(len(ints[f][1]) for f in range(fi))
                options = [(l, pos, before + pos) for pos, l in enumerate(ints[fi][1])]
            else:
                seq = exts[s][1]
                before = sum(len(mono[1]) for mono in ints)
                before += sum(prof[k][1] - len(exts[k][1]) for k in range(s))
                options = [(l, None, before) for l in range(d) if l not in seq]
            for l, pos, parity in options:
                coeff = -c if parity % 2 else c
                new_ints = list(ints)
                new_exts = list(exts)
                if s >= n:
                    xs, ps = ints[s - n]
                    new_ints[s - n] = (xs, ps[:pos] + ps[pos + 1:])
                else:
                    xs, seq = exts[s]
                    new_exts[s] = (xs, seq + (l,))
                if t >= n:
                    xs, ps = new_ints[t - n]
                    if not xs[l]:
                        continue
                    coeff = coeff * xs[l]
                    xs = list(xs)
                    xs[l] -= 1
                    new_ints[t - n] = (tuple(xs), ps)
                else:
                    xs, seq = new_exts[t]
                    xs = list(xs)
                    xs[l] += 1
                    new_exts[t] = (tuple(xs), seq)
                add_into(nxt, {(tuple(new_ints), tuple(new_exts)): coeff})
        states = nxt
        if not states:
            return {}
    out: Dict[SymbolKey, Poly] = {}
    for (ints, exts), c in states.items():
        factor = c
        for xs, seq in exts:
            for e in xs:
                factor *= factorial(e)
            factor *= _reorder_sign(seq)
        value = mu({ints: factor}, d)
        if not value:
            continue
        key = tuple((xs, tuple(sorted(seq))) for xs, seq in exts)
        out[key] = out[key] + value if key in out else value
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=100_000)
def _cached_symbol(key: str, lie: LieData) -> Dict[SymbolKey, Poly]:
    return graph_symbol(decode_key(key), lie)


def operator_symbol(gs: GraphSum, lie: LieData) -> Dict[SymbolKey, Poly]:
    """Sum of ``graph_symbol`` over the terms of ``gs``; empty iff ``B(gs)`` is the zero operator.

    Graphs of different derivative profiles have disjoint keys, and the
    symbol determines the operator, so this is an exact zero test.
    """
    out: Dict[SymbolKey, Poly] = {}
    for key, c in gs.items_sorted():
        for k, v in _cached_symbol(key, lie).items():
            out[k] = out[k] + v * c if k in out else v * c
    return {k: v for k, v in out.items() if v}


def operator_is_zero(gs: GraphSum, lie: LieData) -> Tuple[bool, Optional[SymbolKey]]:
    """Exact test that ``B(gs)`` vanishes; returns a witness argument tuple if it does not."""
    symbol = operator_symbol(gs, lie)
    if not symbol:
        return True, None
    return False, min(symbol)


def operator_is_zero_by_evaluation(gs: GraphSum, lie: LieData) -> Tuple[bool, Optional[Tuple[Monomial, ...]]]:
    """Slow reference for ``operator_is_zero``: evaluate on every test tuple."""
    arities = {decode_key(k).n for k in gs}
    if len(arities) > 1:
        for n in sorted(arities):
            ok, bad = operator_is_zero_by_evaluation(gs.arity(n), lie)
            if not ok:
                return ok, bad
        return True, None
    d = lie.dim
    for args in test_tuples(gs, d):
        value = B_eval(gs, [Poly.monomial(d, m) for m in args], lie)
        if value:
            return False, args
    return True, None


# ---------------------------------------------------------------- operators and composition

@dataclass
class Operator:
    """Multilinear operator on ``A`` of fixed arity and degree."""

    arity: int
    degree: int
    fn: Callable[[Sequence[Poly]], Poly]

    def __call__(self, args: Sequence[Poly]) -> Poly:
        if len(args) != self.arity:
            raise ValueError(f"operator of arity {self.arity} got {len(args)} arguments")
        return self.fn(args)


def graph_operator(g: DirectedGraph, lie: LieData) -> Operator:
    pi = make_pi(lie)
    return Operator(g.n, degree(g), lambda args: B_graph(g, args, lie, pi))


def _homogeneous_expand(args: Sequence[Poly]):
    """Split arguments into homogeneous components: yields (list of homogeneous polys)."""
    parts = [sorted(a.homogeneous_parts().items()) for a in args]
    for combo in product(*parts):
        yield [p for _, p in combo], [k for k, _ in combo]


def compose(f: Operator, i: int, g: Operator) -> Operator:
    """``(f o_i g)(a) = (-1)^{|g|(|a_1|+...+|a_{i-1}|)} f(a_1..a_{i-1}, g(a_i..), ..)`` (1-based ``i``)."""
    if not 1 <= i <= f.arity:
        raise ValueError("composition slot out of range")
    arity = f.arity + g.arity - 1

    def fn(args):
        d = args[0].d if args else None
        total = None
        for parts, degs in _homogeneous_expand(args):
            inner = g(parts[i - 1:i - 1 + g.arity])
            outer = f(parts[:i - 1] + [inner] + parts[i - 1 + g.arity:])
            if (g.degree * sum(degs[:i - 1])) % 2:
                outer = -outer
            total = outer if total is None else total + outer
        return total if total is not None else Poly(d)

    return Operator(arity, f.degree + g.degree, fn)


def operad_morphism_defect(g1: DirectedGraph, i: int, g2: DirectedGraph, lie: LieData,
                           args: Sequence[Poly]) -> Poly:
    """``B(g1 o_i g2)(args) - (-1)^{|g1||g2|} (B(g1) o_i B(g2))(args)``."""
    from .operad import insert
    lhs = B_eval(insert(GraphSum.from_graph(g1), i, GraphSum.from_graph(g2)), args, lie)
    rhs = compose(graph_operator(g1, lie), i, graph_operator(g2, lie))(args)
    if (degree(g1) * degree(g2)) % 2:
        rhs = -rhs
    return lhs - rhs


# ---------------------------------------------------------------- star product

def star_product_eval(alpha: GraphSum, f: Poly, g: Poly, lie: LieData,
                      max_internal: Optional[int] = None) -> Poly:
    """``sum c_Gamma B_Gamma(f, g)`` over the arity-2 terms of ``alpha``."""
    part = alpha.arity(2)
    if max_internal is not None:
        part = part.filter(lambda h: h.m <= max_internal)
    return B_eval(part, [f, g], lie)


def poisson_bracket(f: Poly, g: Poly, lie: LieData) -> Poly:
    """``c_ij^k x_k (df/dx_i)(dg/dx_j)``."""
    d = lie.dim
    out = Poly(d)
    for (i, j, k), c in lie.c:
        out = out + Poly.x(d, k) * f.dx(i) * g.dx(j) * c
    return out


# ---------------------------------------------------------------- A-infinity residuals

def _graph_terms(alpha: GraphSum):
    return [(decode_key(k), c) for k, c in alpha.items_sorted()]


def _residual_pairs(alpha: GraphSum, lie: LieData, grading: int, n_args: int):
    """(coefficient, outer operator, slot, inner operator) for every composition in the residual."""
    from .operad import star_sign
    terms = _graph_terms(alpha)
    ops = [graph_operator(g, lie) for g, _ in terms]
    out = []
    for (g1, c1), op1 in zip(terms, ops):
        for (g2, c2), op2 in zip(terms, ops):
            if second_grading(g1) + second_grading(g2) != grading or g1.n + g2.n - 1 != n_args:
                continue
            for i in range(1, g1.n + 1):
                sign = star_sign(g1, i, g2)
                if (degree(g1) * degree(g2)) % 2:
                    sign = -sign
                out.append((c1 * c2 * sign, compose(op1, i, op2)))
    return out


def ainfty_residual(alpha: GraphSum, lie: LieData, grading: int, args: Sequence[Poly],
                    pairs=None) -> Poly:
    """Grading-``grading`` part of ``B(alpha) * B(alpha)`` on ``args`` via operator composition.

    Uses the pre-Lie sign of the graph side together with the Koszul sign
    relating graph insertion to operator composition, so that the result is
    the operator-level counterpart of ``(1/2)[alpha, alpha]``.
    """
    if pairs is None:
        pairs = _residual_pairs(alpha, lie, grading, len(args))
    total = Poly(lie.dim)
    for coeff, op in pairs:
        total = total + op(list(args)) * coeff
    return total


@dataclass
class AssociativityReport:
    cap: int
    checked: Dict[int, int]  # grading -> number of argument tuples evaluated
    failures: Dict[int, Tuple[Tuple[str, ...], str]]  # grading -> (arguments, residual)

    @property
    def passed(self) -> bool:
        return not self.failures


def residual_test_tuples(d: int, arity: int) -> List[Tuple[Monomial, ...]]:
    """Deterministic argument tuples for the A-infinity residual of a given arity.

    Arity 1: every monomial with x-degree and p-degree at most 2.  Arity 2:
    pairs of monomials of total degree at most 2 and p-degree at most 1.
    Arity 3: triples of functions of x-degree 1 or 2, total degree at most 5.
    Graphs with two internal vertices differentiate each argument up to
    twice, which these sets reach.
    """
    if arity == 1:
        return [(m,) for m in monomials_up_to(d, 2, 2)]
    if arity == 2:
        pool = [m for m in monomials_up_to(d, 2, 1) if sum(m[0]) + len(m[1]) <= 2]
        return list(product(pool, repeat=2))
    pool = monomials(d, 1, 0) + monomials(d, 2, 0)
    return [t for t in product(pool, repeat=arity) if sum(sum(m[0]) for m in t) <= arity + 2]


def associativity_to_order(alpha: GraphSum, lie: LieData, cap: int = 4, samples: int = 20,
                           seed: int = 0, gradings: Optional[Sequence[int]] = None) -> AssociativityReport:
    """Evaluate the operator-level A-infinity relations of ``B(alpha)`` grading by grading.

    For each grading from 2 up to ``cap`` and each arity produced by composing
    two terms, the residual is evaluated on ``residual_test_tuples`` and on
    ``samples`` seeded random tuples mixing x- and p-variables.
    """
    rng = random.Random(seed)
    d = lie.dim
    arities = sorted({decode_key(k).n for k in alpha})
    result_arities = sorted({a + b - 1 for a in arities for b in arities})
    mixed = monomials_up_to(d, 2, 1)
    checked: Dict[int, int] = {}
    failures: Dict[int, Tuple[Tuple[str, ...], str]] = {}
    for grading in (gradings if gradings is not None else range(2, cap + 1)):
        count = 0
        for n_args in result_arities:
            tuples = residual_test_tuples(d, n_args)
            tuples += [tuple(rng.choice(mixed) for _ in range(n_args)) for _ in range(samples)]
            pairs = _residual_pairs(alpha, lie, grading, n_args)
            for tup in tuples:
                if not pairs:
                    count += len(tuples)
                    break
                res = ainfty_residual(alpha, lie, grading, [Poly.monomial(d, m) for m in tup], pairs)
                count += 1
                if res and grading not in failures:
                    failures[grading] = (tuple(format_monomial(m) for m in tup), str(res))
        checked[grading] = count
    return AssociativityReport(cap, checked, failures)


# ---------------------------------------------------------------- IHX vanishing

def has_external_edge(g: DirectedGraph) -> bool:
    return any(s < g.n and t < g.n for s, t in g.edges)


@dataclass
class VanishingReport:
    lie: str
    checked: int
    skipped: int  # relations whose parent has an external-external edge
    failures: List[Tuple[str, SymbolKey]]  # (relation in DSL form, witness tuple)

    @property
    def passed(self) -> bool:
        return not self.failures


def ihx_vanishing(lie: LieData, n_max: int = 3, m_max: int = 2,
                  include_external_edges: bool = False,
                  e_max: Optional[int] = None) -> VanishingReport:
    """Check ``B(r) = 0`` for every IHX relation with arity at most ``n_max`` and at most ``m_max`` internals.

    An edge between two arguments is untouched by a vertex splitting and its
    ``tau`` can be moved to the front up to a common sign, so a relation whose
    parent carries such edges vanishes once the relation without them does.
    Those relations are therefore skipped unless ``include_external_edges``.
    """
    from .dsl import serialize
    from .ihx import slice_relations
    checked = skipped = 0
    failures = []
    for n in range(1, n_max + 1):
        for m in range(1, m_max + 1):
            top = n * (n - 1) + 3 * m if e_max is None else e_max
            for e in range(1, top + 1):
                for rel in slice_relations(n, m, e):
                    if not include_external_edges and has_external_edge(rel.parent):
                        skipped += 1
                        continue
                    checked += 1
                    ok, witness = operator_is_zero(rel.relation, lie)
                    if not ok:
                        failures.append((serialize(rel.relation), witness))
    return VanishingReport(lie.name, checked, skipped, failures)
