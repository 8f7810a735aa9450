"""Maurer-Cartan residuals, the truncated gauge action and the obstruction test.

Everything is organised by the second grading ``#internal + #external - 1``,
which is additive under the bracket.  Fixtures that are only known up to some
grading carry that information, so results can say which gradings they
actually determine.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .dsl import parse_graph
from .graphs import GraphSum, decode_key, key_slice, second_grading
from .ihx import enumerate_slice, quotient, reduce
from .linalg import RowBasis, add_into
from .operad import ad_pow, bracket

FIXTURE_ENV = "GRAPHMC_FIXTURES"

# Fixtures that are truncations of infinite series: highest second grading they are known to.
KNOWN_THROUGH = {"alpha_duf": 3, "xi": 2}


class MCError(ValueError):
    pass


# ---------------------------------------------------------------- fixtures

def fixtures_dir() -> Path:
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class Fixture:
    name: str
    value: GraphSum
    text: str
    known_through: Optional[int] = None  # None: exact element, no missing tail

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


def fixture_names(directory: Path = None) -> List[str]:
    directory = directory or fixtures_dir()
    return sorted(p.stem for p in directory.glob("*.g"))


def load_fixture(name: str, directory: Path = None) -> Fixture:
    directory = directory or fixtures_dir()
    path = directory / f"{name}.g"
    if not path.exists():
        raise FileNotFoundError(f"no fixture named {name!r} in {directory}")
    text = path.read_text(encoding="utf-8")
    return Fixture(name, parse_graph(text), text, KNOWN_THROUGH.get(name))


def load_fixtures(directory: Path = None) -> Dict[str, Fixture]:
    return {name: load_fixture(name, directory) for name in fixture_names(directory)}


# ---------------------------------------------------------------- truncation

@dataclass(frozen=True)
class TruncationPolicy:
    max_second_grading: int = 4

    def apply(self, x: GraphSum) -> GraphSum:
        return x.truncate(self.max_second_grading)


def _by_grading(x: GraphSum) -> Dict[int, GraphSum]:
    out: Dict[int, Dict[str, Fraction]] = {}
    for key, c in x.items():
        out.setdefault(second_grading(decode_key(key)), {})[key] = c
    return {g: GraphSum._from_clean(d) for g, d in sorted(out.items())}


# ---------------------------------------------------------------- Maurer-Cartan

@dataclass
class MCResult:
    cap: int
    determined_cap: int
    residuals: Dict[int, GraphSum]  # grading -> nonzero normal form of (1/2)[a,a]
    raw: Dict[int, GraphSum]

    @property
    def passed(self) -> bool:
        return not any(g <= self.determined_cap for g in self.residuals)


def mc_check(alpha: GraphSum, trunc: TruncationPolicy = TruncationPolicy(),
             known_through: Optional[int] = None) -> MCResult:
    """Second-grading components of ``(1/2)[alpha, alpha]`` up to the cap, reduced mod IHX.

    If ``alpha`` is known only through grading ``K``, the residual at grading
    ``g`` is determined only for ``g <= K + 1`` (the lowest grading is 1).
    """
    for key in alpha:
        d = decode_key(key)
        if d.lie_degree() != 1:
            raise MCError(f"term {d} has Lie degree {d.lie_degree()}, expected 1")
    cap = trunc.max_second_grading
    determined = cap if known_through is None else min(cap, known_through + 1)
    parts = _by_grading(alpha.truncate(cap))
    raw: Dict[int, GraphSum] = {}
    residuals: Dict[int, GraphSum] = {}
    for g in range(2, cap + 1):
        total: Dict[str, Fraction] = {}
        for g1, x in parts.items():
            y = parts.get(g - g1)
            if y is not None:
                add_into(total, bracket(x, y), Fraction(1, 2))
        value = GraphSum._from_clean(total)
        if value:
            raw[g] = value
        red = reduce(value)
        if red:
            residuals[g] = red
    return MCResult(cap, determined, residuals, raw)


# ---------------------------------------------------------------- gauge action

@dataclass
class GaugeResult:
    cap: int
    determined_cap: int
    value: GraphSum  # reduced mod IHX, truncated at ``cap``
    raw: GraphSum

    def determined(self) -> GraphSum:
        return self.value.truncate(self.determined_cap)


def gauge_act(xi: GraphSum, alpha: GraphSum, trunc: TruncationPolicy = TruncationPolicy(),
              alpha_known_through: Optional[int] = None,
              xi_known_through: Optional[int] = None) -> GaugeResult:
    """``exp(ad_xi) alpha`` truncated at the cap and reduced mod IHX.

    A missing grading-``K+1`` tail of ``alpha`` first matters at grading
    ``K+1``; a missing grading-``L+1`` tail of ``xi`` first matters at
    grading ``L+2``.  The smallest such grading minus one is the determined cap.
    """
    for key in xi:
        d = decode_key(key)
        if d.lie_degree() != 0:
            raise MCError(f"gauge parameter term {d} has Lie degree {d.lie_degree()}, expected 0")
        if second_grading(d) == 0:
            raise MCError("gauge parameter has a grading-0 term; the exponential series would not terminate")
    cap = trunc.max_second_grading
    determined = cap
    if alpha_known_through is not None:
        determined = min(determined, alpha_known_through)
    if xi_known_through is not None:
        determined = min(determined, xi_known_through + 1)
    total: Dict[str, Fraction] = {}
    term = alpha.truncate(cap)
    k = 0
    while term:
        add_into(total, term, Fraction(1, factorial(k)))
        k += 1
        term = ad_pow(xi, term, 1, cap)
    raw = GraphSum._from_clean(total)
    return GaugeResult(cap, determined, reduce(raw), raw)


def exp_ad_oracle(xi: GraphSum, alpha: GraphSum, cap: int) -> GraphSum:
    """Term-by-term expansion ``sum_k ad_xi^k(alpha) / k!`` with no intermediate truncation.

    Stops once every term of ``ad_xi^k(alpha)`` lies above the cap, which
    happens because each ``ad_xi`` raises the second grading by at least one.
    """
    out = GraphSum()
    term = alpha
    k = 0
    while term and min(second_grading(decode_key(key)) for key in term) <= cap:
        out = out + term * Fraction(1, factorial(k))
        k += 1
        term = bracket(xi, term)
    return out.truncate(cap)


# ---------------------------------------------------------------- obstruction

def degree_slices(lie_degree: int, grading: int) -> List[Tuple[int, int, int]]:
    """All ``(n, m, e)`` with ``n >= 1``, ``n + m - 1 = grading`` and the given Lie degree."""
    out = []
    for n in range(1, grading + 2):
        m = grading + 1 - n
        e = 2 * m + n - 1 - lie_degree
        if e >= 0:
            out.append((n, m, e))
    return out


@dataclass
class ObstructionCertificate:
    source_slices: List[Tuple[int, int, int]]
    target_slices: List[Tuple[int, int, int]]
    source_size: int
    image_rank: int
    relation_count: int
    combined_rank: int
    rows: List[Tuple]  # reduced row-echelon rows of span(image, relations)
    remainder: GraphSum  # normal form of alpha_k, nonzero iff obstructed
    functional: Dict[str, Fraction] = field(default_factory=dict)

    def functional_value(self, x: GraphSum) -> Fraction:
        return sum((self.functional.get(k, 0) * c for k, c in x.items()), Fraction(0))


@dataclass
class ObstructionResult:
    obstructed: bool
    k: int
    alpha_k: GraphSum
    witness: Optional[GraphSum]
    certificate: ObstructionCertificate


def split_by_grading(alpha: GraphSum) -> Dict[int, GraphSum]:
    return _by_grading(alpha)


def obstruction_test(alpha: GraphSum, k: int) -> ObstructionResult:
    """Decide whether the grading-``k`` part of ``alpha`` is exact for ``[alpha_1, -]`` mod IHX.

    ``alpha`` must have nothing in gradings ``2..k-1``.  The source is the full
    Lie-degree-0 slice of grading ``k-1``; membership is tested in the span of
    the image together with all IHX relations of the target slices.  When
    exact, ``witness`` is an ``eta`` with ``[alpha_1, eta] = alpha_k`` mod IHX.
    When not, the certificate carries a linear functional vanishing on that
    span but not on ``alpha_k``.
    """
    if k < 2:
        raise MCError("k must be at least 2")
    parts = _by_grading(alpha)
    alpha1 = parts.get(1, GraphSum())
    for g in range(2, k):
        if g in parts:
            raise MCError(f"alpha has a nonzero grading-{g} component below k={k}")
    if reduce(bracket(alpha1, alpha1)):
        raise MCError("the grading-1 part is not a Maurer-Cartan element")
    alpha_k = parts.get(k, GraphSum())
    sources = degree_slices(0, k - 1)
    targets = degree_slices(1, k)
    for key in alpha_k:
        if key_slice(key) not in targets:
            raise MCError(f"term {decode_key(key)} of alpha_k is outside the target slices")
    source_keys = [key for sl in sources for key in enumerate_slice(*sl)]
    images = [bracket(alpha1, GraphSum._from_clean({key: Fraction(1)})) for key in source_keys]
    relations = [r.relation for sl in targets for r in quotient(*sl).relations]
    basis = RowBasis(track=True)
    for i, vec in enumerate(images):
        basis._insert(vec, i)
    image_rank = basis.rank
    for j, vec in enumerate(relations):
        basis._insert(vec, len(images) + j)
    remainder_dict, coeffs = basis.reduce(alpha_k)
    remainder = GraphSum._from_clean(remainder_dict)
    functional: Dict[str, Fraction] = {}
    if remainder:
        probe = min(remainder)
        functional[probe] = Fraction(1)
        for pivot, row in zip(basis.pivots, basis.rows):
            c = row.get(probe)
            if c:
                functional[pivot] = -c
    cert = ObstructionCertificate(
        source_slices=sources, target_slices=targets, source_size=len(source_keys),
        image_rank=image_rank, relation_count=len(relations), combined_rank=basis.rank,
        rows=basis.sorted_rows(), remainder=remainder, functional=functional)
    witness = None
    if not remainder:
        combo = basis.input_combination(coeffs)
        eta: Dict[str, Fraction] = {}
        for idx, c in combo.items():
            if idx < len(images):
                add_into(eta, {source_keys[idx]: c})
        witness = GraphSum._from_clean(eta)
    return ObstructionResult(bool(remainder), k, alpha_k, witness, cert)


def closedness_check(x: GraphSum, alpha1: GraphSum) -> bool:
    """True iff ``[alpha1, x]`` vanishes mod IHX."""
    return not reduce(bracket(alpha1, x))


def known_through(name: str) -> Optional[int]:
    return KNOWN_THROUGH.get(name)
