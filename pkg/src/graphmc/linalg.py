"""Exact linear algebra over the rationals.

Vectors are sparse maps from opaque string labels to :class:`~fractions.Fraction`.
Row reduction keeps a reduced row-echelon basis whose pivot in each row is the
lexicographically smallest label of that row.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Tuple

Rational = Fraction


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use Fraction or int")
    return Fraction(value)


class SparseVector(Mapping):
    """Immutable sparse vector with no stored zeros."""

    __slots__ = ("_data", "_hash")

    def __init__(self, entries: Optional[Mapping] = None):
        data = {}
        if entries:
            for key, value in entries.items():
                value = as_rational(value)
                if value:
                    data[key] = value
        self._data: Dict[Hashable, Fraction] = data
        self._hash = None

    @classmethod
    def _from_clean(cls, data: Dict) -> "SparseVector":
        vec = cls.__new__(cls)
        vec._data = data
        vec._hash = None
        return vec

    def __getitem__(self, key) -> Fraction:
        return self._data[key]

    def get(self, key, default=Fraction(0)):
        return self._data.get(key, default)

    def __iter__(self) -> Iterator:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def __eq__(self, other) -> bool:
        if isinstance(other, SparseVector):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self._data == SparseVector(other)._data
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._data)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        data = dict(self._data)
        add_into(data, other._data)
        return SparseVector._from_clean(data)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        data = dict(self._data)
        add_into(data, other._data, Fraction(-1))
        return SparseVector._from_clean(data)

    def __neg__(self) -> "SparseVector":
        return SparseVector._from_clean({k: -v for k, v in self._data.items()})

    def __mul__(self, scalar) -> "SparseVector":
        scalar = as_rational(scalar)
        if not scalar:
            return SparseVector()
        return SparseVector._from_clean({k: v * scalar for k, v in self._data.items()})

    __rmul__ = __mul__

    def items_sorted(self) -> List[Tuple[Hashable, Fraction]]:
        return sorted(self._data.items())

    def to_dict(self) -> Dict[Hashable, Fraction]:
        return dict(self._data)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v}" for k, v in self.items_sorted())
        return f"SparseVector({{{inner}}})"


def add_into(target: Dict, source: Mapping, scale: Fraction = Fraction(1)) -> None:
    """``target += scale * source`` in place, pruning zeros."""
    for key, value in source.items():
        new = target.get(key, 0) + scale * value
        if new:
            target[key] = new
        else:
            target.pop(key, None)


class RowBasis:
    """Reduced row-echelon basis of a span.

    ``rows[i]`` has coefficient 1 at ``pivots[i]`` and every other pivot column
    is zero in it.  When built with ``track=True`` each row also carries the
    combination of input vectors (by input index) that produced it.
    """

    def __init__(self, track: bool = False):
        self.rows: List[Dict] = []
        self.pivots: List = []
        self._row_of: Dict = {}
        self.track = track
        self.combos: List[Dict[int, Fraction]] = []
        # for tracked inputs that reduced to zero: a kernel relation among inputs
        self.kernel: List[Dict[int, Fraction]] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vector: Mapping) -> Tuple[Dict, Dict]:
        """Return ``(remainder, coefficients)`` with ``vector = sum coeff*row + remainder``.

        The remainder has no entry in any pivot column.
        """
        if isinstance(vector, SparseVector):
            rem = vector.to_dict()
        else:
            rem = {k: as_rational(v) for k, v in vector.items() if v}
        coeffs: Dict[int, Fraction] = {}
        hits = [k for k in rem if k in self._row_of]
        for key in hits:
            c = rem.get(key)
            if not c:
                continue
            idx = self._row_of[key]
            coeffs[idx] = c
            add_into(rem, self.rows[idx], -c)
        return rem, coeffs

    def _insert(self, vector: Mapping, index: Optional[int] = None) -> bool:
        rem, coeffs = self.reduce(vector)
        combo: Dict[int, Fraction] = {}
        if self.track:
            combo = {index: Fraction(1)}
            for idx, c in coeffs.items():
                add_into(combo, self.combos[idx], -c)
        if not rem:
            if self.track:
                self.kernel.append(combo)
            return False
        pivot = min(rem)
        inv = 1 / rem[pivot]
        row = {k: v * inv for k, v in rem.items()}
        if self.track:
            combo = {k: v * inv for k, v in combo.items()}
        for idx, other in enumerate(self.rows):
            c = other.get(pivot)
            if c:
                add_into(other, row, -c)
                if self.track:
                    add_into(self.combos[idx], combo, -c)
        self._row_of[pivot] = len(self.rows)
        self.rows.append(row)
        self.pivots.append(pivot)
        if self.track:
            self.combos.append(combo)
        return True

    def in_span(self, vector: Mapping) -> Tuple[bool, Dict[int, Fraction]]:
        rem, coeffs = self.reduce(vector)
        if rem:
            return False, {}
        return True, coeffs

    def input_combination(self, coeffs: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        """Translate row coefficients into coefficients on the original inputs."""
        if not self.track:
            raise ValueError("basis was built without tracking")
        out: Dict[int, Fraction] = {}
        for idx, c in coeffs.items():
            add_into(out, self.combos[idx], c)
        return out

    def reconstruct(self, coeffs: Mapping[int, Fraction]) -> Dict:
        out: Dict = {}
        for idx, c in coeffs.items():
            add_into(out, self.rows[idx], c)
        return out

    def sorted_rows(self) -> List[Tuple]:
        order = sorted(range(len(self.rows)), key=lambda i: self.pivots[i])
        return [(self.pivots[i], sorted(self.rows[i].items())) for i in order]


def row_reduce(vectors: Iterable[Mapping], track: bool = False) -> RowBasis:
    basis = RowBasis(track=track)
    for i, vec in enumerate(vectors):
        basis._insert(vec, i)
    return basis


def in_span(vector: Mapping, basis: RowBasis) -> Tuple[bool, Dict[int, Fraction]]:
    return basis.in_span(vector)


def rank(vectors: Iterable[Mapping]) -> int:
    return row_reduce(vectors).rank
