"""Text format for graph sums.

::

    sum      := term (('+' | '-') term)*
    term     := [rational '*'] graph
    graph    := 'G(' 'n=' INT ';' 'I=' INT ';' 'e=[' [edge (',' edge)*] ']' ')'
    edge     := '(' vert ('->' | ',' | '--') vert ')'
    vert     := INT | 'i' INT
    rational := ['-'] INT ['/' INT]

Externals are numbered from 1, internals are written ``i1, i2, ...``.  The
position of an edge in the list is its place in the edge order.  ``(a--b)``
stands for the sum of both orientations; orientations producing an
inadmissible graph are dropped.  ``#`` starts a comment running to the end of
the line.
"""
from __future__ import annotations

import re
from fractions import Fraction
from itertools import product
from typing import List, Tuple

from .graphs import DirectedGraph, GraphError, GraphSum, admissibility_violation

__all__ = ["DSLSyntaxError", "parse_graph", "serialize", "format_graph", "format_coefficient"]


class DSLSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        line = text.count("\n", 0, position) + 1
        col = position - (text.rfind("\n", 0, position) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col} (offset {position})")
        self.position = position


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<undirected>--)
  | (?P<int>\d+)
  | (?P<internal>i\d+)
  | (?P<G>G)
  | (?P<punct>[()\[\];,=*/+\-nIe])
""", re.VERBOSE)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            tokens.append((value if kind == "punct" else kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, kind: str) -> str:
        k, value, pos = self.tokens[self.i]
        if k != kind:
            shown = value or "end of input"
            raise DSLSyntaxError(f"expected {kind!r} but found {shown!r}", pos, self.text)
        self.i += 1
        return value

    def error(self, message: str):
        raise DSLSyntaxError(message, self.tokens[self.i][2], self.text)

    def parse_sum(self) -> GraphSum:
        total = GraphSum()
        sign = 1
        if self.peek() == "-":
            self.take("-")
            sign = -1
        elif self.peek() == "+":
            self.take("+")
        if self.peek() == "end":
            self.error("empty expression")
        if self.peek() == "int" and self.tokens[self.i][1] == "0" and self.tokens[self.i + 1][0] == "end":
            self.take("int")
            return total
        while True:
            total = total + self.parse_term() * sign
            if self.peek() == "+":
                self.take("+")
                sign = 1
            elif self.peek() == "-":
                self.take("-")
                sign = -1
            elif self.peek() == "end":
                return total
            else:
                self.error("expected '+', '-' or end of input")

    def parse_term(self) -> GraphSum:
        coeff = Fraction(1)
        if self.peek() in ("int", "-"):
            neg = False
            if self.peek() == "-":
                self.take("-")
                neg = True
            num = int(self.take("int"))
            den = 1
            if self.peek() == "/":
                self.take("/")
                den = int(self.take("int"))
                if den == 0:
                    self.error("zero denominator")
            self.take("*")
            coeff = Fraction(-num if neg else num, den)
        return self.parse_graph() * coeff

    def parse_graph(self) -> GraphSum:
        start = self.tokens[self.i][2]
        self.take("G")
        self.take("(")
        self.take("n")
        self.take("=")
        n = int(self.take("int"))
        self.take(";")
        self.take("I")
        self.take("=")
        m = int(self.take("int"))
        self.take(";")
        self.take("e")
        self.take("=")
        self.take("[")
        edges = []
        if self.peek() != "]":
            edges.append(self.parse_edge(n, m))
            while self.peek() == ",":
                self.take(",")
                edges.append(self.parse_edge(n, m))
        self.take("]")
        self.take(")")
        snippet = self.text[start:self.tokens[self.i][2]].strip()
        return _expand(n, m, edges, snippet)

    def parse_edge(self, n: int, m: int):
        self.take("(")
        a = self.parse_vertex(n, m)
        kind = self.peek()
        if kind in ("arrow", "undirected", ","):
            self.take(kind)
        else:
            self.error("expected '->', '--' or ','")
        b = self.parse_vertex(n, m)
        self.take(")")
        return a, b, kind == "undirected"

    def parse_vertex(self, n: int, m: int) -> int:
        kind, value, pos = self.tokens[self.i]
        if kind == "int":
            self.i += 1
            v = int(value)
            if not 1 <= v <= n:
                raise DSLSyntaxError(f"external vertex {v} outside 1..{n}", pos, self.text)
            return v - 1
        if kind == "internal":
            self.i += 1
            v = int(value[1:])
            if not 1 <= v <= m:
                raise DSLSyntaxError(f"internal vertex {value} outside i1..i{m}", pos, self.text)
            return n + v - 1
        raise DSLSyntaxError("expected a vertex", pos, self.text)


def _expand(n, m, edges, snippet) -> GraphSum:
    choices = []
    for a, b, both in edges:
        choices.append([(a, b), (b, a)] if both else [(a, b)])
    undirected = any(both for _, _, both in edges)
    terms = []
    for chosen in product(*choices):
        g = DirectedGraph(n, m, tuple(chosen))
        problem = admissibility_violation(g)
        if problem:
            if undirected:
                continue
            raise GraphError(f"inadmissible graph term {snippet}: {problem}")
        terms.append((g, 1))
    if undirected and not terms:
        raise GraphError(f"no orientation of {snippet} is admissible")
    return GraphSum.from_terms(terms)


def parse_graph(text: str) -> GraphSum:
    """Parse a DSL string into a :class:`GraphSum`."""
    return _Parser(text).parse_sum()


def format_graph(g: DirectedGraph) -> str:
    return str(g)


def format_coefficient(c: Fraction) -> str:
    return str(c)


def serialize(gs: GraphSum) -> str:
    """Deterministic DSL text for a graph sum (``0`` for the empty sum)."""
    if not gs:
        return "0"
    parts = []
    for i, (g, c) in enumerate(gs.terms()):
        mag = abs(c)
        body = format_graph(g) if mag == 1 else f"{mag}*{format_graph(g)}"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)
