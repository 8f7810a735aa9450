"""Directed graph complexes with exact rational arithmetic.

Graphs, their operadic insertion and Lie bracket, the quotient by generalized
IHX relations, Maurer-Cartan and gauge computations, a cobar complex, and the
representation of graphs as polydifferential operators on a Lie algebra.
"""
from .dsl import parse_graph, serialize
from .graphs import DirectedGraph, GraphSum, canonical_key, graph
from .ihx import equal_mod_ihx, is_zero_mod_ihx, reduce
from .operad import bracket, insert, star

__version__ = "0.1.0"

__all__ = [
    "DirectedGraph",
    "GraphSum",
    "bracket",
    "canonical_key",
    "equal_mod_ihx",
    "graph",
    "insert",
    "is_zero_mod_ihx",
    "parse_graph",
    "reduce",
    "serialize",
    "star",
]
