import os
import sys

import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st

from graphmc.graphs import DirectedGraph, is_admissible
from graphmc.mc import load_fixtures

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GRAPHMC_SLOW"):
        return
    skip = pytest.mark.skip(reason="exhaustive check; set GRAPHMC_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def fx():
    """Fixture name -> GraphSum."""
    return {name: f.value for name, f in load_fixtures().items()}


@st.composite
def admissible_graphs(draw, max_n=3, max_m=3, max_e=6):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    total = n + m
    pairs = [(s, t) for s in range(total) for t in range(total) if s != t]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=max_e, unique=True)) if pairs else []
    g = DirectedGraph(n, m, tuple(edges))
    assume(is_admissible(g))
    return g


def pytest_terminal_summary(terminalreporter):
    """Print the per-criterion verdicts collected by the acceptance module."""
    module = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
