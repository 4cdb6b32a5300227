from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, settings, strategies as st

from graphmc.dist import Distribution
from graphmc.graph import build_graph

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

EX1_LABELS = ["s1", "s2", "s3", "s4"]
EX1_EDGES = [("s1", "s3"), ("s3", "s4"), ("s2", "s4")]


@pytest.fixture
def ex1_graph():
    return build_graph(EX1_LABELS, EX1_EDGES)


@pytest.fixture
def ex1_mu(ex1_graph):
    return Distribution.from_values(ex1_graph.labels, ["1/2", "1/2", "0", "0"])


def path_graph(n):
    labels = [f"v{i}" for i in range(n)]
    return build_graph(labels, list(zip(labels, labels[1:])))


def complete_graph(n, prefix="v"):
    labels = [f"{prefix}{i}" for i in range(n)]
    return build_graph(labels, [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]])


@st.composite
def connected_graphs(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    labels = [f"v{i}" for i in range(n)]
    edges = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.add((labels[j], labels[i]))
    for i in range(n):
        for j in range(i + 1, n):
            if (labels[i], labels[j]) not in edges and draw(st.booleans()):
                edges.add((labels[i], labels[j]))
    return build_graph(labels, sorted(edges))


@st.composite
def positive_dists(draw, labels):
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=len(labels), max_size=len(labels)))
    w = np.array(w) / sum(w)
    return Distribution.from_values(labels, list(w))


@st.composite
def case2_instances(draw, min_n=3, max_n=7):
    """Connected graph plus a target whose support is disconnected in it."""
    g = draw(connected_graphs(min_n, max_n))
    # two non-adjacent vertices always exist unless g is complete
    pairs = [(i, j) for i in range(g.n) for j in range(i + 1, g.n)
             if not g.adjacency[i, j]]
    assume(pairs)
    i, j = draw(st.sampled_from(pairs))
    extra = draw(st.lists(st.integers(0, g.n - 1), max_size=g.n))
    supp = {i, j} | set(extra)
    if len(supp) == g.n:
        supp.discard(next(x for x in range(g.n) if x not in (i, j)))
    assume(not _connected_within(g.adjacency, supp))
    w = {s: draw(st.integers(1, 20)) for s in sorted(supp)}
    total = sum(w.values())
    mass = [Fraction(w.get(s, 0), total) for s in range(g.n)]
    return g, Distribution(g.labels, tuple(mass))


def _connected_within(adj, nodes):
    nodes = set(nodes)
    start = min(nodes)
    seen, stack = {start}, [start]
    while stack:
        i = stack.pop()
        for j in nodes:
            if adj[i, j] and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen == nodes


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
