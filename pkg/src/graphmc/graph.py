"""Finite undirected graphs on string-labelled vertices."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    DuplicateLabel,
    EmptySubset,
    ReservedCharacter,
    SelfLoop,
    UnknownEndpoint,
    UnknownLabel,
)

RESERVED = "(),"


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph.

    ``labels`` fixes the dense index of every vertex. ``edges`` holds each
    unordered pair once, endpoints in label-declaration order. Self-adjacency
    is implied by :func:`is_adjacent`, never stored.
    """

    labels: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Neighbour indices of each vertex, ascending, self excluded."""
        nbrs: list[list[int]] = [[] for _ in self.labels]
        for u, v in self.edges:
            i, j = self.index[u], self.index[v]
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean adjacency-or-equality matrix in label order."""
        a = np.eye(self.n, dtype=bool)
        for i, nb in enumerate(self.neighbors):
            a[i, list(nb)] = True
        return a

    def to_json(self) -> dict:
        edges = sorted(sorted(e) for e in self.edges)
        return {"labels": list(self.labels), "edges": [list(e) for e in edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        return build_graph(obj["labels"], [tuple(e) for e in obj.get("edges", [])])


def build_graph(labels: Sequence[str], edges: Iterable[Sequence[str]] = ()) -> Graph:
    labels = tuple(str(x) for x in labels)
    if not labels:
        raise EmptySubset("a graph needs at least one vertex")
    index: dict[str, int] = {}
    for i, lab in enumerate(labels):
        if lab in index:
            raise DuplicateLabel(f"label {lab!r} declared twice")
        index[lab] = i
    stored: set[tuple[str, str]] = set()
    for e in edges:
        u, v = e
        for x in (u, v):
            if x not in index:
                raise UnknownEndpoint(f"edge endpoint {x!r} is not a declared label")
        if u == v:
            raise SelfLoop(f"self-loop on {u!r}")
        pair = (u, v) if index[u] < index[v] else (v, u)
        if pair in stored:
            raise DuplicateEdge(f"edge {{{u},{v}}} given twice")
        stored.add(pair)
    return Graph(labels, frozenset(stored))


def _check_label(g: Graph, *labs: str) -> None:
    for lab in labs:
        if lab not in g.index:
            raise UnknownLabel(f"{lab!r} is not a vertex")


def is_adjacent(g: Graph, u: str, v: str) -> bool:
    _check_label(g, u, v)
    if u == v:
        return True
    i, j = g.index[u], g.index[v]
    return (u, v) in g.edges if i < j else (v, u) in g.edges


def connected_components(g: Graph) -> list[list[str]]:
    """Components by BFS, each in label order, ordered by smallest member."""
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = True
        queue, members = deque([start]), [start]
        while queue:
            i = queue.popleft()
            for j in g.neighbors[i]:
                if not seen[j]:
                    seen[j] = True
                    members.append(j)
                    queue.append(j)
        comps.append([g.labels[i] for i in sorted(members)])
    return comps


def is_connected(g: Graph) -> bool:
    return len(connected_components(g)) == 1


def component_of(g: Graph, label: str) -> list[str]:
    _check_label(g, label)
    for comp in connected_components(g):
        if label in comp:
            return comp
    raise AssertionError("unreachable")


def induced_subgraph(g: Graph, subset: Iterable[str]) -> Graph:
    subset = set(subset)
    if not subset:
        raise EmptySubset("induced subgraph of an empty vertex set")
    _check_label(g, *subset)
    labels = tuple(lab for lab in g.labels if lab in subset)
    edges = frozenset(e for e in g.edges if e[0] in subset and e[1] in subset)
    return Graph(labels, edges)


def product_label(*parts: str) -> str:
    return "(" + ",".join(parts) + ")"


def split_label(label: str) -> list[str]:
    """Inverse of :func:`product_label` (top level only)."""
    if not (label.startswith("(") and label.endswith(")")):
        return [label]
    parts, depth, cur = [], 0, []
    for ch in label[1:-1]:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return parts


def _validate_factor_label(label: str) -> None:
    if not any(c in label for c in RESERVED):
        return
    parts = split_label(label)
    if len(parts) < 2 or product_label(*parts) != label:
        raise ReservedCharacter(f"label {label!r} uses one of {RESERVED!r}")
    for p in parts:
        _validate_factor_label(p)


def _strong_product2(g1: Graph, g2: Graph) -> Graph:
    for lab in g1.labels + g2.labels:
        _validate_factor_label(lab)
    n2 = g2.n
    labels = tuple(product_label(a, b) for a in g1.labels for b in g2.labels)
    closed1 = [(i,) + nb for i, nb in enumerate(g1.neighbors)]
    closed2 = [(i,) + nb for i, nb in enumerate(g2.neighbors)]
    edges = set()
    for i1 in range(g1.n):
        for i2 in range(n2):
            a = i1 * n2 + i2
            # adjacent-or-equal in both coordinates and not the same vertex
            for j1 in closed1[i1]:
                for j2 in closed2[i2]:
                    b = j1 * n2 + j2
                    if a < b:
                        edges.add((labels[a], labels[b]))
    return Graph(labels, frozenset(edges))


def strong_product(*graphs: Graph) -> Graph:
    """Strong product, folded from the left for more than two factors."""
    if not graphs:
        raise EmptySubset("strong product of no graphs")
    return reduce(_strong_product2, graphs)
