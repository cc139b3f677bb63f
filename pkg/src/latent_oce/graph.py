"""Directed acyclic graphs over nodes ``1..n``."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .errors import StructureError


def _kahn_order(n: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Kahn's algorithm with a min-index frontier; raises on cycles."""
    indeg = [0] * (n + 1)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for h, j in edges:
        children[h].append(j)
        indeg[j] += 1
    frontier = [v for v in range(1, n + 1) if indeg[v] == 0]
    heapq.heapify(frontier)
    order = []
    while frontier:
        v = heapq.heappop(frontier)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(frontier, c)
    if len(order) != n:
        stuck = sorted(v for v in range(1, n + 1) if indeg[v] > 0)
        raise StructureError(f"graph contains a cycle through nodes {stuck}")
    return tuple(order)


@dataclass(frozen=True)
class Dag:
    """A validated DAG. Nodes are the integers ``1..n``; labels are cosmetic.

    Example:
        >>> Dag(3, [(1, 2), (2, 3)]).parents(3)
        frozenset({2})
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)
    labels: tuple | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise StructureError(f"node count must be a positive integer, got {self.n!r}")
        edge_list = [tuple(int(x) for x in e) for e in self.edges]
        seen = set()
        for h, j in edge_list:
            if not (1 <= h <= self.n and 1 <= j <= self.n):
                raise StructureError(f"edge ({h}, {j}) references a node outside 1..{self.n}")
            if h == j:
                raise StructureError(f"self-loop on node {h}")
            if (h, j) in seen:
                raise StructureError(f"duplicate edge ({h}, {j})")
            seen.add((h, j))
        object.__setattr__(self, "edges", frozenset(seen))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n:
                raise StructureError(f"expected {self.n} labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)
        # eager acyclicity check
        object.__setattr__(self, "_order", _kahn_order(self.n, seen))

    def _check(self, j: int) -> None:
        if not (isinstance(j, int) and 1 <= j <= self.n):
            raise StructureError(f"node {j!r} out of range 1..{self.n}")

    @cached_property
    def _parents(self) -> tuple[frozenset, ...]:
        acc: list[set[int]] = [set() for _ in range(self.n + 1)]
        for h, j in self.edges:
            acc[j].add(h)
        return tuple(frozenset(s) for s in acc)

    @cached_property
    def _children(self) -> tuple[frozenset, ...]:
        acc: list[set[int]] = [set() for _ in range(self.n + 1)]
        for h, j in self.edges:
            acc[h].add(j)
        return tuple(frozenset(s) for s in acc)

    def parents(self, j: int) -> frozenset:
        self._check(j)
        return self._parents[j]

    def children(self, j: int) -> frozenset:
        self._check(j)
        return self._children[j]

    def topological_order(self) -> tuple[int, ...]:
        return self._order

    def descendants(self, i: int) -> frozenset:
        self._check(i)
        return self._reach(i, self._children)

    def ancestors(self, i: int) -> frozenset:
        self._check(i)
        return self._reach(i, self._parents)

    @staticmethod
    def _reach(start: int, nbrs) -> frozenset:
        out: set[int] = set()
        stack = list(nbrs[start])
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(nbrs[v])
        return frozenset(out)

    def label(self, j: int) -> str:
        self._check(j)
        return self.labels[j - 1] if self.labels else str(j)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def parents(dag: Dag, j: int) -> frozenset:
    """Parent set ``pa(j)``."""
    return dag.parents(j)


def topological_order(dag: Dag) -> tuple[int, ...]:
    """Deterministic topological order; ties broken by ascending node index.

    Re-runs Kahn's algorithm on the edge set, so it also detects cycles in
    objects that bypassed construction-time validation.
    """
    return _kahn_order(dag.n, dag.edges)


def descendants(dag: Dag, i: int) -> frozenset:
    """Nodes reachable from ``i`` by a directed path, excluding ``i``."""
    return dag.descendants(i)
