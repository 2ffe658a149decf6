"""Bayesian network structure: DAG validation, moralization, balanced coloring.

Parent lists are kept in ascending variable order. That order fixes the
mixed-radix row indexing of every probability table: for a variable with
parents ``p1 < p2 < ... < pk``, the row index of a parent configuration is
``a[p1]*card[p2]*...*card[pk] + ... + a[pk]`` (first parent most significant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CardinalityTooSmall, CycleDetected, DuplicateEdge, InvalidIndex


@dataclass(frozen=True)
class Network:
    """A validated DAG over discrete variables.

    ``parents[i]`` is variable i's parent tuple in ascending index order;
    ``children[i]`` the mirror image. ``topo_order`` is one valid topological
    ordering consistent with the edges.
    """

    cardinalities: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]
    children: tuple[tuple[int, ...], ...]
    topo_order: tuple[int, ...]

    @property
    def num_vars(self) -> int:
        return len(self.cardinalities)

    def num_parent_configs(self, v: int) -> int:
        configs = 1
        for p in self.parents[v]:
            configs *= self.cardinalities[p]
        return configs

    def parent_strides(self, v: int) -> np.ndarray:
        """Mixed-radix strides over parents[v]; first parent most significant."""
        cards = [self.cardinalities[p] for p in self.parents[v]]
        strides = np.ones(len(cards), dtype=np.int64)
        for j in range(len(cards) - 2, -1, -1):
            strides[j] = strides[j + 1] * cards[j + 1]
        return strides

    def table_shape(self, v: int) -> tuple[int, int]:
        return self.num_parent_configs(v), self.cardinalities[v]


@dataclass(frozen=True)
class MoralGraph:
    """Undirected graph joining each node to its parents and co-parents."""

    num_vars: int
    edges: frozenset[tuple[int, int]]  # normalized (u, v) with u < v

    def adjacency_lists(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.num_vars)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj


@dataclass(frozen=True)
class Coloring:
    """A proper coloring of the moral graph; groups[c] lists color c's variables."""

    colors: tuple[int, ...]
    num_colors: int
    groups: tuple[tuple[int, ...], ...]


def build_network(cardinalities: list[int], edges: list[tuple[int, int]]) -> Network:
    """Validate structure and compute a topological order.

    Raises CardinalityTooSmall, InvalidIndex, DuplicateEdge, or CycleDetected.
    """
    n = len(cardinalities)
    for i, card in enumerate(cardinalities):
        if card < 2:
            raise CardinalityTooSmall(f"variable {i} has cardinality {card}, need >= 2")

    seen: set[tuple[int, int]] = set()
    parents: list[list[int]] = [[] for _ in range(n)]
    children: list[list[int]] = [[] for _ in range(n)]
    for parent, child in edges:
        if not (0 <= parent < n and 0 <= child < n):
            raise InvalidIndex(f"edge ({parent}, {child}) out of range for {n} variables")
        if parent == child:
            raise CycleDetected(f"self-edge on variable {parent}")
        if (parent, child) in seen:
            raise DuplicateEdge(f"edge ({parent}, {child}) given twice")
        seen.add((parent, child))
        parents[child].append(parent)
        children[parent].append(child)

    # Kahn's algorithm; smallest-index-first keeps the order deterministic.
    indegree = [len(parents[i]) for i in range(n)]
    ready = sorted(i for i in range(n) if indegree[i] == 0)
    topo: list[int] = []
    while ready:
        v = ready.pop(0)
        topo.append(v)
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
        ready.sort()
    if len(topo) != n:
        raise CycleDetected("edge set contains a directed cycle")

    return Network(
        cardinalities=tuple(int(c) for c in cardinalities),
        parents=tuple(tuple(sorted(ps)) for ps in parents),
        children=tuple(tuple(sorted(cs)) for cs in children),
        topo_order=tuple(topo),
    )


def children_of(net: Network, v: int) -> list[int]:
    """All u with v in parents[u], ascending."""
    if not (0 <= v < net.num_vars):
        raise InvalidIndex(f"variable {v} out of range for {net.num_vars} variables")
    return list(net.children[v])


def moralize(net: Network) -> MoralGraph:
    """Drop edge orientations and join every co-parent pair."""
    edges: set[tuple[int, int]] = set()
    for child in range(net.num_vars):
        ps = net.parents[child]
        for p in ps:
            edges.add((min(p, child), max(p, child)))
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                edges.add((ps[i], ps[j]))  # parents are sorted, so ps[i] < ps[j]
    return MoralGraph(num_vars=net.num_vars, edges=frozenset(edges))


def color_graph(g: MoralGraph, seed: int = 0) -> Coloring:
    """Greedy balanced coloring of the moral graph.

    Vertices are processed largest-degree-first (ties by index); each vertex
    takes the feasible existing color with the smallest class (ties by color
    id), opening a new color only when none is feasible, so k <= max degree
    + 1. The heuristic is fully deterministic; ``seed`` is accepted for
    interface stability but never consulted.
    """
    adj = g.adjacency_lists()
    order = sorted(range(g.num_vars), key=lambda v: (-len(adj[v]), v))

    colors = [-1] * g.num_vars
    class_sizes: list[int] = []
    for v in order:
        blocked = {colors[u] for u in adj[v] if colors[u] >= 0}
        feasible = [c for c in range(len(class_sizes)) if c not in blocked]
        if feasible:
            chosen = min(feasible, key=lambda c: (class_sizes[c], c))
        else:
            chosen = len(class_sizes)
            class_sizes.append(0)
        colors[v] = chosen
        class_sizes[chosen] += 1

    num_colors = len(class_sizes)
    groups: list[list[int]] = [[] for _ in range(num_colors)]
    for v, c in enumerate(colors):
        groups[c].append(v)
    return Coloring(
        colors=tuple(colors),
        num_colors=num_colors,
        groups=tuple(tuple(grp) for grp in groups),
    )
