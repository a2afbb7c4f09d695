"""Graph representation with node-removal support.

Nodes are the integers ``0..n-1``. Removing a node marks it dead and drops its
incident edges from every neighbour set; node ids never change, so an attack
sequence can always be expressed against the original graph.
"""

from dataclasses import dataclass
from typing import Iterable, List, Set, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GraphError


@dataclass(frozen=True)
class ComponentPartition:
    """Weakly connected components over the live nodes."""

    # -1 for dead nodes, component label otherwise
    component_id: np.ndarray
    # component sizes, largest first
    sizes: Tuple[int, ...]

    @property
    def largest(self) -> int:
        return self.sizes[0] if self.sizes else 0

    def __len__(self):
        return len(self.sizes)


class Graph:
    """Unweighted simple graph, directed or undirected."""

    def __init__(self, n: int, directed: bool = False):
        if n < 1:
            raise GraphError(f"graph needs at least one node, got n={n}")
        self.n_initial = int(n)
        self.directed = bool(directed)
        self._out: List[Set[int]] = [set() for _ in range(n)]
        # undirected graphs share one neighbour list for both directions
        self._in: List[Set[int]] = [set() for _ in range(n)] if directed else self._out
        self._alive = np.ones(n, dtype=bool)
        self.n_alive = int(n)
        self.edge_count = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]], directed: bool = False) -> "Graph":
        graph = cls(n, directed)
        for u, v in edges:
            graph.add_edge(int(u), int(v))
        return graph

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, n={self.n_initial}, alive={self.n_alive}, edges={self.edge_count})"

    # ---- liveness ------------------------------------------------------

    def _check_node(self, v: int):
        if not 0 <= v < self.n_initial:
            raise GraphError(f"node {v} out of range [0, {self.n_initial})")
        if not self._alive[v]:
            raise GraphError(f"node {v} has been removed")

    def is_alive(self, v: int) -> bool:
        return bool(self._alive[v])

    @property
    def alive_mask(self) -> np.ndarray:
        return self._alive.copy()

    def live_nodes(self) -> np.ndarray:
        """Live node ids in ascending order."""
        return np.flatnonzero(self._alive)

    # ---- mutation ------------------------------------------------------

    def add_edge(self, u: int, v: int) -> bool:
        """
        Add the edge u-v (u->v when directed).

        Returns:
            True if the edge was added, False if it was already present
        """
        if u == v:
            raise GraphError(f"self-loop on node {u} rejected")
        self._check_node(u)
        self._check_node(v)
        if v in self._out[u]:
            return False
        self._out[u].add(v)
        self._in[v].add(u)
        self.edge_count += 1
        return True

    def remove_edge(self, u: int, v: int):
        if v not in self._out[u]:
            raise GraphError(f"edge ({u}, {v}) not present")
        self._out[u].discard(v)
        self._in[v].discard(u)
        self.edge_count -= 1

    def remove_node(self, v: int):
        """Remove a live node and hide all of its incident edges."""
        self._check_node(v)
        removed = len(self._out[v])
        for w in self._out[v]:
            self._in[w].discard(v)
        if self.directed:
            removed += len(self._in[v])
            for w in self._in[v]:
                self._out[w].discard(v)
            self._in[v].clear()
        self._out[v].clear()
        self._alive[v] = False
        self.n_alive -= 1
        self.edge_count -= removed

    def copy(self) -> "Graph":
        clone = Graph.__new__(Graph)
        clone.n_initial = self.n_initial
        clone.directed = self.directed
        clone._out = [set(s) for s in self._out]
        clone._in = [set(s) for s in self._in] if self.directed else clone._out
        clone._alive = self._alive.copy()
        clone.n_alive = self.n_alive
        clone.edge_count = self.edge_count
        return clone

    # ---- queries -------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out[u]

    def out_neighbors(self, v: int) -> Set[int]:
        return self._out[v]

    def in_neighbors(self, v: int) -> Set[int]:
        return self._in[v]

    def neighbors(self, v: int) -> Set[int]:
        """Neighbours ignoring edge direction."""
        if self.directed:
            return self._out[v] | self._in[v]
        return self._out[v]

    def out_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self._in[v])

    def total_degree(self, v: int) -> int:
        """Neighbour count when undirected; in-degree + out-degree when directed."""
        self._check_node(v)
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._out[v])

    def degrees(self) -> np.ndarray:
        """Total degree of every node; dead nodes report -1."""
        deg = np.array([len(s) for s in self._out], dtype=np.int64)
        if self.directed:
            deg += np.array([len(s) for s in self._in], dtype=np.int64)
        deg[~self._alive] = -1
        return deg

    def average_degree(self) -> float:
        """Arcs per node when directed, 2·edges per node when undirected."""
        if self.n_alive == 0:
            return 0.0
        factor = 1.0 if self.directed else 2.0
        return factor * self.edge_count / self.n_alive

    def edges(self) -> List[Tuple[int, int]]:
        """Sorted edge list; undirected edges reported once with u < v."""
        result = []
        for u, targets in enumerate(self._out):
            for v in targets:
                if self.directed or u < v:
                    result.append((u, v))
        result.sort()
        return result

    def _sparse_adjacency(self) -> csr_matrix:
        rows, cols = [], []
        for u, targets in enumerate(self._out):
            rows.extend([u] * len(targets))
            cols.extend(targets)
        data = np.ones(len(rows), dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(self.n_initial, self.n_initial))

    def components(self) -> ComponentPartition:
        """Weakly connected components of the live subgraph."""
        if self.n_alive == 0:
            raise GraphError("graph has no live nodes")
        live = self.live_nodes()
        sub = self._sparse_adjacency()[live][:, live]
        _, labels = connected_components(sub, directed=self.directed, connection="weak")
        component_id = np.full(self.n_initial, -1, dtype=np.int64)
        component_id[live] = labels
        sizes = np.bincount(labels)
        return ComponentPartition(component_id, tuple(sorted((int(s) for s in sizes), reverse=True)))

    def largest_component_size(self) -> int:
        return self.components().largest

    def adjacency_matrix(self, dtype=np.uint8) -> np.ndarray:
        """
        Dense 0/1 adjacency over live nodes in ascending id order.

        ``A[i, j] = 1`` iff there is an edge from the i-th to the j-th live node;
        undirected graphs produce a symmetric matrix.
        """
        if self.n_alive == 0:
            raise GraphError("graph has no live nodes")
        live = self.live_nodes()
        position = np.full(self.n_initial, -1, dtype=np.int64)
        position[live] = np.arange(len(live))
        matrix = np.zeros((len(live), len(live)), dtype=dtype)
        for u in live:
            targets = self._out[u]
            if targets:
                matrix[position[u], position[list(targets)]] = 1
        return matrix


def new_graph(n: int, directed: bool = False) -> Graph:
    """Create a graph of ``n`` isolated live nodes."""
    return Graph(n, directed)


def oriented_copy(graph: Graph, rng: np.random.Generator) -> Graph:
    """Orient every undirected edge u->v or v->u with probability 1/2."""
    if graph.directed:
        raise GraphError("graph is already directed")
    edges = graph.edges()
    flips = rng.random(len(edges)) < 0.5
    result = Graph(graph.n_initial, directed=True)
    for (u, v), flip in zip(edges, flips):
        if flip:
            result.add_edge(v, u)
        else:
            result.add_edge(u, v)
    return result
