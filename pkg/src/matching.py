"""Maximum bipartite matching for driver-node counting under the minimum inputs theorem.

Every node has an out-copy on the left and an in-copy on the right; each arc
u->v is the left-right edge (u, v). The matching is kept between attack steps:
removing a node only unmatches the pairs that touch it, and Hopcroft-Karp
phases restart from that partial matching.
"""

from collections import deque
from typing import List

from .errors import GraphError
from .graph import Graph

_FREE = -1


class DriverMatching:
    """Hopcroft-Karp matching over the live arcs of a directed graph."""

    def __init__(self, graph: Graph):
        if not graph.directed:
            raise GraphError("minimum inputs theorem requires a directed graph")
        self.graph = graph
        n = graph.n_initial
        self.match_left: List[int] = [_FREE] * n
        self.match_right: List[int] = [_FREE] * n
        self.size = 0
        self._dist: List[int] = [0] * n
        self._adj: List[List[int]] = [sorted(graph.out_neighbors(u)) for u in range(n)]
        self.augment()

    def driver_count(self) -> int:
        """N_D = max(1, live nodes - matching size)."""
        return max(1, self.graph.n_alive - self.size)

    def remove_node(self, v: int):
        """Remove ``v`` from the graph and invalidate the pairs touching it, then re-augment."""
        partner = self.match_left[v]
        if partner != _FREE:
            self.match_right[partner] = _FREE
            self.match_left[v] = _FREE
            self.size -= 1
        partner = self.match_right[v]
        if partner != _FREE:
            self.match_left[partner] = _FREE
            self.match_right[v] = _FREE
            self.size -= 1
        self.graph.remove_node(v)
        self.augment()

    def augment(self):
        """Run Hopcroft-Karp phases from the current matching until it is maximum."""
        while self._layer():
            self._ptr = [0] * self.graph.n_initial
            for u in self.graph.live_nodes():
                u = int(u)
                if self.match_left[u] == _FREE and self._augment_from(u):
                    self.size += 1

    def _layer(self) -> bool:
        """BFS from free left vertices; True when some free right vertex is reachable."""
        graph = self.graph
        inf = graph.n_initial + 1
        queue = deque()
        for u in graph.live_nodes():
            u = int(u)
            if self.match_left[u] == _FREE:
                self._dist[u] = 0
                queue.append(u)
            else:
                self._dist[u] = inf
        for u in range(graph.n_initial):
            if not graph.is_alive(u):
                self._dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in self._adj[u]:
                if not graph.is_alive(v):
                    continue
                w = self.match_right[v]
                if w == _FREE:
                    found = True
                elif self._dist[w] == inf:
                    self._dist[w] = self._dist[u] + 1
                    queue.append(w)
        return found

    def _augment_from(self, root: int) -> bool:
        """Iterative layered DFS; flips the path when a free right vertex is hit."""
        graph = self.graph
        inf = graph.n_initial + 1
        stack = [root]
        path: List[int] = []
        while stack:
            u = stack[-1]
            adj = self._adj[u]
            advanced = False
            while self._ptr[u] < len(adj):
                v = adj[self._ptr[u]]
                self._ptr[u] += 1
                if not graph.is_alive(v):
                    continue
                w = self.match_right[v]
                if w == _FREE:
                    path.append(v)
                    for left, right in zip(stack, path):
                        self.match_left[left] = right
                        self.match_right[right] = left
                    return True
                if self._dist[w] == self._dist[u] + 1:
                    path.append(v)
                    stack.append(w)
                    advanced = True
                    break
            if not advanced:
                self._dist[u] = inf
                stack.pop()
                if path:
                    path.pop()
        return False


def maximum_matching_size(graph: Graph) -> int:
    """Size of a maximum matching of the bipartite out-copy/in-copy graph."""
    return DriverMatching(graph.copy()).size


def driver_count_mit(graph: Graph) -> int:
    """Driver nodes by the minimum inputs theorem: max(1, N - |E*|)."""
    if graph.n_alive < 1:
        raise GraphError("graph has no live nodes")
    return DriverMatching(graph.copy()).driver_count()
