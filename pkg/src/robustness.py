"""Attack simulation: connectivity and controllability robustness curves.

A curve holds r(i) for i = 0..N-1, the functionality density after the first
i nodes of an attack sequence have been removed:

- connectivity: r(i) = N_L(i) / (N - i), N_L the largest weakly connected component
- controllability: r(i) = N_D(i) / (N - i), N_D the driver-node count (MIT or ECT)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence

import numpy as np

from .config import DEFAULT_REPETITIONS
from .errors import ConfigError, DatasetError, GraphError, ShapeError
from .graph import Graph
from .matching import DriverMatching, driver_count_mit
from .rank import DEFAULT_PRIME, driver_count_ect, rank_mod_p
from .utils import child_seeds

logger = logging.getLogger(__name__)


class AttackKind(str, Enum):
    DEGREE = "degree"
    RANDOM = "random"


class Measure(str, Enum):
    CONNECTIVITY = "connectivity"
    CONTROLLABILITY = "controllability"


class Theorem(str, Enum):
    MIT = "mit"
    ECT = "ect"
    AUTO = "auto"


@dataclass(frozen=True)
class AttackStrategy:
    """How nodes are chosen for removal."""

    kind: AttackKind = AttackKind.DEGREE
    seed: int = 0
    # degree attacks recompute degrees on the residual graph before every removal
    adaptive: bool = True


@dataclass(frozen=True)
class RobustnessScalar:
    value: float
    # unnormalized sum of the curve
    total: float


@dataclass(frozen=True, eq=False)
class RobustnessCurve:
    values: np.ndarray
    measure: Measure
    n: int = field(default=-1)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if self.n == -1:
            object.__setattr__(self, "n", len(values))
        if values.ndim != 1 or len(values) != self.n:
            raise ShapeError(f"curve length {len(values)} does not match N={self.n}")
        if self.n and (values.min() <= 0.0 or values.max() > 1.0 + 1e-12):
            raise DatasetError("curve values must lie in (0, 1]")

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, RobustnessCurve):
            return NotImplemented
        return self.measure == other.measure and np.array_equal(self.values, other.values)

    def scalar(self) -> RobustnessScalar:
        return robustness_scalar(self)


def robustness_scalar(curve: RobustnessCurve) -> RobustnessScalar:
    """Mean of the curve (in (0, 1]) plus the unnormalized sum."""
    total = float(np.sum(curve.values))
    return RobustnessScalar(value=total / curve.n, total=total)


def resolve_theorem(graph: Graph, theorem: Theorem) -> Theorem:
    """AUTO picks MIT for directed graphs and ECT for undirected ones."""
    theorem = Theorem(theorem)
    if theorem is Theorem.AUTO:
        return Theorem.MIT if graph.directed else Theorem.ECT
    if theorem is Theorem.MIT and not graph.directed:
        raise GraphError("minimum inputs theorem requires a directed graph")
    return theorem


def driver_count(graph: Graph, theorem: Theorem = Theorem.AUTO) -> int:
    if resolve_theorem(graph, theorem) is Theorem.MIT:
        return driver_count_mit(graph)
    return driver_count_ect(graph)


def attack_sequence(graph: Graph, strategy: AttackStrategy) -> List[int]:
    """
    Order in which every live node is removed.

    Degree attacks take a node of maximal total degree at each turn, ties broken
    uniformly at random from the strategy seed; random attacks are a uniform
    permutation.
    """
    rng = np.random.default_rng(strategy.seed)
    live = graph.live_nodes()
    kind = AttackKind(strategy.kind)

    if kind is AttackKind.RANDOM:
        return [int(v) for v in rng.permutation(live)]

    degrees = graph.degrees()
    if not strategy.adaptive:
        shuffled = rng.permutation(live)
        order = np.argsort(-degrees[shuffled], kind="stable")
        return [int(v) for v in shuffled[order]]

    work = graph.copy()
    sequence = []
    for _ in range(len(live)):
        candidates = np.flatnonzero(degrees == degrees.max())
        v = int(candidates[rng.integers(len(candidates))])
        for w in work.out_neighbors(v):
            degrees[w] -= 1
        if work.directed:
            for w in work.in_neighbors(v):
                degrees[w] -= 1
        work.remove_node(v)
        degrees[v] = -1
        sequence.append(v)
    return sequence


def _check_sequence(graph: Graph, sequence: Sequence[int]):
    live = graph.live_nodes()
    if len(sequence) != len(live) or not np.array_equal(np.sort(np.asarray(sequence)), live):
        raise GraphError("attack sequence must be a permutation of the live nodes")


def connectivity_curve(graph: Graph, sequence: Sequence[int]) -> RobustnessCurve:
    """
    LCC density after each removal.

    Nodes are re-inserted in reverse attack order with union-find, so the whole
    curve costs one pass over the edges.
    """
    _check_sequence(graph, sequence)
    total = len(sequence)
    parent = list(range(graph.n_initial))
    size = [1] * graph.n_initial
    active = [False] * graph.n_initial

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    values = np.empty(total, dtype=np.float64)
    largest = 0
    for step in range(total - 1, -1, -1):
        v = int(sequence[step])
        active[v] = True
        largest = max(largest, 1)
        for w in graph.neighbors(v):
            if not active[w]:
                continue
            a, b = find(v), find(w)
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            largest = max(largest, size[a])
        values[step] = largest / (total - step)
    return RobustnessCurve(values, Measure.CONNECTIVITY, total)


def controllability_curve(
    graph: Graph,
    sequence: Sequence[int],
    theorem: Theorem = Theorem.AUTO,
    prime: int = DEFAULT_PRIME,
) -> RobustnessCurve:
    """Driver-node density after each removal, by MIT (matching) or ECT (rank)."""
    _check_sequence(graph, sequence)
    theorem = resolve_theorem(graph, theorem)
    total = len(sequence)
    values = np.empty(total, dtype=np.float64)

    if theorem is Theorem.MIT:
        matching = DriverMatching(graph.copy())
        for i in range(total):
            values[i] = matching.driver_count() / (total - i)
            if i < total - 1:
                matching.remove_node(int(sequence[i]))
    else:
        matrix = graph.adjacency_matrix()
        ids = [int(v) for v in graph.live_nodes()]
        for i in range(total):
            remaining = total - i
            values[i] = max(1, remaining - rank_mod_p(matrix, prime)) / remaining
            if i < total - 1:
                idx = ids.index(int(sequence[i]))
                del ids[idx]
                matrix = np.delete(np.delete(matrix, idx, axis=0), idx, axis=1)
    return RobustnessCurve(values, Measure.CONTROLLABILITY, total)


def simulate_curve(
    graph: Graph,
    measure: Measure,
    strategy: AttackStrategy,
    theorem: Theorem = Theorem.AUTO,
) -> RobustnessCurve:
    """One attack run: sequence then curve."""
    sequence = attack_sequence(graph, strategy)
    if Measure(measure) is Measure.CONNECTIVITY:
        return connectivity_curve(graph, sequence)
    return controllability_curve(graph, sequence, theorem)


def ground_truth(
    graph: Graph,
    measure: Measure,
    kind: AttackKind,
    repetitions: int = DEFAULT_REPETITIONS,
    rng: np.random.Generator = None,
    theorem: Theorem = Theorem.AUTO,
    adaptive: bool = True,
) -> RobustnessCurve:
    """
    Element-wise mean of ``repetitions`` curves from independent attack sequences.

    Attack seeds are drawn from ``rng``, so the result is deterministic given its seed.
    """
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    if rng is None:
        rng = np.random.default_rng(0)
    seeds = child_seeds(rng, repetitions)
    total = np.zeros(graph.n_alive, dtype=np.float64)
    for seed in seeds:
        strategy = AttackStrategy(AttackKind(kind), seed=seed, adaptive=adaptive)
        total += simulate_curve(graph, measure, strategy, theorem).values
    logger.debug("averaged %d %s curves over N=%d", repetitions, Measure(measure).value, graph.n_alive)
    return RobustnessCurve(total / repetitions, Measure(measure), graph.n_alive)
