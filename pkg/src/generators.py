"""Synthetic network generators.

Nine model families are supported. BA, EH, ER, RH, RT and SF are built
undirected and receive uniform-random orientations for directed instances;
QS and the two small-world models are built directly in the requested
directedness (the undirected build equals the directed one with directions
erased).

Average degree convention: undirected ⟨k⟩ = 2·edges/n, directed ⟨k⟩ = arcs/n.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, GenerationError
from .graph import Graph, oriented_copy
from .validator import DIRECTED_NATIVE, MODELS, GeneratorValidator, ValidationLevel

logger = logging.getLogger(__name__)

SIZE_RANGES: Dict[str, Tuple[int, int]] = {
    "Na": (700, 1300),
    "Nb": (300, 700),
    "Nc": (1300, 1700),
}

MODEL_SETS: Dict[str, Tuple[str, ...]] = {
    "S1": MODELS,
    "S2": ("ER", "QS", "SF", "SW-NW"),
    "S3": ("BA", "EH", "RH", "RT", "SW-WS"),
}

SF_THETA = 5.0
WS_REWIRE_PROBABILITY = 0.3
EH_ITERATIONS_PER_EDGE = 50

_validator = GeneratorValidator()


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything needed to reproduce one synthetic network."""

    model: str
    n: int
    directed: bool
    k_avg: float
    seed: int
    # q for QS, sigma/theta for SF, K/beta for SW, m for BA
    model_params: Dict[str, float] = field(default_factory=dict)

    def edge_budget(self) -> int:
        """Target number of arcs (directed) or edges (undirected)."""
        if self.directed:
            return int(round(self.n * self.k_avg))
        return int(round(self.n * self.k_avg / 2))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        return cls(
            model=data["model"],
            n=int(data["n"]),
            directed=bool(data["directed"]),
            k_avg=float(data["k_avg"]),
            seed=int(data["seed"]),
            model_params=dict(data.get("model_params", {})),
        )


def resolve_size_range(size_range: Union[str, Tuple[int, int]]) -> Tuple[int, int]:
    if isinstance(size_range, str):
        if size_range not in SIZE_RANGES:
            raise ConfigError(f"unknown size range {size_range!r}; expected one of {', '.join(SIZE_RANGES)}")
        return SIZE_RANGES[size_range]
    low, high = int(size_range[0]), int(size_range[1])
    if low < 1 or high < low:
        raise ConfigError(f"invalid size range [{low}, {high}]")
    return (low, high)


def resolve_models(models: Union[str, Tuple[str, ...], list]) -> Tuple[str, ...]:
    """Expand a model-set name (S1/S2/S3) or validate an explicit model list."""
    if isinstance(models, str):
        if models in MODEL_SETS:
            return MODEL_SETS[models]
        models = tuple(m.strip() for m in models.split(","))
    for model in models:
        if model not in MODELS:
            raise ConfigError(f"unknown model {model!r}")
    return tuple(models)


def sample_config(
    model: str,
    directed: bool,
    size_range: Union[str, Tuple[int, int]],
    rng: np.random.Generator,
) -> GeneratorConfig:
    """
    Draw a random configuration for one network instance.

    Args:
        model: Model tag, e.g. "SW-NW"
        directed: Whether the instance is directed
        size_range: "Na", "Nb", "Nc" or an explicit (low, high) pair
        rng: Random source

    Returns:
        GeneratorConfig with n uniform in the range and ⟨k⟩ uniform in the model's range
    """
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    low, high = resolve_size_range(size_range)
    n = int(rng.integers(low, high + 1))
    k_low, k_high = _validator.degree_range(model, directed)
    k_avg = float(rng.uniform(k_low, k_high))
    seed = int(rng.integers(0, 2**32, dtype=np.uint64))
    return GeneratorConfig(model=model, n=n, directed=directed, k_avg=k_avg, seed=seed)


def generate(config: GeneratorConfig) -> Graph:
    """
    Generate the network described by ``config``.

    Raises:
        ConfigError: unknown model
        GenerationError: infeasible configuration or non-converging construction
    """
    if config.model not in MODELS:
        raise ConfigError(f"unknown model {config.model!r}")

    neighbors = int(config.model_params.get("K", GeneratorValidator.SW_NEIGHBORS))
    budget = config.edge_budget()
    can_proceed, results = _validator.validate_all(
        config.model, config.directed, config.n, config.k_avg, budget, neighbors
    )
    if not can_proceed:
        reasons = "; ".join(r.message for r in results if not r.can_proceed)
        raise GenerationError(reasons, seed=config.seed)
    for result in results:
        if result.level is ValidationLevel.WARNING:
            logger.warning(result.message)

    rng = np.random.default_rng(config.seed)
    params = config.model_params
    try:
        if config.model in DIRECTED_NATIVE:
            graph = _DIRECTED_BUILDERS[config.model](config.n, budget, config.directed, rng, params)
        else:
            graph = _UNDIRECTED_BUILDERS[config.model](config.n, budget, rng, params)
            if config.directed:
                graph = oriented_copy(graph, rng)
    except GenerationError as e:
        raise GenerationError(str(e), seed=config.seed) from e

    check = _validator.validate_realized_degree(config.k_avg, graph.average_degree())
    if check.level is not ValidationLevel.SAFE:
        logger.warning("%s %s", config.model, check.message)
    return graph


# ---- undirected-native builders ------------------------------------------


def _build_er(n: int, edges: int, rng: np.random.Generator, params: dict) -> Graph:
    """G(n, M): exactly ``edges`` pairs drawn without replacement."""
    rows, cols = np.triu_indices(n, k=1)
    picks = np.sort(rng.choice(len(rows), size=edges, replace=False))
    return Graph.from_edges(n, zip(rows[picks], cols[picks]))


def _build_ba(n: int, edges: int, rng: np.random.Generator, params: dict) -> Graph:
    """Preferential attachment grown from a seed clique."""
    if "m" in params:
        m_low = m_high = int(params["m"])
        p_high = 0.0
    else:
        # per-node attachment count mixes floor/ceil so the edge budget is met on average
        m_float = edges / n
        m_low = int(math.floor(m_float))
        m_high = int(math.ceil(m_float))
        p_high = m_float - m_low
    m0 = max(m_high, 2)
    if m0 > n:
        raise GenerationError(f"BA seed clique of {m0} nodes does not fit n={n}")
    logger.debug("BA n=%d m in [%d, %d] seed clique %d", n, m_low, m_high, m0)

    graph = Graph(n)
    repeated = []
    for u in range(m0):
        for v in range(u + 1, m0):
            graph.add_edge(u, v)
            repeated.extend((u, v))
    for new in range(m0, n):
        m_i = m_high if m_high != m_low and rng.random() < p_high else m_low
        m_i = max(1, min(m_i, new))
        chosen = set()
        while len(chosen) < m_i:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        for target in sorted(chosen):
            graph.add_edge(new, target)
            repeated.extend((new, target))
    return graph


def _build_sf(n: int, edges: int, rng: np.random.Generator, params: dict) -> Graph:
    """Static scale-free model: pairs drawn with probability ∝ w_i·w_j, w_i = (i+θ)^-σ."""
    sigma = float(params["sigma"]) if "sigma" in params else float(rng.uniform(0.0, 1.0))
    theta = float(params.get("theta", SF_THETA))
    weights = (np.arange(1, n + 1) + theta) ** (-sigma)
    probabilities = weights / weights.sum()
    logger.debug("SF n=%d sigma=%.3f theta=%.1f", n, sigma, theta)

    graph = Graph(n)
    max_draws = 100 * edges + 1000
    draws = 0
    while graph.edge_count < edges:
        if draws > max_draws:
            raise GenerationError(f"SF could not place {edges} edges in {max_draws} draws")
        batch = max(2 * (edges - graph.edge_count), 64)
        us = rng.choice(n, size=batch, p=probabilities)
        vs = rng.choice(n, size=batch, p=probabilities)
        draws += batch
        for u, v in zip(us, vs):
            if u != v:
                graph.add_edge(int(u), int(v))
                if graph.edge_count == edges:
                    break
    return graph


def _build_eh(n: int, edges: int, rng: np.random.Generator, params: dict) -> Graph:
    """ER graph homogenized by moving edges from max-degree to min-degree nodes."""
    graph = _build_er(n, edges, rng, params)
    degrees = graph.degrees()
    budget = EH_ITERATIONS_PER_EDGE * max(edges, 1)
    iterations = 0
    while degrees.max() - degrees.min() > 1:
        if iterations >= budget:
            raise GenerationError(
                f"EH rectification did not converge in {budget} iterations "
                f"(degree spread {degrees.max() - degrees.min()})"
            )
        iterations += 1
        u = int(rng.choice(np.flatnonzero(degrees == degrees.max())))
        x = int(rng.choice(sorted(graph.neighbors(u))))
        candidates = [
            int(w) for w in np.flatnonzero(degrees == degrees.min())
            if w != x and not graph.has_edge(x, int(w))
        ]
        if not candidates:
            continue
        w = candidates[int(rng.integers(len(candidates)))]
        graph.remove_edge(u, x)
        graph.add_edge(w, x)
        degrees[u] -= 1
        degrees[w] += 1
    logger.debug("EH converged after %d iterations", iterations)
    return graph


def _build_cycles(length: int) -> Callable:
    def build(n: int, edges: int, rng: np.random.Generator, params: dict) -> Graph:
        graph = Graph(n)
        max_attempts = 100 * edges + 1000
        for _ in range(max_attempts):
            if graph.edge_count >= edges:
                return graph
            nodes = [int(v) for v in rng.choice(n, size=length, replace=False)]
            for i in range(length):
                graph.add_edge(nodes[i], nodes[(i + 1) % length])
        if graph.edge_count >= edges:
            return graph
        raise GenerationError(f"could not reach {edges} edges with random {length}-cycles")

    return build


# ---- directed-native builders --------------------------------------------


def ring_lattice(n: int, neighbors: int, directed: bool) -> Graph:
    """Ring where node i links to its ``neighbors`` successors (i -> i+d when directed)."""
    if n < 2 * neighbors + 1:
        raise GenerationError(f"ring lattice with K={neighbors} needs n >= {2 * neighbors + 1}, got {n}")
    graph = Graph(n, directed)
    for i in range(n):
        for d in range(1, neighbors + 1):
            graph.add_edge(i, (i + d) % n)
    return graph


def rewire(graph: Graph, probability: float, rng: np.random.Generator) -> int:
    """
    Rewire each edge u-v with ``probability`` to u-w, w uniform among valid targets.

    Edge count is unchanged. Returns the number of rewired edges.
    """
    n = graph.n_initial
    rewired = 0
    for u, v in graph.edges():
        if rng.random() >= probability:
            continue
        for _ in range(10 * n):
            w = int(rng.integers(n))
            if w != u and not graph.has_edge(u, w):
                graph.remove_edge(u, v)
                graph.add_edge(u, w)
                rewired += 1
                break
    return rewired


def _add_shortcuts(graph: Graph, edges: int, rng: np.random.Generator):
    n = graph.n_initial
    max_draws = 100 * edges + 1000
    for _ in range(max_draws):
        if graph.edge_count >= edges:
            return
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u != v:
            graph.add_edge(u, v)
    if graph.edge_count < edges:
        raise GenerationError(f"could not add shortcuts up to {edges} edges")


def _build_small_world(rewiring: bool) -> Callable:
    def build(n: int, edges: int, directed: bool, rng: np.random.Generator, params: dict) -> Graph:
        neighbors = int(params.get("K", GeneratorValidator.SW_NEIGHBORS))
        graph = ring_lattice(n, neighbors, directed)
        if edges < graph.edge_count:
            raise GenerationError(f"edge budget {edges} is below the ring lattice's {graph.edge_count} edges")
        if rewiring:
            beta = float(params.get("beta", WS_REWIRE_PROBABILITY))
            count = rewire(graph, beta, rng)
            logger.debug("SW-WS rewired %d of %d lattice edges", count, graph.edge_count)
        # K=2 lattices sit below the sampled degree range; top up with shortcuts
        _add_shortcuts(graph, edges, rng)
        return graph

    return build


def _build_qs(n: int, edges: int, directed: bool, rng: np.random.Generator, params: dict) -> Graph:
    """Backbone chain i->i+1 plus snapback arcs i->j (j <= i-2)."""
    graph = Graph(n, directed)
    for i in range(n - 1):
        graph.add_edge(i, i + 1)
    snapbacks = edges - (n - 1)
    if snapbacks < 0:
        raise GenerationError(f"edge budget {edges} is below the {n - 1}-arc backbone")
    sources, targets = np.tril_indices(n, k=-2)
    if "q" in params:
        q = float(params["q"])
        picks = np.flatnonzero(rng.random(len(sources)) < q)
    else:
        if snapbacks > len(sources):
            raise GenerationError(f"{snapbacks} snapback arcs exceed the {len(sources)} candidates")
        q = snapbacks / max(len(sources), 1)
        picks = np.sort(rng.choice(len(sources), size=snapbacks, replace=False))
    logger.debug("QS n=%d snapback probability q=%.5f", n, q)
    for idx in picks:
        graph.add_edge(int(sources[idx]), int(targets[idx]))
    return graph


_UNDIRECTED_BUILDERS: Dict[str, Callable] = {
    "BA": _build_ba,
    "EH": _build_eh,
    "ER": _build_er,
    "RH": _build_cycles(6),
    "RT": _build_cycles(3),
    "SF": _build_sf,
}

_DIRECTED_BUILDERS: Dict[str, Callable] = {
    "QS": _build_qs,
    "SW-NW": _build_small_world(rewiring=False),
    "SW-WS": _build_small_world(rewiring=True),
}


def generate_instance(
    model: str,
    n: int,
    directed: bool,
    k_avg: float,
    seed: int,
    model_params: Optional[dict] = None,
) -> Graph:
    """Convenience wrapper building a config inline."""
    return generate(GeneratorConfig(model, n, directed, k_avg, seed, dict(model_params or {})))
