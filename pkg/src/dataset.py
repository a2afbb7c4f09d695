"""Dataset files: edge lists, curve CSVs, JSON manifests and dataset recipes.

Edge-list format::

    # robnet v1 directed=<0|1> n=<N>
    <u> <v>
    ...

with 0-based ASCII decimal ids and LF line endings. Curves are CSV files with
header ``i,r_true[,r_pred]`` written at ``%.9g`` precision.
"""

import hashlib
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import DEFAULT_REPETITIONS, worker_count
from .errors import DatasetError, EdgeListError, GenerationError
from .generators import MODEL_SETS, generate, resolve_models, resolve_size_range, sample_config
from .graph import Graph
from .robustness import AttackKind, Measure, RobustnessCurve, ground_truth
from .utils import derive_seed, run_tasks

logger = logging.getLogger(__name__)

EDGE_LIST_VERSION = "v1"
MANIFEST_VERSION = 1
FLOAT_FORMAT = "%.9g"

_HEADER = re.compile(r"^# robnet (v\d+) directed=([01]) n=(\d+)$")

PathLike = Union[str, Path]


# ---- edge lists ----------------------------------------------------------


def format_edge_list(graph: Graph) -> str:
    lines = [f"# robnet {EDGE_LIST_VERSION} directed={int(graph.directed)} n={graph.n_initial}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(graph: Graph, path: PathLike):
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(format_edge_list(graph))


def parse_edge_list(path: PathLike, strict: bool = False) -> Graph:
    """
    Read an edge-list file.

    Args:
        path: File to read
        strict: Reject duplicate edges instead of dropping them with a warning

    Raises:
        EdgeListError: malformed header or line, out-of-range id, self-loop,
            or a duplicate edge in strict mode; the message names the line
    """
    with open(path, "r", encoding="ascii", errors="replace") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise EdgeListError("empty file, missing header", line=1)
    match = _HEADER.match(lines[0].strip())
    if not match:
        raise EdgeListError(f"malformed header {lines[0]!r}", line=1)
    if match.group(1) != EDGE_LIST_VERSION:
        raise EdgeListError(f"unsupported edge-list version {match.group(1)}", line=1)
    directed, n = match.group(2) == "1", int(match.group(3))
    if n < 1:
        raise EdgeListError("n must be >= 1", line=1)

    graph = Graph(n, directed)
    duplicates = 0
    for number, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split()
        if len(fields) != 2:
            raise EdgeListError(f"expected '<u> <v>', got {raw!r}", line=number)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise EdgeListError(f"non-integer node id in {raw!r}", line=number)
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListError(f"node id out of range [0, {n}) in {raw!r}", line=number)
        if u == v:
            raise EdgeListError(f"self-loop on node {u}", line=number)
        if not graph.add_edge(u, v):
            if strict:
                raise EdgeListError(f"duplicate edge ({u}, {v})", line=number)
            duplicates += 1
    if duplicates:
        logger.warning("%s: dropped %d duplicate edge(s)", path, duplicates)
    return graph


# ---- real-world node-pair files -----------------------------------------


@dataclass
class ConversionResult:
    graph: Graph
    # original label of each dense id
    labels: List[str]
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0


def convert_pairs(
    path: PathLike,
    directed: bool = True,
    largest_component: bool = False,
    erase_directions: bool = False,
) -> ConversionResult:
    """
    Convert a node-pair file with arbitrary labels into a dense graph.

    Lines hold two whitespace- or comma-separated labels; lines starting with
    '#' or '%' are comments. Labels are numbered in order of first appearance.

    Args:
        path: Input file
        directed: Treat pairs as arcs
        largest_component: Keep only the largest weakly connected component
        erase_directions: Produce an undirected graph even from arcs
    """
    index: Dict[str, int] = {}
    pairs: List[Tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text or text[0] in "#%":
                continue
            fields = text.replace(",", " ").split()
            if len(fields) < 2:
                raise EdgeListError(f"expected a node pair, got {raw.rstrip()!r}", line=number)
            ids = []
            for label in fields[:2]:
                if label not in index:
                    index[label] = len(index)
                ids.append(index[label])
            pairs.append((ids[0], ids[1]))
    if not index:
        raise EdgeListError("no node pairs found")

    graph = Graph(len(index), directed and not erase_directions)
    loops = duplicates = 0
    for u, v in pairs:
        if u == v:
            loops += 1
        elif not graph.add_edge(u, v):
            duplicates += 1
    labels = list(index)

    if largest_component:
        labels_by_node = graph.components().component_id
        biggest = int(np.argmax(np.bincount(labels_by_node[labels_by_node >= 0])))
        keep = np.flatnonzero(labels_by_node == biggest)
        position = {int(old): new for new, old in enumerate(keep)}
        reduced = Graph(len(keep), graph.directed)
        for u, v in graph.edges():
            if u in position and v in position:
                reduced.add_edge(position[u], position[v])
        graph, labels = reduced, [labels[i] for i in keep]

    logger.info(
        "converted %s: %d nodes, %d edges (%d self-loops, %d duplicates dropped)",
        path, graph.n_initial, graph.edge_count, loops, duplicates,
    )
    return ConversionResult(graph, labels, loops, duplicates)


# ---- curve CSVs ----------------------------------------------------------


def write_curve_csv(
    path: PathLike, r_true: Optional[Sequence[float]] = None, r_pred: Optional[Sequence[float]] = None
):
    """
    Write a curve CSV with header ``i,r_true[,r_pred]``.

    A curve predicted for a bare edge list has no ground truth; its header is
    ``i,r_pred``.
    """
    if r_true is None and r_pred is None:
        raise DatasetError("a curve CSV needs r_true, r_pred or both")
    length = len(r_true) if r_true is not None else len(r_pred)
    frame = pd.DataFrame({"i": np.arange(length)})
    if r_true is not None:
        frame["r_true"] = np.asarray(r_true, dtype=np.float64)
    if r_pred is not None:
        if len(r_pred) != length:
            raise DatasetError(f"predicted curve has {len(r_pred)} points, true curve has {length}")
        frame["r_pred"] = np.asarray(r_pred, dtype=np.float64)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_curve_csv(path: PathLike) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """
    Returns:
        Tuple of (r_true or None, r_pred or None); at least one is present
    """
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path}: empty curve file")
    if "r_true" not in frame.columns and "r_pred" not in frame.columns:
        raise DatasetError(f"{path}: neither r_true nor r_pred column")
    if frame.empty:
        raise DatasetError(f"{path}: curve has no rows")
    r_true = frame["r_true"].to_numpy(dtype=np.float64) if "r_true" in frame.columns else None
    r_pred = frame["r_pred"].to_numpy(dtype=np.float64) if "r_pred" in frame.columns else None
    return r_true, r_pred


# ---- recipes and manifests -----------------------------------------------


@dataclass(frozen=True)
class DatasetRecipe:
    """Everything needed to regenerate a dataset bit for bit."""

    models: Tuple[str, ...] = MODEL_SETS["S1"]
    directed: bool = False
    size_range: Tuple[int, int] = (700, 1300)
    count: int = 100
    measure: str = Measure.CONNECTIVITY.value
    attack: str = AttackKind.DEGREE.value
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0
    # train and test splits draw from separate seed streams
    split: str = "train"
    adaptive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "models", resolve_models(self.models))
        object.__setattr__(self, "size_range", resolve_size_range(self.size_range))
        object.__setattr__(self, "measure", Measure(self.measure).value)
        object.__setattr__(self, "attack", AttackKind(self.attack).value)
        if self.count < 1:
            raise DatasetError(f"count must be >= 1, got {self.count}")
        if self.repetitions < 1:
            raise DatasetError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.split not in ("train", "test"):
            raise DatasetError(f"split must be 'train' or 'test', got {self.split!r}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["models"] = list(self.models)
        data["size_range"] = list(self.size_range)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetRecipe":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        if isinstance(known.get("models"), list):
            known["models"] = tuple(known["models"])
        if isinstance(known.get("size_range"), list):
            known["size_range"] = tuple(known["size_range"])
        return cls(**known)

    @classmethod
    def from_file(cls, path: PathLike) -> "DatasetRecipe":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid recipe JSON: {exc}")

    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class ManifestEntry:
    instance_id: str
    model: str
    directed: bool
    n: int
    k_avg: float
    seed: int
    measure: str
    attack: str
    repetitions: int
    curve_file: str
    edge_file: str


@dataclass
class DatasetManifest:
    entries: List[ManifestEntry] = field(default_factory=list)
    fingerprint: str = ""
    recipe: Optional[dict] = None
    version: int = MANIFEST_VERSION
    # directory the entry file names are relative to
    root: Path = Path(".")

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "fingerprint": self.fingerprint,
            "recipe": self.recipe,
            "entries": [asdict(e) for e in self.entries],
        }

    def save(self, path: PathLike):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "DatasetManifest":
        """
        Read a manifest and check that ids are unique and every file exists.

        Raises:
            DatasetError: unreadable manifest, wrong version, duplicate id or missing file
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DatasetError(f"cannot read manifest {path}: {exc}")
        if data.get("version") != MANIFEST_VERSION:
            raise DatasetError(f"{path}: unsupported manifest version {data.get('version')}")
        manifest = cls(
            entries=[ManifestEntry(**e) for e in data.get("entries", [])],
            fingerprint=data.get("fingerprint", ""),
            recipe=data.get("recipe"),
            root=path.parent,
        )
        seen = set()
        for entry in manifest.entries:
            if entry.instance_id in seen:
                raise DatasetError(f"{path}: duplicate instance id {entry.instance_id}")
            seen.add(entry.instance_id)
            for name in (entry.edge_file, entry.curve_file):
                if not (manifest.root / name).is_file():
                    raise DatasetError(f"{path}: {entry.instance_id} references missing file {name}")
        return manifest

    def graph(self, entry: ManifestEntry) -> Graph:
        return parse_edge_list(self.root / entry.edge_file, strict=True)

    def curve(self, entry: ManifestEntry) -> RobustnessCurve:
        values, _ = read_curve_csv(self.root / entry.curve_file)
        if values is None:
            raise DatasetError(f"{entry.curve_file}: ground-truth curve has no r_true column")
        return RobustnessCurve(values, Measure(entry.measure))

    def pairs(self) -> List[Tuple[Graph, RobustnessCurve]]:
        return [(self.graph(e), self.curve(e)) for e in self.entries]


def load_training_pairs(paths: Sequence[PathLike]) -> List[Tuple[Graph, RobustnessCurve]]:
    """Concatenate the (graph, curve) pairs of several manifests."""
    pairs = []
    for path in paths:
        pairs.extend(DatasetManifest.load(path).pairs())
    return pairs


def _build_instance(task: Tuple[dict, int, str]) -> dict:
    recipe_data, index, out_dir = task
    recipe = DatasetRecipe.from_dict(recipe_data)
    instance_id = f"{recipe.split}-{index:05d}"
    seed = derive_seed(recipe.seed, f"{recipe.split}/{instance_id}")
    rng = np.random.default_rng(seed)

    model = recipe.models[index % len(recipe.models)]
    config = sample_config(model, recipe.directed, recipe.size_range, rng)
    try:
        graph = generate(config)
    except GenerationError as exc:
        raise GenerationError(f"{instance_id}: {exc.reason}", seed=seed) from exc
    curve = ground_truth(
        graph, Measure(recipe.measure), AttackKind(recipe.attack), recipe.repetitions, rng, adaptive=recipe.adaptive
    )

    edge_file, curve_file = f"{instance_id}.edges", f"{instance_id}.csv"
    write_edge_list(graph, Path(out_dir) / edge_file)
    write_curve_csv(Path(out_dir) / curve_file, curve.values)
    logger.info("%s: %s n=%d k=%.2f R=%.4f", instance_id, model, config.n, config.k_avg, curve.scalar().value)
    return asdict(
        ManifestEntry(
            instance_id=instance_id,
            model=model,
            directed=recipe.directed,
            n=config.n,
            k_avg=config.k_avg,
            seed=seed,
            measure=recipe.measure,
            attack=recipe.attack,
            repetitions=recipe.repetitions,
            curve_file=curve_file,
            edge_file=edge_file,
        )
    )


MANIFEST_NAME = "manifest.json"


def build_dataset(recipe: DatasetRecipe, out_dir: PathLike, workers: Optional[int] = None) -> DatasetManifest:
    """
    Generate, simulate and persist ``recipe.count`` instances, round-robin over the models.

    Each instance's randomness is derived from (recipe seed, split, instance id),
    so the result does not depend on the worker count.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(recipe.to_dict(), index, str(out_dir)) for index in range(recipe.count)]
    entries = run_tasks(_build_instance, tasks, worker_count(workers))
    manifest = DatasetManifest(
        entries=[ManifestEntry(**e) for e in entries],
        fingerprint=recipe.fingerprint(),
        recipe=recipe.to_dict(),
        root=out_dir,
    )
    manifest.save(out_dir / MANIFEST_NAME)
    return manifest
