"""Command-line interface for robnet."""

import functools
import logging
import sys
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import DEFAULT_ALPHA, DEFAULT_REPETITIONS
from .dataset import (
    DatasetManifest,
    DatasetRecipe,
    build_dataset,
    convert_pairs,
    load_training_pairs,
    parse_edge_list,
    read_curve_csv,
    write_curve_csv,
    write_edge_list,
)
from .errors import ConfigError, DatasetError, RobnetError
from .generators import SIZE_RANGES
from .graph import Graph
from .model import ModelConfig, build_model, model_from_checkpoint, predict
from .plot import emit_plot
from .robustness import AttackKind, AttackStrategy, Measure, Theorem, driver_count, ground_truth, simulate_curve
from .stats import EvalReport, bench_runtime, prediction_error, significance_test
from .training import TrainConfig, train
from .utils import derive_seed, format_ratio, format_seconds
from .validator import GeneratorValidator, ValidationLevel, ValidationResult

console = Console()
logger = logging.getLogger("robnet")

MEASURES = [m.value for m in Measure]
ATTACKS = [a.value for a in AttackKind]
THEOREMS = [t.value for t in Theorem]


def configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def handle_errors(func):
    """Turn domain errors into one ``error: <code>: <message>`` line and exit status 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValueError as e:
            # RobnetError subclasses ValueError; anything else is a bad value from a file
            code = e.code if isinstance(e, RobnetError) else "invalid"
            message = " ".join(str(e).split())
            click.echo(f"error: {code}: {message}", err=True)
            sys.exit(1)
        except OSError as e:
            click.echo(f"error: io: {e}", err=True)
            sys.exit(1)

    return wrapper


def print_validation(results: List[ValidationResult]):
    """Print validation results with severity icons."""
    for result in results:
        level = result.level
        if level == ValidationLevel.SAFE:
            style, icon = "green", "✓"
        elif level == ValidationLevel.WARNING:
            style, icon = "yellow", "⚠"
        elif level == ValidationLevel.DANGER:
            style, icon = "dark_orange", "⚠"
        else:
            style, icon = "red", "✗"
        console.print(f"[{style}]{icon} {result.message}[/{style}]")


def _size_range(value: str):
    if value in SIZE_RANGES:
        return value
    try:
        low, high = (int(part) for part in value.split(","))
    except ValueError:
        raise ConfigError(f"size range must be one of {', '.join(SIZE_RANGES)} or 'low,high', got {value!r}")
    return (low, high)


def _instance_rng(seed: int, path: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, Path(path).name))


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Only warnings and errors")
def cli(verbose, quiet):
    """robnet - network robustness by attack simulation and SPP-CNN prediction."""
    configure_logging(verbose, quiet)


@cli.command()
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), required=True, help="Output directory")
@click.option("--recipe", type=click.Path(exists=True, dir_okay=False), help="JSON recipe file (overrides flags)")
@click.option("--models", default="S1", show_default=True, help="Model set S1/S2/S3 or comma-separated tags")
@click.option("--directed/--undirected", default=False, show_default=True)
@click.option("--size", "size", default="Na", show_default=True, help="Na, Nb, Nc or 'low,high'")
@click.option("--count", type=int, default=100, show_default=True)
@click.option("--measure", type=click.Choice(MEASURES), default="connectivity", show_default=True)
@click.option("--attack", type=click.Choice(ATTACKS), default="degree", show_default=True)
@click.option("--reps", "repetitions", type=int, default=DEFAULT_REPETITIONS, show_default=True, help="Attack repetitions T")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--split", type=click.Choice(["train", "test"]), help="Split name [default: train, or the recipe's split]")
@click.option("--static-degree", is_flag=True, help="Rank nodes by initial degree instead of recomputing")
@click.option("--workers", type=int, help="Worker processes (default from ROBNET_WORKERS)")
@handle_errors
def gen(out_dir, recipe, models, directed, size, count, measure, attack, repetitions, seed, split, static_degree, workers):
    """
    Generate a dataset: networks, ground-truth curves and a manifest.

    Examples:

        robnet gen --models S2 --size Nb --count 100 --out data/train

        robnet gen --recipe recipe.json --split test --out data/test
    """
    if recipe:
        plan = DatasetRecipe.from_file(recipe)
        if split is not None and split != plan.split:
            logger.info("overriding recipe split %s with %s", plan.split, split)
            plan = DatasetRecipe.from_dict({**plan.to_dict(), "split": split})
    else:
        plan = DatasetRecipe(
            models=models,
            directed=directed,
            size_range=_size_range(size),
            count=count,
            measure=measure,
            attack=attack,
            repetitions=repetitions,
            seed=seed,
            split=split or "train",
            adaptive=not static_degree,
        )

    validator = GeneratorValidator()
    results = [validator.validate_size(model, plan.size_range[0]) for model in plan.models]
    print_validation([r for r in results if r.level is not ValidationLevel.SAFE])
    if not all(r.can_proceed for r in results):
        raise ConfigError("recipe size range is below the minimum size of some model")

    with console.status(f"[bold blue]Building {plan.count} instances..."):
        manifest = build_dataset(plan, out_dir, workers)

    table = Table(title="Dataset", show_header=True, header_style="bold cyan")
    table.add_column("Model", style="cyan")
    table.add_column("Instances", justify="right")
    table.add_column("N range", justify="right")
    for model in plan.models:
        sizes = [e.n for e in manifest.entries if e.model == model]
        if sizes:
            table.add_row(model, str(len(sizes)), f"{min(sizes)}-{max(sizes)}")
    console.print(table)
    console.print(f"[green]✓[/green] Manifest written to: {Path(out_dir) / 'manifest.json'}")


@cli.command()
@click.argument("edge_files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--measure", type=click.Choice(MEASURES), default="connectivity", show_default=True)
@click.option("--attack", type=click.Choice(ATTACKS), default="degree", show_default=True)
@click.option("--theorem", type=click.Choice(THEOREMS), default="auto", show_default=True)
@click.option("--reps", "repetitions", type=int, default=DEFAULT_REPETITIONS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--static-degree", is_flag=True, help="Rank nodes by initial degree instead of recomputing")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), help="Write <name>.csv per input here")
@handle_errors
def simulate(edge_files, measure, attack, theorem, repetitions, seed, static_degree, out_dir):
    """
    Simulate attacks and write robustness curves as CSV.

    With one input and no --out the curve goes to stdout.
    """
    if len(edge_files) > 1 and not out_dir:
        raise ConfigError("--out is required with more than one input")
    for path in edge_files:
        graph = parse_edge_list(path)
        curve = ground_truth(
            graph,
            Measure(measure),
            AttackKind(attack),
            repetitions,
            _instance_rng(seed, path),
            Theorem(theorem),
            adaptive=not static_degree,
        )
        if out_dir:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            target = Path(out_dir) / f"{Path(path).stem}.csv"
            write_curve_csv(target, curve.values)
            logger.info("%s: R=%.6f -> %s", path, curve.scalar().value, target)
        else:
            write_curve_csv(sys.stdout, curve.values)


@cli.command(name="train")
@click.argument("manifests", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", "out_path", type=click.Path(dir_okay=False), required=True, help="Checkpoint file")
@click.option("--config", "preset", type=click.Choice(["default", "reduced"]), default="default", show_default=True)
@click.option("--output-len", type=int, help="Predicted curve length M (preset default if omitted)")
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--lr", type=float, default=1e-4, show_default=True)
@click.option("--accumulation", type=int, default=8, show_default=True, help="Samples per optimizer step")
@click.option("--patience", type=int, help="Early-stop patience in epochs")
@click.option("--val-fraction", type=float, default=0.1, show_default=True)
@click.option("--resize", type=int, help="Fixed-input baseline: resize every adjacency to W×W")
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def train_command(manifests, out_path, preset, output_len, epochs, lr, accumulation, patience, val_fraction, resize, seed):
    """Train an SPP-CNN checkpoint from one or more dataset manifests."""
    pairs = load_training_pairs(manifests)
    if not pairs:
        raise DatasetError("manifests contain no instances")
    config = TrainConfig(
        epochs=epochs,
        lr=lr,
        accumulation=accumulation,
        seed=seed,
        patience=patience,
        validation_fraction=val_fraction,
        resize=resize,
    )
    model = build_model(ModelConfig.preset(preset, output_len), seed)
    console.print(f"Model: {preset} preset, {model.parameter_count():,} parameters, {len(pairs)} samples")

    with console.status("[bold blue]Training..."):
        result = train(model, pairs, config)
    save_checkpoint(result.checkpoint, out_path)

    meta = result.checkpoint.metadata
    table = Table(title="Training", show_header=True, header_style="bold cyan")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="white")
    table.add_row("Epochs run", str(meta["epochs_run"]))
    table.add_row("Best epoch", str(meta["best_epoch"]))
    table.add_row("Best validation ξ", f"{meta['best_val_xi']:.6f}")
    if meta["final_train_mse"] is not None:
        table.add_row("Final train MSE", f"{meta['final_train_mse']:.6f}")
        table.add_row("Final train MAE", f"{meta['final_train_mae']:.6f}")
    table.add_row("Dataset fingerprint", meta["dataset_fingerprint"])
    console.print(table)
    console.print(f"[green]✓[/green] Checkpoint saved to: {out_path}")


@cli.command(name="predict")
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", "manifests", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Predict every instance; CSVs carry r_true and r_pred")
@click.option("--edges", "edge_files", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Predict a bare edge list; CSV carries r_pred only")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--resize", type=int, help="Fixed-input baseline: resize the adjacency to W×W")
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def predict_command(checkpoint, manifests, edge_files, out_dir, resize, seed):
    """Predict robustness curves with a trained checkpoint."""
    if not manifests and not edge_files:
        raise ConfigError("give at least one --manifest or --edges input")
    state = load_checkpoint(checkpoint)
    model = model_from_checkpoint(state)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def run(graph: Graph, key: str):
        rng = np.random.default_rng(derive_seed(seed, key))
        curve = predict(model, graph, resize=resize, rng=rng)
        if resize is not None:
            logger.info("%s: delta=%.4f", key, abs(graph.n_alive - resize) / graph.n_alive)
        return curve

    count = 0
    for path in manifests:
        manifest = DatasetManifest.load(path)
        for entry in manifest.entries:
            curve = run(manifest.graph(entry), entry.instance_id)
            write_curve_csv(out / f"{entry.instance_id}.csv", manifest.curve(entry).values, curve.values)
            count += 1
    for path in edge_files:
        curve = run(parse_edge_list(path), Path(path).name)
        write_curve_csv(out / f"{Path(path).stem}.csv", r_pred=curve.values)
        count += 1
    console.print(f"[green]✓[/green] {count} prediction(s) written to: {out}")


def _curve_files(path: str) -> List[Path]:
    target = Path(path)
    if target.is_dir():
        return sorted(p for p in target.glob("*.csv"))
    return [target]


def _collect(path: str, method: str, manifest: Optional[DatasetManifest]) -> EvalReport:
    entries = {e.instance_id: e for e in manifest.entries} if manifest else {}
    report = EvalReport()
    for csv in _curve_files(path):
        r_true, r_pred = read_curve_csv(csv)
        if r_pred is None:
            raise DatasetError(f"{csv}: no r_pred column")
        entry = entries.get(csv.stem)
        if r_true is None:
            if entry is None:
                raise DatasetError(f"{csv}: no r_true column and no manifest entry to take it from")
            r_true = manifest.curve(entry).values
        report.add(
            csv.stem,
            prediction_error(r_true, r_pred),
            model=entry.model if entry else "",
            directed=entry.directed if entry else False,
            n=len(r_true),
            measure=entry.measure if entry else "",
            method=method,
        )
    if not report.rows:
        raise DatasetError(f"{path}: no curve CSVs found")
    return report


@cli.command(name="eval")
@click.argument("predictions", type=click.Path(exists=True))
@click.argument("baseline", type=click.Path(exists=True), required=False)
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), help="Attach model/measure by instance id")
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option("--report", type=click.Path(dir_okay=False), help="Per-instance CSV")
@click.option("--summary", type=click.Path(dir_okay=False), help="Summary CSV by model/measure/directedness/method")
@handle_errors
def eval_command(predictions, baseline, manifest, alpha, report, summary):
    """
    Prediction error ξ per instance, and a Kruskal-Wallis comparison.

    PREDICTIONS and BASELINE are curve CSVs or directories of them. '+' means
    PREDICTIONS has significantly smaller errors, '-' larger, '≈' no difference.
    """
    loaded = DatasetManifest.load(manifest) if manifest else None
    first = _collect(predictions, Path(predictions).stem, loaded)
    combined = EvalReport(list(first.rows))

    table = Table(title="Prediction error", show_header=True, header_style="bold cyan")
    table.add_column("Method", style="cyan")
    table.add_column("Instances", justify="right")
    table.add_column("Mean ξ", justify="right")
    table.add_row(predictions, str(len(first.rows)), f"{first.mean_error:.6f}")

    if baseline:
        second = _collect(baseline, Path(baseline).stem, loaded)
        combined.rows.extend(second.rows)
        table.add_row(baseline, str(len(second.rows)), f"{second.mean_error:.6f}")
        console.print(table)
        result = significance_test(first.errors, second.errors, alpha)
        sign_table = Table(title="Kruskal-Wallis", show_header=True, header_style="bold cyan")
        sign_table.add_column("H", justify="right")
        sign_table.add_column("p", justify="right")
        sign_table.add_column("Sign", justify="center")
        sign_table.add_row(f"{result.h:.4f}", f"{result.p:.4g}", result.sign)
        console.print(sign_table)
    else:
        console.print(table)

    if report:
        combined.write(report, summary)
    elif summary:
        combined.summary().to_csv(summary, index=False, float_format="%.9g")


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@click.option("--limit", type=int, help="Only the first N instances")
@click.option("--theorem", type=click.Choice(THEOREMS), default="auto", show_default=True)
@click.option("--warmups", type=int, default=1, show_default=True)
@click.option("--reps", "repetitions", type=int, default=3, show_default=True)
@click.option("--report", type=click.Path(dir_okay=False), help="Per-instance runtime CSV")
@handle_errors
def bench(manifest, checkpoint, limit, theorem, warmups, repetitions, report):
    """Compare prediction time with one attack simulation per instance."""
    data = DatasetManifest.load(manifest)
    model = model_from_checkpoint(load_checkpoint(checkpoint))
    entries = data.entries[:limit] if limit else data.entries

    results = EvalReport()
    table = Table(title="Runtime (median)", show_header=True, header_style="bold cyan")
    table.add_column("Instance", style="cyan")
    table.add_column("N", justify="right")
    table.add_column("Simulate", justify="right")
    table.add_column("Predict", justify="right")
    table.add_column("Ratio", justify="right")
    for entry in entries:
        graph = data.graph(entry)
        strategy = AttackStrategy(AttackKind(entry.attack), seed=entry.seed)
        sim = bench_runtime(
            lambda: simulate_curve(graph, Measure(entry.measure), strategy, Theorem(theorem)), warmups, repetitions
        )
        pred = bench_runtime(lambda: predict(model, graph), warmups, repetitions)
        for method, timing in (("simulation", sim), ("sppcnn", pred)):
            results.add(entry.instance_id, 0.0, entry.model, entry.directed, entry.n, entry.measure, method, timing["median"])
        table.add_row(
            entry.instance_id, str(entry.n), format_seconds(sim["median"]), format_seconds(pred["median"]),
            format_ratio(pred["median"], sim["median"]),
        )
    console.print(table)
    frame = results.frame()
    sim_total = frame.loc[frame["method"] == "simulation", "runtime"].median()
    pred_total = frame.loc[frame["method"] == "sppcnn", "runtime"].median()
    console.print(Panel(f"Median prediction time is {format_ratio(pred_total, sim_total)} of simulation", border_style="blue"))
    if report:
        frame.drop(columns=["xi"]).to_csv(report, index=False, float_format="%.9g")


@cli.command()
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("svg_file", type=click.Path(dir_okay=False))
@click.option("--title", default="", help="Chart title")
@handle_errors
def plot(csv_file, svg_file, title):
    """Render a curve CSV (true and predicted) as an SVG line chart."""
    emit_plot(csv_file, svg_file, title)
    console.print(f"[green]✓[/green] Plot saved to: {svg_file}")


@cli.command()
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_file", type=click.Path(dir_okay=False))
@click.option("--directed/--undirected", default=True, show_default=True, help="How to read the node pairs")
@click.option("--lcc", is_flag=True, help="Keep only the largest weakly connected component")
@click.option("--erase-directions", is_flag=True, help="Write an undirected graph")
@handle_errors
def convert(input_file, output_file, directed, lcc, erase_directions):
    """
    Convert a node-pair file with arbitrary ids into a robnet edge list.

    Examples:

        robnet convert reddit_0001.txt reddit_0001.edges --undirected --lcc
    """
    with console.status(f"[bold blue]Converting {input_file}..."):
        result = convert_pairs(input_file, directed, lcc, erase_directions)
        write_edge_list(result.graph, output_file)
    console.print(
        f"[green]✓[/green] {result.graph.n_initial:,} nodes, {result.graph.edge_count:,} edges written to: {output_file}"
    )


@cli.command()
@click.argument("edge_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def info(edge_file, seed):
    """Display size, degree and robustness of one edge list."""
    with console.status(f"[bold blue]Loading {edge_file}..."):
        graph = parse_edge_list(edge_file)
        partition = graph.components()
        rng = _instance_rng(seed, edge_file)
        connectivity = ground_truth(graph, Measure.CONNECTIVITY, AttackKind.DEGREE, 1, rng).scalar()
        controllability = ground_truth(graph, Measure.CONTROLLABILITY, AttackKind.DEGREE, 1, rng).scalar()

    table = Table(title="Network Information", show_header=True, header_style="bold cyan")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="white")
    table.add_row("Directed", "yes" if graph.directed else "no")
    table.add_row("Nodes", f"{graph.n_alive:,}")
    table.add_row("Edges", f"{graph.edge_count:,}")
    table.add_row("Average degree", f"{graph.average_degree():.3f}")
    table.add_row("Components", str(len(partition)))
    table.add_row("Largest component", f"{partition.largest:,}")
    table.add_row("Driver nodes", f"{driver_count(graph):,}")
    table.add_row("Connectivity robustness", f"{connectivity.value:.6f}")
    table.add_row("Controllability robustness", f"{controllability.value:.6f}")
    console.print(table)


if __name__ == "__main__":
    cli()
