"""Command line entry point: ``coverclust cluster | bench | validate``."""

from __future__ import annotations

import json
import statistics
import sys
from collections import Counter
from pathlib import Path

import click

from .center_space import FiniteCenters, PointSetCenters, TrajectoryCenters
from .dataset import element_record, read_dataset
from .engine import ClusterParams, run
from .errors import InputError, ParameterError
from .sampling import NORMALIZATION, SamplingParams

EXIT_INPUT = 2
EXIT_PARAMS = 3


def _optional(cast):
    def convert(value):
        if value is None or str(value).lower() == "none":
            return None
        return cast(value)

    return convert


def _budget(value):
    if value == "exhaustive":
        return value
    return int(value)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _build(elements, opts):
    """Center space and engine parameters from parsed CLI options."""
    sampling = SamplingParams(opts["epsilon"], opts["delta"], loose=opts["allow_loose_params"])
    kind = elements[0].kind
    if opts["centers_file"]:
        centers = read_dataset(opts["centers_file"])
        if centers[0].kind != kind:
            raise InputError(f"centers file holds {centers[0].kind} records but the input holds {kind}")
        space = FiniteCenters(centers)
    else:
        if opts["l"] is None:
            raise ParameterError("--l is required", "--l is required unless --centers-file is given")
        space = TrajectoryCenters(opts["l"]) if kind == "trajectory" else PointSetCenters(opts["l"])
    try:
        budget = _budget(opts["subset_budget"])
    except ValueError:
        raise ParameterError("subset_budget >= 1 or 'exhaustive'", f"bad subset budget {opts['subset_budget']!r}")
    params = ClusterParams(
        k=opts["k"],
        sampling=sampling,
        alpha=opts["alpha"],
        mode=opts["mode"],
        subset_budget=budget,
        repetitions=opts["repetitions"],
        seed=opts["seed"],
        cover_ratio_cap=_optional(float)(opts["cover_ratio_cap"]),
        cover_limit=_optional(int)(opts["cover_limit"]),
        gamma_keep=_optional(int)(opts["gamma_keep"]),
        strong_m=opts["sample_m"],
        workers=opts["workers"],
    )
    return space, params


def build_report(elements, space, result, opts, timing: bool) -> dict:
    p = result.params
    s = p.sampling
    paper_faithful = (
        p.cover_ratio_cap is None
        and p.cover_limit is None
        and p.gamma_keep is None
        and p.subset_budget == "exhaustive"
        and not opts["allow_loose_params"]
    )
    return {
        "input": {"n": len(elements), "kind": elements[0].kind, "dim": elements[0].dim},
        "center_space": space.describe(),
        "params": {
            "k": p.k,
            "epsilon": s.epsilon,
            "delta": s.delta,
            "epsilon1": s.epsilon1,
            "delta1": s.delta1,
            "m": p.m,
            "alpha": p.resolved_alpha,
            "sample_size": p.sample_size,
            "mode": p.mode,
            "subset_budget": p.subset_budget,
            "repetitions": p.resolved_repetitions,
            "cover_ratio_cap": p.cover_ratio_cap,
            "cover_limit": p.cover_limit,
            "gamma_keep": p.gamma_keep,
            "cover_mode": p.cover_mode,
        },
        "mode_flags": {
            "allow_loose_params": bool(opts["allow_loose_params"]),
            "paper_faithful": paper_faithful,
            "normalization": NORMALIZATION,
        },
        "seed": p.seed,
        "centers": [dict(element_record(c), id=f"center_{i}") for i, c in enumerate(result.centers)],
        "assignment": [{"id": i, "center_index": c, "distance": d} for i, c, d in result.assignment],
        "total_cost": result.total_cost,
        "counters": {
            "distance_evals": result.counters.distance_evals,
            "projection_evals": result.counters.projection_evals,
            "wall_ms": round(result.counters.wall_time * 1000, 3) if timing else None,
        },
        "trace": result.trace.as_dict(),
    }


def _engine_options(f):
    opts = [
        click.option("--k", "k", type=int, required=True, help="Number of centers."),
        click.option("--l", "l", type=int, default=None, help="Maximum center complexity (points per center)."),
        click.option("--epsilon", type=float, default=0.4, show_default=True),
        click.option("--delta", type=float, default=0.95, show_default=True),
        click.option("--mode", type=click.Choice(["weak", "strong"]), default="weak", show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--subset-budget", default="32", show_default=True, help="Integer or 'exhaustive'."),
        click.option("--repetitions", type=int, default=None, help="Default: ceil(ln 20 (5/(1-delta))^k), at most 256."),
        click.option("--cover-ratio-cap", default="64", show_default=True, help="Float or 'none'."),
        click.option("--cover-limit", default="2048", show_default=True, help="Integer or 'none'."),
        click.option("--gamma-keep", default="3", show_default=True, help="Integer or 'none'."),
        click.option("--alpha", type=float, default=None, help="Default: epsilon / (8 k^2)."),
        click.option("--sample-m", type=int, default=None, help="Subset size in strong mode."),
        click.option("--centers-file", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Explicit finite center list (records file)."),
        click.option("--allow-loose-params", is_flag=True, help="Accept epsilon, delta outside the proven ranges."),
        click.option("--workers", type=int, default=1, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@click.group()
def cli():
    """Approximate k-median clustering of trajectories and point sets."""


@cli.command("cluster")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@_engine_options
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Report path (default stdout).")
@click.option("--timing", is_flag=True, help="Record wall time (makes reports differ between runs).")
def cmd_cluster(input_path, output, timing, **opts):
    """Cluster INPUT_PATH and write a JSON run report."""
    try:
        elements = read_dataset(input_path)
        space, params = _build(elements, opts)
        result = run(elements, space, params)
    except InputError as exc:
        _fail(EXIT_INPUT, str(exc))
    except ParameterError as exc:
        _fail(EXIT_PARAMS, f"parameter constraint violated: {exc.constraint} ({exc})")
    text = json.dumps(build_report(elements, space, result, opts, timing), indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


@cli.command("bench")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@_engine_options
@click.option("--sizes", default=None, help="Comma-separated prefix sizes (default: the whole file).")
@click.option("--seeds", type=int, default=5, show_default=True, help="Runs per size; medians are reported.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON rows instead of a table.")
def cmd_bench(input_path, sizes, seeds, as_json, **opts):
    """Run prefixes of INPUT_PATH of increasing size and tabulate cost counters."""
    try:
        elements = read_dataset(input_path)
        ns = [len(elements)] if sizes is None else [int(s) for s in sizes.split(",")]
        if any(not 1 <= n <= len(elements) for n in ns):
            raise ParameterError("1 <= size <= n", f"sizes must lie in [1, {len(elements)}]")
        rows = []
        for n in ns:
            walls, evals = [], []
            for s in range(seeds):
                space, params = _build(elements, dict(opts, seed=opts["seed"] + s))
                res = run(elements[:n], space, params)
                walls.append(res.counters.wall_time * 1000)
                evals.append(res.counters.distance_evals)
            rows.append({"n": n, "wall_ms": statistics.median(walls), "distance_evals": statistics.median(evals)})
    except InputError as exc:
        _fail(EXIT_INPUT, str(exc))
    except ParameterError as exc:
        _fail(EXIT_PARAMS, f"parameter constraint violated: {exc.constraint} ({exc})")
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    click.echo(f"{'n':>8} {'wall_ms':>12} {'distance_evals':>16}")
    for r in rows:
        click.echo(f"{r['n']:>8} {r['wall_ms']:>12.1f} {r['distance_evals']:>16g}")


@cli.command("validate")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
def cmd_validate(input_path):
    """Check INPUT_PATH (kinds, dimensions, unique ids) and print a summary."""
    try:
        elements = read_dataset(input_path)
    except InputError as exc:
        _fail(EXIT_INPUT, str(exc))
    lengths = Counter(len(e) for e in elements)
    click.echo(f"records: {len(elements)}")
    click.echo(f"kind: {elements[0].kind}")
    click.echo(f"dimension: {elements[0].dim}")
    click.echo(f"points per record: min {min(lengths)}, max {max(lengths)}")


def main():
    cli()


if __name__ == "__main__":
    main()
