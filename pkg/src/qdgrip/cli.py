"""Command line interface.

Four verbs. ``run`` executes a config (file, flags, or both) once per seed
and leaves one artifact directory per run. ``compare`` pools finished runs
into a shared reference set and reports coverage. ``metrics`` recomputes a
run's derived outputs from its archive. ``inspect`` summarizes a run on
stdout.

Exit codes: 0 on success, 2 for configuration problems, 3 for IO and file
format problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, MeshLoadError, SchemaError
from .experiment import OUT_ROOT_ENV, compare_runs, refresh_metrics, run_experiment
from .metrics import MetricsError, QUANT_STEP
from .runconfig import RunConfig, apply_overrides, load_config
from . import runio

# Convenience flags and the config key each one addresses.
_SHORTCUTS = (
    ("--mesh", "run.mesh", "builtin shape name or mesh file path"),
    ("--scale", "run.mesh_scale", "uniform mesh scale factor"),
    ("--gripper", "run.gripper", "gripper preset name"),
    ("--prior", "run.prior", "sampling prior"),
    ("--algorithm", "run.algorithm", "search algorithm"),
    ("--fitness", "run.fitness", "fitness mode: shake or mdr"),
    ("--seeds", "run.seeds", "seed list, e.g. '0 1 2'"),
    ("--budget", "qd.n_evals", "evaluation budget per seed"),
    ("--workers", "run.workers", "evaluation worker processes"),
    ("--samples", "run.n_samples", "surface samples for the projection"),
    ("--out", "run.out", f"output root (default ${OUT_ROOT_ENV} or ./runs)"),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdgrip", description="Grasp repertoire generation on triangle meshes."
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="execute a config, one run directory per seed")
    run_p.add_argument("-c", "--config", help="INI config file")
    run_p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override any config key (repeatable)",
    )
    for flag, key, help_text in _SHORTCUTS:
        run_p.add_argument(flag, dest=key.replace(".", "__"), help=help_text)
    run_p.add_argument("--quiet", action="store_true", help="suppress per-seed progress")

    cmp_p = sub.add_parser("compare", help="coverage comparison across run directories")
    cmp_p.add_argument("dirs", nargs="+", help="run directories")
    cmp_p.add_argument("--step", type=float, default=QUANT_STEP, help="voxel size (m)")
    cmp_p.add_argument("--out", help="write comparison files and figure here")

    met_p = sub.add_parser("metrics", help="recompute a run's metrics and figures")
    met_p.add_argument("dir", help="run directory")
    met_p.add_argument("--step", type=float, default=QUANT_STEP, help="voxel size (m)")
    met_p.add_argument("--bins", type=int, default=36, help="angle histogram bins")

    ins_p = sub.add_parser("inspect", help="summarize a run directory")
    ins_p.add_argument("dir", help="run directory")
    ins_p.add_argument("--top", type=int, default=5, help="best grasps to list")
    return parser


def _cmd_run(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        mesh = getattr(args, "run__mesh", None)
        if not mesh:
            raise ConfigError("run needs --config or --mesh")
        config = RunConfig(mesh=mesh)
    overrides = []
    for flag, key, _ in _SHORTCUTS:
        value = getattr(args, key.replace(".", "__"), None)
        if value is not None:
            overrides.append(f"{key}={value}")
    overrides.extend(args.overrides)
    config = apply_overrides(config, overrides)
    progress = None if args.quiet else print
    run_dirs = run_experiment(config, progress=progress)
    print(run_dirs[0].parent)
    return 0


def _cmd_compare(args) -> int:
    payload = compare_runs(args.dirs, step=args.step, out_dir=args.out)
    print(f"reference set: {payload['reference_size']} voxels at {payload['step']} m")
    header = f"{'run':<44} {'algorithm':<8} {'prior':<9} {'seed':>4} {'success':>8} {'coverage':>9}"
    print(header)
    for row in payload["rows"]:
        cov = "-" if row["final_coverage"] is None else f"{row['final_coverage']:.4f}"
        name = row["run"]
        if len(name) > 43:
            name = "..." + name[-40:]
        print(
            f"{name:<44} {row['algorithm']:<8} {row['prior']:<9} "
            f"{row['seed']:>4} {row['n_success']:>8} {cov:>9}"
        )
    return 0


def _cmd_metrics(args) -> int:
    payload = refresh_metrics(Path(args.dir), step=args.step, bins=args.bins)
    hist = payload["nu_histogram"]
    print(
        f"{args.dir}: {payload['n_success']} successful grasps, "
        f"{payload['self_reference_size']} voxels, "
        f"angle histogram {'written' if hist else 'not applicable'}"
    )
    return 0


def _cmd_inspect(args) -> int:
    run_dir = Path(args.dir)
    meta = runio.read_json(run_dir / runio.METADATA_FILE, "run_metadata")
    outcome, _ = runio.read_outcome_archive(run_dir / runio.OUTCOME_FILE)
    mesh = meta["mesh"]
    print(f"run        {run_dir}")
    print(f"created    {meta['created']}  (version {meta['version']})")
    print(f"scene      {mesh['source']} scale {mesh['scale']} hash {mesh['hash'][:12]}")
    print(f"search     {meta['algorithm']} / {meta['prior']} prior / {meta['fitness']} fitness")
    print(f"seed       {meta['seed']}")
    cells = "-" if meta["n_cells"] is None else str(meta["n_cells"])
    print(
        f"counts     {meta['n_success']}/{meta['n_evals']} successful, "
        f"{cells} grid cells, {meta['restarts']} restarts"
    )
    print(f"runtime    {meta['runtime_s']} s")
    best = sorted(outcome, key=lambda r: (-r.fitness, r.eval_index))[: args.top]
    if best:
        print(f"top {len(best)} grasps:")
        for rec in best:
            p = rec.grasp.position
            nu = "-" if rec.grasp.nu is None else f"{rec.grasp.nu:.3f}"
            print(
                f"  eval {rec.eval_index:>6}  fitness {rec.fitness:g}  "
                f"pos ({p[0]:+.3f}, {p[1]:+.3f}, {p[2]:+.3f})  nu {nu}"
            )
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "metrics": _cmd_metrics,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except (ConfigError, MetricsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, MeshLoadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
