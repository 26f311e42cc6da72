"""Experiment orchestration: a resolved config in, immutable run directories out.

One experiment is one config executed once per seed. Each seed gets its own
directory with the five run artifacts (metadata, evaluation log, outcome
archive, behavior grid, metrics) plus rendered figures. ``compare_runs``
pools outcome archives from several such directories, builds the union
reference set, and reports per-run coverage against it.
"""

from __future__ import annotations

import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, metrics, reporting, runio
from .errors import ConfigError
from .geometry import shapes
from .geometry.loaders import load_mesh
from .geometry.mesh import TriangleMesh
from .geometry.sampling import sample_surface
from .qd.engine import RunResult, run_cma_mae, run_map_elites, run_random
from .runconfig import BUILTIN_MESHES, RunConfig, to_ini

OUT_ROOT_ENV = "QDGRIP_OUT"

# The builtin scenes; sized for the default parallel jaw hand.
_BUILTINS = {
    "sphere": lambda: shapes.icosphere(0.02, 2),
    "box": lambda: shapes.box(0.04, 0.05, 0.03),
    "mug": lambda: shapes.mug(),
    "wedge": lambda: shapes.wedge(np.deg2rad(25.0)),
}


def resolve_mesh(config: RunConfig) -> TriangleMesh:
    if config.mesh in _BUILTINS:
        mesh = _BUILTINS[config.mesh]()
        if config.mesh_scale != 1.0:
            mesh = TriangleMesh.from_arrays(
                mesh.vertices, mesh.triangles, scale=config.mesh_scale
            )
        return mesh
    return load_mesh(config.mesh, scale=config.mesh_scale)


def out_root(config: RunConfig) -> Path:
    if config.out:
        return Path(config.out)
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


def _experiment_dir(config: RunConfig) -> Path:
    stem = Path(config.mesh).stem if config.mesh not in BUILTIN_MESHES else config.mesh
    name = f"{stem}-{config.prior}-{config.algorithm}-{config.fitness}"
    root = out_root(config)
    candidate = root / name
    bump = 1
    while candidate.exists():
        bump += 1
        candidate = root / f"{name}-{bump}"
    candidate.mkdir(parents=True)
    return candidate


def _dispatch(config: RunConfig, mesh, sset, spec, qd) -> RunResult:
    args = (config.prior, mesh, sset, spec, config.physics, qd)
    kwargs = dict(fitness_mode=config.fitness, workers=config.workers)
    if config.algorithm == "random":
        return run_random(*args, **kwargs)
    if config.algorithm == "CMA_MAE":
        return run_cma_mae(*args, **kwargs)
    return run_map_elites(config.algorithm, *args, **kwargs)


def compute_run_metrics(outcome, step: float = metrics.QUANT_STEP, bins: int = 36) -> dict:
    """The per-run metrics document: self coverage, angle histogram, heatmap."""
    payload: dict = {"step": step, "n_success": len(outcome)}
    heat = metrics.voxel_heatmap(outcome, step)
    payload["voxel_heatmap"] = [
        [int(k[0]), int(k[1]), int(k[2]), float(heat[k])] for k in sorted(heat)
    ]
    if len(outcome):
        ref = metrics.build_reference_set([outcome], step)
        curve = metrics.coverage_curve(outcome, ref)
        payload["self_reference_size"] = len(ref)
        payload["coverage_curve"] = [[int(i), float(c)] for i, c in curve]
    else:
        payload["self_reference_size"] = 0
        payload["coverage_curve"] = None
    try:
        mass, edges = metrics.nu_histogram(outcome, bins)
        payload["nu_histogram"] = {
            "mass": [float(v) for v in mass],
            "edges": [float(v) for v in edges],
            "bins": bins,
        }
    except metrics.MetricsError:
        payload["nu_histogram"] = None
    return payload


def write_run_figures(run_dir: Path, payload: dict, budget: int | None = None) -> None:
    if payload["coverage_curve"]:
        reporting.save_coverage_figure(
            {"this run": payload["coverage_curve"]},
            run_dir / reporting.COVERAGE_FIGURE,
            budget=budget,
        )
    hist = payload["nu_histogram"]
    if hist is not None:
        reporting.save_nu_figure(
            np.array(hist["mass"]), np.array(hist["edges"]), run_dir / reporting.NU_FIGURE
        )
    heat = {(i, j, k): f for i, j, k, f in payload["voxel_heatmap"]}
    reporting.save_heatmap_figure(heat, payload["step"], run_dir / reporting.HEATMAP_FIGURE)


def run_experiment(config: RunConfig, progress=None) -> list[Path]:
    """Execute the config once per seed; returns the created run directories."""
    mesh = resolve_mesh(config)
    spec = config.resolve_gripper()
    digest = mesh.content_hash()
    exp_dir = _experiment_dir(config)
    run_dirs = []
    for seed in config.seeds:
        t0 = time.perf_counter()
        sset = sample_surface(mesh, config.n_samples, seed=seed)
        result = _dispatch(config, mesh, sset, spec, replace(config.qd, seed=seed))
        elapsed = time.perf_counter() - t0
        run_dir = exp_dir / f"seed{seed}"
        run_dir.mkdir()
        _write_run(run_dir, config, seed, mesh, digest, result, elapsed)
        run_dirs.append(run_dir)
        if progress is not None:
            progress(
                f"seed {seed}: {len(result.outcome)}/{len(result.log)} successful, "
                f"{elapsed:.1f}s -> {run_dir}"
            )
    return run_dirs


def _write_run(
    run_dir: Path,
    config: RunConfig,
    seed: int,
    mesh: TriangleMesh,
    digest: str,
    result: RunResult,
    elapsed: float,
) -> None:
    spec = config.resolve_gripper()
    runio.write_json(
        run_dir / runio.METADATA_FILE,
        {
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "version": __version__,
            "seed": seed,
            "algorithm": config.algorithm,
            "prior": config.prior,
            "fitness": config.fitness,
            "mesh": {
                "source": config.mesh,
                "scale": config.mesh_scale,
                "hash": digest,
                "n_vertices": int(len(mesh.vertices)),
                "n_triangles": int(len(mesh.triangles)),
            },
            "gripper": spec.name,
            "config_ini": to_ini(config),
            "n_evals": len(result.log),
            "n_success": len(result.outcome),
            "n_cells": None if result.grid is None else len(result.grid.cells),
            "restarts": result.restarts,
            "runtime_s": round(elapsed, 3),
        },
        "run_metadata",
    )
    runio.write_eval_log(run_dir / runio.EVAL_LOG_FILE, result.log)
    runio.write_outcome_archive(run_dir / runio.OUTCOME_FILE, result.outcome, config.prior)
    runio.write_behavior_grid(run_dir / runio.GRID_FILE, result.grid, config.prior)
    payload = compute_run_metrics(result.outcome)
    runio.write_json(run_dir / runio.METRICS_FILE, payload, "run_metrics")
    write_run_figures(run_dir, payload, budget=len(result.log))


def refresh_metrics(run_dir: Path, step: float = metrics.QUANT_STEP, bins: int = 36) -> dict:
    """Recompute a run's metrics document and figures from its archive file."""
    run_dir = Path(run_dir)
    outcome, _ = runio.read_outcome_archive(run_dir / runio.OUTCOME_FILE)
    meta = runio.read_json(run_dir / runio.METADATA_FILE, "run_metadata")
    payload = compute_run_metrics(outcome, step, bins)
    runio.write_json(run_dir / runio.METRICS_FILE, payload, "run_metrics")
    write_run_figures(run_dir, payload, budget=meta.get("n_evals"))
    return payload


def compare_runs(
    run_dirs: list, step: float = metrics.QUANT_STEP, out_dir: Path | None = None
) -> dict:
    """Coverage comparison over a shared reference set.

    All runs must attack the same object; the union of their archives is
    the reference, so a run compared against itself scores 1.0.
    """
    if len(run_dirs) < 2:
        raise ConfigError("compare needs at least two run directories")
    loaded = []
    for d in run_dirs:
        d = Path(d)
        meta = runio.read_json(d / runio.METADATA_FILE, "run_metadata")
        outcome, _ = runio.read_outcome_archive(d / runio.OUTCOME_FILE)
        loaded.append((d, meta, outcome))
    hashes = {meta["mesh"]["hash"] for _, meta, _ in loaded}
    if len(hashes) > 1:
        names = ", ".join(str(d) for d, _, _ in loaded)
        raise ConfigError(f"runs cover different meshes, cannot compare: {names}")

    ref = metrics.build_reference_set([outcome for _, _, outcome in loaded], step)
    rows = []
    curves = {}
    for d, meta, outcome in loaded:
        label = f"{meta['algorithm']}_{meta['prior']}_seed{meta['seed']}"
        if len(ref):
            curve = metrics.coverage_curve(outcome, ref)
            final = metrics.final_coverage(curve)
            curves[label] = [[int(i), float(c)] for i, c in curve]
        else:
            final = None
        rows.append(
            {
                "run": str(d),
                "algorithm": meta["algorithm"],
                "prior": meta["prior"],
                "seed": meta["seed"],
                "n_success": len(outcome),
                "final_coverage": final,
            }
        )
    payload = {
        "step": step,
        "reference_size": len(ref),
        "rows": rows,
        "curves": curves,
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        runio.write_json(out_dir / "comparison.json", payload, "comparison")
        _write_comparison_csv(out_dir / "comparison.csv", rows)
        if curves:
            budget = max(meta["n_evals"] for _, meta, _ in loaded)
            reporting.save_coverage_figure(
                curves, out_dir / reporting.COVERAGE_FIGURE, budget=budget
            )
    return payload


def _write_comparison_csv(path: Path, rows: list[dict]) -> None:
    lines = [f"# qdgrip comparison schema={runio.SCHEMA_VERSION}"]
    lines.append("run,algorithm,prior,seed,n_success,final_coverage")
    for r in rows:
        cov = "" if r["final_coverage"] is None else repr(float(r["final_coverage"]))
        lines.append(
            f"{r['run']},{r['algorithm']},{r['prior']},{r['seed']},{r['n_success']},{cov}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
