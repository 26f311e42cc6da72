"""Run artifacts: schema-versioned files for logs, archives, and metrics.

One run directory holds five artifacts. The outcome archive and behavior
grid are newline-delimited JSON with a header line (streamable, one grasp
per line); the evaluation log is CSV behind a schema comment; metadata and
metrics are single JSON documents. All float serialization goes through
``repr``-style shortest round-trip formatting, so a deterministic run
produces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .gripper import GraspPose
from .projection import Genome
from .qd.archive import BehaviorGrid, Elite, OutcomeArchive, OutcomeRecord
from .qd.engine import LogRecord

SCHEMA_VERSION = 1

METADATA_FILE = "metadata.json"
EVAL_LOG_FILE = "eval_log.csv"
OUTCOME_FILE = "outcome_archive.jsonl"
GRID_FILE = "behavior_grid.jsonl"
METRICS_FILE = "metrics.json"

_LOG_HEADER = f"# qdgrip eval_log schema={SCHEMA_VERSION}"


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values, float)]


def _dumps(obj) -> str:
    # Fixed separators and insertion-ordered keys keep bytes reproducible.
    return json.dumps(obj, separators=(", ", ": "))


def write_json(path, payload: dict, kind: str) -> None:
    doc = {"schema": SCHEMA_VERSION, "kind": kind}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_json(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    _check_header(path, doc, kind)
    return doc


def _check_header(path, doc: dict, kind: str) -> None:
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema {doc.get('schema')!r}, this build reads {SCHEMA_VERSION}"
        )
    if doc.get("kind") != kind:
        raise SchemaError(f"{path}: kind {doc.get('kind')!r}, expected {kind!r}")


# ------------------------------------------------------------- evaluation log

def write_eval_log(path, log: list[LogRecord]) -> None:
    lines = [_LOG_HEADER, "eval_index,prior,valid,fitness,bx,by,bz,genome"]
    for rec in log:
        b = [repr(float(v)) for v in rec.behavior]
        genome = " ".join(repr(float(v)) for v in rec.genome.values)
        lines.append(
            f"{rec.eval_index},{rec.prior_tag},{int(rec.valid)},{float(rec.fitness)!r},"
            f"{b[0]},{b[1]},{b[2]},{genome}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_eval_log(path) -> list[LogRecord]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != _LOG_HEADER:
        raise SchemaError(f"{path}: missing or unsupported eval_log header")
    records = []
    for line in text[2:]:
        idx, prior, valid, fitness, bx, by, bz, genome = line.split(",")
        values = np.array([float(tok) for tok in genome.split()])
        records.append(
            LogRecord(
                eval_index=int(idx),
                genome=Genome(values, prior),
                prior_tag=prior,
                valid=bool(int(valid)),
                fitness=float(fitness),
                behavior=np.array([float(bx), float(by), float(bz)]),
            )
        )
    return records


# ------------------------------------------------------------ outcome archive

def write_outcome_archive(path, outcome: OutcomeArchive, prior_tag: str) -> None:
    """One grasp per line, ready to stream into dataset builders."""
    lines = [_dumps({"schema": SCHEMA_VERSION, "kind": "outcome_archive", "prior": prior_tag})]
    for rec in outcome:
        g = rec.grasp
        lines.append(
            _dumps(
                {
                    "eval_index": rec.eval_index,
                    "position": _floats(g.position),
                    "quaternion": _floats(g.quaternion),
                    "synergy_id": g.synergy_id,
                    "init_joints": [float(v) for v in g.init_joints],
                    "fitness": float(rec.fitness),
                    "nu": None if g.nu is None else float(g.nu),
                    "genome": _floats(rec.genome.values),
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_outcome_archive(path) -> tuple[OutcomeArchive, str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty outcome archive file")
    header = json.loads(lines[0])
    _check_header(path, header, "outcome_archive")
    prior = header["prior"]
    archive = OutcomeArchive()
    for line in lines[1:]:
        row = json.loads(line)
        position = np.array(row["position"], float)
        grasp = GraspPose(
            position=position,
            quaternion=np.array(row["quaternion"], float),
            synergy_id=int(row["synergy_id"]),
            init_joints=tuple(row["init_joints"]),
            nu=row["nu"],
        )
        archive.append(
            OutcomeRecord(
                grasp=grasp,
                fitness=row["fitness"],
                behavior=position.copy(),
                genome=Genome(np.array(row["genome"], float), prior),
                prior_tag=prior,
                eval_index=int(row["eval_index"]),
            )
        )
    return archive, prior


# -------------------------------------------------------------- behavior grid

def write_behavior_grid(path, grid: BehaviorGrid | None, prior_tag: str) -> None:
    """Grid elites sorted by cell index; a grid-less run writes just the header."""
    header = {"schema": SCHEMA_VERSION, "kind": "behavior_grid", "prior": prior_tag}
    if grid is not None:
        header.update(
            {"lo": _floats(grid.lo), "hi": _floats(grid.hi), "cell": float(grid.cell)}
        )
    lines = [_dumps(header)]
    if grid is not None:
        for key in sorted(grid.cells):
            elite = grid.cells[key]
            lines.append(
                _dumps(
                    {
                        "cell": list(key),
                        "fitness": float(elite.fitness),
                        "behavior": _floats(elite.behavior),
                        "genome": _floats(elite.genome.values),
                    }
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_behavior_grid(path) -> BehaviorGrid | None:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty behavior grid file")
    header = json.loads(lines[0])
    _check_header(path, header, "behavior_grid")
    if "lo" not in header:
        return None
    prior = header["prior"]
    grid = BehaviorGrid(np.array(header["lo"]), np.array(header["hi"]), header["cell"])
    for line in lines[1:]:
        row = json.loads(line)
        grid.cells[tuple(row["cell"])] = Elite(
            genome=Genome(np.array(row["genome"], float), prior),
            fitness=row["fitness"],
            behavior=np.array(row["behavior"], float),
        )
    return grid
