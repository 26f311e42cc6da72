"""Archives: the elitist behavior grid and the grow-only outcome set.

The grid discretizes behavior space (gripper position at contact) into cubic
cells and keeps the best solution seen per cell.  The outcome archive is the
actual product of a run: every successful grasp ever evaluated, in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..gripper import GraspPose, GripperSpec, approach_distance_max
from ..projection import Genome

CELL_SIZE = 0.01  # m, matches the coverage quantization step


def behavior_bounds(mesh, spec: GripperSpec) -> tuple[np.ndarray, np.ndarray]:
    """Behavior-space box: the object bounding box inflated by the reach limit."""
    pad = approach_distance_max(spec)
    return mesh.bbox_lo - pad, mesh.bbox_hi + pad


@dataclass
class Elite:
    genome: Genome
    fitness: float
    behavior: np.ndarray


class BehaviorGrid:
    """Axis-aligned cubic-cell grid holding at most one elite per cell.

    Cells are closed at their upper face: a behavior exactly on a cell
    boundary belongs to the lower-index cell.  Replacement requires strictly
    greater fitness, so the stored elite is the first-come maximum.
    """

    def __init__(self, lo, hi, cell: float = CELL_SIZE):
        self.lo = np.asarray(lo, float)
        self.hi = np.asarray(hi, float)
        if cell <= 0.0 or np.any(self.hi <= self.lo):
            raise ValueError("grid needs positive cell size and a nonempty box")
        self.cell = float(cell)
        self.shape = np.maximum(np.ceil((self.hi - self.lo) / self.cell), 1).astype(int)
        self.cells: dict[tuple[int, int, int], Elite] = {}

    def cell_index(self, behavior) -> tuple[int, int, int] | None:
        b = np.asarray(behavior, float)
        if not np.all(np.isfinite(b)) or np.any(b < self.lo) or np.any(b > self.hi):
            return None
        t = (b - self.lo) / self.cell
        idx = np.floor(t).astype(int)
        # Exact multiples sit on a boundary and drop to the cell below.
        on_edge = (t == idx) & (idx > 0)
        idx[on_edge] -= 1
        idx = np.minimum(idx, self.shape - 1)
        return int(idx[0]), int(idx[1]), int(idx[2])

    def offer(self, genome: Genome, fitness: float, behavior) -> str:
        """Insert-if-better; returns 'inserted', 'replaced' or 'rejected'."""
        key = self.cell_index(behavior)
        if key is None:
            return "rejected"
        held = self.cells.get(key)
        if held is None:
            self.cells[key] = Elite(genome, float(fitness), np.asarray(behavior, float).copy())
            return "inserted"
        if fitness > held.fitness:
            self.cells[key] = Elite(genome, float(fitness), np.asarray(behavior, float).copy())
            return "replaced"
        return "rejected"

    def elites(self) -> list[Elite]:
        return list(self.cells.values())

    def __len__(self) -> int:
        return len(self.cells)


@dataclass
class OutcomeRecord:
    grasp: GraspPose
    fitness: float
    behavior: np.ndarray
    genome: Genome
    prior_tag: str
    eval_index: int


@dataclass
class OutcomeArchive:
    """Grow-only list of every successful grasp (fitness > 0), never pruned."""

    records: list[OutcomeRecord] = field(default_factory=list)

    def append(self, record: OutcomeRecord) -> None:
        if record.fitness <= 0.0:
            raise ValueError("outcome archive holds successful grasps only")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)
