"""Comparison quantities computed from outcome archives.

Diversity is measured on gripper positions only: successful grasp positions
are quantized to a voxel lattice and pooled into a reference set, and a
run's coverage is the fraction of that set its own archive reaches. At
desk scale the reference set is the union of the compared runs, so the
absolute numbers depend on the pool while the method ranking does not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import QdGripError
from .qd.archive import OutcomeArchive

QUANT_STEP = 0.01  # m


class MetricsError(QdGripError):
    """A metric was requested on data that cannot support it."""


def quantize(points: np.ndarray, step: float = QUANT_STEP) -> np.ndarray:
    """Map positions to integer voxel coordinates, round half away from zero.

    round(x / step) with away-from-zero ties keeps the lattice symmetric
    about the origin and avoids the platform spread of banker's rounding.
    """
    if step <= 0:
        raise MetricsError("quantization step must be positive")
    p = np.asarray(points, float)
    return (np.sign(p) * np.floor(np.abs(p) / step + 0.5)).astype(np.int64)


@dataclass(frozen=True)
class ReferenceGraspSet:
    """Deduplicated voxel coordinates of pooled successful grasp positions."""

    voxels: frozenset
    step: float

    def __len__(self) -> int:
        return len(self.voxels)


def build_reference_set(
    archives: Iterable[OutcomeArchive], step: float = QUANT_STEP
) -> ReferenceGraspSet:
    voxels = set()
    for archive in archives:
        for rec in archive:
            voxels.add(tuple(quantize(rec.grasp.position, step)))
    return ReferenceGraspSet(frozenset(voxels), step)


def coverage_curve(
    archive: OutcomeArchive, ref: ReferenceGraspSet, step: float | None = None
) -> list[tuple[int, float]]:
    """Cumulative reference coverage, one point per archive record.

    Returns (eval_index, coverage) pairs in evaluation order, starting at
    (0, 0.0); between points the curve is flat. Coverage counts distinct
    reference voxels reached so far over the reference cardinality.
    """
    if step is None:
        step = ref.step
    elif step != ref.step:
        raise MetricsError(f"step {step} does not match the reference set's {ref.step}")
    if len(ref) == 0:
        raise MetricsError("coverage against an empty reference set is undefined")
    curve = [(0, 0.0)]
    seen = set()
    hits = 0
    for rec in sorted(archive, key=lambda r: r.eval_index):
        voxel = tuple(quantize(rec.grasp.position, step))
        if voxel not in seen:
            seen.add(voxel)
            if voxel in ref.voxels:
                hits += 1
        curve.append((rec.eval_index, hits / len(ref)))
    return curve


def final_coverage(curve: list[tuple[int, float]]) -> float:
    return curve[-1][1]


def nu_histogram(archive: OutcomeArchive, bins: int = 36) -> tuple[np.ndarray, np.ndarray]:
    """Normalized histogram of the approach-angle diagnostic over [0, pi].

    Returns (mass, edges) with mass summing to 1. Raises when the archive
    carries no angle data (the antipodal and direct priors record none).
    """
    if bins < 1:
        raise MetricsError("bins must be positive")
    angles = [rec.grasp.nu for rec in archive if rec.grasp.nu is not None]
    if not angles:
        raise MetricsError("archive has no approach-angle data")
    counts, edges = np.histogram(np.asarray(angles, float), bins=bins, range=(0.0, np.pi))
    return counts / counts.sum(), edges


def voxel_heatmap(archive: OutcomeArchive, step: float = QUANT_STEP) -> dict:
    """Per-voxel maximum fitness over successful grasps."""
    heat: dict[tuple, float] = {}
    for rec in archive:
        voxel = tuple(quantize(rec.grasp.position, step))
        if rec.fitness > heat.get(voxel, -np.inf):
            heat[voxel] = rec.fitness
    return heat
