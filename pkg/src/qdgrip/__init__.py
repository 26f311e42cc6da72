"""qdgrip: quality-diversity generation of 6-DoF grasp repertoires on meshes.

The package splits into a geometry layer (meshes, queries, sampling), a
hand model with kinematic closure, a wrench-space evaluator, genome
projections for the sampling priors, and the search loops that tie them
together. ``qdgrip.experiment`` and ``qdgrip.cli`` add file-based
orchestration on top; they are imported on demand so the core library
stays light.
"""

__version__ = "0.1.0"

from .errors import ConfigError, MeshLoadError, QdGripError, SchemaError
from .evaluation import (
    EvaluationContext,
    EvaluationResult,
    PhysicsParams,
    evaluate,
    evaluate_mdr,
    wrench_resists,
)
from .geometry import MeshQuery, TriangleMesh
from .geometry.loaders import load_mesh
from .geometry.sampling import SurfaceSampleSet, sample_surface
from .gripper import PRESETS, GraspPose, GripperSpec, get_preset
from .metrics import (
    MetricsError,
    build_reference_set,
    coverage_curve,
    nu_histogram,
    quantize,
    voxel_heatmap,
)
from .projection import Genome, mutate, project, random_genome
from .qd import (
    BehaviorGrid,
    OutcomeArchive,
    OutcomeRecord,
    QDConfig,
    RunResult,
    run_cma_mae,
    run_map_elites,
    run_random,
)
from .runconfig import RunConfig, load_config, parse_config

__all__ = [
    "__version__",
    "QdGripError",
    "ConfigError",
    "MeshLoadError",
    "SchemaError",
    "MetricsError",
    "TriangleMesh",
    "MeshQuery",
    "load_mesh",
    "SurfaceSampleSet",
    "sample_surface",
    "GripperSpec",
    "GraspPose",
    "PRESETS",
    "get_preset",
    "PhysicsParams",
    "EvaluationContext",
    "EvaluationResult",
    "evaluate",
    "evaluate_mdr",
    "wrench_resists",
    "Genome",
    "project",
    "random_genome",
    "mutate",
    "BehaviorGrid",
    "OutcomeArchive",
    "OutcomeRecord",
    "QDConfig",
    "RunResult",
    "run_random",
    "run_map_elites",
    "run_cma_mae",
    "build_reference_set",
    "coverage_curve",
    "nu_histogram",
    "voxel_heatmap",
    "quantize",
    "RunConfig",
    "load_config",
    "parse_config",
]
