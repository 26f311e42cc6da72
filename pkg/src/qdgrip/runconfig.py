"""Run configuration: a flat INI dialect mapped onto the library dataclasses.

A config file has up to four sections. ``[run]`` names the scene and the
experiment shape, ``[qd]`` and ``[physics]`` override search and evaluator
defaults field by field, and an optional ``[gripper]`` section defines an
inline hand instead of a preset. Values are plain scalars, vectors are
space-separated numbers, and lists of tuples use ``;`` between tuples, so
files stay hand-editable and diffable.

``to_ini`` and ``parse_config`` are inverses over resolved configs; the
per-run random seed lives outside the file (the runner stamps it into
``QDConfig`` for each entry of ``seeds``).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .evaluation import PhysicsParams
from .gripper import PRESETS, GripperSpec, get_preset
from .qd.engine import ALGORITHMS, FITNESS_MODES, QDConfig

PRIORS = ("approach", "contact", "antipodal", "direct")
BUILTIN_MESHES = ("sphere", "box", "mug", "wedge")


@dataclass(frozen=True)
class RunConfig:
    mesh: str  # builtin shape name or a mesh file path
    mesh_scale: float = 1.0
    gripper: str = "panda"
    gripper_spec: GripperSpec | None = None  # inline hand, wins over the preset
    prior: str = "contact"
    algorithm: str = "ME_scs"
    fitness: str = "shake"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    out: str = ""  # empty: QDGRIP_OUT or ./runs
    n_samples: int = 4096  # surface samples for the projection
    workers: int = 1
    qd: QDConfig = field(default_factory=QDConfig)
    physics: PhysicsParams = field(default_factory=PhysicsParams)

    def __post_init__(self):
        if not self.mesh:
            raise ConfigError("run.mesh is required")
        if self.mesh_scale <= 0:
            raise ConfigError("run.mesh_scale must be positive")
        if self.prior not in PRIORS:
            raise ConfigError(f"run.prior must be one of {PRIORS}, got {self.prior!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"run.algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.fitness not in FITNESS_MODES:
            raise ConfigError(
                f"run.fitness must be one of {FITNESS_MODES}, got {self.fitness!r}"
            )
        if not self.seeds:
            raise ConfigError("run.seeds must name at least one seed")
        if self.n_samples < 1:
            raise ConfigError("run.n_samples must be positive")
        if self.workers < 1:
            raise ConfigError("run.workers must be positive")
        spec = self.resolve_gripper()
        if self.prior == "antipodal" and spec.family != "parallel_jaw":
            raise ConfigError(
                "run.prior: the antipodal prior pairs two opposed contacts and "
                f"needs a parallel_jaw hand, not {spec.name!r} ({spec.family})"
            )

    def resolve_gripper(self) -> GripperSpec:
        if self.gripper_spec is not None:
            return self.gripper_spec
        return get_preset(self.gripper)


# Encoding/decoding tables: one entry per key keeps parse and serialize
# symmetric by construction.

def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = [float(tok) for tok in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"expected 3 components, got {len(parts)}")
    return tuple(parts)


def _parse_tuples(text: str, item) -> tuple[tuple, ...]:
    groups = [g.strip() for g in text.split(";") if g.strip()]
    return tuple(tuple(item(tok) for tok in g.split()) for g in groups)


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        if value and isinstance(value[0], (tuple, list)):
            return "; ".join(" ".join(repr(x) for x in g) for g in value)
        return " ".join(repr(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_RUN_KEYS = {
    "mesh": str,
    "mesh_scale": float,
    "gripper": str,
    "prior": str,
    "algorithm": str,
    "fitness": str,
    "seeds": _parse_seeds,
    "out": str,
    "n_samples": int,
    "workers": int,
}

_QD_KEYS = {
    "n_evals": int,
    "mu": int,
    "lam": int,
    "k": int,
    "ind_pb": float,
    "sigma": float,
    "emitter_batch": int,
    "n_emitters": int,
    "f_min": float,
    "alpha": float,
}

_PHYSICS_KEYS = {
    "friction": float,
    "density": float,
    "gravity": float,
    "gravity_dir": _parse_vec3,
    "shake_accel": float,
    "shake_axis": _parse_vec3,
    "spin_accel": float,
    "spin_axis": _parse_vec3,
    "cone_edges": int,
    "torsion_patch": float,
}

_GRIPPER_KEYS = {
    "name": str,
    "family": str,
    "n_fingers": int,
    "max_aperture": float,
    "finger_length": float,
    "finger_radius": float,
    "palm_size": _parse_vec3,
    "synergies": lambda t: _parse_tuples(t, int),
    "free_joint_ranges": lambda t: _parse_tuples(t, float),
    "mount_radius": float,
    "curl_open": float,
    "curl_closed": float,
    "distal_coupling": float,
}

_SECTIONS = {
    "run": _RUN_KEYS,
    "qd": _QD_KEYS,
    "physics": _PHYSICS_KEYS,
    "gripper": _GRIPPER_KEYS,
}


def _convert(section: str, key: str, raw: str):
    keys = _SECTIONS.get(section)
    if keys is None:
        raise ConfigError(f"unknown config section [{section}]")
    parser = keys.get(key)
    if parser is None:
        raise ConfigError(f"unknown config key {section}.{key}")
    try:
        return parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None


def _build(values: dict[str, dict]) -> RunConfig:
    run = dict(values.get("run", {}))
    qd = QDConfig(**values.get("qd", {}))
    physics = PhysicsParams(**values.get("physics", {}))
    spec = None
    if "gripper" in values:
        g = dict(values["gripper"])
        g.setdefault("name", "inline")
        try:
            spec = GripperSpec(**g)
        except TypeError as exc:
            raise ConfigError(f"bad inline gripper spec: {exc}") from None
    try:
        return RunConfig(qd=qd, physics=physics, gripper_spec=spec, **run)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values: dict[str, dict] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            values.setdefault(section, {})[key] = _convert(section, key, raw)
    return _build(values)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(config: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.key=value`` strings on top of a config.

    Each flag addresses exactly one config key and its value is parsed the
    same way the file would be.
    """
    patches: dict[str, dict] = {}
    for item in overrides:
        head, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        section, dot, key = head.strip().partition(".")
        if not dot:
            section, key = "run", section
        key = key.strip()
        patches.setdefault(section.strip(), {})[key] = _convert(section.strip(), key, raw.strip())
    config = replace(config, **patches.pop("run", {}))
    if "qd" in patches:
        config = replace(config, qd=replace(config.qd, **patches.pop("qd")))
    if "physics" in patches:
        config = replace(config, physics=replace(config.physics, **patches.pop("physics")))
    if "gripper" in patches:
        base = config.gripper_spec
        if base is None:
            base = get_preset(config.gripper)
        config = replace(config, gripper_spec=replace(base, **patches.pop("gripper")))
    return config


def to_ini(config: RunConfig) -> str:
    """Serialize a resolved config; ``parse_config`` reads it back equal."""
    parser = configparser.ConfigParser()
    parser["run"] = {k: _fmt(getattr(config, k)) for k in _RUN_KEYS}
    parser["qd"] = {k: _fmt(getattr(config.qd, k)) for k in _QD_KEYS}
    parser["physics"] = {k: _fmt(getattr(config.physics, k)) for k in _PHYSICS_KEYS}
    if config.gripper_spec is not None:
        parser["gripper"] = {
            k: _fmt(getattr(config.gripper_spec, k)) for k in _GRIPPER_KEYS
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
