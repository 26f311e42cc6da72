"""Search loops: random sampling, MAP-Elites variants, and CMA-MAE.

All four algorithms share one evaluation pipeline: genomes are decoded by
their prior's projection, scored by the physics evaluator, and recorded in
an append-only log. Successful grasps additionally land in the grow-only
outcome archive, and the elitist algorithms maintain a behavior grid. The
budget counts evaluator calls, so rejected projections (antipodal pairs
that miss the angle test, poses outside the reachable shell) consume it
too.

Offspring are drawn in the parent process and scored in a fixed order, so
results do not depend on the worker count; with ``workers > 1`` the
scoring fans out over a fork pool whose processes each hold their own
spatial index.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from ..evaluation import EvaluationContext, PhysicsParams, evaluate, evaluate_mdr
from ..geometry.mesh import TriangleMesh
from ..geometry.sampling import SurfaceSampleSet
from ..gripper import GraspPose, GripperSpec
from ..projection import Genome, genome_length, mutate, project, random_genome
from .archive import BehaviorGrid, OutcomeArchive, OutcomeRecord, behavior_bounds
from .cma import CmaEs

_DRAW_BATCH = 512  # scoring chunk for the non-generational random baseline
_NOVELTY_CAP = 2048  # cap on elite count entering the O(n^2) novelty ranking
_EMITTER_SIGMA0 = 0.5
_EMITTER_STALE_LIMIT = 8  # batches without an archive acceptance before restart

FITNESS_MODES = ("shake", "mdr")
ALGORITHMS = ("random", "ME_rand", "ME_scs", "CMA_MAE")


@dataclass(frozen=True)
class QDConfig:
    """Search hyperparameters; defaults are the reference configuration."""

    n_evals: int = 100_000
    mu: int = 500  # initial population
    lam: int = 500  # offspring per generation
    k: int = 15  # novelty neighbors for the pre-success bootstrap
    ind_pb: float = 0.3  # per-gene mutation probability
    sigma: float = 0.1  # mutation standard deviation
    emitter_batch: int = 36
    n_emitters: int = 15
    f_min: float = -1.0  # initial cell acceptance threshold
    alpha: float = 0.01  # threshold annealing rate
    seed: int = 0

    def __post_init__(self):
        if self.n_evals < 0:
            raise ValueError("n_evals must be non-negative")
        if self.mu < 1 or self.lam < 1:
            raise ValueError("mu and lam must be positive")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0.0 <= self.ind_pb <= 1.0:
            raise ValueError("ind_pb must lie in [0, 1]")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.emitter_batch < 2 or self.n_emitters < 1:
            raise ValueError("emitter_batch must be >= 2 and n_emitters >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


@dataclass(frozen=True)
class LogRecord:
    """One evaluator call; behavior is NaN when the projection rejected."""

    eval_index: int
    genome: Genome
    prior_tag: str
    valid: bool
    fitness: float
    behavior: np.ndarray


@dataclass
class RunResult:
    grid: BehaviorGrid | None  # None for the random baseline
    outcome: OutcomeArchive
    log: list[LogRecord] = field(default_factory=list)
    restarts: int = 0  # emitter restarts, CMA-MAE only


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


class _Scorer:
    """Decode and evaluate genomes; one instance per process."""

    def __init__(self, mesh, sset, spec, params, fitness_mode, seed):
        self.ctx = EvaluationContext.wrap(mesh)
        self.sset = sset
        self.spec = spec
        self.params = params if params is not None else PhysicsParams()
        self.fitness_mode = fitness_mode
        self.seed = seed

    def __call__(self, job):
        eval_index, genome = job
        grasp = project(genome, self.sset, self.ctx.query, self.spec)
        if grasp is None:
            return None, None
        if self.fitness_mode == "shake":
            result = evaluate(grasp, self.ctx, self.spec, self.params)
        else:
            # Disturbance draws are seeded per genome so scores do not
            # depend on evaluation order or worker assignment.
            result = evaluate_mdr(
                grasp, self.ctx, self.spec, self.params, seed=(self.seed, eval_index)
            )
        return grasp, result


_WORKER_SCORER: _Scorer | None = None


def _worker_init(args) -> None:
    global _WORKER_SCORER
    _WORKER_SCORER = _Scorer(*args)


def _worker_score(job):
    return _WORKER_SCORER(job)


class _ScoringPool:
    def __init__(self, mesh, sset, spec, params, fitness_mode, seed, workers):
        args = (mesh, sset, spec, params, fitness_mode, seed)
        if workers > 1:
            ctx = multiprocessing.get_context("fork")
            self._pool = ctx.Pool(workers, initializer=_worker_init, initargs=(args,))
            self._scorer = None
        else:
            self._pool = None
            self._scorer = _Scorer(*args)

    def score(self, start_index: int, genomes: list[Genome]):
        """Score genomes at consecutive eval indices; returns (LogRecord, grasp)
        pairs in offspring order regardless of scheduling."""
        jobs = [(start_index + i, g) for i, g in enumerate(genomes)]
        if self._pool is None:
            outs = [self._scorer(job) for job in jobs]
        else:
            outs = self._pool.map(_worker_score, jobs)
        scored = []
        for (idx, genome), (grasp, result) in zip(jobs, outs):
            if grasp is None:
                rec = LogRecord(idx, genome, genome.prior, False, 0.0, np.full(3, np.nan))
            else:
                rec = LogRecord(
                    idx, genome, genome.prior, result.valid, result.fitness, result.behavior
                )
            scored.append((rec, grasp))
        return scored

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()


def _append_outcome(outcome: OutcomeArchive, rec: LogRecord, grasp: GraspPose) -> None:
    if rec.fitness > 0:
        outcome.append(
            OutcomeRecord(grasp, rec.fitness, rec.behavior, rec.genome, rec.prior_tag, rec.eval_index)
        )


def run_random(
    prior_tag: str,
    mesh: TriangleMesh,
    sset: SurfaceSampleSet,
    spec: GripperSpec,
    params: PhysicsParams | None = None,
    config: QDConfig | None = None,
    *,
    fitness_mode: str = "shake",
    workers: int = 1,
) -> RunResult:
    """Uniform sampling of genome space, the no-optimization baseline."""
    config = config if config is not None else QDConfig()
    _check_mode(fitness_mode)
    rng = _rng(config.seed)
    outcome = OutcomeArchive()
    log: list[LogRecord] = []
    pool = _ScoringPool(mesh, sset, spec, params, fitness_mode, config.seed, workers)
    try:
        while len(log) < config.n_evals:
            n = min(_DRAW_BATCH, config.n_evals - len(log))
            genomes = [random_genome(rng, prior_tag, spec) for _ in range(n)]
            for rec, grasp in pool.score(len(log), genomes):
                log.append(rec)
                _append_outcome(outcome, rec, grasp)
    finally:
        pool.close()
    return RunResult(None, outcome, log)


def run_map_elites(
    variant: str,
    prior_tag: str,
    mesh: TriangleMesh,
    sset: SurfaceSampleSet,
    spec: GripperSpec,
    params: PhysicsParams | None = None,
    config: QDConfig | None = None,
    *,
    fitness_mode: str = "shake",
    workers: int = 1,
) -> RunResult:
    """MAP-Elites over the behavior grid.

    ``ME_rand`` selects parents uniformly over all grid elites. ``ME_scs``
    restricts selection to successful elites (fitness > 0); before the first
    success it cycles through elites ranked by behavioral novelty, and with
    an empty grid it falls back to fresh uniform genomes.
    """
    if variant not in ("ME_rand", "ME_scs"):
        raise ValueError(f"unknown MAP-Elites variant {variant!r}")
    config = config if config is not None else QDConfig()
    _check_mode(fitness_mode)
    rng = _rng(config.seed)
    grid = BehaviorGrid(*behavior_bounds(mesh, spec))
    outcome = OutcomeArchive()
    log: list[LogRecord] = []
    pool = _ScoringPool(mesh, sset, spec, params, fitness_mode, config.seed, workers)

    def flush(genomes: list[Genome]) -> None:
        for rec, grasp in pool.score(len(log), genomes):
            log.append(rec)
            if rec.valid:
                grid.offer(rec.genome, rec.fitness, rec.behavior)
            _append_outcome(outcome, rec, grasp)

    try:
        n0 = min(config.mu, config.n_evals)
        flush([random_genome(rng, prior_tag, spec) for _ in range(n0)])
        while len(log) < config.n_evals:
            n = min(config.lam, config.n_evals - len(log))
            parents = _select_parents(rng, grid, variant, n, config.k)
            if parents is None:
                genomes = [random_genome(rng, prior_tag, spec) for _ in range(n)]
            else:
                genomes = [mutate(rng, p, config.sigma, config.ind_pb) for p in parents]
            flush(genomes)
    finally:
        pool.close()
    return RunResult(grid, outcome, log)


def _select_parents(
    rng: np.random.Generator, grid: BehaviorGrid, variant: str, n: int, k: int
) -> list[Genome] | None:
    elites = grid.elites()
    if not elites:
        return None
    if variant == "ME_rand":
        picks = rng.integers(0, len(elites), n)
        return [elites[i].genome for i in picks]
    winners = [e for e in elites if e.fitness > 0]
    if winners:
        picks = rng.integers(0, len(winners), n)
        return [winners[i].genome for i in picks]
    order = _novelty_order(np.array([e.behavior for e in elites]), k)
    return [elites[order[i % len(order)]].genome for i in range(n)]


def _novelty_order(behaviors: np.ndarray, k: int) -> np.ndarray:
    """Elite indices sorted by decreasing novelty (mean distance to the k
    nearest other elites). Deterministic: ties keep insertion order."""
    m = len(behaviors)
    if m == 1:
        return np.array([0])
    keep = np.arange(m)
    if m > _NOVELTY_CAP:
        keep = np.unique(np.linspace(0, m - 1, _NOVELTY_CAP).astype(np.int64))
        behaviors = behaviors[keep]
        m = len(behaviors)
    diff = behaviors[:, None, :] - behaviors[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(dist, np.inf)
    kk = min(k, m - 1)
    novelty = np.partition(dist, kk - 1, axis=1)[:, :kk].mean(axis=1)
    return keep[np.argsort(-novelty, kind="stable")]


class _Emitter:
    def __init__(self, rng: np.random.Generator, dim: int, batch: int):
        self.cma = CmaEs(rng.uniform(-1.0, 1.0, dim), _EMITTER_SIGMA0, batch)
        self.stale = 0


def run_cma_mae(
    prior_tag: str,
    mesh: TriangleMesh,
    sset: SurfaceSampleSet,
    spec: GripperSpec,
    params: PhysicsParams | None = None,
    config: QDConfig | None = None,
    *,
    fitness_mode: str = "shake",
    workers: int = 1,
) -> RunResult:
    """Covariance-adaptation emitters ranked by archive improvement.

    The behavior grid itself stays strictly elitist; acceptance for the
    emitters' ranking signal goes through per-cell thresholds that start at
    ``f_min`` and anneal toward accepted fitnesses, so emitters keep
    receiving gradient even in cells whose elite is no longer beaten. An
    emitter restarts from a fresh uniform mean when its strategy converges
    or when ``_EMITTER_STALE_LIMIT`` batches pass without an acceptance.
    """
    config = config if config is not None else QDConfig()
    _check_mode(fitness_mode)
    rng = _rng(config.seed)
    grid = BehaviorGrid(*behavior_bounds(mesh, spec))
    thresholds: dict[tuple, float] = {}
    outcome = OutcomeArchive()
    log: list[LogRecord] = []
    dim = genome_length(prior_tag, spec)
    emitters = [_Emitter(rng, dim, config.emitter_batch) for _ in range(config.n_emitters)]
    restarts = 0
    pool = _ScoringPool(mesh, sset, spec, params, fitness_mode, config.seed, workers)
    try:
        while len(log) < config.n_evals:
            for slot in range(config.n_emitters):
                if len(log) >= config.n_evals:
                    break
                em = emitters[slot]
                n = min(config.emitter_batch, config.n_evals - len(log))
                xs = np.clip(em.cma.ask(rng, n), -1.0, 1.0)
                genomes = [Genome(x.copy(), prior_tag) for x in xs]
                deltas = np.empty(n)
                accepted = False
                for j, (rec, grasp) in enumerate(pool.score(len(log), genomes)):
                    log.append(rec)
                    _append_outcome(outcome, rec, grasp)
                    if not rec.valid:
                        deltas[j] = -np.inf
                        continue
                    grid.offer(rec.genome, rec.fitness, rec.behavior)
                    key = grid.cell_index(rec.behavior)
                    if key is None:
                        deltas[j] = -np.inf
                        continue
                    t = thresholds.get(key, config.f_min)
                    deltas[j] = rec.fitness - t
                    if rec.fitness > t:
                        thresholds[key] = (1.0 - config.alpha) * t + config.alpha * rec.fitness
                        accepted = True
                if n == config.emitter_batch:
                    # A truncated final batch feeds the archives but is too
                    # small for a strategy update.
                    em.cma.tell(xs, np.argsort(-deltas, kind="stable"))
                em.stale = 0 if accepted else em.stale + 1
                if em.cma.converged or em.stale >= _EMITTER_STALE_LIMIT:
                    emitters[slot] = _Emitter(rng, dim, config.emitter_batch)
                    restarts += 1
    finally:
        pool.close()
    return RunResult(grid, outcome, log, restarts)


def _check_mode(fitness_mode: str) -> None:
    if fitness_mode not in FITNESS_MODES:
        raise ValueError(f"fitness_mode must be one of {FITNESS_MODES}, got {fitness_mode!r}")
