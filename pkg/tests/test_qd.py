import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdgrip.geometry.mesh import TriangleMesh
from qdgrip.geometry.sampling import sample_surface
from qdgrip.gripper import approach_distance_max
from qdgrip.projection import Genome, random_genome
from qdgrip.qd import (
    BehaviorGrid,
    OutcomeArchive,
    OutcomeRecord,
    QDConfig,
    run_cma_mae,
    run_map_elites,
    run_random,
)
from qdgrip.qd.archive import Elite, behavior_bounds
from qdgrip.qd.cma import CmaEs
from qdgrip.qd.engine import _novelty_order, _select_parents

from conftest import rng
from oracles import check_grid_replay


def dummy_genome(tag="contact", n=7):
    return Genome(np.zeros(n), tag)


@pytest.fixture(scope="module")
def tet_mesh():
    """Regular tetrahedron: all face pairs are 70 degrees off anti-parallel,
    so every antipodal projection rejects."""
    v = 0.02 * np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    t = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return TriangleMesh.from_arrays(v, t)


@pytest.fixture(scope="module")
def tet_samples(tet_mesh):
    return sample_surface(tet_mesh, 512, seed=3)


# ------------------------------------------------------------------- the grid

def test_behavior_bounds_pad_by_reach(sphere_mesh, panda):
    lo, hi = behavior_bounds(sphere_mesh, panda)
    pad = approach_distance_max(panda)
    assert np.allclose(lo, sphere_mesh.bbox_lo - pad)
    assert np.allclose(hi, sphere_mesh.bbox_hi + pad)
    assert pad == pytest.approx(0.065)


def test_grid_rejects_bad_box():
    with pytest.raises(ValueError):
        BehaviorGrid([0, 0, 0], [1, 1, 1], cell=0.0)
    with pytest.raises(ValueError):
        BehaviorGrid([0, 0, 0], [1, 1, 0], cell=0.1)


def test_cell_index_rules():
    grid = BehaviorGrid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], cell=0.25)
    assert tuple(grid.shape) == (4, 4, 4)
    assert grid.cell_index([0.1, 0.3, 0.6]) == (0, 1, 2)
    # lower corner opens the first cell, every other exact multiple drops down
    assert grid.cell_index([0.0, 0.0, 0.0]) == (0, 0, 0)
    assert grid.cell_index([0.25, 0.5, 0.75]) == (0, 1, 2)
    assert grid.cell_index([1.0, 1.0, 1.0]) == (3, 3, 3)
    assert grid.cell_index([1.0 + 1e-9, 0.5, 0.5]) is None
    assert grid.cell_index([-1e-9, 0.5, 0.5]) is None
    assert grid.cell_index([np.nan, 0.5, 0.5]) is None


@given(
    x=st.floats(-0.2, 1.2, allow_nan=False),
    y=st.floats(-0.2, 1.2, allow_nan=False),
    z=st.floats(-0.2, 1.2, allow_nan=False),
)
def test_cell_index_covers_the_box(x, y, z):
    grid = BehaviorGrid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], cell=0.3)
    key = grid.cell_index([x, y, z])
    inside = all(0.0 <= v <= 1.0 for v in (x, y, z))
    assert (key is not None) == inside
    if key is not None:
        assert all(0 <= k < s for k, s in zip(key, grid.shape))


def test_offer_keeps_the_strict_maximum():
    grid = BehaviorGrid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], cell=0.5)
    b = [0.1, 0.1, 0.1]
    assert grid.offer(dummy_genome(), 0.0, b) == "inserted"
    assert grid.offer(dummy_genome(), 0.0, b) == "rejected"  # ties keep the holder
    assert grid.offer(dummy_genome(), 2.0, b) == "replaced"
    assert grid.offer(dummy_genome(), 1.0, b) == "rejected"
    assert grid.offer(dummy_genome(), 1.0, [2.0, 0.0, 0.0]) == "rejected"  # outside
    assert len(grid) == 1
    assert grid.elites()[0].fitness == 2.0


def test_offer_copies_the_behavior():
    grid = BehaviorGrid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], cell=0.5)
    b = np.array([0.1, 0.1, 0.1])
    grid.offer(dummy_genome(), 1.0, b)
    b[:] = 9.0
    assert np.allclose(grid.elites()[0].behavior, 0.1)


# ------------------------------------------------------------ outcome archive

def test_outcome_archive_is_append_only_and_positive():
    archive = OutcomeArchive()
    rec = OutcomeRecord(None, 1.0, np.zeros(3), dummy_genome(), "contact", 4)
    archive.append(rec)
    with pytest.raises(ValueError):
        archive.append(OutcomeRecord(None, 0.0, np.zeros(3), dummy_genome(), "contact", 5))
    assert len(archive) == 1
    assert list(archive)[0] is rec


# --------------------------------------------------------------------- CMA-ES

def test_cma_ask_shape_and_determinism():
    es = CmaEs(np.zeros(4), 0.5, 12)
    a = es.ask(rng(3))
    b = es.ask(rng(3))
    assert a.shape == (12, 4)
    assert np.array_equal(a, b)
    assert es.ask(rng(3), 5).shape == (5, 4)


def test_cma_walks_toward_the_optimum():
    target = np.array([0.6, -0.4, 0.2])
    es = CmaEs(np.zeros(3), 0.5, 12)
    r = rng(11)
    for _ in range(40):
        xs = es.ask(r)
        dist = np.linalg.norm(xs - target, axis=1)
        es.tell(xs, np.argsort(dist))
    assert np.linalg.norm(es.mean - target) < 0.1


def test_cma_convergence_flags():
    assert not CmaEs(np.zeros(3), 0.5, 12).converged
    assert CmaEs(np.zeros(3), 1e-6, 12).converged  # spread below resolution
    assert CmaEs(np.full(3, np.nan), 0.5, 12).converged  # poisoned state


# ------------------------------------------------------------- configurations

@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_evals=-1),
        dict(mu=0),
        dict(lam=0),
        dict(k=0),
        dict(ind_pb=1.5),
        dict(sigma=0.0),
        dict(emitter_batch=1),
        dict(n_emitters=0),
        dict(alpha=0.0),
        dict(alpha=1.1),
    ],
)
def test_qdconfig_validation(kwargs):
    with pytest.raises(ValueError):
        QDConfig(**kwargs)


def test_unknown_variant_and_mode_raise(sphere_mesh, sphere_samples, panda):
    with pytest.raises(ValueError):
        run_map_elites("ME_best", "contact", sphere_mesh, sphere_samples, panda)
    with pytest.raises(ValueError):
        run_random(
            "contact", sphere_mesh, sphere_samples, panda, fitness_mode="dynamic"
        )


# ------------------------------------------------------------------ selection

def elite_at(b, fitness=0.0):
    return Elite(Genome(np.asarray(b, float), "contact"), fitness, np.asarray(b, float))


def test_select_parents_empty_grid_is_none():
    grid = BehaviorGrid([0, 0, 0], [1, 1, 1], cell=0.5)
    assert _select_parents(rng(0), grid, "ME_scs", 4, k=3) is None


def test_scs_selects_only_winners_once_any_exist():
    grid = BehaviorGrid([0, 0, 0], [1, 1, 1], cell=0.25)
    for b in ([0.1] * 3, [0.4] * 3, [0.6] * 3):
        grid.offer(elite_at(b).genome, 0.0, b)
    winner = elite_at([0.9] * 3, fitness=2.0)
    grid.offer(winner.genome, 2.0, [0.9] * 3)
    parents = _select_parents(rng(1), grid, "ME_scs", 6, k=3)
    for p in parents:
        assert np.array_equal(p.values, winner.genome.values)


def test_scs_cycles_by_novelty_before_any_success():
    grid = BehaviorGrid([0, 0, 0], [1, 1, 1], cell=0.1)
    # three clustered elites plus one outlier; all still at fitness 0
    behaviors = [[0.1, 0.1, 0.1], [0.15, 0.1, 0.1], [0.1, 0.16, 0.1], [0.9, 0.9, 0.9]]
    for b in behaviors:
        grid.offer(elite_at(b).genome, 0.0, b)
    elites = grid.elites()
    order = _novelty_order(np.array([e.behavior for e in elites]), k=2)
    assert np.allclose(elites[order[0]].behavior, [0.9, 0.9, 0.9])
    parents = _select_parents(rng(2), grid, "ME_scs", 9, k=2)
    for i, p in enumerate(parents):
        assert np.array_equal(p.values, elites[order[i % 4]].genome.values)


def test_novelty_order_basics():
    assert _novelty_order(np.zeros((1, 3)), k=5).tolist() == [0]
    two = _novelty_order(np.array([[0.0, 0, 0], [1.0, 0, 0]]), k=4)
    assert two.tolist() == [0, 1]  # equal novelty keeps insertion order


# ----------------------------------------------------------------- the loops

def test_random_budget_and_log_indexing(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=137, seed=5)
    res = run_random("contact", sphere_mesh, sphere_samples, panda, config=cfg)
    assert res.grid is None
    assert len(res.log) == 137
    assert [r.eval_index for r in res.log] == list(range(137))
    for r in res.log:
        assert r.prior_tag == r.genome.prior == "contact"
        assert r.fitness in (0.0, 1.0, 2.0)
        if not r.valid:
            assert r.fitness == 0.0


def test_outcome_mirrors_positive_log_records(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=300, mu=60, lam=60, seed=1)
    res = run_map_elites("ME_scs", "contact", sphere_mesh, sphere_samples, panda, config=cfg)
    wins = [r for r in res.log if r.fitness > 0]
    assert len(res.outcome) == len(wins)
    for rec, logged in zip(res.outcome, wins):
        assert rec.eval_index == logged.eval_index
        assert rec.fitness == logged.fitness
        assert np.array_equal(rec.behavior, logged.behavior)
        assert np.array_equal(rec.grasp.position, logged.behavior)
    # grids keep merely-valid grasps, the outcome archive must not
    assert all(rec.fitness > 0 for rec in res.outcome)
    assert any(e.fitness == 0.0 for e in res.grid.elites())
    check_grid_replay(res)


def test_zero_budget_runs_are_empty(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=0)
    res = run_map_elites("ME_rand", "contact", sphere_mesh, sphere_samples, panda, config=cfg)
    assert len(res.log) == 0 and len(res.outcome) == 0 and len(res.grid) == 0


def test_same_seed_reruns_are_identical(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=200, mu=50, lam=50, seed=17)
    a = run_map_elites("ME_scs", "approach", sphere_mesh, sphere_samples, panda, config=cfg)
    b = run_map_elites("ME_scs", "approach", sphere_mesh, sphere_samples, panda, config=cfg)
    assert len(a.log) == len(b.log) == 200
    for ra, rb in zip(a.log, b.log):
        assert np.array_equal(ra.genome.values, rb.genome.values)
        assert ra.fitness == rb.fitness
        assert np.array_equal(ra.behavior, rb.behavior, equal_nan=True)


def test_worker_count_does_not_change_results(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=300, mu=75, lam=75, seed=23)
    solo = run_map_elites(
        "ME_scs", "contact", sphere_mesh, sphere_samples, panda, config=cfg, workers=1
    )
    forked = run_map_elites(
        "ME_scs", "contact", sphere_mesh, sphere_samples, panda, config=cfg, workers=2
    )
    for ra, rb in zip(solo.log, forked.log):
        assert np.array_equal(ra.genome.values, rb.genome.values)
        assert ra.fitness == rb.fitness
        assert np.array_equal(ra.behavior, rb.behavior, equal_nan=True)


def test_mdr_mode_seeds_by_genome_not_by_worker(sphere_mesh, sphere_samples, panda):
    cfg = QDConfig(n_evals=12, mu=6, lam=6, seed=2)
    solo = run_map_elites(
        "ME_scs", "contact", sphere_mesh, sphere_samples, panda,
        config=cfg, fitness_mode="mdr", workers=1,
    )
    forked = run_map_elites(
        "ME_scs", "contact", sphere_mesh, sphere_samples, panda,
        config=cfg, fitness_mode="mdr", workers=2,
    )
    assert [r.fitness for r in solo.log] == [r.fitness for r in forked.log]
    for r in solo.log:
        assert 0.0 <= r.fitness <= 200.0
        assert r.fitness == int(r.fitness)


def test_cma_mae_budget_and_replay(sphere_mesh, sphere_samples, panda):
    # 300 is not a multiple of the emitter batch, exercising the truncated tail
    cfg = QDConfig(n_evals=300, emitter_batch=8, n_emitters=3, seed=3)
    res = run_cma_mae("contact", sphere_mesh, sphere_samples, panda, config=cfg)
    assert len(res.log) == 300
    assert [r.eval_index for r in res.log] == list(range(300))
    assert len(res.grid) > 0
    check_grid_replay(res)


def test_rejected_projections_consume_budget(tet_mesh, tet_samples, panda):
    cfg = QDConfig(n_evals=150, mu=30, lam=30, seed=7)
    res = run_map_elites("ME_scs", "antipodal", tet_mesh, tet_samples, panda, config=cfg)
    assert len(res.log) == 150
    assert len(res.outcome) == 0
    assert len(res.grid) == 0  # every projection rejected, grid never fed
    for r in res.log:
        assert not r.valid
        assert np.all(np.isnan(r.behavior))


def test_starved_emitters_restart(tet_mesh, tet_samples, panda):
    # No projection ever lands, so emitters see no acceptances and recycle
    # once the stale limit passes.
    cfg = QDConfig(n_evals=160, emitter_batch=4, n_emitters=2, seed=7)
    res = run_cma_mae("antipodal", tet_mesh, tet_samples, panda, config=cfg)
    assert len(res.log) == 160
    assert len(res.outcome) == 0
    assert res.restarts >= 1
