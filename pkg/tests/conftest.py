import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qdgrip.evaluation import EvaluationContext
from qdgrip.geometry import shapes
from qdgrip.geometry.sampling import sample_surface
from qdgrip.gripper import get_preset

# Numeric property tests vary a lot in per-example cost; wall-clock deadlines
# only add flakiness on a loaded CI box.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@pytest.fixture(scope="session")
def sphere_mesh():
    return shapes.icosphere(0.02, 2)


@pytest.fixture(scope="session")
def box_mesh():
    return shapes.box(0.04, 0.05, 0.03)


@pytest.fixture(scope="session")
def mug_mesh():
    return shapes.mug()


@pytest.fixture(scope="session")
def wedge_mesh():
    return shapes.wedge(np.deg2rad(25.0))


@pytest.fixture(scope="session")
def panda():
    return get_preset("panda")


@pytest.fixture(scope="session")
def sphere_samples(sphere_mesh):
    return sample_surface(sphere_mesh, 2048, seed=7)


@pytest.fixture(scope="session")
def box_samples(box_mesh):
    return sample_surface(box_mesh, 2048, seed=7)


@pytest.fixture(scope="session")
def sphere_ctx(sphere_mesh):
    return EvaluationContext(sphere_mesh)


@pytest.fixture(scope="session")
def box_ctx(box_mesh):
    return EvaluationContext(box_mesh)
