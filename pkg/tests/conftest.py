"""Shared fixtures: one reusable four-worker pool and a hypothesis profile."""
import pytest
from hypothesis import settings

from mla import WorkerPool

# Jitted kernels can stall a first call on compilation; wall-clock deadlines
# would turn that into spurious failures.
settings.register_profile("mla", deadline=None, max_examples=25)
settings.load_profile("mla")


@pytest.fixture(scope="session")
def pool4():
    with WorkerPool(4) as pool:
        yield pool
