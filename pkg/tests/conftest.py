"""Shared fixtures and hypothesis profiles."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from oneside.grid import make_uniform_grid

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def grid():
    return make_uniform_grid(-4.0, 6.0, 2000)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def run_root(tmp_path, monkeypatch):
    """Isolated run directory, also exported for the CLI."""
    root = tmp_path / "runs"
    monkeypatch.setenv("ONESIDE_RUN_DIR", str(root))
    return root
