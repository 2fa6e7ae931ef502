"""
Shared fixtures for the eigenrand test suite
"""
import os
import sys

import numpy as np
import pytest

# Add the src directory to the path so the tests run from a plain checkout
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from eigenrand.constants import get_constants  # noqa: E402
from eigenrand.spectral import clear_spectral_cache  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path, monkeypatch):
    """Keep reports, logs and tracing out of the working tree."""
    monkeypatch.setenv("EIGENRAND_OUTPUT_DIR", str(tmp_path / "output"))
    monkeypatch.setenv("EIGENRAND_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("PHOENIX_API_KEY", raising=False)
    monkeypatch.delenv("EIGENRAND_THREADS", raising=False)
    monkeypatch.delenv("EIGENRAND_CONSTANTS", raising=False)
    get_constants.cache_clear()
    clear_spectral_cache()
    yield
    get_constants.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
