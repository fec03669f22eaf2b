"""
Shared fixtures and the --runslow switch
"""

import numpy as np
import pytest

from src.config.settings import settings
from src.utils.test_data import build_corpus, synthetic_vowel


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def vowel():
    return synthetic_vowel(duration=1.0, f0=120.0, seed=1)


@pytest.fixture
def noisy_vowel():
    return synthetic_vowel(duration=1.0, f0=120.0, snr_db=10.0, seed=1)


@pytest.fixture
def small_corpus(tmp_path):
    """Two 0.3 s recordings (one per class) and their manifest"""
    return build_corpus(tmp_path / "corpus", per_class=1, duration=0.3)


@pytest.fixture(autouse=True)
def isolated_log_file(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "LOG_FILE", str(tmp_path / "logs" / "voxpath.log"))
