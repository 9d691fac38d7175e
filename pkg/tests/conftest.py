import time

import numpy as np
import pytest

from returnmap import presets
from returnmap.benchmark import run_slope
from returnmap.drucker_prager import DPParams
from returnmap.tensors import ElasticModuli

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_dp():
    """K = G = eta = eta_bar = xi = 1, c0 = 0, no hardening."""
    return DPParams(eta=1.0, eta_bar=1.0, xi=1.0, c0=0.0, moduli=ElasticModuli(K=1.0, G=1.0))


class SlopeCache:
    """Slope runs shared by the whole session, with their wall-clock time."""

    def __init__(self):
        self.runs = {}
        self.seconds = {}

    def get(self, preset, level=1, etype="quad8"):
        key = (preset, level, etype)
        if key not in self.runs:
            t0 = time.perf_counter()
            self.runs[key] = run_slope(presets.material(preset), level, etype)
            self.seconds[key] = time.perf_counter() - t0
        return self.runs[key]


@pytest.fixture(scope="session")
def slope_cache():
    return SlopeCache()
