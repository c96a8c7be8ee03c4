from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from seqassort.choice import MnlAttraction, RealizedItem, Realization

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def mnl_realization(revenues, attractions, sizes=None) -> Realization:
    sizes = sizes or [0.0] * len(revenues)
    return Realization(
        tuple(
            RealizedItem(i, float(r), MnlAttraction(float(v)), float(b))
            for i, (r, v, b) in enumerate(zip(revenues, attractions, sizes))
        )
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
