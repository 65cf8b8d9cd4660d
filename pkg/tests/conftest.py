import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("modflow", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("modflow")


@pytest.fixture(scope="session")
def toric_state():
    from modflow.exact import toric_code_ground_state
    return toric_code_ground_state(3, 3)


@pytest.fixture(scope="session")
def qwz_small():
    """QWZ m=-1 on 16x16 with a radius-5 disk: cheap chiral reference."""
    from modflow.gaussian import ModelParams, qwz_ground_state, qwz_lattice
    from modflow.lattice import tripartite_disk
    p = ModelParams(-1.0, 16, 16)
    g = qwz_ground_state(p)
    lat = qwz_lattice(p)
    return p, g, lat, tripartite_disk(lat, (8, 8), 5)


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k][1])
