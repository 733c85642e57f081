import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ethergeom import ether as E
from ethergeom import models as M

settings.register_profile(
    "numerics",
    deadline=None,
    max_examples=15,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("numerics")


@pytest.fixture(scope="session")
def sphere():
    return M.sphere_s2()


@pytest.fixture(scope="session")
def hyperbolic():
    return M.hyperbolic_h2()


@pytest.fixture(scope="session")
def flat():
    return M.flat_r2n(1)


@pytest.fixture(scope="session", params=["sphere-s2", "hyperbolic-h2"])
def curved(request):
    return M.get_model(request.param)


@pytest.fixture(scope="session")
def curved_field(curved):
    return E.make_ether(curved)


@pytest.fixture(scope="session")
def flat_field(flat):
    return E.ether_flat(flat)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """Print one PASS/FAIL line per acceptance criterion that ran."""
    try:
        from test_acceptance import PINNED, RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in PINNED:
        if criterion in RESULTS:
            ok, failed = RESULTS[criterion]
            line = f"{'PASS' if ok else 'FAIL'} {criterion}"
            if failed:
                worst = max(failed, key=lambda r: r.residual / r.threshold)
                line += f"  ({len(failed)} failing; worst {worst.check_id} = {worst.residual:.3e})"
            terminalreporter.write_line(line)
