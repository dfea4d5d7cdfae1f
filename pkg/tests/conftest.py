import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from superatom.models import PhysicalParams, mhz

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def small_params() -> PhysicalParams:
    """Fig. 3 drive on a reduced photon cutoff."""
    from superatom.config import apply_preset

    return apply_preset(PhysicalParams(n_max=3), "fig3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(basis, rng):
    from superatom.hilbert import StateVector

    v = rng.normal(size=basis.dimension) + 1j * rng.normal(size=basis.dimension)
    return StateVector(basis, v / np.linalg.norm(v))


__all__ = ["mhz", "random_state"]


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
