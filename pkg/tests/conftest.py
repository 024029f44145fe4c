import numpy as np
import pytest
from hypothesis import settings

from nalab.construction import ConstructionConfig, build_space
from nalab.norms import PhiSequence, SmoothBaseNormSpec, SumNormSpec

settings.register_profile("nalab", max_examples=60, deadline=None)
settings.load_profile("nalab")


@pytest.fixture(scope="session")
def tc1_phi():
    """``phi(n) = 2**-(n+1)`` in dimension 4 (l1 mass 15/32)."""
    return PhiSequence.dyadic(4)


@pytest.fixture(scope="session")
def tc1_spec(tc1_phi):
    return SumNormSpec(tc1_phi)


def tc1_config(mode="plain", delta=1.0, decay="none"):
    """Four coordinates, four net rows, two levels, canonical net."""
    return ConstructionConfig(4, 4, 2, delta, SmoothBaseNormSpec(mode, 4), net="canonical", decay=decay)


@pytest.fixture(scope="session")
def tc1_space():
    return build_space(tc1_config())


@pytest.fixture(scope="session")
def tc1_smooth_space():
    return build_space(tc1_config("smooth", delta=0.05, decay="sigma"))


@pytest.fixture(scope="session")
def smooth_space():
    """Eight coordinates, default net, six levels, smooth base."""
    return build_space(ConstructionConfig(8, 16, 6, 0.05, SmoothBaseNormSpec("smooth", 8)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
