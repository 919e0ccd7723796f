import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def demo2():
    from rdsim.born import DEFAULT_CHAINS, demo_model
    return demo_model(2, DEFAULT_CHAINS[2], 64, seed=0)


@pytest.fixture(scope="session")
def demo3():
    from rdsim.born import DEFAULT_CHAINS, demo_model
    return demo_model(3, DEFAULT_CHAINS[3], 63, seed=0)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "LINES", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.pytest_terminal_summary_lines():
        terminalreporter.write_line(line)
