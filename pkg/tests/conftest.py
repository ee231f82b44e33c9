import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mtlscond import MtlsProblem
from mtlscond.experiments import rng_for

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_problem(seed, m=12, n=6, n1=2, noise=0.3):
    """Noisy linear model with a comfortable genericity gap."""
    rng = rng_for(seed)
    A = rng.standard_normal((m, n))
    x = rng.standard_normal(n)
    b = A @ x + noise * rng.standard_normal(m)
    return MtlsProblem(A, b, n1)


def problem_family(count, seed=0, max_m=20, max_n=8):
    """Seeded problems of varying shape and partition."""
    rng = rng_for(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(n + 1, max_m + 1))
        n1 = int(rng.integers(0, n + 1))
        out.append(random_problem(seed * 100003 + k, m, n, n1))
    return out


@pytest.fixture
def golden_tls():
    # n1 = 0, A = [2; 0], b = [1; 1]
    return MtlsProblem(np.array([[2.0], [0.0]]), np.array([1.0, 1.0]), 0)


@pytest.fixture
def golden_ls():
    return MtlsProblem(np.array([[1.0], [1.0]]), np.array([1.0, 3.0]), 1)


@pytest.fixture
def decoupled():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    return MtlsProblem(A, np.array([1.0, 0.0, 0.5]), 1)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[key])
