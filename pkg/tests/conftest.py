import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, m, scale=1.0):
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return scale * (A + A.conj().T) / 2


def random_type3(rng, m):
    """Scalar complex diagonal blocks plus quaternion-Hermitian off-diagonal blocks."""
    C = np.zeros((2 * m, 2 * m), dtype=complex)
    for j in range(m):
        t = complex(rng.normal(), rng.normal())
        C[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = t * np.eye(2)
        for k in range(j + 1, m):
            a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            C[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[a, b], [-b.conjugate(), a.conjugate()]]
            C[2 * k : 2 * k + 2, 2 * j : 2 * j + 2] = [[a.conjugate(), -b], [b.conjugate(), a]]
    return C


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
