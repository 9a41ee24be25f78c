import numpy as np
import pytest

from orlizono.multisets import VectorMultiset


@pytest.fixture
def e2():
    return np.eye(2)


def vm(*rows, n=None):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return VectorMultiset.from_vectors(rows, dimension=n or rows.shape[1])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
