import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from extprob.bimodule import RingOperator, compose, diagonal, random_generalized_unitary  # noqa: E402
from extprob.hypercomplex import CLIFFORD, QUATERNION  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def physical_clifford(rng, n, values=None):
    """U diag(values) U^dagger, a physical Clifford operator with known spectrum."""
    if values is None:
        values = rng.integers(-3, 4, size=n).astype(float)
    U = random_generalized_unitary(CLIFFORD, n, rng)
    return compose(compose(U, diagonal(CLIFFORD, list(values))), U.adjoint()), sorted(values)


@pytest.fixture(params=[QUATERNION, CLIFFORD], ids=lambda r: r.name)
def ring(request):
    return request.param


__all__ = ["DATA", "physical_clifford", "RingOperator"]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
