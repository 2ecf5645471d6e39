import numpy as np
import pytest

from anisopq.fields import ExponentField, GridFunction
from anisopq.mesh import build_mesh
from anisopq.problem import ProblemSpec

ACCEPTANCE_LINES = []


def standard_spec(n=128, r_hat=0.1, **changes):
    """p=2.2, q=1.8, tau=1.5, mu=1.4, c0=delta=1 on (0,1)."""
    mesh = build_mesh(1, [1.0], [n])
    c = lambda v: ExponentField.constant(mesh, v)  # noqa: E731
    spec = ProblemSpec(mesh, c(2.2), c(1.8), c(1.5), c(1.4), GridFunction(mesh, np.full(mesh.n_nodes, r_hat)))
    return spec.replace(**changes) if changes else spec


STANDARD_CONFIG = {
    "domain": {"dim": 1, "lengths": [1.0], "resolution": [128]},
    "exponents": {
        "p": {"kind": "constant", "value": 2.2},
        "q": {"kind": "constant", "value": 1.8},
        "tau": {"kind": "constant", "value": 1.5},
        "mu": {"kind": "constant", "value": 1.4},
    },
    "coefficients": {"r_hat": {"kind": "constant", "value": 0.1}, "c0": 1.0, "delta": 1.0},
}


@pytest.fixture
def std_config():
    import copy
    return copy.deepcopy(STANDARD_CONFIG)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
