import math

import numpy as np
import pytest

from riser.integrator import RiserProblem
from riser.model import Grid1D, Parameters, TensionProfile, TimeFunction

UNIT_AREA_RHO = 1.0 / math.sqrt(math.pi)


def make_problem(
    N=32,
    k=5.0,
    p=1.0,
    g3=0.0,
    a=1.0,
    b=None,
    phi=None,
    alpha=None,
    rho=UNIT_AREA_RHO,
    h=1.0,
    source=None,
):
    grid = Grid1D(h, N)
    params = Parameters(k=k, p=p, g=(0.0, 0.0, g3), rho=rho, h=h, b0=1.0)
    tension = a if isinstance(a, TensionProfile) else TensionProfile.constant(a, h, N)
    return RiserProblem(
        grid,
        params,
        tension,
        b if b is not None else TimeFunction.constant(1.0),
        phi if phi is not None else TimeFunction.constant(0.0),
        alpha if alpha is not None else TimeFunction.constant(0.0),
        source,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "acceptance" in item.nodeid:
            item.add_marker(pytest.mark.slow)
