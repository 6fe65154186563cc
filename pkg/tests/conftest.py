import numpy as np
import pytest

from kahlerjet import symmetric_models as M
from kahlerjet.curvature import synthetic_jet
from kahlerjet.tensor_core import KahlerPoint


@pytest.fixture(scope="session")
def cp1():
    return M.grassmann_c(1, 2)


@pytest.fixture(scope="session")
def cp2():
    return M.grassmann_c(1, 3)


@pytest.fixture(scope="session")
def gr24():
    return M.grassmann_c(2, 4)


def pair_point(n: int) -> KahlerPoint:
    return KahlerPoint(np.eye(2 * n), M._complex_structure_pairs(n))


@pytest.fixture(scope="session")
def synthetic4():
    """Order-3 synthetic Kaehler jet on C^2."""
    return synthetic_jet(pair_point(2), 3, np.random.default_rng(11))
