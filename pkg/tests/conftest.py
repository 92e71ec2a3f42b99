import numpy as np
import pytest

from fermipole.experiments import BenchmarkSystem
from fermipole.lattice import LatticeSpec


@pytest.fixture(scope="session")
def bench16():
    """Size-16 benchmark system shared across test modules."""
    return BenchmarkSystem(LatticeSpec(L=16, seed=0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
