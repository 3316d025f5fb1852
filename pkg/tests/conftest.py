import numpy as np
import pytest

from dunklsob.rootsys import build_root_system


def _systems():
    return {
        "a1": build_root_system("A1_PRODUCT", 1, 1.0),
        "a1x2": build_root_system("A1_PRODUCT", 2, (1.0, 0.5)),
        "a2": build_root_system("A2", multiplicities=1.0),
        "b2": build_root_system("B2", multiplicities=(1.0, 0.5)),
        "i2_5": build_root_system("DIHEDRAL_M", multiplicities=1.0, m=5),
    }


SYSTEMS = _systems()


@pytest.fixture(params=sorted(SYSTEMS))
def rs(request):
    return SYSTEMS[request.param]


@pytest.fixture
def a1():
    return SYSTEMS["a1"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
