import pytest

from lensbeam.calibration import load_calibration
from lensbeam.units import AngularGrid, make_constants


@pytest.fixture(scope="session")
def grid():
    return AngularGrid(1.0)


@pytest.fixture(scope="session")
def constants():
    return make_constants()


@pytest.fixture(scope="session")
def cal():
    return load_calibration()
