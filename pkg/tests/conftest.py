import numpy as np
import pytest

from maglens.analysis import find_focus, focus_tensor
from maglens.fieldsolver import BiasField
from maglens.geometry import LensGeometry
from maglens.quadrature import QuadratureSpec


@pytest.fixture(scope="session")
def geom():
    return LensGeometry()


@pytest.fixture(scope="session")
def bias():
    return BiasField()


@pytest.fixture(scope="session")
def spec():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def focus(geom, bias, spec):
    return find_focus(geom, bias, spec=spec)


@pytest.fixture(scope="session")
def focus_tensor_result(geom, bias, spec, focus):
    return focus_tensor(geom, bias, focus.position, spec)
