import pytest

from slidekick.fields import FilippovSystem, PlanarField
from slidekick.regularization import phi_linear, phi_polynomial


@pytest.fixture(scope="session")
def normal_form():
    xp = PlanarField(lambda x, y: (1.0, 2.0 * x), name="X+")
    xm = PlanarField(lambda x, y: (0.0, 1.0), name="X-")
    return FilippovSystem(xp, xm)


@pytest.fixture(scope="session")
def lin():
    return phi_linear()


@pytest.fixture(scope="session")
def poly2():
    return phi_polynomial(2)


@pytest.fixture(scope="session")
def poly3():
    return phi_polynomial(3)
