import pytest

from cyclicfrob.families import FamilySpec
from cyclicfrob.finite_field import make_field


@pytest.fixture(scope="session")
def F5():
    return make_field(5)


@pytest.fixture(scope="session")
def F7():
    return make_field(7)


@pytest.fixture(scope="session")
def spec_7_3_2(F7):
    return FamilySpec(F7, 3, 2)
