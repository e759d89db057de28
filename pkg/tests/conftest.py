import pytest

from contracta.corpus import get_instance


@pytest.fixture(scope="session")
def banach():
    return get_instance("banach_half")


@pytest.fixture(scope="session")
def piecewise():
    return get_instance("piecewise_leader")


@pytest.fixture(scope="session")
def harmonic_low():
    return get_instance("harmonic_shift_low")


@pytest.fixture(scope="session")
def harmonic_abs():
    return get_instance("harmonic_shift_abs")


@pytest.fixture(scope="session")
def square_b():
    return get_instance("square_b")
