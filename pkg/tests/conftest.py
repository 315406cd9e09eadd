import pytest

from ftmm.schemes import attach_relations, build_scheme


@pytest.fixture(scope="session")
def hybrid():
    return build_scheme("hybrid_sw")


@pytest.fixture(scope="session")
def hybrid_r():
    """hybrid_sw with its full relation set attached (search runs once)."""
    return attach_relations(build_scheme("hybrid_sw"))


@pytest.fixture(scope="session")
def psmm2():
    return build_scheme("hybrid_sw_2psmm")
