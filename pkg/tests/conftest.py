import pytest

from sidforge.fixtures import example_machine, rejecting_machine
from sidforge.reduction import ReductionParams, compile
from sidforge.syntax import parse_sid

BTREE = """
p(x) <= x -> (nil,nil)
p(x) <= \\E y z . x -> (y,z) * p(y) * p(z)
"""

LIST = """
ls(x,y) <= x -> (y,nil)
ls(x,y) <= \\E z . x -> (z,nil) * ls(z,y)
"""


@pytest.fixture(scope="session")
def btree():
    return parse_sid(BTREE)


@pytest.fixture(scope="session")
def lists():
    return parse_sid(LIST)


@pytest.fixture(scope="session")
def machine():
    return example_machine()


@pytest.fixture(scope="session")
def params(machine):
    return ReductionParams(machine, 1)


@pytest.fixture(scope="session")
def compiled(params):
    return compile(params)


@pytest.fixture(scope="session")
def rejecting():
    p = ReductionParams(rejecting_machine(), 1)
    return p, compile(p)
