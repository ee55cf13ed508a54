import pytest

from cspdigraph.structures import make_structure


@pytest.fixture
def two_cycle():
    return make_structure("2cycle", ["0", "1"], [("R", 2, [(0, 1), (1, 0)])])


@pytest.fixture
def edge_template():
    return make_structure("edge", ["0", "1"], [("R", 2, [(0, 1)])])


@pytest.fixture
def unit_template():
    return make_structure("unit", ["a"], [("R", 1, [(0,)])])


@pytest.fixture
def parity4():
    return make_structure(
        "parity4",
        ["0", "1"],
        [("R", 4, [(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1)])],
    )
