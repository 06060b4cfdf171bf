import pathlib

import pytest

from adtsched import parse_adt

TREES = pathlib.Path(__file__).resolve().parent.parent / "trees"


def load_tree(name):
    """Parse one of the bundled example trees."""
    return parse_adt((TREES / (name + ".adt")).read_text())


@pytest.fixture
def treasure():
    return load_tree("treasure")


@pytest.fixture
def forestall():
    return load_tree("forestall")
