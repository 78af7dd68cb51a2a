"""Shared test fixtures for maassforge tests."""

import pytest

from maassforge.mockform import MockFormCache
from maassforge.quadfield import IdealLattice
from maassforge.verify import D29_MODULUS, EPS_12, d12_lattice, d29_character


@pytest.fixture
def d12():
    """L = sqrt(3)*O_12 with Q = Nm/3, the lattice of the D=12 reference example."""
    return d12_lattice()


@pytest.fixture
def eps12():
    """The fundamental unit 2 + sqrt(3)."""
    return EPS_12


@pytest.fixture
def d5():
    """L_{O_5, 1}: the smallest lattice with a nontrivial lift."""
    return IdealLattice.from_order(5)


@pytest.fixture
def d5_special():
    """L_{O_5, 2}, which is already of the form L_{a, 2AN'^2}."""
    return IdealLattice.from_order(5, 2)


@pytest.fixture
def d29_modulus():
    """Z-basis of m = ((3 + sqrt(29))/2), an ideal of norm 5."""
    return D29_MODULUS


@pytest.fixture
def d29_char():
    """The odd ray class character mod m * inf_1 of Q(sqrt(29)) with phi(2) = i."""
    return d29_character()


@pytest.fixture
def cache(tmp_path):
    """A mock form cache in a fresh temporary directory."""
    return MockFormCache(tmp_path / "cache")

