"""Unit tests for quadratic orders, lattices, discriminant groups and orbits."""

import warnings
from fractions import Fraction

import pytest
from sympy.utilities.exceptions import SymPyDeprecationWarning

from maassforge.errors import DomainError
from maassforge.exact import LogValue, QuadElem
from maassforge.quadfield import (
    IdealLattice,
    ResidueRing,
    discriminant_kernel,
    enumerate_orbits,
    fundamental_unit,
    kronecker_chi,
    principal_generators,
    unit_data,
    unit_log,
)
from maassforge.verify import D12_LABELS, orbit_oracle


class TestFundamentalUnit:
    """Test the continued fraction search for eps_F."""

    @pytest.mark.parametrize(
        "D, a, b",
        [
            (5, Fraction(1, 2), Fraction(1, 2)),
            (8, 1, Fraction(1, 2)),
            (12, 2, Fraction(1, 2)),
            (13, Fraction(3, 2), Fraction(1, 2)),
            (29, Fraction(5, 2), Fraction(1, 2)),
        ],
    )
    def test_known_units(self, D, a, b):
        """Test eps_F for small discriminants."""
        eps = fundamental_unit(D)
        assert eps == QuadElem(D, a, b)
        assert abs(eps.norm()) == 1

    @pytest.mark.parametrize("D", [1, 4, 7, 0, -3])
    def test_invalid_discriminants(self, D):
        """Test that squares and D = 2, 3 mod 4 are rejected."""
        with pytest.raises(DomainError):
            fundamental_unit(D)


class TestKronecker:
    """Test the Kronecker symbol chi_D."""

    def test_values(self):
        assert kronecker_chi(5, 2) == -1
        assert kronecker_chi(29, 7) == 1
        assert kronecker_chi(29, 2) == -1
        assert kronecker_chi(12, 2) == 0
        assert kronecker_chi(12, 1) == 1

    def test_odd_modulus_without_deprecated_sympy(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", SymPyDeprecationWarning)
            assert kronecker_chi(13, 15) == -1
            assert kronecker_chi(5, 21) == 1


class TestIdealLattice:
    """Test L_{a,M} construction and its invariants."""

    def test_order_lattice(self, d5):
        """Test L_{O_5,1}: A = 1 and level N = 2."""
        assert d5.A == 1
        assert d5.M == 1
        assert d5.level_data() == (2, 1)
        assert d5.group.order == 5

    def test_reference_lattice(self, d12):
        """Test that sqrt(3)*O_12 has A = 3, N = 6 and |L*/L| = 12."""
        assert d12.A == 3
        assert d12.level_data() == (6, 1)
        assert d12.group.order == 12
        assert d12.group.level == 12

    def test_special_shape(self, d5_special):
        """Test that L_{O_5, 2} needs no averaging."""
        assert d5_special.level_data() == (1, 1)

    def test_not_an_ideal(self):
        """Test that Z + Z*sqrt(5) is rejected as an O_5-ideal."""
        with pytest.raises(DomainError):
            IdealLattice(5, [QuadElem(5, 1), QuadElem(5, 0, 1)])

    def test_bad_multiplier(self):
        with pytest.raises(DomainError):
            IdealLattice.from_order(5, 0)

    def test_negated_isometry(self, d5):
        """Test that x -> x*sqrt(D) maps -L isometrically onto L_{a*sqrt(D), M}."""
        negated = d5.negated()
        image = d5.negated_isometric()
        root = QuadElem.sqrt(5)
        for x in negated.basis:
            assert image.contains(x * root)
            assert negated.Q(x) == image.Q(x * root)

    def test_json(self, d12):
        assert IdealLattice.from_json(d12.to_json()) == d12


class TestDiscGroup:
    """Test L*/L for the reference lattice."""

    def test_label_values(self, d12):
        """Test Q on the labelled cosets."""
        group = d12.group
        assert group.qval(group.index_of(D12_LABELS["1"])) == Fraction(1, 12)
        assert group.qval(group.index_of(D12_LABELS["2"])) == Fraction(1, 3)

    def test_negation(self, d12):
        """Test that neg is an involution matching x -> -x."""
        group = d12.group
        for i, h in enumerate(group.reps):
            assert group.neg(group.neg(i)) == i
            assert group.index_of(-h) == group.neg(i)

    def test_outside_dual(self, d12):
        with pytest.raises(DomainError):
            d12.group.index_of(QuadElem(12, Fraction(1, 3)))


class TestUnits:
    """Test the discriminant kernel."""

    @pytest.mark.parametrize("D, M", [(5, 1), (12, 1), (8, 2)])
    def test_kernel_generator(self, D, M):
        """Test that eps_L is totally positive and fixes L*/L."""
        lattice = IdealLattice.from_order(D, M)
        eps_l, index = discriminant_kernel(lattice)
        assert eps_l.is_totally_positive()
        assert lattice.fixes_discriminant(eps_l)
        assert index == 2 * unit_data(lattice).eps_exponent

    def test_unit_log(self, eps12):
        """Test that (1/2)log|eps^3/eps'^3| = 3 log(eps)."""
        assert unit_log([(eps12, 3)], Fraction(1, 2)) == LogValue.log_eps(3)


class TestOrbits:
    """Test orbit enumeration against a brute force search."""

    @pytest.mark.parametrize("D, M", [(5, 1), (12, 1), (12, 2)])
    @pytest.mark.parametrize("sign_q", [1, -1])
    def test_oracle(self, D, M, sign_q):
        """Test that orbits moved by eps_L tile every small solution set."""
        assert orbit_oracle(IdealLattice.from_order(D, M), 8, sign_q, radius=20) == []

    def test_wrong_coset_is_empty(self, d12):
        """Test that n - Q(h) must be an integer."""
        h = d12.group.index_of(D12_LABELS["1"])
        assert enumerate_orbits(d12, h, Fraction(1, 2)) == []

    def test_nonpositive_n(self, d12):
        with pytest.raises(DomainError):
            enumerate_orbits(d12, 0, 0)


class TestPrincipalGenerators:
    """Test generators of principal ideals of a given norm."""

    def test_split_prime(self):
        """Test that 7 splits into two principal primes in Q(sqrt(29))."""
        found = principal_generators(29, 7)
        assert len(found) == 2
        assert all(abs(x.norm()) == 7 for x in found)

    def test_inert_prime(self):
        assert principal_generators(29, 2) == ()

    def test_inert_square(self):
        """Test that (2) is the only ideal of norm 4."""
        assert principal_generators(29, 4) == (QuadElem(29, 2),)


class TestResidueRing:
    """Test O/m."""

    def test_norm_five(self, d29_modulus):
        ring = ResidueRing(29, d29_modulus)
        assert ring.norm == 5
        assert len(ring.units) == 4

    def test_not_an_ideal(self):
        with pytest.raises(DomainError):
            ResidueRing(29, [QuadElem(29, 5), QuadElem(29, 0, 1)])
