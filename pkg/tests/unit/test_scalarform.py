"""Unit tests for ray class characters and scalar weight one forms."""

from fractions import Fraction
from unittest.mock import MagicMock, patch

import mpmath
import pytest

from maassforge.errors import DomainError, PrecisionShortfallError
from maassforge.exact import Cyclotomic, LogValue, QuadElem, cyclo_root_of_unity
from maassforge.quadfield import QuadOrder
from maassforge.scalarform import (
    RayCharacter,
    UnitElement,
    bold_c_phi,
    c_plus_phi,
    check_class_number_one,
    f_phi,
    kappa_bound,
    level,
    lift_forms,
    ray_characters,
    scalar_lattice,
    u_split,
    unit_ambiguity,
)


class TestClassNumber:
    def test_one(self):
        check_class_number_one(29)
        check_class_number_one(5)

    def test_not_one(self):
        """Test that Q(sqrt(10)) is rejected: nothing has norm +-2."""
        with pytest.raises(DomainError):
            check_class_number_one(40)


class TestRayCharacters:
    """Test enumeration of odd characters with the unit condition."""

    def test_norm_five_modulus(self, d29_modulus):
        """Test that (O/m)^x = Z/4 carries exactly two admissible characters."""
        characters = ray_characters(29, d29_modulus)
        assert len(characters) == 2
        assert all(c.is_odd() and c.satisfies_unit_condition() for c in characters)
        assert [c.index for c in characters] == [0, 1]

    def test_trivial_modulus(self):
        """Test that no character of the trivial modulus is odd."""
        assert ray_characters(5, QuadOrder(5).basis) == []

    def test_values(self, d29_char):
        i = cyclo_root_of_unity(1, 4, 4)
        assert d29_char(QuadElem(29, 2)) == i
        # (-2) = (2): the sign at inf_1 cancels phi_f(-1) = -1
        assert d29_char(QuadElem(29, -2)) == i
        assert d29_char.finite_part(QuadElem(29, -2)) == -i
        assert d29_char.inverse_at(QuadElem(29, 2)) == -i

    def test_vanishes_on_the_modulus(self, d29_char, d29_modulus):
        assert d29_char(d29_modulus[0]) == 0

    def test_nebentypus(self, d29_char):
        assert d29_char.nebentypus(1) == 1
        with pytest.raises(DomainError):
            d29_char.nebentypus(0)

    def test_json(self, d29_char):
        loaded = RayCharacter.from_json(d29_char.to_json())
        assert loaded.exponents == d29_char.exponents
        assert loaded.index == d29_char.index

    def test_json_index_out_of_range(self, d29_char):
        data = {**d29_char.to_json(), "characterIndex": 7}
        with pytest.raises(DomainError):
            RayCharacter.from_json(data)


class TestScalarForm:
    """Test the weight one eigenform f_phi."""

    def test_first_coefficients(self, d29_char):
        """Test c(1) = 1, zeros at the inert primes 2 and 3, and c(4) = phi(2)."""
        series = f_phi(d29_char, 5)
        assert series.coefficient(1) == 1
        assert series.coefficient(2) == 0
        assert series.coefficient(3) == 0
        assert series.coefficient(4) == cyclo_root_of_unity(1, 4, 4)

    def test_prec(self, d29_char):
        with pytest.raises(DomainError):
            f_phi(d29_char, 0)

    def test_lattice(self, d29_char):
        """Test L = L_{d,5} with N = D*M = 145."""
        lattice = scalar_lattice(d29_char)
        assert lattice.M == 5
        assert level(d29_char) == 145


class TestHolomorphicPart:
    """Test c+_phi and its comparison with the boldface c_phi."""

    def test_bold_c_phi_vanishes_without_split_ideals(self, d29_char):
        assert bold_c_phi(d29_char, 1).is_zero()
        assert bold_c_phi(d29_char, 2).is_zero()

    def test_bold_c_phi_n(self, d29_char):
        with pytest.raises(DomainError):
            bold_c_phi(d29_char, 0)

    def test_constant_coefficients_cancel(self, d29_char):
        """Test that a constant c+_L is killed by the nontrivial character sum."""
        forms = (MagicMock(prec=Fraction(10)), MagicMock(prec=Fraction(10)))
        constant = MagicMock(value=LogValue.log_eps(1))
        target = "maassforge.scalarform.holo_coefficient"
        with patch(target, return_value=constant) as holo:
            assert c_plus_phi(d29_char, 1, forms).is_zero()
            assert holo.called

    def test_precision_shortfall(self, d29_char):
        forms = (MagicMock(prec=Fraction(1, 145)), MagicMock(prec=Fraction(1, 145)))
        with pytest.raises(PrecisionShortfallError):
            c_plus_phi(d29_char, 1, forms)

    def test_n_must_be_positive(self, d29_char):
        with pytest.raises(DomainError):
            c_plus_phi(d29_char, 0, (MagicMock(), MagicMock()))

    def test_lift_too_large(self, d29_char):
        """Test that |L*/NL| in the tens of millions asks for precomputed forms."""
        with pytest.raises(DomainError, match="precomputed"):
            lift_forms(d29_char, 21)

    def test_kappa_bound(self):
        assert kappa_bound(5) == 108000
        assert kappa_bound(1) == 48 * 3


class TestUnitAmbiguity:
    """Test reconstruction of rational multiples of log(eps_F)."""

    def test_reconstructs(self):
        value = LogValue.log_eps(Fraction(3, 4))
        assert unit_ambiguity(value, 29, 4) == [Fraction(3, 4)]

    def test_wrong_denominator(self):
        assert unit_ambiguity(LogValue.log_eps(Fraction(3, 4)), 29, 2) is None

    def test_zero(self):
        assert unit_ambiguity(LogValue.zero(), 29, 4) == [Fraction(0)]


class TestSplitUnits:
    """Test u(phi_heart, ell) at split primes."""

    def test_terms_are_conjugate(self, d29_char):
        u = u_split(d29_char, 7)
        (a, lam), (b, lam_conj) = u.terms
        assert lam_conj == lam.conj()
        assert abs(lam.norm()) == 7
        assert Cyclotomic.coerce(a) * Cyclotomic.coerce(b) == 1
        assert u.swapped().terms == tuple(reversed(u.terms))

    @pytest.mark.parametrize("ell", [4, 2, 5])
    def test_invalid_primes(self, d29_char, ell):
        """Test composite, inert and modulus-dividing primes."""
        with pytest.raises(DomainError):
            u_split(d29_char, ell)

    def test_zero_element(self):
        with pytest.raises(DomainError):
            UnitElement(((Fraction(1), QuadElem(29, 0)),))

    def test_log_abs(self):
        value = UnitElement(((Fraction(2), QuadElem(29, 2)),)).log_abs(64)
        with mpmath.workprec(64):
            assert abs(value - 2 * mpmath.log(2)) < mpmath.mpf(2) ** -50
