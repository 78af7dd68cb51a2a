"""Unit tests for truncated q-series and the classical series built from them."""

from fractions import Fraction

import pytest

from maassforge.errors import DomainError, PrecisionShortfallError
from maassforge.exact import cyclo_root_of_unity
from maassforge.qseries import (
    QSeries,
    VVForm,
    eisenstein_e2,
    eta3,
    eta_power,
    f2_series,
    mock_theta_plus,
    substitute_cusp,
    theta_half,
    theta_three_half,
)


def series(terms, prec):
    return QSeries.from_terms({Fraction(e): c for e, c in terms.items()}, prec)


class TestQSeries:
    """Test construction, access and arithmetic."""

    def test_coefficients(self):
        """Test lookup on and off the exponent grid."""
        s = series({0: 1, Fraction(1, 2): 2}, 3)
        assert s.coefficient("1/2") == 2
        assert s[Fraction(1, 4)] == 0
        assert s.coefficient(-1) == 0
        assert s.valuation == 0

    def test_beyond_precision(self):
        """Test that a coefficient at or above prec is never guessed."""
        with pytest.raises(PrecisionShortfallError):
            series({0: 1}, 3).coefficient(3)

    def test_precision_is_part_of_equality(self):
        s = theta_half(1, 0, 3)
        assert s.truncate(2) != s
        assert s.truncate(2) == theta_half(1, 0, 2)

    def test_product_precision(self):
        """Test that a product is only known up to min(a.prec + v(b), b.prec + v(a))."""
        a = series({1: 1}, 3)
        b = series({0: 1}, 4)
        assert (a * b).prec == 3
        assert (b * b).prec == 4

    def test_difference_of_squares(self):
        one_plus = series({0: 1, 1: 1}, 5)
        one_minus = series({0: 1, 1: -1}, 5)
        assert one_plus * one_minus == series({0: 1, 2: -1}, 5)

    def test_inverse(self):
        """Test that 1/(1 - q) = 1 + q + q^2 + ..."""
        geometric = series({0: 1, 1: -1}, 5).inverse()
        assert geometric == series({k: 1 for k in range(5)}, 5)

    def test_inverse_of_zero(self):
        with pytest.raises(DomainError):
            QSeries.zero(4).inverse()

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            QSeries(0, 0, [1], 2)

    def test_shift(self):
        expected = series({Fraction(1, 2): 1}, Fraction(7, 2))
        assert series({0: 1}, 3).shift("1/2") == expected

    def test_rescale(self):
        """Test exponent scaling with and without a twist e(twist*x)."""
        assert theta_half(1, 0, 3).rescale(2) == series({0: 1, 1: 2, 4: 2}, 6)
        twisted = series({1: 1, 2: 1}, 3).rescale(1, Fraction(1, 2))
        assert twisted == series({1: -1, 2: 1}, 3)

    def test_json(self):
        s = series({Fraction(1, 3): cyclo_root_of_unity(1, 4, 4), 2: Fraction(5, 7)}, 4)
        assert QSeries.from_json(s.to_json()) == s


class TestCuspSubstitution:
    def test_rescales_exponents(self):
        """Test tau -> tau/2 on the Jacobi theta series."""
        moved = substitute_cusp(theta_half(1, 0, 3), 1, 0, 2)
        assert moved == series({0: 1, Fraction(1, 4): 2, 1: 2}, Fraction(3, 2))

    def test_width_must_divide(self):
        with pytest.raises(DomainError):
            substitute_cusp(theta_half(1, 0, 3), 3, 0, 4)


class TestVVForm:
    """Test vectors of q-series."""

    def test_dimension_mismatch(self):
        s = theta_half(1, 0, 3)
        one = VVForm((s,), Fraction(1, 2), 1)
        two = VVForm((s, s), Fraction(1, 2), 1)
        with pytest.raises(DomainError):
            one + two

    def test_scalar_and_prec(self):
        form = VVForm((theta_half(1, 0, 3), theta_half(1, 0, 2)), Fraction(1, 2), 1)
        assert form.prec == 2
        doubled = 2 * form
        assert doubled.coefficient(0, "1/2") == 4
        assert (form + form * -1).is_zero()


class TestClassicalSeries:
    """Test eta products, E2 and unary theta series."""

    def test_eta(self):
        """Test eta = q^(1/24)(1 - q - q^2 + q^5 + ...)."""
        eta = eta_power(1, 5)
        assert eta == series(
            {Fraction(1, 24): 1, Fraction(25, 24): -1, Fraction(49, 24): -1}, 5
        )

    def test_jacobi_triple_product(self):
        """Test that the eta^3 sum formula agrees with the product."""
        assert eta3(4) == eta_power(3, 4)
        expected = {Fraction(1, 8): 1, Fraction(9, 8): -3, Fraction(25, 8): 5}
        assert eta3(4) == series(expected, 4)

    def test_eisenstein(self):
        assert eisenstein_e2(3) == series({0: 1, 1: -24, 2: -72}, 3)

    def test_theta_half(self):
        assert theta_half(1, 0, 3) == series({0: 1, Fraction(1, 2): 2, 2: 2}, 3)

    def test_theta_three_half(self):
        """Test that odd weight 3/2 theta series cancel for symmetric cosets."""
        assert theta_three_half(1, "1/2", 5).is_zero()
        expected = {
            Fraction(1, 8): Fraction(1, 2),
            Fraction(9, 8): Fraction(-3, 2),
            Fraction(25, 8): Fraction(5, 2),
        }
        assert theta_three_half(2, "1/2", 4) == series(expected, 4)

    def test_theta_bad_period(self):
        with pytest.raises(DomainError):
            theta_half(0, 0, 3)

    def test_f2(self):
        """Test the Appell-type sum over pairs b > a > 0 with b - a odd."""
        assert f2_series(4) == series({1: 1, 2: 1, 3: -1}, 4)


class TestMockTheta:
    """Test holomorphic parts of weight 1/2 mock theta functions."""

    def test_level_two(self):
        """Test the first terms of the N = 2, h = 1/2 function."""
        expected = {
            Fraction(-1, 8): Fraction(1, 24),
            Fraction(7, 8): Fraction(-45, 24),
            Fraction(15, 8): Fraction(-231, 24),
            Fraction(23, 8): Fraction(-770, 24),
        }
        assert mock_theta_plus(2, "1/2", 3) == series(expected, 3)

    def test_coset_is_reduced_mod_n(self):
        assert mock_theta_plus(2, "5/2", 3) == mock_theta_plus(2, "1/2", 3)

    @pytest.mark.parametrize("N, h", [(3, 0), (0, 0), (2, "1/3")])
    def test_invalid_arguments(self, N, h):
        with pytest.raises(DomainError):
            mock_theta_plus(N, h, 3)
