"""Unit tests for theta lift holomorphic parts and their cache."""

from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest

from maassforge.errors import ConsistencyError, DomainError, PrecisionShortfallError
from maassforge.mockform import (
    MockPlusForm,
    _CosetAverager,
    holo_coefficient,
    kappa_certificate,
    ttheta_plus,
    ttheta_plus_special,
    vartheta,
)
from maassforge.qseries import QSeries, VVForm


class TestCertificate:
    """Test kappa_L = 12 A^3 N'^3 psi(N)."""

    def test_values(self, d5, d12, d5_special):
        assert kappa_certificate(d5) == 36
        assert kappa_certificate(d12) == 3888
        assert kappa_certificate(d5_special) == 12


class TestVartheta:
    def test_negative_unit_kills_cusp_form(self, d5):
        """Test that -eps^2 acting trivially on L*/L forces theta(tau, L) = 0."""
        form = vartheta(d5, 1, 5)
        assert len(form) == 5
        assert form.is_zero()


class TestSpecialLift:
    """Test the product construction for L_{a, 2AN'^2}."""

    @pytest.fixture
    def special(self, d5_special):
        return ttheta_plus_special(d5_special, 3)

    def test_shape(self, special, d5_special):
        assert special.kappa == 6
        assert len(special.form) == d5_special.group.order
        assert special.prec == 3
        special.check_denominators()

    def test_antisymmetric(self, special, d5_special):
        """Test that weight one forces Theta+_{-h} = -Theta+_h."""
        group = d5_special.group
        for h in range(group.order):
            assert special.component(group.neg(h)) == -special.component(h)

    def test_needs_level_one(self, d5):
        with pytest.raises(DomainError):
            ttheta_plus_special(d5, 2)

    def test_needs_positive_sign(self, d5_special):
        with pytest.raises(DomainError):
            ttheta_plus_special(d5_special.negated(), 2)

    def test_json(self, special):
        assert MockPlusForm.from_json(special.to_json()) == special

    def test_denominator_check(self, d5_special):
        """Test that a coefficient outside (1/kappa)Z is reported."""
        components = [QSeries.zero(2) for _ in range(d5_special.group.order)]
        components[0] = QSeries.from_terms({Fraction(1): Fraction(1, 7)}, 2)
        form = VVForm(tuple(components), Fraction(1), -1, d5_special.group)
        with pytest.raises(ConsistencyError):
            MockPlusForm(d5_special, form, 6).check_denominators()

    def test_holo_coefficient_beyond_precision(self, special, d5_special):
        with pytest.raises(PrecisionShortfallError):
            holo_coefficient(d5_special, 0, 5, special)


class TestCosetAverage:
    """Test the Gamma_0(N) coset sum for lattices not of the special form."""

    def test_general_lift(self, d5):
        form = ttheta_plus(d5, 2)
        assert form.kappa == 36
        assert len(form.form) == d5.group.order
        form.check_denominators()

    def test_uncancelled_off_grid_term(self, d5):
        """Test that a coset term at an exponent outside -q(h) + Z must cancel in the sum."""
        original = _CosetAverager.contribution
        calls = []

        def corrupted(self, plan, multiplier):
            out = original(self, plan, multiplier)
            if not calls:
                block = np.zeros((self.order, self.K), dtype=object)
                block[0, 0] = 1
                out[Fraction(1, 3)] = block
            calls.append(plan)
            return out

        with patch.object(_CosetAverager, "contribution", autospec=True, side_effect=corrupted):
            with pytest.raises(ConsistencyError, match="does not cancel"):
                ttheta_plus(d5, 2)
        assert calls

    def test_modular_sum_matches_exact(self, d5):
        """Test that the coset sum taken modulo primes gives the exact coefficients."""
        exact = ttheta_plus(d5, 2)
        with patch("maassforge.mockform.EXACT_AVERAGE_LIMIT", 0), patch.object(
            _CosetAverager, "contribution", side_effect=AssertionError
        ):
            modular = ttheta_plus(d5, 2)
        assert modular == exact

    def test_modular_off_grid_term(self, d5):
        original = _CosetAverager.residues

        def corrupted(self, plan, multiplier, reps):
            out = original(self, plan, multiplier, reps)
            vector = np.zeros(self.order, dtype=np.int64)
            vector[0] = 1
            out[Fraction(1, 3)] = vector
            return out

        with patch("maassforge.mockform.EXACT_AVERAGE_LIMIT", 0), patch.object(
            _CosetAverager, "residues", autospec=True, side_effect=corrupted
        ):
            with pytest.raises(ConsistencyError, match="does not cancel"):
                ttheta_plus(d5, 2)


class TestCache:
    """Test the JSON cache of computed forms."""

    def test_second_call_is_cached(self, d5_special, cache):
        with patch(
            "maassforge.mockform.ttheta_plus_special", wraps=ttheta_plus_special
        ) as spy:
            first = ttheta_plus(d5_special, 2, cache=cache)
            second = ttheta_plus(d5_special, 2, cache=cache)
            assert spy.call_count == 1
        assert first == second
        assert cache.path(d5_special).exists()

    def test_lower_precision_is_truncated(self, d5_special, cache):
        ttheta_plus(d5_special, 3, cache=cache)
        loaded = cache.load(d5_special, Fraction(2))
        assert loaded is not None
        assert loaded.prec == 2

    def test_higher_precision_misses(self, d5_special, cache):
        ttheta_plus(d5_special, 2, cache=cache)
        assert cache.load(d5_special, Fraction(3)) is None

    def test_unreadable_entry(self, d5_special, cache):
        path = cache.path(d5_special)
        path.parent.mkdir(parents=True)
        path.write_text("{not json")
        assert cache.load(d5_special, Fraction(1)) is None

    def test_key_depends_on_lattice(self, d5, d5_special, cache):
        assert cache.key(d5) != cache.key(d5_special)
