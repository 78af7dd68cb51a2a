"""Slow checks against the published D=12 coefficient tables and certificates.

These compute Theta+ for L = sqrt(3)*O_12 up to q^(301/12), and the D=21 scalar
lift modulo primes. They take a while.
Run them explicitly with ``pytest tests/integration``.
"""

from fractions import Fraction

import pytest

from maassforge.verify import (
    SIGN_LIMIT,
    _Context,
    check_certificates,
    check_coefficient_identities,
    check_d12_table,
    check_orbit_oracle,
    check_scalar_membership,
    check_sign_regression,
    check_u_table,
    check_weil_identity,
    run_checks,
)


@pytest.fixture(scope="module")
def ctx():
    """One context per module so the D=12 lift is computed once."""
    context = _Context(bits=256, workers=1, cache=None)
    context.d12_prec = Fraction(SIGN_LIMIT + 1, 12)
    return context


class TestD12Lift:
    """Test the holomorphic coefficients of the D=12 example."""

    def test_table(self, ctx):
        passed, _, diffs = check_d12_table(ctx)
        assert passed, diffs

    def test_coefficient_identities(self, ctx):
        passed, _, diffs = check_coefficient_identities(ctx)
        assert passed, diffs

    def test_u_table(self, ctx):
        passed, _, diffs = check_u_table(ctx)
        assert passed, diffs

    def test_sign_regression(self, ctx):
        """Test the sign of every coefficient up to n = 300."""
        passed, _, diffs = check_sign_regression(ctx)
        assert passed, diffs


class TestStructure:
    def test_certificates(self, ctx):
        passed, _, diffs = check_certificates(ctx)
        assert passed, diffs

    def test_weil_identity(self, ctx):
        passed, _, diffs = check_weil_identity(ctx)
        assert passed, diffs

    def test_orbit_oracle(self, ctx):
        passed, _, diffs = check_orbit_oracle(ctx)
        assert passed, diffs


class TestScalarForm:
    def test_membership(self, ctx):
        """Test c+_phi(n) - bold c_phi(n) in (1/kappa)Z[phi] log eps for the D=21 character."""
        passed, _, diffs = check_scalar_membership(ctx)
        assert passed is True, diffs


class TestFullRun:
    def test_selected_full_checks(self):
        results = run_checks(only=["certificates", "weil-identity"])
        assert [r.name for r in results] == ["weil-identity", "certificates"]
        assert all(r.passed for r in results)
