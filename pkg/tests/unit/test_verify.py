"""Unit tests for the reference check runner and the quick checks."""

from fractions import Fraction
from unittest.mock import MagicMock, patch

import pytest

from maassforge.errors import DomainError
from maassforge.scalarform import lift_forms
from maassforge.verify import (
    CheckResult,
    _Context,
    all_passed,
    check_eigenvector,
    check_eta_squared,
    check_mock_theta,
    check_scalar_form,
    check_weil_relations,
    d12_index,
    d21_character,
    f_plus_weights,
    run_checks,
)


@pytest.fixture
def ctx():
    return _Context(bits=128, workers=1, cache=None)


class TestCheckResult:
    def test_to_json(self):
        result = CheckResult("mock-theta", True, "ok", 1.23456, ("a",))
        assert result.to_json() == {
            "name": "mock-theta",
            "passed": True,
            "detail": "ok",
            "seconds": 1.235,
            "diffs": ["a"],
            "status": "PASS",
        }

    def test_all_passed(self):
        """Test that informational results do not fail a run."""
        info = CheckResult("split-units", None, informational=True)
        assert all_passed([CheckResult("a", True), info])
        assert not all_passed([CheckResult("a", True), CheckResult("b", False), info])

    def test_undecided_check_is_not_a_pass(self):
        skipped = CheckResult("scalar-membership", None)
        assert skipped.status == "SKIP"
        assert not all_passed([CheckResult("a", True), skipped])

    def test_status(self):
        assert CheckResult("a", True).status == "PASS"
        assert CheckResult("a", False).status == "FAIL"
        assert CheckResult("split-units", None, informational=True).status == "INFO"


class TestRunner:
    """Test selection and error handling in run_checks."""

    def test_only(self):
        results = run_checks(quick=True, only=["mock-theta"])
        assert [r.name for r in results] == ["mock-theta"]
        assert results[0].passed is True

    def test_error_becomes_failure(self):
        """Test that a library error inside a check is reported, not raised."""

        def explode(ctx):
            raise DomainError("bad input")

        with patch("maassforge.verify.QUICK_CHECKS", (("explode", explode),)):
            results = run_checks(quick=True)
        assert len(results) == 1
        assert results[0].passed is False
        assert "DomainError: bad input" in results[0].detail

    def test_split_units_are_informational(self):
        results = run_checks(quick=True, only=["split-units"])
        assert results[0].informational
        assert results[0].status == "INFO"
        assert all_passed(results)

    def test_full_adds_slow_checks(self):
        fast = MagicMock(return_value=(True, "", []))
        slow = MagicMock(return_value=(True, "", []))
        with patch("maassforge.verify.QUICK_CHECKS", (("fast", fast),)), patch(
            "maassforge.verify.FULL_CHECKS", (("slow", slow),)
        ):
            assert [r.name for r in run_checks(quick=True)] == ["fast"]
            assert [r.name for r in run_checks(quick=False)] == ["fast", "slow"]
        full_ctx = slow.call_args.args[0]
        assert full_ctx.d12_prec > 0


class TestContext:
    """Test that the D=12 lift is computed once per run."""

    def test_reuses_larger_form(self, ctx):
        form = MagicMock()
        with patch("maassforge.verify.ttheta_plus", return_value=form) as lift:
            ctx.d12_form(1)
            ctx.d12_form(Fraction(1, 2))
        assert lift.call_count == 1
        form.truncate.assert_called_with(Fraction(1, 2))

    def test_minimum_precision(self, ctx):
        ctx.d12_prec = Fraction(2)
        with patch("maassforge.verify.ttheta_plus", return_value=MagicMock()) as lift:
            ctx.d12_form(1)
        assert lift.call_args.args[1] == 2


class TestReferenceData:
    def test_weights(self):
        """Test f+ = (Theta+_1 + Theta+_{2+sqrt3}) / 2."""
        weights = f_plus_weights()
        assert sorted(weights.values()) == [Fraction(1, 2), Fraction(1, 2)]
        assert d12_index("1") != d12_index("2+sqrt3")
        assert d12_index("1", negate=True) != d12_index("1")


class TestQuickChecks:
    """Test the checks that run without the D=12 lift."""

    def test_mock_theta(self, ctx):
        passed, _, diffs = check_mock_theta(ctx)
        assert passed and not diffs

    def test_weil_relations(self, ctx):
        passed, _, diffs = check_weil_relations(ctx, words=3)
        assert passed, diffs

    def test_eigenvector(self, ctx):
        passed, _, diffs = check_eigenvector(ctx)
        assert passed, diffs

    def test_eta_squared(self, ctx):
        passed, _, diffs = check_eta_squared(ctx, terms=8)
        assert passed, diffs

    def test_scalar_form(self, ctx):
        passed, _, diffs = check_scalar_form(ctx, prec=12)
        assert passed, diffs

    def test_scalar_membership_lifts_fit(self):
        """Test that both D=21 lifts pass the size guard, so membership is computed."""
        character = d21_character()
        assert (character.D, character.M) == (21, 3)
        with patch("maassforge.scalarform.ttheta_plus") as lift:
            lift_forms(character, 7)
        assert lift.call_count == 2
