"""Unit tests for the maassforge command line."""

import json
from fractions import Fraction
from unittest.mock import patch

import pytest

from maassforge.cli import (
    EXIT_CONSISTENCY,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_USAGE,
    exit_code_for,
    main,
    parse_element,
    parse_modulus,
)
from maassforge.errors import (
    ConductorError,
    ConsistencyError,
    DomainError,
    MaassForgeError,
    PrecisionShortfallError,
    UsageError,
)
from maassforge.exact import QuadElem
from maassforge.qseries import QSeries, mock_theta_plus
from maassforge.verify import EPS_12, CheckResult


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    """Isolate each test from MAASSFORGE_* settings of the calling shell."""
    for key in ("LOG_LEVEL", "BITS", "WORKERS"):
        monkeypatch.delenv(f"MAASSFORGE_{key}", raising=False)
    monkeypatch.setenv("MAASSFORGE_CACHE", str(tmp_path / "cache"))


def run_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


class TestParsing:
    def test_element(self):
        expected = QuadElem(12, Fraction(1, 2), Fraction(1, 4))
        assert parse_element(12, "1/2, 1/4") == expected

    def test_modulus(self):
        basis = parse_modulus(29, "3/2,1/2;8,1")
        first = QuadElem(29, Fraction(3, 2), Fraction(1, 2))
        assert basis == (first, QuadElem(29, 8, 1))

    @pytest.mark.parametrize("text", ["1", "1,2,3"])
    def test_bad_element(self, text):
        with pytest.raises(UsageError):
            parse_element(5, text)

    def test_bad_modulus(self):
        with pytest.raises(UsageError):
            parse_modulus(5, "1,0")


class TestCommands:
    """Test each subcommand end to end on small inputs."""

    def test_unit(self, capsys):
        code, payload = run_json(capsys, "unit", "--D", "12")
        assert code == EXIT_OK
        assert payload["epsF"] == EPS_12.to_json()
        assert payload["norm"] == "1"
        assert payload["numeric"].startswith("3.732050807")

    def test_unit_csv(self, capsys):
        assert main(["unit", "--D", "5", "--format", "csv", "--digits", "5"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "D,a,b,norm,numeric"
        assert lines[1] == "5,1/2,1/2,-1,1.618"

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "results" / "unit.json"
        assert main(["unit", "--D", "5", "--out", str(target)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())["D"] == 5

    def test_mock_theta(self, capsys):
        argv = ["mock-theta", "--N", "2", "--h", "1/2", "--prec", "3"]
        code, payload = run_json(capsys, *argv)
        assert code == EXIT_OK
        assert QSeries.from_json(payload["series"]) == mock_theta_plus(2, "1/2", 3)

    def test_vartheta(self, capsys):
        code, payload = run_json(capsys, "vartheta", "--D", "5", "--prec", "3")
        assert code == EXIT_OK
        assert len(payload["form"]["components"]) == 5

    def test_ttheta_uses_cache(self, capsys, tmp_path):
        cache_dir = tmp_path / "forms"
        argv = ["ttheta", "--D", "5", "--M", "2", "--prec", "2"]
        argv += ["--cache-dir", str(cache_dir)]
        code, payload = run_json(capsys, *argv)
        assert code == EXIT_OK
        assert payload["kappa"] == 6
        assert len(list(cache_dir.glob("*.json"))) == 1

    def test_verify_failure_exit_code(self, capsys):
        failed = [CheckResult("mock-theta", False, "mismatch")]
        with patch("maassforge.cli.run_checks", return_value=failed):
            code, payload = run_json(capsys, "verify-paper", "--quick")
        assert code == EXIT_CONSISTENCY
        assert payload["passed"] is False

    def test_verify_success(self, capsys):
        passed = [
            CheckResult("mock-theta", True),
            CheckResult("split-units", None, informational=True),
        ]
        with patch("maassforge.cli.run_checks", return_value=passed) as checks:
            code, payload = run_json(capsys, "verify-paper", "--quick", "--no-cache")
        assert code == EXIT_OK
        assert payload["passed"] is True
        assert checks.call_args.kwargs["quick"] is True
        assert checks.call_args.kwargs["cache"] is None


class TestUsageErrors:
    """Test that incomplete or invalid jobs exit with status 2 before computing."""

    @pytest.mark.parametrize(
        "argv",
        [
            ["mock-theta", "--N", "2"],
            ["coeff", "--D", "5", "--h", "0,0"],
            ["vartheta", "--prec", "3"],
            ["unit", "--D", "5", "--prec", "x"],
            ["unit", "--D", "5", "--prec", "0"],
            ["unit", "--D", "5", "--workers", "0"],
            ["scalar-coeff", "--n", "1"],
        ],
    )
    def test_incomplete(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_bad_discriminant(self):
        assert main(["unit", "--D", "7"]) == EXIT_USAGE

    def test_coset_outside_dual(self):
        assert main(["coeff", "--D", "5", "--h", "1/3,0", "--n", "1"]) == EXIT_USAGE

    def test_scalar_n_must_be_integral(self):
        argv = ["scalar-coeff", "--D", "29", "--modulus", "3/2,1/2;8,1", "--n", "1/2"]
        assert main(argv) == EXIT_USAGE

    def test_character_index_out_of_range(self):
        argv = ["scalar-coeff", "--D", "29", "--modulus", "3/2,1/2;8,1"]
        assert main(argv + ["--index", "5", "--n", "1"]) == EXIT_USAGE

    def test_scalar_lift_too_large(self):
        """Test that D=29 asks for precomputed Theta+ instead of averaging."""
        argv = ["scalar-coeff", "--D", "29", "--modulus", "3/2,1/2;8,1", "--n", "1"]
        assert main(argv) == EXIT_USAGE

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv("MAASSFORGE_BITS", "8")
        assert main(["unit", "--D", "5"]) == EXIT_USAGE


class TestExitCodes:
    @pytest.mark.parametrize(
        "exc, code",
        [
            (UsageError("x"), EXIT_USAGE),
            (DomainError("x"), EXIT_USAGE),
            (ConsistencyError("x"), EXIT_CONSISTENCY),
            (PrecisionShortfallError("x"), EXIT_PRECISION),
            (ConductorError("x"), EXIT_FAILURE),
            (MaassForgeError("x"), EXIT_FAILURE),
        ],
    )
    def test_mapping(self, exc, code):
        assert exit_code_for(exc) == code
