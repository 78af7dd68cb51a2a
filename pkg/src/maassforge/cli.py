"""Command line interface.

Every subcommand builds a ``JobSpec``, validates it completely, and only then
computes. Results go to stdout or ``--out`` as JSON (exact values plus decimal
renderings) or as CSV rows.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import mpmath
from pydantic import (
    BaseModel,
    ConfigDict,
    ValidationError,
    field_validator,
    model_validator,
)

from .config import Settings
from .errors import (
    ConsistencyError,
    DomainError,
    MaassForgeError,
    PrecisionShortfallError,
    UsageError,
)
from .exact import LogValue, QuadElem, as_fraction
from .log import LogLevel, configure_logging, get_logger
from .mockform import MockFormCache, holo_coefficient, ttheta_plus, vartheta
from .qseries import QSeries, VVForm, mock_theta_plus
from .quadfield import IdealLattice, fundamental_unit
from .scalarform import (
    RayCharacter,
    bold_c_phi,
    c_plus_phi,
    f_phi,
    kappa_bound,
    lift_forms,
    ray_characters,
    unit_ambiguity,
)
from .verify import all_passed, run_checks

logger = get_logger(__name__)

Command = Literal[
    "unit", "vartheta", "mock-theta", "ttheta", "coeff", "scalar-coeff", "verify-paper"
]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONSISTENCY = 3
EXIT_PRECISION = 4

LATTICE_COMMANDS = {"vartheta", "ttheta", "coeff"}


class JobSpec(BaseModel):
    """A fully validated request for one subcommand."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    command: Command
    D: int | None = None
    M: int = 1
    ideal: Path | None = None
    N: int | None = None
    h: str | None = None
    n: Fraction | None = None
    sign: Literal[1, -1] = 1
    character: Path | None = None
    modulus: str | None = None
    index: int = 0
    prec: Fraction = Fraction(4)
    bits: int = 256
    workers: int = 1
    digits: int = 20
    cache_dir: Path | None = None
    out: Path | None = None
    format: Literal["json", "csv"] = "json"
    log_level: LogLevel = "INFO"
    quick: bool = False

    @field_validator("n", "prec", mode="before")
    @classmethod
    def _parse_rational(cls, value: Any) -> Any:
        if value is None or isinstance(value, Fraction):
            return value
        return as_fraction(value if isinstance(value, int) else str(value))

    @field_validator("M", "workers", "digits")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be positive, got {value}")
        return value

    @model_validator(mode="after")
    def _check_complete(self) -> JobSpec:
        missing = []
        if self.command == "unit" and self.D is None:
            missing.append("--D")
        if self.command in LATTICE_COMMANDS and self.D is None and self.ideal is None:
            missing.append("--D or --ideal")
        if self.command == "mock-theta":
            missing += [f for f, v in (("--N", self.N), ("--h", self.h)) if v is None]
        if self.command == "coeff":
            missing += [f for f, v in (("--h", self.h), ("--n", self.n)) if v is None]
        if self.command == "scalar-coeff":
            if self.character is None and (self.D is None or self.modulus is None):
                missing.append("--character or --D with --modulus")
            if self.n is None:
                missing.append("--n")
        if missing:
            raise ValueError(f"{self.command} needs {', '.join(missing)}")
        if self.prec <= 0:
            raise ValueError(f"--prec must be positive, got {self.prec}")
        return self

    @classmethod
    def from_args(cls, args: argparse.Namespace, settings: Settings) -> JobSpec:
        """Merge parsed flags over ``settings``.

        Raises:
            UsageError: if the flags do not describe a complete job
        """
        values = {k: v for k, v in vars(args).items() if v is not None}
        no_cache = values.pop("no_cache", False)
        values.setdefault("bits", settings.bits)
        values.setdefault("workers", settings.workers)
        values.setdefault("log_level", settings.log_level)
        values.setdefault("cache_dir", settings.cache_dir)
        if no_cache:
            values["cache_dir"] = None
        try:
            return cls.model_validate(values)
        except (ValidationError, DomainError) as exc:
            raise UsageError(str(exc)) from exc

    def cache(self) -> MockFormCache | None:
        return None if self.cache_dir is None else MockFormCache(self.cache_dir)


@dataclass
class Artifact:
    """What a subcommand produced: a JSON payload and its flat CSV rows."""

    payload: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)
    exit_code: int = EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def parse_element(D: int, text: str) -> QuadElem:
    """``"a,b"`` -> a + b*sqrt(D) with rational a and b."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise UsageError(f"Expected 'a,b' for a + b*sqrt(D), got {text!r}")
    return QuadElem(D, as_fraction(parts[0]), as_fraction(parts[1]))


def parse_modulus(D: int, text: str) -> tuple[QuadElem, QuadElem]:
    """``"a,b;c,d"`` -> the Z-basis (a + b*sqrt(D), c + d*sqrt(D)) of an ideal."""
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError(f"Expected 'a,b;c,d' for a modulus basis, got {text!r}")
    return parse_element(D, parts[0]), parse_element(D, parts[1])


def _read_json(path: Path) -> dict[str, Any]:
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"Cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path} does not hold a JSON object")
    return data


def lattice_for(job: JobSpec) -> IdealLattice:
    if job.ideal is not None:
        try:
            return IdealLattice.from_json(_read_json(job.ideal))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"Malformed lattice spec {job.ideal}: {exc}") from exc
    assert job.D is not None
    return IdealLattice.from_order(job.D, job.M)


def character_for(job: JobSpec) -> RayCharacter:
    if job.character is not None:
        try:
            return RayCharacter.from_json(_read_json(job.character))
        except (KeyError, TypeError) as exc:
            raise UsageError(
                f"Malformed character spec {job.character}: {exc}"
            ) from exc
    assert job.D is not None and job.modulus is not None
    characters = ray_characters(job.D, parse_modulus(job.D, job.modulus))
    if not 0 <= job.index < len(characters):
        raise UsageError(
            f"--index {job.index} out of range: {len(characters)} characters "
            f"for D={job.D}, modulus {job.modulus}"
        )
    return characters[job.index]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", help="coefficients of q^n are computed for n < PREC")
    common.add_argument("--bits", type=int, help="working precision for logarithms")
    common.add_argument("--digits", type=int, help="decimal digits shown for numerics")
    common.add_argument("--workers", type=int, help="threads for the coset sum")
    common.add_argument("--cache-dir", type=Path, help="directory of cached mock forms")
    common.add_argument("--no-cache", action="store_true", help="bypass the cache")
    common.add_argument("--out", type=Path, help="write the result here, not stdout")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    )

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--D", type=int, help="discriminant; the ideal is O_D")
    lattice.add_argument("--M", type=int, help="level multiplier M of L_{a,M}")
    lattice.add_argument("--ideal", type=Path, help="lattice spec JSON")

    parser = argparse.ArgumentParser(
        prog="maassforge",
        description="Holomorphic parts of weight one harmonic Maass forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    unit = sub.add_parser(
        "unit", parents=[common], help="fundamental unit of Q(sqrt(D))"
    )
    unit.add_argument("--D", type=int)

    theta = sub.add_parser(
        "vartheta", parents=[common, lattice], help="cusp form theta(tau, +-L)"
    )
    theta.add_argument("--sign", type=int, choices=[1, -1], help="+1 for L, -1 for -L")

    mock = sub.add_parser(
        "mock-theta", parents=[common], help="weight 1/2 mock theta function"
    )
    mock.add_argument("--N", type=int)
    mock.add_argument("--h", help="coset h in (1/N)Z, e.g. 1/2")

    sub.add_parser("ttheta", parents=[common, lattice], help="Theta+(tau, L)")

    coeff = sub.add_parser("coeff", parents=[common, lattice], help="c+_L(n, h)")
    coeff.add_argument("--h", help="coset representative 'a,b' = a + b*sqrt(D)")
    coeff.add_argument("--n", help="exponent n (rational)")

    scalar = sub.add_parser("scalar-coeff", parents=[common], help="c+_phi(n)")
    scalar.add_argument("--character", type=Path, help="character spec JSON")
    scalar.add_argument("--D", type=int)
    scalar.add_argument("--modulus", help="ideal basis 'a,b;c,d'")
    scalar.add_argument("--index", type=int, help="which character of the modulus")
    scalar.add_argument("--n", help="positive integer n")

    verify = sub.add_parser(
        "verify-paper", parents=[common], help="run the reference checks"
    )
    verify.add_argument(
        "--quick", action="store_true", help="skip the high precision D=12 checks"
    )
    return parser


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _nstr(value: Any, digits: int) -> str:
    return str(mpmath.nstr(value, digits))


def _series_rows(series: QSeries, **labels: Any) -> list[dict[str, Any]]:
    return [
        {**labels, "exponent": str(e), "coefficient": str(c)} for e, c in series.terms()
    ]


def _form_rows(lattice: IdealLattice, form: VVForm) -> list[dict[str, Any]]:
    rows = []
    for h, comp in enumerate(form.components):
        rows += _series_rows(comp, h=h, coset=str(lattice.group.reps[h]))
    return rows


def _log_value(value: LogValue, eps_f: QuadElem, job: JobSpec) -> dict[str, Any]:
    with mpmath.workprec(job.bits):
        numeric = value.evaluate(job.bits, eps_f)
        return {
            "exact": value.to_json(),
            "text": str(value),
            "numeric": _nstr(numeric, job.digits),
        }


def run_unit(job: JobSpec) -> Artifact:
    assert job.D is not None
    eps = fundamental_unit(job.D)
    with mpmath.workprec(job.bits):
        numeric = _nstr(eps.to_mpf(), job.digits)
    norm = str(eps.norm())
    payload = {"D": job.D, "epsF": eps.to_json(), "norm": norm, "numeric": numeric}
    row = {
        "D": job.D,
        "a": str(eps.a),
        "b": str(eps.b),
        "norm": norm,
        "numeric": numeric,
    }
    return Artifact(payload, [row])


def run_vartheta(job: JobSpec) -> Artifact:
    lattice = lattice_for(job)
    form = vartheta(lattice, job.sign, job.prec)
    payload = {"lattice": lattice.to_json(), "sign": job.sign, "form": form.to_json()}
    return Artifact(payload, _form_rows(lattice, form))


def run_mock_theta(job: JobSpec) -> Artifact:
    assert job.N is not None and job.h is not None
    series = mock_theta_plus(job.N, job.h, job.prec)
    payload = {"N": job.N, "h": job.h, "series": series.to_json()}
    return Artifact(payload, _series_rows(series, N=job.N, h=job.h))


def run_ttheta(job: JobSpec) -> Artifact:
    lattice = lattice_for(job)
    form = ttheta_plus(lattice, job.prec, workers=job.workers, cache=job.cache())
    return Artifact(form.to_json(), _form_rows(lattice, form.form))


def run_coeff(job: JobSpec) -> Artifact:
    assert job.h is not None and job.n is not None
    lattice = lattice_for(job)
    h = parse_element(lattice.D, job.h)
    if not lattice.in_dual(h):
        raise UsageError(f"--h {h} is not in the dual lattice of {lattice}")
    prec = max(job.prec, job.n + 1)
    form = ttheta_plus(lattice, prec, workers=job.workers, cache=job.cache())
    result = holo_coefficient(lattice, h, job.n, form)
    value = _log_value(result.value, fundamental_unit(lattice.D), job)
    payload = {
        "lattice": lattice.to_json(),
        "coset": str(h),
        **result.to_json(),
        "value": value,
    }
    row = {
        "h": result.h,
        "coset": str(h),
        "n": str(result.n),
        "mock": str(result.mock_coefficient),
        "orbits": result.orbit_count,
        "value": value["text"],
        "numeric": value["numeric"],
    }
    return Artifact(payload, [row])


def run_scalar_coeff(job: JobSpec) -> Artifact:
    assert job.n is not None
    if job.n.denominator != 1 or job.n < 1:
        raise UsageError(f"--n must be a positive integer, got {job.n}")
    n = int(job.n)
    character = character_for(job)
    eps_f = fundamental_unit(character.D)
    forms = lift_forms(character, n + 1, workers=job.workers, cache=job.cache())
    c_plus = c_plus_phi(character, n, forms)
    bold = bold_c_phi(character, n)
    kappa = kappa_bound(character.M)
    residual = unit_ambiguity(c_plus - bold, character.D, kappa, job.bits)
    if residual is None:
        raise ConsistencyError(
            f"c+_phi({n}) - bold c_phi({n}) is not in (1/{kappa})Z[phi] log eps_F"
        )
    eigen = f_phi(character, n + 1).coefficient(n)
    payload = {
        "character": character.to_json(),
        "n": n,
        "fPhi": str(eigen),
        "cPlus": _log_value(c_plus, eps_f, job),
        "boldC": _log_value(bold, eps_f, job),
        "kappa": kappa,
        "residual": [str(x) for x in residual],
    }
    row = {
        "n": n,
        "fPhi": str(eigen),
        "cPlus": payload["cPlus"]["numeric"],
        "boldC": payload["boldC"]["numeric"],
        "residual": " ".join(str(x) for x in residual),
    }
    return Artifact(payload, [row])


def run_verify(job: JobSpec) -> Artifact:
    results = run_checks(
        quick=job.quick, bits=job.bits, workers=job.workers, cache=job.cache()
    )
    passed = all_passed(results)
    payload = {"passed": passed, "checks": [r.to_json() for r in results]}
    rows = [{**r.to_json(), "diffs": "; ".join(r.diffs)} for r in results]
    return Artifact(payload, rows, EXIT_OK if passed else EXIT_CONSISTENCY)


HANDLERS = {
    "unit": run_unit,
    "vartheta": run_vartheta,
    "mock-theta": run_mock_theta,
    "ttheta": run_ttheta,
    "coeff": run_coeff,
    "scalar-coeff": run_scalar_coeff,
    "verify-paper": run_verify,
}


# ---------------------------------------------------------------------------
# Output and exit codes
# ---------------------------------------------------------------------------


def render(artifact: Artifact, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(artifact.payload, indent=2, sort_keys=True) + "\n"
    buffer = io.StringIO()
    if artifact.rows:
        writer = csv.DictWriter(
            buffer, fieldnames=list(artifact.rows[0]), lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(artifact.rows)
    return buffer.getvalue()


def emit(artifact: Artifact, job: JobSpec) -> None:
    text = render(artifact, job.format)
    if job.out is None:
        sys.stdout.write(text)
        return
    job.out.parent.mkdir(parents=True, exist_ok=True)
    job.out.write_text(text)
    logger.info(f"Wrote {job.out}")


def exit_code_for(exc: MaassForgeError) -> int:
    if isinstance(exc, (UsageError, DomainError)):
        return EXIT_USAGE
    if isinstance(exc, ConsistencyError):
        return EXIT_CONSISTENCY
    if isinstance(exc, PrecisionShortfallError):
        return EXIT_PRECISION
    return EXIT_FAILURE


def run(job: JobSpec) -> int:
    """Execute ``job``, write its artifact and return the process exit status."""
    try:
        artifact = HANDLERS[job.command](job)
    except ConsistencyError as exc:
        logger.exception(f"Internal consistency failure in {job.command}: {exc}")
        return EXIT_CONSISTENCY
    except MaassForgeError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exit_code_for(exc)
    emit(artifact, job)
    return artifact.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings()
        job = JobSpec.from_args(args, settings)
    except (ValidationError, UsageError) as exc:
        configure_logging("ERROR")
        logger.error(f"Invalid parameters: {exc}")
        return EXIT_USAGE
    configure_logging(job.log_level)
    logger.debug(f"Job: {job}")
    return run(job)
