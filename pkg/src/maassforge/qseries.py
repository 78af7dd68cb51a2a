"""Truncated q-expansions with exact coefficients.

A ``QSeries`` holds coefficients on the grid lead, lead + 1/den,
lead + 2/den, ... strictly below ``prec``. Coefficients are Fractions or
Cyclotomic numbers. Arithmetic tracks precision pessimistically: a product
is only known up to min(a.prec + b.valuation, b.prec + a.valuation).

The module also builds the classical series used by the theta lifts: eta
powers, E2, unary theta series of weight 1/2 and 3/2, and the holomorphic
parts of the weight 1/2 mock theta functions.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

from sympy import divisor_sigma

from .errors import DomainError, PrecisionShortfallError
from .exact import (
    Cyclotomic,
    Number,
    as_fraction,
    coeff_from_json,
    coeff_to_json,
    cyclo_root_of_unity,
    normalize_coeff,
    rational_from_json,
    rational_to_json,
)
from .log import get_logger

logger = get_logger(__name__)


class QSeries:
    """A truncated formal series sum c_k q^(lead + k/den), known below ``prec``."""

    __slots__ = ("_lead", "_den", "_coeffs", "_prec")

    def __init__(
        self,
        lead: Fraction | int,
        den: int,
        coeffs: Iterable[Number],
        prec: Fraction | int,
    ):
        if den < 1:
            raise DomainError(f"den must be positive, got {den}")
        lead, prec = Fraction(lead), Fraction(prec)
        values = [normalize_coeff(c) for c in coeffs]
        limit = max(0, math.ceil((prec - lead) * den))
        del values[limit:]
        start = 0
        while start < len(values) and not values[start]:
            start += 1
        end = len(values)
        while end > start and not values[end - 1]:
            end -= 1
        self._lead = lead + Fraction(start, den) if start < end else Fraction(0)
        self._den = den if start < end else 1
        self._coeffs = tuple(values[start:end])
        self._prec = prec

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, prec: Fraction | int) -> QSeries:
        return cls(0, 1, (), prec)

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[Fraction, Number] | Iterable[tuple[Fraction, Number]],
        prec: Fraction | int,
    ) -> QSeries:
        """Build a series from (exponent, coefficient) pairs; pairs at or above prec are dropped."""
        prec = Fraction(prec)
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Fraction, Number] = {}
        for e, c in items:
            e = Fraction(e)
            if e < prec and c:
                merged[e] = merged.get(e, 0) + c
        merged = {e: c for e, c in merged.items() if c}
        if not merged:
            return cls.zero(prec)
        lead = min(merged)
        den = math.lcm(*((e - lead).denominator for e in merged))
        coeffs: list[Number] = [0] * (int((max(merged) - lead) * den) + 1)
        for e, c in merged.items():
            coeffs[int((e - lead) * den)] = c
        return cls(lead, den, coeffs, prec)

    # -- accessors ---------------------------------------------------------

    @property
    def lead(self) -> Fraction:
        return self._lead

    @property
    def den(self) -> int:
        return self._den

    @property
    def coeffs(self) -> tuple[Any, ...]:
        return self._coeffs

    @property
    def prec(self) -> Fraction:
        return self._prec

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def valuation(self) -> Fraction:
        """Exponent of the first nonzero term, or prec for a zero series."""
        return self._lead if self._coeffs else self._prec

    def terms(self) -> Iterator[tuple[Fraction, Any]]:
        for k, c in enumerate(self._coeffs):
            if c:
                yield self._lead + Fraction(k, self._den), c

    def coefficient(self, exponent: Fraction | int | str) -> Any:
        """The coefficient of q^exponent.

        Raises:
            PrecisionShortfallError: if exponent >= prec
        """
        exponent = as_fraction(exponent)
        if exponent >= self._prec:
            raise PrecisionShortfallError(
                f"Coefficient of q^{exponent} requested from a series known below q^{self._prec}"
            )
        k = (exponent - self._lead) * self._den
        if k.denominator != 1 or k < 0 or k >= len(self._coeffs):
            return Fraction(0)
        return self._coeffs[int(k)]

    __getitem__ = coefficient

    def truncate(self, prec: Fraction | int) -> QSeries:
        return QSeries(self._lead, self._den, self._coeffs, min(self._prec, Fraction(prec)))

    def map_coefficients(self, func: Callable[[Any], Number]) -> QSeries:
        return QSeries(self._lead, self._den, [func(c) for c in self._coeffs], self._prec)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: object) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        prec = min(self._prec, other._prec)
        terms: dict[Fraction, Number] = {}
        for e, c in self.terms():
            terms[e] = c
        for e, c in other.terms():
            terms[e] = terms.get(e, 0) + c
        return QSeries.from_terms(terms, prec)

    def __neg__(self) -> QSeries:
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other: object) -> QSeries:
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: object) -> QSeries:
        if isinstance(other, (int, Fraction, Cyclotomic)):
            return self.map_coefficients(lambda c: c * other)
        if not isinstance(other, QSeries):
            return NotImplemented
        prec = min(self._prec + other.valuation, other._prec + self.valuation)
        if self.is_zero() or other.is_zero():
            return QSeries.zero(prec)
        den = math.lcm(self._den, other._den)
        sa, sb = den // self._den, den // other._den
        lead = self._lead + other._lead
        size = max(0, math.ceil((prec - lead) * den))
        out: list[Number] = [0] * size
        # sparse supports; theta factors are mostly zero on a fine grid
        xs = [(i * sa, x) for i, x in enumerate(self._coeffs) if x]
        ys = [(j * sb, y) for j, y in enumerate(other._coeffs) if y]
        for ii, x in xs:
            if ii >= size:
                break
            for jj, y in ys:
                k = ii + jj
                if k >= size:
                    break
                out[k] = out[k] + x * y
        return QSeries(lead, den, out, prec)

    def __rmul__(self, other: object) -> QSeries:
        if isinstance(other, (int, Fraction, Cyclotomic)):
            return self * other
        return NotImplemented

    def inverse(self) -> QSeries:
        """The power-series inverse.

        Raises:
            DomainError: if the series is zero
        """
        if self.is_zero():
            raise DomainError("Cannot invert a zero series")
        v = self._lead
        prec = self._prec - 2 * v
        size = max(0, math.ceil((prec + v) * self._den))
        a = list(self._coeffs) + [0] * max(0, size - len(self._coeffs))
        inv_a0 = 1 / a[0]
        b: list[Number] = []
        for k in range(size):
            if k == 0:
                b.append(inv_a0)
                continue
            total: Number = 0
            for j in range(1, min(k, len(self._coeffs) - 1) + 1):
                if a[j]:
                    total = total + a[j] * b[k - j]
            b.append(-total * inv_a0)
        return QSeries(-v, self._den, b, prec)

    def shift(self, exponent: Fraction | int) -> QSeries:
        """Multiply by q^exponent."""
        exponent = Fraction(exponent)
        return QSeries(self._lead + exponent, self._den, self._coeffs, self._prec + exponent)

    def rescale(self, factor: Fraction | int, twist: Fraction | int = 0) -> QSeries:
        """Replace c*q^x by c*e(twist*x)*q^(factor*x)."""
        factor, twist = Fraction(factor), Fraction(twist)
        if factor <= 0:
            raise DomainError(f"Exponent scale factor must be positive, got {factor}")
        terms = list(self.terms())
        K = math.lcm(1, *((twist * e).denominator for e, _ in terms))
        scaled: dict[Fraction, Number] = {}
        for e, c in terms:
            phase = twist * e
            if phase.denominator <= 2:
                c = c * (1 if phase.numerator % 2 == 0 or phase.denominator == 1 else -1)
            else:
                c = cyclo_root_of_unity(phase.numerator, phase.denominator, K) * c
            scaled[factor * e] = c
        return QSeries.from_terms(scaled, self._prec * factor)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        if self._prec != other._prec:
            return False
        return list(self.terms()) == list(other.terms())

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        shown = [f"({c})*q^{e}" for e, c in list(self.terms())[:6]]
        more = " + ..." if len(list(self.terms())) > 6 else ""
        body = " + ".join(shown) or "0"
        return f"QSeries({body}{more} + O(q^{self._prec}))"

    def to_json(self) -> dict[str, Any]:
        return {
            "den": self._den,
            "lead": rational_to_json(self._lead),
            "prec": rational_to_json(self._prec),
            "coeffs": [coeff_to_json(c) for c in self._coeffs],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> QSeries:
        return cls(
            rational_from_json(data["lead"]),
            int(data["den"]),
            [coeff_from_json(c) for c in data["coeffs"]],
            rational_from_json(data["prec"]),
        )


def substitute_cusp(s: QSeries, n_gamma: int, b: int, N: int) -> QSeries:
    """The series at tau_gamma = (N_gamma*tau + b)/(N/N_gamma).

    Each c*q^x becomes c*e(x*b*N_gamma/N)*q^(x*N_gamma^2/N).
    """
    if N % n_gamma:
        raise DomainError(f"N_gamma={n_gamma} does not divide N={N}")
    return s.rescale(Fraction(n_gamma * n_gamma, N), Fraction(b * n_gamma, N))


@dataclass(frozen=True)
class VVForm:
    """A vector of q-series indexed by a finite group."""

    components: tuple[QSeries, ...]
    weight: Fraction
    rep_sign: int
    group: Any = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.components)

    def component(self, index: int) -> QSeries:
        return self.components[index]

    @property
    def prec(self) -> Fraction:
        return min(c.prec for c in self.components)

    def coefficient(self, index: int, exponent: Fraction | int | str) -> Any:
        return self.components[index].coefficient(exponent)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: object) -> VVForm:
        if not isinstance(other, VVForm):
            return NotImplemented
        if len(other) != len(self):
            raise DomainError("Vector-valued forms of different dimension")
        return VVForm(
            tuple(a + b for a, b in zip(self.components, other.components)),
            self.weight,
            self.rep_sign,
            self.group,
        )

    def __mul__(self, scalar: object) -> VVForm:
        if not isinstance(scalar, (int, Fraction, Cyclotomic)):
            return NotImplemented
        return VVForm(
            tuple(c * scalar for c in self.components), self.weight, self.rep_sign, self.group
        )

    __rmul__ = __mul__

    def truncate(self, prec: Fraction | int) -> VVForm:
        return VVForm(
            tuple(c.truncate(prec) for c in self.components),
            self.weight,
            self.rep_sign,
            self.group,
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "weight": rational_to_json(self.weight),
            "repSign": self.rep_sign,
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], group: Any = None) -> VVForm:
        return cls(
            tuple(QSeries.from_json(c) for c in data["components"]),
            rational_from_json(data["weight"]),
            int(data["repSign"]),
            group,
        )


# ---------------------------------------------------------------------------
# Classical series
# ---------------------------------------------------------------------------


def _euler_product_power(k: int, size: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n)^k below q^size."""
    coeffs = [0] * size
    if size:
        coeffs[0] = 1
    for n in range(1, size):
        for _ in range(abs(k)):
            if k > 0:
                for i in range(size - 1, n - 1, -1):
                    coeffs[i] -= coeffs[i - n]
            else:
                for i in range(n, size):
                    coeffs[i] += coeffs[i - n]
    return coeffs


def eta_power(k: int, prec: Fraction | int) -> QSeries:
    """eta(tau)^k = q^(k/24) prod (1 - q^n)^k, known below q^prec."""
    prec = Fraction(prec)
    lead = Fraction(k, 24)
    size = max(0, math.ceil(prec - lead))
    return QSeries(lead, 1, _euler_product_power(k, size), prec)


def eta3(prec: Fraction | int) -> QSeries:
    """eta^3 = sum_{k>=0} (-1)^k (2k+1) q^((2k+1)^2/8)."""
    prec = Fraction(prec)
    terms = {}
    k = 0
    while Fraction((2 * k + 1) ** 2, 8) < prec:
        terms[Fraction((2 * k + 1) ** 2, 8)] = (-1) ** k * (2 * k + 1)
        k += 1
    return QSeries.from_terms(terms, prec)


def eisenstein_e2(prec: Fraction | int) -> QSeries:
    """E2 = 1 - 24 sum sigma_1(n) q^n."""
    prec = Fraction(prec)
    size = max(0, math.ceil(prec))
    coeffs = [1] + [-24 * int(divisor_sigma(n, 1)) for n in range(1, size)]
    return QSeries(0, 1, coeffs[:size], prec)


def _coset_range(N: Fraction, h: Fraction, bound: float) -> range:
    """Integers k with |N*k + h| possibly below ``bound``."""
    lo = math.floor((-bound - float(h)) / float(N)) - 1
    hi = math.ceil((bound - float(h)) / float(N)) + 1
    return range(lo, hi + 1)


def theta_half(
    N: Fraction | int, h: Fraction | int | str, prec: Fraction | int, radicand: int = 1
) -> QSeries:
    """sum_{r in N*Z + h} q^(radicand * r^2 / 2)."""
    N, h, prec = Fraction(N), as_fraction(h), Fraction(prec)
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    bound = math.sqrt(2 * max(float(prec), 0) / radicand) + 1
    terms: dict[Fraction, Number] = {}
    for k in _coset_range(N, h, bound):
        r = N * k + h
        e = radicand * r * r / 2
        if e < prec:
            terms[e] = terms.get(e, 0) + 1
    return QSeries.from_terms(terms, prec)


def theta_three_half(N: Fraction | int, h: Fraction | int | str, prec: Fraction | int) -> QSeries:
    """sum_{r in N*Z + h} r q^(r^2 / 2)."""
    N, h, prec = Fraction(N), as_fraction(h), Fraction(prec)
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    bound = math.sqrt(2 * max(float(prec), 0)) + 1
    terms: dict[Fraction, Number] = {}
    for k in _coset_range(N, h, bound):
        r = N * k + h
        e = r * r / 2
        if e < prec:
            terms[e] = terms.get(e, 0) + r
    return QSeries.from_terms(terms, prec)


def f2_series(prec: Fraction | int) -> QSeries:
    """sum over b > a > 0 with b - a odd of a*(-1)^b q^(ab/2)."""
    prec = Fraction(prec)
    terms: dict[Fraction, Number] = {}
    a = 1
    while Fraction(a * (a + 1), 2) < prec:
        b = a + 1
        while Fraction(a * b, 2) < prec:
            e = Fraction(a * b, 2)
            terms[e] = terms.get(e, 0) + a * (-1) ** b
            b += 2
        a += 1
    return QSeries.from_terms(terms, prec)


@lru_cache(maxsize=4096)
def _mock_theta_cached(N: int, h: Fraction, prec: Fraction) -> QSeries:
    inner = prec + Fraction(1, 8)
    terms: dict[Fraction, Number] = {}

    if h.denominator == 2:
        # e(h/2)/(12Ni) with h = a + 1/2 equals (-1)^a/(12N)
        a = int(h - Fraction(1, 2))
        weight = Fraction((-1) ** a, 12 * N)
        for e, c in eisenstein_e2(inner).terms():
            terms[e] = terms.get(e, 0) + weight * c

    # sum over r in N*Z + h, r != 0, of sgn(r) sum_{m > |r|} (m - |r|)(-1)^(m - 1/2) q^((m^2 - r^2)/2)
    radius = N * inner + N + 1
    for k in _coset_range(Fraction(N), h, float(radius)):
        r = N * k + h
        if r == 0:
            continue
        s, ar = (1 if r > 0 else -1), abs(r)
        m = Fraction(math.floor(ar + Fraction(1, 2)), 1) + Fraction(1, 2)
        if m <= ar:
            m += 1
        while (m * m - r * r) / 2 < inner:
            e = (m * m - r * r) / 2
            sign = 1 if int(m - Fraction(1, 2)) % 2 == 0 else -1
            terms[e] = terms.get(e, 0) + s * sign * (m - ar)
            m += 1

    numerator = QSeries.from_terms(terms, inner)
    inverse_cube = QSeries(0, 1, _euler_product_power(-3, math.ceil(inner)), inner)
    return (numerator * inverse_cube).shift(Fraction(-1, 8)).truncate(prec)


def mock_theta_plus(N: int, h: Fraction | int | str, prec: Fraction | int) -> QSeries:
    """Holomorphic part of the weight 1/2 mock theta function for P_N at coset h.

    The series is [h in Z+1/2] e(h/2)/(12Ni) E2/eta^3 plus, for every
    r in N*Z + h, sgn(r)/eta^3 * sum_{m in Z+1/2, m > |r|} (m - |r|)
    (-1)^(m - 1/2) q^((m^2 - r^2)/2).

    Raises:
        DomainError: if N is not a positive even integer or h is not in (1/N)Z
    """
    if N <= 0 or N % 2:
        raise DomainError(f"Mock theta functions need a positive even N, got {N}")
    h = as_fraction(h)
    if (h * N).denominator != 1:
        raise DomainError(f"h={h} is not in (1/{N})Z")
    return _mock_theta_cached(N, h % N, Fraction(prec))
