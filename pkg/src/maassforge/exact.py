"""Exact arithmetic for cyclotomic and real quadratic numbers.

Three immutable value types live here:

- ``Cyclotomic``: an element of Q(zeta_K), stored by its coordinates in the
  power basis after reduction modulo the K-th cyclotomic polynomial, so
  equality is coordinate equality.
- ``QuadElem``: a + b*sqrt(D) with rational a and b.
- ``LogValue``: r0*log(eps_F) + sum r_i*log|alpha_i/alpha_i'|, the exact
  carrier of holomorphic-part coefficients.

The ``ring_*`` helpers work on integer vectors of length K indexed by powers
of zeta_K (the group ring Z[Z/K]). Hot loops accumulate there and reduce to
canonical coordinates once.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Union

import mpmath
import numpy as np
import sympy
from numpy.typing import NDArray
from sympy.functions.combinatorial.numbers import legendre_symbol
from sympy.ntheory import factorint

from .errors import ConductorError, DomainError

_X = sympy.Symbol("x")

Rational = Fraction
Coeff = Union[Fraction, "Cyclotomic"]
Number = Union[int, Fraction, "Cyclotomic"]


def as_fraction(value: int | Fraction | str) -> Fraction:
    """Coerce an int, Fraction or text such as ``"3/4"`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"Expected a rational number, got {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise DomainError(f"Not a rational number: {value!r}") from exc
    raise DomainError(f"Expected a rational number, got {type(value).__name__}")


def rational_to_json(value: Fraction | int) -> dict[str, str]:
    value = Fraction(value)
    return {"n": str(value.numerator), "d": str(value.denominator)}


def rational_from_json(data: dict[str, Any]) -> Fraction:
    return Fraction(int(data["n"]), int(data["d"]))


# ---------------------------------------------------------------------------
# Cyclotomic fields
# ---------------------------------------------------------------------------


class CyclotomicField:
    """Power basis data for Q(zeta_K).

    ``reduction`` is the K x phi(K) integer matrix whose row j holds the
    coordinates of zeta_K^j, so a group-ring vector v reduces to ``v @
    reduction``.
    """

    def __init__(self, K: int):
        if K < 1:
            raise DomainError(f"Conductor must be positive, got {K}")
        poly = sympy.Poly(sympy.cyclotomic_poly(K, _X), _X)
        coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        degree = len(coeffs) - 1

        rows: list[list[int]] = []
        current = [0] * degree
        current[0] = 1
        for _ in range(K):
            rows.append(list(current))
            top = current[-1]
            current = [0] + current[:-1]
            if top:
                for i in range(degree):
                    current[i] -= top * coeffs[i]

        self._K = K
        self._degree = degree
        self._poly = tuple(coeffs)
        self._reduction = np.array(rows, dtype=object)

    @property
    def K(self) -> int:
        return self._K

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def poly(self) -> tuple[int, ...]:
        """Coefficients of Phi_K, lowest degree first."""
        return self._poly

    @property
    def reduction(self) -> NDArray[Any]:
        return self._reduction

    def reduce(self, vector: Any) -> NDArray[Any]:
        """Reduce group-ring vectors of shape (..., K) to shape (..., phi(K))."""
        arr = np.asarray(vector, dtype=object)
        if arr.shape[-1] != self._K:
            raise ConductorError(
                f"Vector of length {arr.shape[-1]} does not match conductor {self._K}"
            )
        return arr @ self._reduction


@lru_cache(maxsize=None)
def cyclotomic_field(K: int) -> CyclotomicField:
    return CyclotomicField(K)


class Cyclotomic:
    """An exact element of Q(zeta_K) in canonical reduced form."""

    __slots__ = ("_K", "_coeffs")

    def __init__(self, K: int, coeffs: Sequence[Fraction | int]):
        field = cyclotomic_field(K)
        if len(coeffs) != field.degree:
            raise DomainError(
                f"Q(zeta_{K}) has degree {field.degree}, got {len(coeffs)} coordinates"
            )
        self._K = K
        self._coeffs = tuple(Fraction(c) for c in coeffs)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rational(cls, K: int, value: Fraction | int) -> Cyclotomic:
        degree = cyclotomic_field(K).degree
        return cls(K, [Fraction(value)] + [Fraction(0)] * (degree - 1))

    @classmethod
    def zero(cls, K: int = 1) -> Cyclotomic:
        return cls.from_rational(K, 0)

    @classmethod
    def one(cls, K: int = 1) -> Cyclotomic:
        return cls.from_rational(K, 1)

    @classmethod
    def from_ring(
        cls, K: int, vector: Any, scale: Fraction | int = 1
    ) -> Cyclotomic:
        """Reduce a group-ring vector sum_j v_j zeta_K^j, times ``scale``."""
        coords = cyclotomic_field(K).reduce(vector)
        scale = Fraction(scale)
        return cls(K, [Fraction(c) * scale for c in coords])

    @classmethod
    def coerce(cls, value: Number, K: int = 1) -> Cyclotomic:
        if isinstance(value, Cyclotomic):
            return value
        return cls.from_rational(K, value)

    # -- accessors ---------------------------------------------------------

    @property
    def K(self) -> int:
        return self._K

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    def is_zero(self) -> bool:
        return not any(self._coeffs)

    def __bool__(self) -> bool:
        return any(self._coeffs)

    def is_rational(self) -> bool:
        return not any(self._coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise DomainError(f"{self!r} is not rational")
        return self._coeffs[0]

    def ring_vector(self, K: int | None = None) -> list[Fraction]:
        """Coordinates as a group-ring vector of Q(zeta_K) for K a multiple."""
        K = self._K if K is None else K
        if K % self._K:
            raise ConductorError(f"Q(zeta_{self._K}) is not contained in Q(zeta_{K})")
        step = K // self._K
        vector = [Fraction(0)] * K
        for j, c in enumerate(self._coeffs):
            vector[j * step] = c
        return vector

    def lift(self, K: int) -> Cyclotomic:
        if K == self._K:
            return self
        return Cyclotomic.from_ring(K, self.ring_vector(K))

    # -- arithmetic --------------------------------------------------------

    def _align(self, other: Cyclotomic) -> tuple[Cyclotomic, Cyclotomic]:
        if other._K == self._K:
            return self, other
        K = math.lcm(self._K, other._K)
        return self.lift(K), other.lift(K)

    def __add__(self, other: object) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.from_rational(self._K, other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._align(other)
        return Cyclotomic(a._K, [x + y for x, y in zip(a._coeffs, b._coeffs)])

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(self._K, [-c for c in self._coeffs])

    def __sub__(self, other: object) -> Cyclotomic:
        if not isinstance(other, (int, Fraction, Cyclotomic)):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: object) -> Cyclotomic:
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return (-self) + other

    def __mul__(self, other: object) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self._K, [c * other for c in self._coeffs])
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._align(other)
        K = a._K
        product = [Fraction(0)] * K
        for i, x in enumerate(a._coeffs):
            if not x:
                continue
            for j, y in enumerate(b._coeffs):
                if y:
                    product[(i + j) % K] += x * y
        return Cyclotomic.from_ring(K, product)

    __rmul__ = __mul__

    def inverse(self) -> Cyclotomic:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return Cyclotomic.from_rational(self._K, 1 / self._coeffs[0])
        num = sympy.Poly(
            [sympy.Rational(c.numerator, c.denominator) for c in reversed(self._coeffs)],
            _X,
            domain="QQ",
        )
        mod = sympy.Poly(sympy.cyclotomic_poly(self._K, _X), _X, domain="QQ")
        inv = sympy.invert(num, mod)
        coords = [Fraction(int(c.p), int(c.q)) for c in reversed(inv.all_coeffs())]
        coords += [Fraction(0)] * (len(self._coeffs) - len(coords))
        return Cyclotomic(self._K, coords)

    def __truediv__(self, other: object) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: object) -> Cyclotomic:
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self.inverse() * other

    def __pow__(self, exponent: int) -> Cyclotomic:
        base = self if exponent >= 0 else self.inverse()
        result = Cyclotomic.one(self._K)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def conjugate(self) -> Cyclotomic:
        """Complex conjugation zeta_K -> zeta_K^{-1}."""
        K = self._K
        vector = [Fraction(0)] * K
        for j, c in enumerate(self._coeffs):
            vector[(-j) % K] += c
        return Cyclotomic.from_ring(K, vector)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self._coeffs[0] == other
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._align(other)
        return a._coeffs == b._coeffs

    __hash__ = None  # type: ignore[assignment]

    def to_mpc(self) -> Any:
        """Complex value at the current mpmath precision."""
        total = mpmath.mpc(0)
        for j, c in enumerate(self._coeffs):
            if c:
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.expjpi(
                    mpmath.mpf(2 * j) / self._K
                )
        return total

    def __complex__(self) -> complex:
        with mpmath.workdps(30):
            return complex(self.to_mpc())

    def __repr__(self) -> str:
        terms = [
            f"{c}*z^{j}" if j else str(c) for j, c in enumerate(self._coeffs) if c
        ]
        return f"Cyclotomic(K={self._K}, {' + '.join(terms) or '0'})"

    def to_json(self) -> dict[str, Any]:
        return {"K": self._K, "c": [rational_to_json(c) for c in self._coeffs]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Cyclotomic:
        return cls(int(data["K"]), [rational_from_json(c) for c in data["c"]])


def coeff_to_json(value: Coeff | int) -> dict[str, Any]:
    if isinstance(value, Cyclotomic):
        return value.to_json()
    return rational_to_json(value)


def coeff_from_json(data: dict[str, Any]) -> Coeff:
    if "K" in data:
        return normalize_coeff(Cyclotomic.from_json(data))
    return rational_from_json(data)


def normalize_coeff(value: Number) -> Coeff:
    """Rational cyclotomic numbers collapse to Fractions."""
    if isinstance(value, Cyclotomic):
        return value.to_fraction() if value.is_rational() else value
    return Fraction(value)


def coeff_to_mp(value: Number) -> Any:
    if isinstance(value, Cyclotomic):
        if value.is_rational():
            value = value.to_fraction()
        else:
            return value.to_mpc()
    value = Fraction(value)
    return mpmath.mpf(value.numerator) / value.denominator


def root_exponent(x: Fraction | int, K: int) -> int:
    """The j with e(x) = zeta_K^j."""
    t = Fraction(x) * K
    if t.denominator != 1:
        raise ConductorError(f"e({x}) is not a power of zeta_{K}")
    return int(t) % K


def cyclo_root_of_unity(a: int, b: int, K: int) -> Cyclotomic:
    """e(a/b) in Q(zeta_K).

    Raises:
        ConductorError: if b does not divide K
    """
    if b <= 0:
        raise DomainError(f"Denominator must be positive, got {b}")
    if K % b:
        raise ConductorError(f"e({a}/{b}) is not in Q(zeta_{K})")
    vector = [0] * K
    vector[(a * (K // b)) % K] = 1
    return Cyclotomic.from_ring(K, vector)


# ---------------------------------------------------------------------------
# Group-ring vectors
# ---------------------------------------------------------------------------


def ring_multiply(u: NDArray[Any], v: NDArray[Any], K: int) -> NDArray[Any]:
    """Cyclic convolution along the last axis; ``v`` is a single length-K vector."""
    v = np.asarray(v)
    result = np.zeros(np.broadcast_shapes(u.shape, (K,)), dtype=np.result_type(u, v))
    for j in np.flatnonzero(v):
        result += v[j] * np.roll(u, int(j), axis=-1)
    return result


def ring_conjugate(u: NDArray[Any]) -> NDArray[Any]:
    """zeta -> zeta^{-1} along the last axis."""
    return np.roll(u[..., ::-1], 1, axis=-1)


def _split_square(n: int) -> tuple[int, int]:
    square, free = 1, 1
    for p, e in factorint(n).items():
        square *= p ** (e // 2)
        if e % 2:
            free *= p
    return square, free


def _sqrt_prime_vector(p: int, K: int) -> NDArray[np.int64]:
    vector = np.zeros(K, dtype=np.int64)
    if p == 2:
        if K % 8:
            raise ConductorError(f"sqrt(2) needs 8 | K, got K={K}")
        vector[K // 8] += 1
        vector[(-K // 8) % K] += 1
        return vector
    if K % p or (p % 4 == 3 and K % 4):
        raise ConductorError(f"sqrt({p}) is not in Q(zeta_{K})")
    for a in range(1, p):
        vector[(a * K // p) % K] += int(legendre_symbol(a, p))
    if p % 4 == 3:
        # multiply the Gauss sum i*sqrt(p) by zeta_4^{-1}
        vector = np.roll(vector, -K // 4)
    return vector


def ring_sqrt(n: int, K: int) -> tuple[NDArray[np.int64], Fraction]:
    """The positive square root of ``n`` as (group-ring vector, rational factor).

    Built from quadratic Gauss sums, so every prime dividing the squarefree
    part of ``n`` must divide K (and 4 | K or 8 | K as needed).
    """
    if n <= 0:
        raise DomainError(f"sqrt of non-positive integer {n}")
    square, free = _split_square(n)
    vector = np.zeros(K, dtype=np.int64)
    vector[0] = 1
    for p in sorted(factorint(free)):
        vector = ring_multiply(vector, _sqrt_prime_vector(p, K), K)
    return vector, Fraction(square)


def sqrt_disc(n: int, K: int) -> Cyclotomic:
    """Positive square root of ``n`` as an element of Q(zeta_K)."""
    vector, factor = ring_sqrt(n, K)
    return Cyclotomic.from_ring(K, vector, factor)


# ---------------------------------------------------------------------------
# Real quadratic numbers
# ---------------------------------------------------------------------------


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class QuadElem:
    """The number a + b*sqrt(D) of Q(sqrt(D))."""

    D: int
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def sqrt(cls, D: int) -> QuadElem:
        return cls(D, 0, 1)

    def _coerce(self, other: object) -> QuadElem | None:
        if isinstance(other, QuadElem):
            if other.D != self.D:
                raise DomainError(f"Mixed discriminants {self.D} and {other.D}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadElem(self.D, other)
        return None

    def __add__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.D, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> QuadElem:
        return QuadElem(self.D, -self.a, -self.b)

    def __sub__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.D, self.a - o.a, self.b - o.b)

    def __rsub__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(
            self.D,
            self.a * o.a + self.b * o.b * self.D,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(D))")
        p = self * o.conj()
        return QuadElem(self.D, p.a / n, p.b / n)

    def __rtruediv__(self, other: object) -> QuadElem:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: int) -> QuadElem:
        base = self if exponent >= 0 else QuadElem(self.D, 1) / self
        result = QuadElem(self.D, 1)
        e = abs(exponent)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def conj(self) -> QuadElem:
        return QuadElem(self.D, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def trace(self) -> Fraction:
        return 2 * self.a

    def sign(self) -> int:
        """Exact sign of the first real embedding (sqrt(D) > 0)."""
        sa, sb = _sign(self.a), _sign(self.b)
        if sa == 0 or sb == 0 or sa == sb:
            return sa or sb
        return sa if self.a * self.a > self.b * self.b * self.D else sb

    def conj_sign(self) -> int:
        return self.conj().sign()

    def is_totally_positive(self) -> bool:
        return self.sign() > 0 and self.conj_sign() > 0

    def ratio_at_least_one(self) -> bool:
        """Whether |x/x'| >= 1, decided exactly (x^2 - x'^2 = 4ab*sqrt(D))."""
        return self.a * self.b >= 0

    def ratio_is_one(self) -> bool:
        return self.a * self.b == 0

    def is_integral(self) -> bool:
        """Membership in the order O_D = Z + Z(D + sqrt(D))/2."""
        y = 2 * self.b
        return y.denominator == 1 and (self.a - self.b * self.D).denominator == 1

    def order_coordinates(self) -> tuple[Fraction, Fraction]:
        """(x, y) with self = x + y*(D + sqrt(D))/2."""
        y = 2 * self.b
        return self.a - self.b * self.D, y

    def _cmp(self, other: object) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare QuadElem with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other: object) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: object) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: object) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: object) -> bool:
        return self._cmp(other) >= 0

    def to_mpf(self) -> Any:
        """First embedding at the current mpmath precision."""
        return mpmath.mpf(self.a.numerator) / self.a.denominator + (
            mpmath.mpf(self.b.numerator) / self.b.denominator
        ) * mpmath.sqrt(self.D)

    def embeddings(self) -> tuple[float, float]:
        root = math.sqrt(self.D)
        a, b = float(self.a), float(self.b)
        return a + b * root, a - b * root

    def __str__(self) -> str:
        if not self.b:
            return str(self.a)
        root = f"sqrt({self.D})"
        b = "" if self.b == 1 else "-" if self.b == -1 else f"{self.b}*"
        if not self.a:
            return f"{b}{root}"
        sep = " - " if self.b < 0 else " + "
        b = b.lstrip("-")
        return f"{self.a}{sep}{b}{root}"

    def to_json(self) -> dict[str, Any]:
        return {"D": self.D, "a": rational_to_json(self.a), "b": rational_to_json(self.b)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> QuadElem:
        return cls(int(data["D"]), rational_from_json(data["a"]), rational_from_json(data["b"]))


def primitive_integral(alpha: QuadElem) -> QuadElem:
    """The positive rational multiple of ``alpha`` that is a primitive element of O_D."""
    x, y = alpha.order_coordinates()
    den = math.lcm(x.denominator, y.denominator)
    xi, yi = int(x * den), int(y * den)
    g = math.gcd(xi, yi)
    return alpha * Fraction(den, g)


# ---------------------------------------------------------------------------
# Formal logarithms
# ---------------------------------------------------------------------------


def _eps_for(D: int) -> QuadElem:
    from .quadfield import fundamental_unit

    return fundamental_unit(D)


def canonical_log_term(alpha: QuadElem) -> tuple[QuadElem, int, int]:
    """Normalize log|alpha/alpha'| = s*log|beta/beta'| + k*log(eps_F).

    beta is primitive integral, positive, with 1 <= |beta/beta'| < eps_F^2.

    Returns:
        (beta, s, k); beta == 1 means the ratio term vanishes
    """
    if alpha.norm() == 0:
        raise DomainError(f"log|a/a'| undefined for {alpha} (zero norm)")
    beta = primitive_integral(alpha)
    if beta.sign() < 0:
        beta = -beta
    s = 1
    if not beta.ratio_at_least_one():
        beta = beta.conj()
        if beta.sign() < 0:
            beta = -beta
        s = -1
    eps = _eps_for(alpha.D)
    k = 0
    while True:
        shifted = beta / eps
        if not shifted.ratio_at_least_one():
            break
        beta = shifted
        k += 2
    if beta.ratio_is_one():
        return QuadElem(alpha.D, 1), s, s * k
    return beta, s, s * k


@dataclass(frozen=True)
class LogValue:
    """eps*log(eps_F) + sum coeff*log|alpha/alpha'|, in canonical form.

    Build instances with ``LogValue.build`` (or the helpers), which merges
    terms, drops zero contributions and normalizes each alpha. Coefficients
    are Fractions, or Cyclotomic numbers for character-weighted sums.
    """

    eps: Coeff = Fraction(0)
    terms: tuple[tuple[QuadElem, Coeff], ...] = ()

    @classmethod
    def build(
        cls,
        eps: Number = 0,
        terms: Iterable[tuple[QuadElem, Number]] = (),
    ) -> LogValue:
        eps_total: Number = normalize_coeff(eps)
        merged: dict[QuadElem, Number] = {}
        D: int | None = None
        for alpha, coeff in terms:
            if coeff == 0:
                continue
            if D is None:
                D = alpha.D
            elif alpha.D != D:
                raise DomainError(f"Mixed discriminants {D} and {alpha.D} in LogValue")
            beta, s, k = canonical_log_term(alpha)
            if k:
                eps_total = eps_total + coeff * k
            if beta.b:
                merged[beta] = merged.get(beta, Fraction(0)) + coeff * s
        ordered = sorted(
            ((beta, normalize_coeff(c)) for beta, c in merged.items() if c != 0),
            key=lambda item: (item[0].a, item[0].b),
        )
        return cls(normalize_coeff(eps_total), tuple(ordered))

    @classmethod
    def zero(cls) -> LogValue:
        return cls()

    @classmethod
    def log_eps(cls, coeff: Number) -> LogValue:
        return cls.build(eps=coeff)

    @classmethod
    def log_ratio(cls, alpha: QuadElem, coeff: Number = 1) -> LogValue:
        """coeff*log|alpha/alpha'|."""
        return cls.build(terms=[(alpha, coeff)])

    @property
    def discriminant(self) -> int | None:
        return self.terms[0][0].D if self.terms else None

    def is_zero(self) -> bool:
        return self.eps == 0 and not self.terms

    def __add__(self, other: object) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        return LogValue.build(self.eps + other.eps, list(self.terms) + list(other.terms))

    def __neg__(self) -> LogValue:
        return self * -1

    def __sub__(self, other: object) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar: object) -> LogValue:
        if not isinstance(scalar, (int, Fraction, Cyclotomic)):
            return NotImplemented
        return LogValue.build(
            self.eps * scalar, [(alpha, c * scalar) for alpha, c in self.terms]
        )

    __rmul__ = __mul__

    def evaluate(self, bits: int = 256, eps_f: QuadElem | None = None) -> Any:
        if eps_f is None:
            if self.discriminant is None:
                if self.eps == 0:
                    return mpmath.mpf(0)
                raise DomainError("eps_F is required to evaluate a pure unit logarithm")
            eps_f = _eps_for(self.discriminant)
        return logvalue_eval(self, eps_f, bits)

    def equals(self, other: LogValue, eps_f: QuadElem, bits: int = 256) -> bool:
        """Numeric equality at ``bits`` precision with tolerance 2^-200."""
        diff = logvalue_eval(self - other, eps_f, max(bits, 256))
        return bool(abs(diff) < mpmath.mpf(2) ** -200)

    def __str__(self) -> str:
        parts = []
        if self.eps != 0:
            parts.append(f"({self.eps})*log(eps)")
        for alpha, c in self.terms:
            parts.append(f"({c})*log|{alpha}/conj|")
        return " + ".join(parts) or "0"

    def to_json(self) -> dict[str, Any]:
        return {
            "eps": coeff_to_json(self.eps),
            "terms": [
                {"alpha": alpha.to_json(), "r": coeff_to_json(c)} for alpha, c in self.terms
            ],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> LogValue:
        return cls.build(
            coeff_from_json(data["eps"]),
            [
                (QuadElem.from_json(t["alpha"]), coeff_from_json(t["r"]))
                for t in data["terms"]
            ],
        )


def _log_abs_ratio(alpha: QuadElem) -> Any:
    """log|alpha/alpha'| evaluated on the larger conjugate to avoid cancellation."""
    log_norm = mpmath.log(abs(mpmath.mpf(alpha.norm().numerator) / alpha.norm().denominator))
    if alpha.ratio_at_least_one():
        return 2 * mpmath.log(abs(alpha.to_mpf())) - log_norm
    return log_norm - 2 * mpmath.log(abs(alpha.conj().to_mpf()))


def logvalue_eval(value: LogValue, eps_f: QuadElem, bits: int = 256) -> Any:
    """Numeric value of ``value`` rounded to ``bits`` binary digits.

    Computed with guard bits so the returned error is below 2^(-bits+4).
    The result is an mpf, or an mpc when a coefficient is non-real.

    Raises:
        DomainError: for bits < 64 or terms over a different discriminant
    """
    if bits < 64:
        raise DomainError(f"bits must be at least 64, got {bits}")
    for alpha, _ in value.terms:
        if alpha.D != eps_f.D:
            raise DomainError(f"Term over D={alpha.D} evaluated with eps_F over D={eps_f.D}")
    guard = 32 + (len(value.terms) + 1).bit_length()
    with mpmath.workprec(bits + guard):
        total = coeff_to_mp(value.eps) * mpmath.log(eps_f.to_mpf())
        for alpha, c in value.terms:
            total += coeff_to_mp(c) * _log_abs_ratio(alpha)
        if isinstance(total, mpmath.mpc) and total.imag == 0:
            total = total.real
    with mpmath.workprec(bits):
        return +total
