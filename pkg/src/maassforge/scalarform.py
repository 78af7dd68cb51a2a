"""Ray class characters and the scalar weight one forms attached to them.

Everything here assumes F = Q(sqrt(D)) has class number one, so the ideal
sum defining f_phi runs over principal ideals (lambda) and the only lattice
needed is L = L_{d,M}, M = Nm(m). Characters are described by their finite
part phi_f on (O/m)^x; the sign at the first real place is fixed by
phi((mu)) = phi_f(mu) * sgn(mu).
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any

import mpmath
import sympy

from .errors import DomainError, PrecisionShortfallError
from .exact import (
    Coeff,
    Cyclotomic,
    LogValue,
    Number,
    QuadElem,
    coeff_to_mp,
    cyclo_root_of_unity,
    normalize_coeff,
)
from .log import get_logger
from .mockform import (
    MockFormCache,
    MockPlusForm,
    holo_coefficient,
    ttheta_plus,
    vartheta,
)
from .qseries import QSeries
from .quadfield import (
    IdealLattice,
    ResidueRing,
    discriminant_kernel,
    fundamental_unit,
    kronecker_chi,
    principal_generators,
)
from .weilrep import c_am, c_phi, psi_index

logger = get_logger(__name__)

MAX_RESIDUE_RING = 10_000
MAX_LIFT_GROUP = 40_000


# ---------------------------------------------------------------------------
# Class number
# ---------------------------------------------------------------------------


def check_class_number_one(D: int) -> None:
    """Verify h(F) = 1 by finding generators for the primes below the Minkowski bound.

    Raises:
        DomainError: if a prime of norm p <= sqrt(D)/2 has no principal generator
    """
    for p in sympy.primerange(2, math.isqrt(D // 4) + 1):
        p = int(p)
        if kronecker_chi(D, p) == -1:
            continue
        if not principal_generators(D, p):
            raise DomainError(
                f"Q(sqrt({D})) has no element of norm +-{p}; class number is not one"
            )
    logger.debug(f"Class number one verified for D={D}")


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------


class UnitGroup:
    """(O/m)^x with generators, discrete logarithms and the relations between them.

    Generators are chosen greedily by decreasing order. Every unit gets an
    exponent vector from a breadth-first walk, and each step x -> x*g_i that
    closes a cycle contributes a relation vector.
    """

    def __init__(self, ring: ResidueRing):
        if ring.order > MAX_RESIDUE_RING:
            raise DomainError(
                f"|O/m| = {ring.order} exceeds the enumeration limit {MAX_RESIDUE_RING}"
            )
        self._ring = ring
        one = ring.index_of(QuadElem(ring.D, 1))
        self._one = one
        units = ring.units
        orders = {u: self._element_order(u) for u in units}

        generators: list[int] = []
        span = {one}
        for u in sorted(units, key=lambda x: (-orders[x], x)):
            if u in span:
                continue
            generators.append(u)
            span = self._close(span, u)
            if len(span) == len(units):
                break
        self._generators = tuple(generators)
        self._orders = tuple(orders[g] for g in generators)

        logs: dict[int, tuple[int, ...]] = {one: (0,) * len(generators)}
        relations: set[tuple[int, ...]] = set()
        queue = deque([one])
        while queue:
            x = queue.popleft()
            for i, g in enumerate(generators):
                y = ring.mul(x, g)
                step = tuple(e + (1 if j == i else 0) for j, e in enumerate(logs[x]))
                if y not in logs:
                    logs[y] = step
                    queue.append(y)
                else:
                    relation = tuple(a - b for a, b in zip(step, logs[y]))
                    if any(relation):
                        relations.add(relation)
        self._logs = logs
        self._relations = tuple(sorted(relations))
        logger.debug(
            f"(O/m)^x for {ring}: order {len(units)}, generator orders {self._orders}, "
            f"{len(self._relations)} relations"
        )

    def _element_order(self, u: int) -> int:
        k, x = 1, u
        while x != self._one:
            x = self._ring.mul(x, u)
            k += 1
        return k

    def _close(self, span: set[int], g: int) -> set[int]:
        result = set(span)
        frontier = list(span)
        while frontier:
            nxt = []
            for x in frontier:
                y = self._ring.mul(x, g)
                if y not in result:
                    result.add(y)
                    nxt.append(y)
            frontier = nxt
        return result

    @property
    def ring(self) -> ResidueRing:
        return self._ring

    @property
    def order(self) -> int:
        return len(self._logs)

    @property
    def generators(self) -> tuple[int, ...]:
        return self._generators

    @property
    def orders(self) -> tuple[int, ...]:
        return self._orders

    @cached_property
    def exponent(self) -> int:
        return math.lcm(1, *self._orders)

    def log(self, index: int) -> tuple[int, ...] | None:
        """Exponents of the unit class ``index`` in the generators, None off the units."""
        return self._logs.get(index)

    def characters(self) -> Iterator[tuple[int, ...]]:
        """Exponent tuples k with phi(g_i) = e(k_i / ord(g_i)) that respect every relation."""

        def assign(prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
            i = len(prefix)
            if i == len(self._orders):
                yield prefix
                return
            for k in range(self._orders[i]):
                yield from assign(prefix + (k,))

        for ks in assign(()):
            if all(self.pairing(ks, r) % 1 == 0 for r in self._relations):
                yield ks

    def pairing(self, ks: Sequence[int], exps: Sequence[int]) -> Fraction:
        return sum(
            (Fraction(k * e, n) for k, e, n in zip(ks, exps, self._orders)), Fraction(0)
        )


class RayCharacter:
    """A character phi of conductor m*inf_1, given by its finite part on (O/m)^x.

    ``phi_f`` is multiplicative on residues prime to m and extended by zero.
    On elements of O, phi(lambda) = phi_f(lambda) * sgn(lambda) where sgn is
    the sign at the first real place (sqrt(D) > 0).
    """

    def __init__(self, group: UnitGroup, exponents: Sequence[int], index: int = 0):
        if len(exponents) != len(group.orders):
            raise DomainError(
                f"Expected {len(group.orders)} exponents, got {len(exponents)}"
            )
        self._group = group
        self._exponents = tuple(int(k) % n for k, n in zip(exponents, group.orders))
        self._index = index

    @property
    def D(self) -> int:
        return self._group.ring.D

    @property
    def ring(self) -> ResidueRing:
        return self._group.ring

    @property
    def modulus(self) -> tuple[QuadElem, ...]:
        return self._group.ring.modulus

    @property
    def M(self) -> int:
        return self._group.ring.norm

    @property
    def index(self) -> int:
        return self._index

    @property
    def exponents(self) -> tuple[int, ...]:
        return self._exponents

    @property
    def K(self) -> int:
        """Conductor of the cyclotomic field holding the values."""
        return max(self._group.exponent, 1)

    def value_at(self, index: int) -> Coeff:
        """phi_f on the residue class ``index`` of O/m."""
        exps = self._group.log(index)
        if exps is None:
            return Fraction(0)
        phase = self._group.pairing(self._exponents, exps)
        return normalize_coeff(
            cyclo_root_of_unity(phase.numerator, phase.denominator, self.K)
        )

    def finite_part(self, x: QuadElem) -> Coeff:
        return self.value_at(self.ring.index_of(x))

    def __call__(self, x: QuadElem) -> Coeff:
        """phi((x)) for x in O."""
        value = self.finite_part(x)
        return -value if x.sign() < 0 else value

    def inverse_at(self, x: QuadElem) -> Coeff:
        """phi^-1((x)), the complex conjugate of phi((x)); zero when x is not prime to m."""
        return _conjugate(self(x))

    def is_odd(self) -> bool:
        return self.finite_part(QuadElem(self.D, -1)) == -1

    def satisfies_unit_condition(self) -> bool:
        """phi_f(eps) = sgn(eps) for eps = -1 and eps_F."""
        eps = fundamental_unit(self.D)
        return self.is_odd() and self.finite_part(eps) == eps.sign()

    def nebentypus(self, m: int) -> Coeff:
        """chi(m) = chi_D(m) * phi((m)) for a rational integer m > 0."""
        if m < 1:
            raise DomainError(f"m must be positive, got {m}")
        return normalize_coeff(kronecker_chi(self.D, m) * self(QuadElem(self.D, m)))

    def to_json(self) -> dict[str, Any]:
        return {
            "D": self.D,
            "modulusBasis": [x.to_json() for x in self.modulus],
            "characterIndex": self._index,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> RayCharacter:
        D = int(data["D"])
        modulus = [QuadElem.from_json(x) for x in data["modulusBasis"]]
        characters = ray_characters(D, modulus)
        index = int(data["characterIndex"])
        if not 0 <= index < len(characters):
            raise DomainError(
                f"Character index {index} out of range: {len(characters)} characters "
                f"for D={D}, modulus={[str(x) for x in modulus]}"
            )
        return characters[index]

    def __repr__(self) -> str:
        return (
            f"RayCharacter(D={self.D}, modulus=[{', '.join(str(m) for m in self.modulus)}], "
            f"index={self._index}, exponents={self._exponents})"
        )


def _conjugate(value: Coeff) -> Coeff:
    if isinstance(value, Cyclotomic):
        return normalize_coeff(value.conjugate())
    return value


def ray_characters(D: int, modulus: Sequence[QuadElem]) -> list[RayCharacter]:
    """All phi_f on (O/m)^x with phi_f(eps) = sgn(eps) for every unit eps.

    Raises:
        DomainError: if F does not have class number one, the modulus is not an
            ideal, or O/m is too large to enumerate
    """
    check_class_number_one(D)
    ring = ResidueRing(D, modulus)
    group = UnitGroup(ring)
    result = []
    for ks in group.characters():
        candidate = RayCharacter(group, ks, len(result))
        if candidate.satisfies_unit_condition():
            result.append(candidate)
    logger.debug(f"{len(result)} odd characters of (O/m)^x of order {group.order}")
    return result


# ---------------------------------------------------------------------------
# The eigenform
# ---------------------------------------------------------------------------


def scalar_lattice(character: RayCharacter) -> IdealLattice:
    """L = L_{d,M} = M*sqrt(D)*O with Q = Nm/(D*M); L* = O and L*/L maps onto O/m."""
    return IdealLattice.from_order(character.D, character.M).negated_isometric()


def level(character: RayCharacter) -> int:
    return character.D * character.M


def _ideal_sum(character: RayCharacter, n: int) -> Coeff:
    total: Number = Fraction(0)
    for lam in principal_generators(character.D, n):
        total = total + character(lam)
    return normalize_coeff(total)


def f_phi(character: RayCharacter, prec: int) -> QSeries:
    """f_phi = sum over ideals (lambda) of O of phi((lambda)) q^Nm(lambda), below q^prec."""
    if prec < 1:
        raise DomainError(f"prec must be at least 1, got {prec}")
    terms = {Fraction(n): _ideal_sum(character, n) for n in range(1, prec)}
    return QSeries.from_terms(terms, prec)


def f_phi_contraction(character: RayCharacter, prec: int) -> QSeries:
    """C_phi * C_{a,m} * (theta(N tau, L) + theta(N tau, -L)) / [O^x : Gamma_L].

    The same series as ``f_phi``, assembled from the vector-valued orbit sums.
    """
    lattice = scalar_lattice(character)
    N = level(character)
    inner_prec = Fraction(prec, N)
    _, index = discriminant_kernel(lattice)
    weights = _contraction_weights(character, lattice, conjugate=False)
    plus = vartheta(lattice, 1, inner_prec)
    minus = vartheta(lattice, -1, inner_prec)

    terms: dict[Fraction, Number] = {}
    for h, w in enumerate(weights):
        if not w:
            continue
        for form in (plus, minus):
            for e, c in form.component(h).terms():
                terms[e] = terms.get(e, 0) + w * c
    series = QSeries.from_terms(terms, inner_prec)
    return series.rescale(N).map_coefficients(lambda c: c / index)


def _contraction_weights(
    character: RayCharacter, lattice: IdealLattice, conjugate: bool
) -> list[Coeff]:
    """The row C_phi (or C_phibar) times C_{a,m}, one weight per h in L*/L."""
    row = c_phi(character)
    if conjugate:
        row = [_conjugate(v) for v in row]
    matrix = c_am(lattice, character.ring)
    weights = []
    for h in range(matrix.shape[1]):
        total: Number = Fraction(0)
        for sigma in range(matrix.shape[0]):
            if matrix[sigma, h] and row[sigma]:
                total = total + row[sigma] * int(matrix[sigma, h])
        weights.append(normalize_coeff(total))
    return weights


# ---------------------------------------------------------------------------
# Holomorphic part coefficients
# ---------------------------------------------------------------------------


def kappa_bound(M: int) -> int:
    """48 M^3 [SL2(Z) : Gamma_0(2M)], a multiple of kappa_m."""
    return 48 * M**3 * psi_index(2 * M)


def lift_forms(
    character: RayCharacter,
    prec: Fraction | int,
    workers: int = 1,
    cache: MockFormCache | None = None,
    max_group: int = MAX_LIFT_GROUP,
) -> tuple[MockPlusForm, MockPlusForm]:
    """Theta+ of L and of the lattice isometric to -L, known below q^(prec/N).

    Raises:
        DomainError: if |L*/NL| for either lattice exceeds ``max_group``
    """
    lattice = scalar_lattice(character)
    negated = lattice.negated_isometric()
    inner_prec = Fraction(prec) / level(character)
    for lat in (lattice, negated):
        N, _ = lat.level_data()
        size = lat.group.order * N * N
        if size > max_group:
            raise DomainError(
                f"Theta+ for {lat} needs |L*/NL| = {size} > {max_group}; "
                f"pass precomputed forms instead"
            )
    return (
        ttheta_plus(lattice, inner_prec, workers=workers, cache=cache),
        ttheta_plus(negated, inner_prec, workers=workers, cache=cache),
    )


def c_plus_phi(
    character: RayCharacter,
    n: int,
    forms: tuple[MockPlusForm, MockPlusForm] | None = None,
) -> LogValue:
    """c+_phi(n), the n-th coefficient of the holomorphic part of f~_phi.

    Assembled as [O^x : Gamma_L]^-1 * C_phibar * C_{a,m} applied to
    c+_L(n/N, .) + c+_{-L}(n/N, .). The -L terms are read off the isometric
    lattice L_{d*sqrt(D),M} through h -> h*sqrt(D).

    Args:
        character: the ray class character
        n: a positive integer
        forms: Theta+ of L and of the lattice isometric to -L; computed with
            ``lift_forms`` when omitted

    Raises:
        PrecisionShortfallError: if ``forms`` stop at or below q^(n/N)
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    lattice = scalar_lattice(character)
    negated = lattice.negated_isometric()
    N = level(character)
    exponent = Fraction(n, N)
    if forms is None:
        forms = lift_forms(character, n + 1)
    plus_form, minus_form = forms
    for form in forms:
        if form.prec <= exponent:
            raise PrecisionShortfallError(
                f"Theta+ known below q^{form.prec}, need q^{exponent} for c+_phi({n})"
            )

    _, index = discriminant_kernel(lattice)
    root = QuadElem.sqrt(character.D)
    weights = _contraction_weights(character, lattice, conjugate=True)
    total = LogValue.zero()
    for h, w in enumerate(weights):
        if not w:
            continue
        rep = lattice.group.reps[h]
        plus = holo_coefficient(lattice, h, exponent, plus_form).value
        minus = holo_coefficient(
            negated, negated.group.index_of(rep * root), exponent, minus_form
        ).value
        total = total + (plus + minus) * w
    return total * Fraction(1, index)


def bold_c_phi(character: RayCharacter, n: int) -> LogValue:
    """(1/2) sum_{(lambda), Nm = n} (phi^-1(lambda) - phi^-1(lambda')) log|lambda/lambda'|."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    total = LogValue.zero()
    for lam in principal_generators(character.D, n):
        weight = character.inverse_at(lam) - character.inverse_at(lam.conj())
        if weight:
            total = total + LogValue.log_ratio(lam, weight * Fraction(1, 2))
    return total


def log_eps_coordinates(value: LogValue, D: int, bits: int = 256) -> tuple[int, list[Any]]:
    """Real coordinates of value/log(eps_F) in the power basis of Q(zeta_K).

    Returns:
        (K, [x_0, ..., x_{deg-1}]) with value = sum_j zeta_K^j * x_j * log(eps_F)
    """
    coeffs = [value.eps, *(c for _, c in value.terms)]
    K = math.lcm(1, *(c.K for c in coeffs if isinstance(c, Cyclotomic)))

    def coords(c: Coeff) -> tuple[Fraction, ...]:
        return Cyclotomic.coerce(c, K).lift(K).coeffs

    eps_f = fundamental_unit(D)
    with mpmath.workprec(bits + 32):
        log_eps = mpmath.log(eps_f.to_mpf())
        result = [coeff_to_mp(x) for x in coords(value.eps)]
        for alpha, c in value.terms:
            ratio = LogValue.log_ratio(alpha).evaluate(bits + 32, eps_f)
            for j, x in enumerate(coords(c)):
                if x:
                    result[j] += coeff_to_mp(x) * ratio / log_eps
    return K, result


def unit_ambiguity(
    value: LogValue, D: int, kappa: int, bits: int = 256
) -> list[Fraction] | None:
    """The coordinates of value/log(eps_F) when all lie in (1/kappa)Z, else None.

    A coordinate counts as reconstructed when kappa*x is within 2^-100 of an
    integer.
    """
    _, coords = log_eps_coordinates(value, D, bits)
    tolerance = mpmath.mpf(2) ** -100
    result = []
    with mpmath.workprec(bits + 32):
        for x in coords:
            scaled = x * kappa
            nearest = mpmath.nint(scaled)
            if abs(scaled - nearest) > tolerance:
                return None
            result.append(Fraction(int(nearest), kappa))
    return result


# ---------------------------------------------------------------------------
# Split primes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitElement:
    """sum coeff (x) alpha in Z[phi] (x) F^x/O^x, with log|.| extended linearly."""

    terms: tuple[tuple[Coeff, QuadElem], ...]

    def __post_init__(self) -> None:
        if any(not alpha for _, alpha in self.terms):
            raise DomainError("UnitElement terms need nonzero elements")

    def log_abs(self, bits: int = 256) -> Any:
        """sum coeff * log|alpha| (an mpc when a coefficient is not real)."""
        with mpmath.workprec(bits + 32):
            total = mpmath.mpf(0)
            for c, alpha in self.terms:
                total += coeff_to_mp(c) * mpmath.log(abs(alpha.to_mpf()))
        with mpmath.workprec(bits):
            return +total

    def swapped(self) -> UnitElement:
        """The same element written with the conjugate prime first."""
        return UnitElement(tuple(reversed(self.terms)))


def u_split(character: RayCharacter, ell: int) -> UnitElement:
    """u(phi_heart, ell) = phi_heart^-1(sigma_lambda) (x) lambda + phi_heart^-1(sigma_lambda') (x) lambda'.

    phi_heart = phi/phi' evaluates to phi(p)/phi(p') on the Frobenius of p,
    with lambda the first generator of norm ell.

    Raises:
        DomainError: if ell is not a prime that splits in F, or divides Nm(m)
    """
    D = character.D
    if not sympy.isprime(ell):
        raise DomainError(f"{ell} is not prime")
    if kronecker_chi(D, ell) != 1:
        raise DomainError(f"{ell} does not split in Q(sqrt({D}))")
    generators = principal_generators(D, ell)
    if not generators:
        raise DomainError(f"No principal generator of norm {ell} for D={D}")
    lam = generators[0]
    conj = lam.conj()
    a, b = character(lam), character(conj)
    if not a or not b:
        raise DomainError(f"{ell} is not prime to the modulus")
    heart = _as_cyclotomic(a) * _as_cyclotomic(b).inverse()
    return UnitElement(
        ((normalize_coeff(heart.conjugate()), lam), (normalize_coeff(heart), conj))
    )


def _as_cyclotomic(value: Coeff) -> Cyclotomic:
    return Cyclotomic.coerce(value)
