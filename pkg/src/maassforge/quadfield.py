"""Real quadratic orders and the rank two lattices built from their ideals.

A lattice here is a Z-module of rank two inside Q(sqrt(D)) with the quadratic
form Q(x) = sign * Nm(x) / scale. ``IdealLattice`` specializes this to
L_{a,M} = M*a with scale A*M. Discriminant groups L*/L get a canonical
indexing from the Smith normal form of the Gram matrix, which every Weil
representation matrix in the package shares.

Vectors of a given norm are enumerated up to the totally positive units
fixing the discriminant group, with representatives in the fundamental domain
1 <= |lambda/lambda'| < eps_L^2.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any

import numpy as np
import sympy
from numpy.typing import NDArray
from sympy.functions.combinatorial.numbers import jacobi_symbol
from sympy.matrices.normalforms import smith_normal_decomp
from sympy.polys.domains import ZZ

from .errors import ConsistencyError, DomainError
from .exact import LogValue, QuadElem, as_fraction
from .log import get_logger

logger = get_logger(__name__)

MAX_CONTINUED_FRACTION_STEPS = 1_000_000


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def validate_discriminant(D: int) -> None:
    if D <= 1 or D % 4 not in (0, 1) or is_square(D):
        raise DomainError(
            f"D={D} is not a positive nonsquare discriminant (D = 0, 1 mod 4)"
        )


def _floor_quadratic(P: int, Q: int, root: int) -> int:
    """floor((P + sqrt(D)) / Q) for irrational sqrt(D) with floor ``root``."""
    if Q > 0:
        return (P + root) // Q
    return -((P + root) // -Q) - 1


@lru_cache(maxsize=None)
def fundamental_unit(D: int) -> QuadElem:
    """The fundamental unit eps_F > 1 of O_D.

    Expands omega = (D mod 2 + sqrt(D))/2 as a continued fraction; the first
    convergent p/q for which p - q*omega' has norm +-1 gives eps_F.

    Raises:
        DomainError: if D is not a nonsquare discriminant
    """
    validate_discriminant(D)
    P, Q = (1, 2) if D % 2 else (0, 2)
    omega_conj = QuadElem(D, Fraction(P, 2), Fraction(-1, 2))
    root = math.isqrt(D)

    h_prev, h = 0, 1
    k_prev, k = 1, 0
    for _ in range(MAX_CONTINUED_FRACTION_STEPS):
        a = _floor_quadratic(P, Q, root)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        candidate = QuadElem(D, h) - omega_conj * k
        if abs(candidate.norm()) == 1 and candidate > 1:
            logger.debug(f"Fundamental unit for D={D}: {candidate}")
            return candidate
        P = a * Q - P
        Q = (D - P * P) // Q
    raise ConsistencyError(f"Continued fraction for D={D} did not close")


def eps_exponent(unit: QuadElem) -> int:
    """k with unit = eps_F^k for a unit > 1 (or 1)."""
    eps = fundamental_unit(unit.D)
    k, power = 0, QuadElem(unit.D, 1)
    while power < unit:
        power = power * eps
        k += 1
    if power != unit:
        raise DomainError(f"{unit} is not a positive power of eps_F = {eps}")
    return k


def kronecker_chi(D: int, m: int) -> int:
    """The Kronecker symbol (D/m)."""
    if m == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if m < 0:
        m = -m
        if D < 0:
            result = -result
    while m % 2 == 0:
        m //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    if m == 1:
        return result
    return result * int(jacobi_symbol(D % m, m))


def element_coordinates(
    x: QuadElem, basis: Sequence[QuadElem]
) -> tuple[Fraction, Fraction]:
    """(c1, c2) with x = c1*basis[0] + c2*basis[1]."""
    e1, e2 = basis
    det = e1.a * e2.b - e2.a * e1.b
    if det == 0:
        raise DomainError(f"{e1} and {e2} are linearly dependent")
    return (x.a * e2.b - e2.a * x.b) / det, (e1.a * x.b - x.a * e1.b) / det


def _integral(values: Sequence[Fraction]) -> bool:
    return all(v.denominator == 1 for v in values)


class QuadOrder:
    """The order O_D = Z + Z*(D + sqrt(D))/2."""

    def __init__(self, D: int):
        validate_discriminant(D)
        self._D = D
        self._omega = QuadElem(D, Fraction(D, 2), Fraction(1, 2))

    @property
    def D(self) -> int:
        return self._D

    @property
    def omega(self) -> QuadElem:
        return self._omega

    @property
    def basis(self) -> tuple[QuadElem, QuadElem]:
        return QuadElem(self._D, 1), self._omega

    def contains(self, x: QuadElem) -> bool:
        return x.D == self._D and x.is_integral()

    def element(self, x: int, y: int) -> QuadElem:
        return QuadElem(self._D, x) + self._omega * y

    def __repr__(self) -> str:
        return f"QuadOrder(D={self._D})"


class LatticeQuotient:
    """The finite group (Z*big[0] + Z*big[1]) / (Z*sub[0] + Z*sub[1]).

    Cosets are indexed through the Smith normal form U*R*V = diag(d1, d2) of
    the relation matrix R (columns: coordinates of ``sub`` in ``big``). A
    coset with big-coordinates x has vector y = U*x mod (d1, d2) and index
    y1*d2 + y2.
    """

    def __init__(self, big: Sequence[QuadElem], sub: Sequence[QuadElem]):
        self._big = tuple(big)
        self._sub = tuple(sub)
        columns = [element_coordinates(s, self._big) for s in self._sub]
        if not all(_integral(c) for c in columns):
            raise DomainError("Sublattice is not contained in the ambient lattice")
        relation = sympy.Matrix(
            [[int(columns[j][i]) for j in range(2)] for i in range(2)]
        )
        if relation.det() == 0:
            raise DomainError("Sublattice does not have full rank")
        snf, u, _ = smith_normal_decomp(relation, domain=ZZ)
        invariants = []
        rows = []
        for i in range(2):
            d = int(snf[i, i])
            row = [int(u[i, 0]), int(u[i, 1])]
            if d < 0:
                d, row = -d, [-row[0], -row[1]]
            invariants.append(d)
            rows.append(row)
        u_matrix = sympy.Matrix(rows)
        u_inv = u_matrix.inv()
        self._u = tuple(tuple(r) for r in rows)
        self._u_inv = tuple(tuple(int(u_inv[i, j]) for j in range(2)) for i in range(2))
        self._invariants = (invariants[0], invariants[1])
        self._order = invariants[0] * invariants[1]

    @property
    def big(self) -> tuple[QuadElem, ...]:
        return self._big

    @property
    def sub(self) -> tuple[QuadElem, ...]:
        return self._sub

    @property
    def invariants(self) -> tuple[int, int]:
        return self._invariants

    @property
    def order(self) -> int:
        return self._order

    def __len__(self) -> int:
        return self._order

    def vector(self, index: int) -> tuple[int, int]:
        return divmod(index, self._invariants[1])

    def index_from_vector(self, y: Sequence[int]) -> int:
        d1, d2 = self._invariants
        return (y[0] % d1) * d2 + (y[1] % d2)

    def index_of(self, x: QuadElem) -> int:
        c = element_coordinates(x, self._big)
        if not _integral(c):
            raise DomainError(f"{x} is not in the ambient lattice")
        c0, c1 = int(c[0]), int(c[1])
        u = self._u
        return self.index_from_vector((u[0][0] * c0 + u[0][1] * c1, u[1][0] * c0 + u[1][1] * c1))

    def contains_sub(self, x: QuadElem) -> bool:
        return _integral(element_coordinates(x, self._sub))

    def canonical(self, x: QuadElem) -> QuadElem:
        """The representative of x + sub with sub-coordinates in [0, 1)."""
        c = element_coordinates(x, self._sub)
        return self._sub[0] * (c[0] - math.floor(c[0])) + self._sub[1] * (
            c[1] - math.floor(c[1])
        )

    def element(self, index: int) -> QuadElem:
        y = self.vector(index)
        v = self._u_inv
        x0 = v[0][0] * y[0] + v[0][1] * y[1]
        x1 = v[1][0] * y[0] + v[1][1] * y[1]
        return self.canonical(self._big[0] * x0 + self._big[1] * x1)

    @cached_property
    def reps(self) -> tuple[QuadElem, ...]:
        return tuple(self.element(i) for i in range(self._order))

    def add(self, i: int, j: int) -> int:
        yi, yj = self.vector(i), self.vector(j)
        return self.index_from_vector((yi[0] + yj[0], yi[1] + yj[1]))

    def neg(self, i: int) -> int:
        y = self.vector(i)
        return self.index_from_vector((-y[0], -y[1]))

    def scalar(self, k: int, i: int) -> int:
        y = self.vector(i)
        return self.index_from_vector((k * y[0], k * y[1]))


class ResidueRing(LatticeQuotient):
    """The residue ring O_D/m of an integral ideal m given by a Z-basis."""

    def __init__(self, D: int, modulus: Sequence[QuadElem]):
        order = QuadOrder(D)
        if not all(order.contains(x) for x in modulus):
            raise DomainError(f"Modulus basis {[str(x) for x in modulus]} is not in O_{D}")
        super().__init__(order.basis, modulus)
        for x in self.sub:
            if not _integral(element_coordinates(order.omega * x, self.sub)):
                raise DomainError(
                    f"Z-span of {[str(x) for x in modulus]} is not an O_{D}-ideal"
                )
        self._D = D
        self._ring_order = order

    @property
    def D(self) -> int:
        return self._D

    @property
    def norm(self) -> int:
        """Nm(m) = |O/m|."""
        return self.order

    @property
    def modulus(self) -> tuple[QuadElem, ...]:
        return self.sub

    def mul(self, i: int, j: int) -> int:
        return self.index_of(self.element(i) * self.element(j))

    def is_unit(self, i: int) -> bool:
        """Whether the class generates O together with m (gcd of the 2x2 minors is 1)."""
        x = self.element(i)
        rows = [
            x.order_coordinates(),
            (x * self._ring_order.omega).order_coordinates(),
            *(m.order_coordinates() for m in self.sub),
        ]
        g = 0
        for r in range(len(rows)):
            for s in range(r + 1, len(rows)):
                g = math.gcd(g, int(rows[r][0] * rows[s][1] - rows[r][1] * rows[s][0]))
        return g == 1

    @cached_property
    def units(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.order) if self.is_unit(i))

    def __repr__(self) -> str:
        return f"ResidueRing(D={self._D}, modulus=[{', '.join(str(m) for m in self.sub)}])"


class QuadLattice:
    """An even lattice Z*b1 + Z*b2 in Q(sqrt(D)) with Q(x) = sign*Nm(x)/scale."""

    def __init__(
        self,
        D: int,
        basis: Sequence[QuadElem],
        scale: Fraction | int,
        sign: int = 1,
    ):
        validate_discriminant(D)
        if sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {sign}")
        scale = Fraction(scale)
        if scale <= 0:
            raise DomainError(f"scale must be positive, got {scale}")
        if len(basis) != 2 or any(b.D != D for b in basis):
            raise DomainError(f"Basis must be two elements of Q(sqrt({D}))")
        self._D = D
        self._basis = (basis[0], basis[1])
        self._scale = scale
        self._sign = sign

        gram = [[self.B(x, y) for y in self._basis] for x in self._basis]
        if not all(v.denominator == 1 for row in gram for v in row):
            raise DomainError(f"Lattice is not integral: Gram matrix {gram}")
        if gram[0][0] % 2 or gram[1][1] % 2:
            raise DomainError(f"Lattice is not even: Gram matrix {gram}")
        self._gram = tuple(tuple(int(v) for v in row) for row in gram)
        det = self._gram[0][0] * self._gram[1][1] - self._gram[0][1] ** 2
        if det == 0:
            raise DomainError("Degenerate lattice")
        self._det = det

    @property
    def D(self) -> int:
        return self._D

    @property
    def basis(self) -> tuple[QuadElem, QuadElem]:
        return self._basis

    @property
    def scale(self) -> Fraction:
        return self._scale

    @property
    def sign(self) -> int:
        return self._sign

    @property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        return self._gram

    def Q(self, x: QuadElem) -> Fraction:
        return self._sign * x.norm() / self._scale

    def B(self, x: QuadElem, y: QuadElem) -> Fraction:
        return self._sign * (x * y.conj()).trace() / self._scale

    @cached_property
    def dual_basis(self) -> tuple[QuadElem, QuadElem]:
        """Dual basis for the sign +1 form, so L and -L index L*/L identically."""
        (g11, g12), (_, g22) = ((self._sign * g for g in row) for row in self._gram)
        det = Fraction(self._det)
        inv = ((g22 / det, -g12 / det), (-g12 / det, g11 / det))
        b1, b2 = self._basis
        return (b1 * inv[0][0] + b2 * inv[0][1], b1 * inv[1][0] + b2 * inv[1][1])

    def contains(self, x: QuadElem) -> bool:
        return _integral(element_coordinates(x, self._basis))

    def in_dual(self, x: QuadElem) -> bool:
        return all(self.B(x, b).denominator == 1 for b in self._basis)

    def preserved_by(self, unit: QuadElem) -> bool:
        return all(self.contains(unit * b) for b in self._basis)

    def fixes_discriminant(self, unit: QuadElem) -> bool:
        """Whether multiplication by ``unit`` preserves L and acts trivially on L*/L."""
        if unit.norm() != 1 or not self.preserved_by(unit):
            return False
        return all(self.contains((unit - 1) * d) for d in self.dual_basis)

    def scaled(self, N: int) -> QuadLattice:
        """The lattice N*L with form Q/N."""
        return QuadLattice(self._D, [b * N for b in self._basis], self._scale * N, self._sign)

    def negated(self) -> QuadLattice:
        return QuadLattice(self._D, self._basis, self._scale, -self._sign)

    @cached_property
    def group(self) -> DiscGroup:
        return DiscGroup(self)

    def _key(self) -> tuple[Any, ...]:
        return (self._D, self._basis, self._scale, self._sign)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadLattice):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return (
            f"QuadLattice(D={self._D}, basis=[{self._basis[0]}, {self._basis[1]}], "
            f"scale={self._scale}, sign={self._sign})"
        )


class IdealLattice(QuadLattice):
    """L_{a,M} = M*a with Q(x) = sign*Nm(x)/(A*M), A = [O_D : a]."""

    def __init__(
        self,
        D: int,
        ideal_basis: Sequence[QuadElem],
        M: int = 1,
        sign: int = 1,
    ):
        order = QuadOrder(D)
        if M < 1:
            raise DomainError(f"M must be a positive integer, got {M}")
        ideal = (QuadElem(D, ideal_basis[0].a, ideal_basis[0].b), QuadElem(D, ideal_basis[1].a, ideal_basis[1].b))
        if not all(order.contains(x) for x in ideal):
            raise DomainError(f"Ideal basis {[str(x) for x in ideal]} is not in O_{D}")
        coords = [x.order_coordinates() for x in ideal]
        A = abs(int(coords[0][0] * coords[1][1] - coords[0][1] * coords[1][0]))
        if A == 0:
            raise DomainError("Ideal basis is linearly dependent")
        for x in ideal:
            if not _integral(element_coordinates(order.omega * x, ideal)):
                raise DomainError(
                    f"Z-span of {[str(x) for x in ideal]} is not an O_{D}-ideal"
                )
        self._order = order
        self._ideal_basis = ideal
        self._A = A
        self._M = M
        super().__init__(D, [x * M for x in ideal], A * M, sign)

    @classmethod
    def from_order(cls, D: int, M: int = 1, sign: int = 1) -> IdealLattice:
        """L_{O_D, M}."""
        return cls(D, QuadOrder(D).basis, M, sign)

    @property
    def order(self) -> QuadOrder:
        return self._order

    @property
    def ideal_basis(self) -> tuple[QuadElem, QuadElem]:
        return self._ideal_basis

    @property
    def A(self) -> int:
        return self._A

    @property
    def M(self) -> int:
        return self._M

    def scaled(self, N: int) -> IdealLattice:
        return IdealLattice(self.D, self._ideal_basis, self._M * N, self.sign)

    def negated(self) -> IdealLattice:
        return IdealLattice(self.D, self._ideal_basis, self._M, -self.sign)

    def negated_isometric(self) -> IdealLattice:
        """L_{a*sqrt(D), M} with this lattice's sign.

        x -> x*sqrt(D) is an isometry from ``self.negated()`` onto it.
        """
        root = QuadElem.sqrt(self.D)
        return IdealLattice(self.D, [x * root for x in self._ideal_basis], self._M, self.sign)

    def level_data(self) -> tuple[int, int]:
        """(N, N') with N minimal such that N*M = 2*A*N'^2."""
        n_prime = 1
        while (2 * self._A * n_prime**2) % self._M:
            n_prime += 1
        return 2 * self._A * n_prime**2 // self._M, n_prime

    def to_json(self) -> dict[str, Any]:
        return {
            "D": self.D,
            "idealBasis": [x.to_json() for x in self._ideal_basis],
            "M": self._M,
            "sign": self.sign,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> IdealLattice:
        basis = [QuadElem.from_json(x) for x in data["idealBasis"]]
        return cls(int(data["D"]), basis, int(data["M"]), int(data.get("sign", 1)))

    def __repr__(self) -> str:
        a = ", ".join(str(x) for x in self._ideal_basis)
        return f"IdealLattice(D={self.D}, ideal=[{a}], M={self._M}, sign={self.sign})"


class DiscGroup(LatticeQuotient):
    """The discriminant group L*/L with Q mod 1 and B mod 1 tables."""

    def __init__(self, lattice: QuadLattice):
        super().__init__(lattice.dual_basis, lattice.basis)
        self._lattice = lattice
        reps = self.reps
        self._qvals = tuple(lattice.Q(h) % 1 for h in reps)
        generators = [self.element(self.index_from_vector(e)) for e in ((1, 0), (0, 1))]
        freq = np.zeros((self.order, 2), dtype=np.int64)
        for i, h in enumerate(reps):
            for axis, g in enumerate(generators):
                d = self.invariants[axis]
                freq[i, axis] = int((lattice.B(h, g) * d) % d)
        self._freq = freq
        self._level = math.lcm(*(q.denominator for q in self._qvals))

    @property
    def lattice(self) -> QuadLattice:
        return self._lattice

    @property
    def level(self) -> int:
        """d_L: the smallest d with d*Q(h) in Z for every h."""
        return self._level

    @property
    def qvals(self) -> tuple[Fraction, ...]:
        return self._qvals

    def qval(self, i: int) -> Fraction:
        return self._qvals[i]

    def bil(self, i: int, j: int) -> Fraction:
        return self._lattice.B(self.reps[i], self.reps[j]) % 1

    @property
    def freq(self) -> NDArray[np.int64]:
        """k_i(delta) = d_i*B(delta, g_i) mod d_i for the SNF generators g_i."""
        return self._freq

    def index_of(self, x: QuadElem) -> int:
        if not self._lattice.in_dual(x):
            raise DomainError(f"{x} is not in the dual lattice")
        return super().index_of(x)

    def __repr__(self) -> str:
        return f"DiscGroup(order={self.order}, invariants={self.invariants})"


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitData:
    """Unit group data of a lattice.

    ``eps_l`` generates the totally positive part of the discriminant
    kernel; ``base_unit`` is the smallest totally positive unit preserving
    the lattice and ``eps_l = base_unit ** base_power``.
    """

    eps_f: QuadElem
    eps_l: QuadElem
    eps_exponent: int
    index: int
    has_negative_unit: bool
    base_unit: QuadElem
    base_power: int


@lru_cache(maxsize=None)
def unit_data(L: QuadLattice) -> UnitData:
    eps = fundamental_unit(L.D)
    bound = 4 * L.group.order + 8
    generator: QuadElem | None = None
    k = 0
    power = QuadElem(L.D, 1)
    while generator is None:
        k += 1
        if k > bound:
            raise ConsistencyError(f"No unit fixes L*/L for {L} within {bound} steps")
        power = power * eps
        if power.norm() != 1:
            continue
        for candidate in (power, -power):
            if L.fixes_discriminant(candidate):
                generator = candidate
                break

    has_negative = generator.sign() < 0
    if has_negative:
        eps_l, exponent = generator * generator, 2 * k
    else:
        eps_l, exponent = generator, k

    base_exp = 1 if eps.norm() == 1 else 2
    while not L.preserved_by(eps ** base_exp):
        base_exp += 1 if eps.norm() == 1 else 2
    if exponent % base_exp:
        raise ConsistencyError(f"eps_L = eps^{exponent} is not a power of eps^{base_exp}")
    return UnitData(
        eps_f=eps,
        eps_l=eps_l,
        eps_exponent=exponent,
        index=2 * exponent,
        has_negative_unit=has_negative,
        base_unit=eps**base_exp,
        base_power=exponent // base_exp,
    )


def discriminant_kernel(L: QuadLattice) -> tuple[QuadElem, int]:
    """(eps_L, [O^x : Gamma_L]) for the discriminant kernel of L."""
    data = unit_data(L)
    return data.eps_l, data.index


# ---------------------------------------------------------------------------
# Orbit enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitRep:
    """A representative lambda0 of a Gamma'_L-orbit with Q(lambda0) = sign_q * n."""

    lambda0: QuadElem
    n: Fraction
    sign_q: int
    sign_lambda0: int
    h: int


def _sort_key(x: QuadElem) -> tuple[float, float, Fraction, Fraction]:
    e1, e2 = x.embeddings()
    return e1, e2, x.a, x.b


def _points_in_unit_domain(
    basis: Sequence[QuadElem], unit: QuadElem, norm_bound: Fraction
) -> list[QuadElem]:
    """All nonzero x in Z*basis with |Nm x| <= norm_bound and 1 <= |x/x'| < unit^2."""
    (p1, q1), (p2, q2) = basis[0].embeddings(), basis[1].embeddings()
    det = p1 * q2 - p2 * q1
    root = math.sqrt(float(norm_bound)) * (1 + 1e-9) + 1e-9
    u = unit.embeddings()[0] * (1 + 1e-9)
    xs, ys = [], []
    for s in (-u * root, u * root):
        for t in (-root, root):
            xs.append((s * q2 - t * p2) / det)
            ys.append((t * p1 - s * q1) / det)
    x_lo, x_hi = math.floor(min(xs)) - 1, math.ceil(max(xs)) + 1
    y_lo, y_hi = math.floor(min(ys)) - 1, math.ceil(max(ys)) + 1

    # Nm(x*b1 + y*b2) = n11*x^2 + n12*x*y + n22*y^2, scaled to integers
    n11 = basis[0].norm()
    n22 = basis[1].norm()
    n12 = (basis[0] * basis[1].conj()).trace()
    den = math.lcm(n11.denominator, n12.denominator, n22.denominator)
    c11, c12, c22 = int(n11 * den), int(n12 * den), int(n22 * den)
    limit = norm_bound * den
    unit_conj = unit.conj()

    points = []
    for x in range(x_lo, x_hi + 1):
        for y in range(y_lo, y_hi + 1):
            value = c11 * x * x + c12 * x * y + c22 * y * y
            if value == 0 or abs(value) > limit:
                continue
            point = basis[0] * x + basis[1] * y
            if point.ratio_at_least_one() and not (point * unit_conj).ratio_at_least_one():
                points.append(point)
    return points


@lru_cache(maxsize=64)
def orbit_table(
    L: QuadLattice, bound: Fraction, sign_q: int
) -> dict[tuple[int, Fraction], tuple[OrbitRep, ...]]:
    """Orbit representatives of L* with 0 < sign_q*Q(lambda) <= bound.

    Keys are (coset index in L*/L, n). Points are first collected up to the
    base unit u, then expanded by u^j for j below [<u> : <eps_L>].
    """
    if sign_q not in (1, -1):
        raise DomainError(f"sign_q must be +1 or -1, got {sign_q}")
    units = unit_data(L)
    group = L.group
    wanted_norm_sign = L.sign * sign_q
    points = _points_in_unit_domain(L.dual_basis, units.base_unit, bound * L.scale)
    table: dict[tuple[int, Fraction], list[OrbitRep]] = defaultdict(list)
    for point in points:
        if point.norm() * wanted_norm_sign <= 0:
            continue
        n = sign_q * L.Q(point)
        current = point
        for _ in range(units.base_power):
            h = group.index_of(current)
            table[(h, n)].append(OrbitRep(current, n, sign_q, current.sign(), h))
            current = current * units.base_unit
    logger.debug(
        f"Enumerated {sum(len(v) for v in table.values())} orbits up to {bound} for {L}"
    )
    return {
        key: tuple(sorted(reps, key=lambda r: _sort_key(r.lambda0)))
        for key, reps in table.items()
    }


def enumerate_orbits(
    L: QuadLattice, h: QuadElem | int, n: Fraction | int | str, sign_q: int = 1
) -> list[OrbitRep]:
    """One representative per Gamma'_L-orbit of {x in L+h : Q(x) = sign_q*n}."""
    n = as_fraction(n)
    if n <= 0:
        raise DomainError(f"n must be positive, got {n}")
    group = L.group
    index = h if isinstance(h, int) else group.index_of(h)
    if (n - sign_q * group.qval(index)) % 1:
        return []
    return list(orbit_table(L, n, sign_q).get((index, n), ()))


def a_of_orbit(rep: OrbitRep, eps_l: QuadElem) -> LogValue:
    """sgn(lambda0)*log|lambda0/lambda0'|, or -log(eps_L) when the ratio is 1."""
    if rep.lambda0.ratio_is_one():
        return LogValue.log_eps(-eps_exponent(eps_l))
    return LogValue.log_ratio(rep.lambda0, rep.sign_lambda0)


def unit_log(factors: Sequence[tuple[QuadElem, int]], scale: Fraction | int = 1) -> LogValue:
    """scale*log|u/u'| for u = prod alpha^k, as a LogValue."""
    return LogValue.build(terms=[(alpha, Fraction(scale) * k) for alpha, k in factors])


@lru_cache(maxsize=256)
def principal_generators(D: int, n: int) -> tuple[QuadElem, ...]:
    """One generator lambda > 0 per principal ideal (lambda) of O_D with norm n."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    order = QuadOrder(D)
    points = _points_in_unit_domain(order.basis, fundamental_unit(D), Fraction(n))
    found = [x for x in points if abs(x.norm()) == n and x.sign() > 0]
    return tuple(sorted(found, key=_sort_key))
