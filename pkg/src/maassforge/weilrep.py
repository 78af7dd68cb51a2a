"""Exact Weil representations of SL2(Z) on discriminant groups.

Matrices and vectors are carried as group-ring arrays: an array of shape
(..., |G|, K) whose last axis holds integer coefficients of powers of
zeta_K. The generator T permutes each coefficient vector by a cyclic shift
and S is a two-dimensional finite Fourier transform over the Smith normal
form coordinates of L*/L. The normalization |G|^(-1/2) per S is tracked as
an integer ``sqrt_power`` and only applied when the result is reduced to
canonical cyclotomic coordinates.

The module also holds the Gamma_0(N) coset machinery and the 0/1
intertwining matrices between discriminant groups.

``ModularWeilRepresentation`` runs the same letters on residues modulo a
prime p = 1 mod K, for groups whose group-ring arrays would not fit in memory.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Literal, Protocol

import numpy as np
import sympy
from numpy.typing import NDArray
from sympy.core.intfunc import igcdex
from sympy.ntheory import primitive_root

from .errors import ConductorError, DomainError
from .exact import (
    Coeff,
    Cyclotomic,
    cyclo_root_of_unity,
    cyclotomic_field,
    normalize_coeff,
    ring_multiply,
    ring_sqrt,
)
from .log import get_logger
from .qseries import QSeries, VVForm
from .quadfield import (
    DiscGroup,
    IdealLattice,
    LatticeQuotient,
    QuadLattice,
    ResidueRing,
    kronecker_chi,
)

logger = get_logger(__name__)

Letter = tuple[Literal["S", "T"], int]
Rounding = Literal["floor", "nearest"]

_INT64_HEADROOM = 2**62


# ---------------------------------------------------------------------------
# SL2(Z)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SL2Elem:
    """An integer matrix (a b; c d) of determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if self.a * self.d - self.b * self.c != 1:
            raise DomainError(
                f"({self.a} {self.b}; {self.c} {self.d}) has determinant "
                f"{self.a * self.d - self.b * self.c}, not 1"
            )

    @classmethod
    def identity(cls) -> SL2Elem:
        return cls(1, 0, 0, 1)

    @classmethod
    def S(cls) -> SL2Elem:
        return cls(0, -1, 1, 0)

    @classmethod
    def T(cls, k: int = 1) -> SL2Elem:
        return cls(1, k, 0, 1)

    def __matmul__(self, other: SL2Elem) -> SL2Elem:
        return SL2Elem(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> SL2Elem:
        return SL2Elem(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> SL2Elem:
        return SL2Elem(self.d, -self.b, -self.c, self.a)

    def in_gamma0(self, N: int) -> bool:
        return self.c % N == 0

    def __str__(self) -> str:
        return f"({self.a} {self.b}; {self.c} {self.d})"


def _push(word: list[Letter], letter: Letter) -> None:
    if letter[0] == "T" and word and word[-1][0] == "T":
        k = word[-1][1] + letter[1]
        word.pop()
        if k:
            word.append(("T", k))
    elif letter[0] == "S" or letter[1]:
        word.append(letter)


def word_decompose(g: SL2Elem, rounding: Rounding = "floor") -> list[Letter]:
    """Letters (S, 1) and (T, k) whose left-to-right product is g.

    Runs the Euclidean algorithm on the first column. ``rounding`` picks the
    quotient, so "floor" and "nearest" give two independent words.
    """
    word: list[Letter] = []
    a, b, c, d = g.a, g.b, g.c, g.d
    while c != 0:
        q = a // c if rounding == "floor" else round(Fraction(a, c))
        # g = T^q S g' with g' = S^{-1} T^{-q} g
        _push(word, ("T", q))
        _push(word, ("S", 1))
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a == 1:
        _push(word, ("T", b))
    else:
        # -T^{-b} = S^2 T^{-b}
        _push(word, ("S", 1))
        _push(word, ("S", 1))
        _push(word, ("T", -b))
    return word


def word_product(word: Sequence[Letter]) -> SL2Elem:
    result = SL2Elem.identity()
    for name, k in word:
        result = result @ (SL2Elem.S() if name == "S" else SL2Elem.T(k))
    return result


def s_count(word: Sequence[Letter]) -> int:
    return sum(1 for name, _ in word if name == "S")


# ---------------------------------------------------------------------------
# Group-ring helpers
# ---------------------------------------------------------------------------


def _square_free(n: int) -> int:
    free = 1
    for p, e in sympy.factorint(n).items():
        if e % 2:
            free *= p
    return free


def weil_conductor(group: DiscGroup) -> int:
    """Smallest K the Weil representation of ``group`` lives in with its S normalization."""
    return math.lcm(8, group.level, _square_free(group.order))


def ring_matmul(A: NDArray[Any], B: NDArray[Any], K: int) -> NDArray[Any]:
    """Product of group-ring matrices of shapes (n, m, K) and (m, p, K)."""
    dtype = np.result_type(A, B)
    out = np.zeros((A.shape[0], B.shape[1], K), dtype=dtype)
    for t in np.flatnonzero(A.any(axis=(0, 1))):
        out += np.roll(np.tensordot(A[:, :, t], B, axes=(1, 0)), int(t), axis=-1)
    return out


def finalize_ring(
    ring: NDArray[Any], sqrt_power: int, order: int, K: int
) -> NDArray[Any]:
    """Reduce ring * |G|^(-sqrt_power/2) to canonical coordinates of Q(zeta_K)."""
    ring = np.asarray(ring).astype(object)
    if sqrt_power % 2:
        vector, square = ring_sqrt(order, K)
        ring = ring_multiply(ring, vector.astype(object), K)
        factor = Fraction(int(square), order ** ((sqrt_power + 1) // 2))
    else:
        factor = Fraction(1, order ** (sqrt_power // 2))
    coords = cyclotomic_field(K).reduce(ring)
    return coords * factor


def _widen(X: NDArray[Any], growth: int) -> NDArray[Any]:
    if X.dtype == object or X.size == 0:
        return X
    if int(np.abs(X).max()) * growth >= _INT64_HEADROOM:
        return X.astype(object)
    return X


def int_matmul(A: NDArray[Any], B: NDArray[Any]) -> NDArray[Any]:
    """Exact A @ B for integer matrices; B is split into int64-safe limbs."""
    A, B = np.asarray(A), np.asarray(B)
    if A.size == 0 or B.size == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=object)
    a_max = int(np.abs(A).max())
    bits = 62 - a_max.bit_length() - A.shape[1].bit_length()
    if bits < 8:
        return np.asarray(A.astype(object) @ B.astype(object))
    A64 = A.astype(np.int64)
    sign = np.where(np.asarray(B < 0, dtype=bool), -1, 1).astype(np.int64)
    rest = np.abs(B.astype(object))
    base = 1 << bits
    result = np.zeros((A.shape[0], B.shape[1]), dtype=object)
    shift = 0
    while np.any(rest != 0):
        limb = np.asarray(rest % base, dtype=np.int64) * sign
        result = result + (A64 @ limb).astype(object) * (1 << shift)
        rest = rest // base
        shift += bits
    return result


# ---------------------------------------------------------------------------
# Weil representation
# ---------------------------------------------------------------------------


class WeilRepresentation:
    """rho_L on C[L*/L] for a rank two lattice of signature (1,1).

    rho(T)e_h = e(Q(h))e_h and rho(S)e_h = |G|^(-1/2) sum_d e(-B(d,h))e_d.
    The sign of the lattice is part of Q, so rho_{-L} is the representation
    of ``lattice.negated()``. Both index L*/L identically.
    """

    def __init__(self, group: DiscGroup, K: int | None = None):
        self._group = group
        base = weil_conductor(group)
        K = base if K is None else K
        if K % base:
            raise ConductorError(
                f"Conductor {K} is not a multiple of {base} required by {group}"
            )
        self._K = K
        self._t = np.array([int(q * K) % K for q in group.qvals], dtype=np.int64)
        self._j = np.arange(K, dtype=np.int64)
        self._matrices: dict[SL2Elem, WeilMatrix] = {}

    @classmethod
    def for_lattice(cls, lattice: QuadLattice, K: int | None = None) -> WeilRepresentation:
        return cls(lattice.group, K)

    @property
    def group(self) -> DiscGroup:
        return self._group

    @property
    def K(self) -> int:
        return self._K

    @property
    def order(self) -> int:
        return self._group.order

    @property
    def sign(self) -> int:
        return self._group.lattice.sign

    # -- letter actions on arrays of shape (..., |G|, K) ---------------------

    def apply_t(self, X: NDArray[Any], k: int = 1) -> NDArray[Any]:
        idx = (self._j[None, :] - k * self._t[:, None]) % self._K
        rows = np.arange(self.order)[:, None]
        return X[..., rows, idx]

    def _dft_axis(self, Y: NDArray[Any], d: int) -> NDArray[Any]:
        """sum_y e(-y*a/d) Y[..., y, :] for every a, along axis -2."""
        step = self._K // d
        y = np.arange(d, dtype=np.int64)[:, None]
        out = np.empty_like(Y)
        for a in range(d):
            idx = (self._j[None, :] + step * a * y) % self._K
            out[..., a, :] = Y[..., y, idx].sum(axis=-2)
        return out

    def apply_s(self, X: NDArray[Any]) -> NDArray[Any]:
        """|G|^(1/2) rho(S) applied along the group axis."""
        d1, d2 = self._group.invariants
        X = _widen(X, self.order)
        lead = X.shape[:-2]
        Y = X.reshape(*lead, d1, d2, self._K)
        Y = self._dft_axis(Y, d2)
        Y = np.swapaxes(Y, -3, -2)
        Y = self._dft_axis(Y, d1)
        freq = self._group.freq
        # Y[..., b, a, :] holds frequencies (a, b) for the generators (g1, g2)
        return Y[..., freq[:, 1], freq[:, 0], :]

    def apply_letter(self, X: NDArray[Any], letter: Letter) -> NDArray[Any]:
        name, k = letter
        if name == "T":
            return self.apply_t(X, k)
        return self.apply_s(X)

    def apply_word(self, X: NDArray[Any], word: Sequence[Letter]) -> NDArray[Any]:
        """Right-multiply row vectors by rho(word); rho(S) is symmetric and rho(T) diagonal."""
        for letter in word:
            X = self.apply_letter(X, letter)
        return X

    def identity_rows(self) -> NDArray[np.int64]:
        X = np.zeros((self.order, self.order, self._K), dtype=np.int64)
        X[np.arange(self.order), np.arange(self.order), 0] = 1
        return X

    # -- matrices ------------------------------------------------------------

    def matrix(self, g: SL2Elem, rounding: Rounding = "floor") -> WeilMatrix:
        key = g if rounding == "floor" else None
        if key is not None and key in self._matrices:
            return self._matrices[key]
        word = word_decompose(g, rounding)
        ring = self.apply_word(self.identity_rows(), word)
        result = WeilMatrix(self, ring, s_count(word))
        if key is not None:
            self._matrices[key] = result
        return result

    def generators(self) -> tuple[WeilMatrix, WeilMatrix]:
        return self.matrix(SL2Elem.T()), self.matrix(SL2Elem.S())

    def identity(self) -> WeilMatrix:
        return WeilMatrix(self, self.identity_rows(), 0)

    def apply(self, g: SL2Elem, form: VVForm) -> VVForm:
        """rho(g) applied to a vector of q-series, letter by letter."""
        if len(form) != self.order:
            raise DomainError(
                f"Form has {len(form)} components, the representation {self.order}"
            )
        exponents = sorted({e for comp in form.components for e, _ in comp.terms()})
        position = {e: i for i, e in enumerate(exponents)}
        X = np.zeros((len(exponents), self.order, self._K), dtype=object)
        for h, comp in enumerate(form.components):
            for e, c in comp.terms():
                vector = (
                    c.ring_vector(self._K) if isinstance(c, Cyclotomic) else [c] + [0] * (self._K - 1)
                )
                X[position[e], h, :] = vector
        word = word_decompose(g)
        for letter in reversed(word):
            X = self.apply_letter(X, letter)
        coords = finalize_ring(X, s_count(word), self.order, self._K)
        prec = form.prec
        components = []
        for h in range(self.order):
            terms = {
                e: Cyclotomic(self._K, list(coords[i, h, :]))
                for i, e in enumerate(exponents)
            }
            components.append(QSeries.from_terms(terms, prec))
        return VVForm(tuple(components), form.weight, form.rep_sign, form.group)

    def __repr__(self) -> str:
        return f"WeilRepresentation({self._group!r}, K={self._K})"


class WeilMatrix:
    """rho(g) as a group-ring matrix times |G|^(-sqrt_power/2)."""

    def __init__(self, rep: WeilRepresentation, ring: NDArray[Any], sqrt_power: int):
        self._rep = rep
        self._ring = ring
        self._sqrt_power = sqrt_power

    @property
    def group(self) -> DiscGroup:
        return self._rep.group

    @property
    def K(self) -> int:
        return self._rep.K

    @property
    def lattice_sign(self) -> int:
        return self._rep.sign

    @property
    def ring(self) -> NDArray[Any]:
        return self._ring

    @property
    def sqrt_power(self) -> int:
        return self._sqrt_power

    @cached_property
    def coordinates(self) -> NDArray[Any]:
        """Canonical coordinates, shape (|G|, |G|, phi(K))."""
        return finalize_ring(self._ring, self._sqrt_power, self._rep.order, self.K)

    @cached_property
    def entries(self) -> NDArray[Any]:
        n = self._rep.order
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = normalize_coeff(Cyclotomic(self.K, list(self.coordinates[i, j])))
        return out

    def entry(self, row: int, col: int) -> Coeff:
        return self.entries[row, col]  # type: ignore[no-any-return]

    def __matmul__(self, other: WeilMatrix) -> WeilMatrix:
        if other._rep is not self._rep:
            raise DomainError("Weil matrices of different representations")
        ring = ring_matmul(self._ring.astype(object), other._ring.astype(object), self.K)
        return WeilMatrix(self._rep, ring, self._sqrt_power + other._sqrt_power)

    def conjugate_transpose(self) -> WeilMatrix:
        conj = np.roll(self._ring[..., ::-1], 1, axis=-1)
        return WeilMatrix(self._rep, np.swapaxes(conj, 0, 1), self._sqrt_power)

    def apply(self, vector: Sequence[Coeff | int]) -> list[Coeff]:
        """Matrix times a column vector of exact numbers."""
        n = self._rep.order
        out: list[Coeff] = []
        for i in range(n):
            total: Any = Fraction(0)
            for j in range(n):
                if vector[j] and self.entries[i, j]:
                    total = total + self.entries[i, j] * vector[j]
            out.append(normalize_coeff(total))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeilMatrix):
            return NotImplemented
        return bool(np.array_equal(self.coordinates, other.coordinates))

    __hash__ = None  # type: ignore[assignment]

    def is_identity(self) -> bool:
        return self == self._rep.identity()

    def to_json(self) -> dict[str, Any]:
        return {
            "K": self.K,
            "entries": [
                [Cyclotomic.coerce(e, self.K).to_json() for e in row] for row in self.entries
            ],
        }

    def __repr__(self) -> str:
        return f"WeilMatrix(order={self._rep.order}, K={self.K})"


@lru_cache(maxsize=64)
def weil_representation(group: DiscGroup, K: int | None = None) -> WeilRepresentation:
    return WeilRepresentation(group, K)


def rho_generators(group: DiscGroup, K: int | None = None) -> tuple[WeilMatrix, WeilMatrix]:
    """(rho(T), rho(S)) for the discriminant group of a lattice."""
    return weil_representation(group, K).generators()


def rho(group: DiscGroup, g: SL2Elem, K: int | None = None) -> WeilMatrix:
    return weil_representation(group, K).matrix(g)


def rho_apply(group: DiscGroup, g: SL2Elem, form: VVForm, K: int | None = None) -> VVForm:
    return weil_representation(group, K).apply(g, form)


# ---------------------------------------------------------------------------
# Reduction modulo primes
# ---------------------------------------------------------------------------

MODULAR_BOUND = 2**21
_FLOAT_EXACT = 2**53


def modular_primes(K: int, bound: int = MODULAR_BOUND) -> Iterator[tuple[int, int]]:
    """Primes p = 1 mod K below ``bound``, largest first, each with a primitive K-th root."""
    for k in range((bound - 2) // K, 0, -1):
        p = k * K + 1
        if sympy.isprime(p):
            yield p, pow(int(primitive_root(p)), (p - 1) // K, p)


def mod_matmul(A: NDArray[Any], B: NDArray[Any], p: int) -> NDArray[np.int64]:
    """A @ B mod p along the last axis of A; partial sums stay exact in float64."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    lead, m = A.shape[:-1], A.shape[-1]
    flat = A.reshape(-1, m)
    chunk = max(1, _FLOAT_EXACT // ((p - 1) ** 2))
    out = np.zeros((flat.shape[0], B.shape[1]), dtype=np.int64)
    for start in range(0, m, chunk):
        part = flat[:, start : start + chunk].astype(np.float64) @ B[
            start : start + chunk
        ].astype(np.float64)
        out = (out + part.astype(np.int64) % p) % p
    return out.reshape(*lead, B.shape[1])


class ModularWeilRepresentation:
    """rho_L over F_p, through the embedding zeta_K -> root with p = 1 mod K.

    Arrays have shape (..., |G|) and hold residues in [0, p). Letters act as in
    ``WeilRepresentation``, so applying a word here agrees with evaluating the
    group-ring result at ``root``.
    """

    def __init__(self, group: DiscGroup, K: int, p: int, root: int):
        base = weil_conductor(group)
        if K % base:
            raise ConductorError(
                f"Conductor {K} is not a multiple of {base} required by {group}"
            )
        if (p - 1) % K or (p - 1) ** 2 > _FLOAT_EXACT:
            raise DomainError(f"p={p} must be 1 mod {K} and below 2^26")
        orders = [K // q for q in sympy.primefactors(K)]
        if pow(root, K, p) != 1 or any(pow(root, e, p) == 1 for e in orders):
            raise DomainError(f"{root} is not a primitive {K}-th root of unity mod {p}")
        self._group = group
        self._K = K
        self._p = p
        powers = [1] * K
        for j in range(1, K):
            powers[j] = powers[j - 1] * root % p
        self._powers = np.array(powers, dtype=np.int64)
        self._t = np.array([int(q * K) % K for q in group.qvals], dtype=np.int64)
        self._dft: dict[int, NDArray[np.int64]] = {}

    @property
    def group(self) -> DiscGroup:
        return self._group

    @property
    def K(self) -> int:
        return self._K

    @property
    def p(self) -> int:
        return self._p

    @property
    def order(self) -> int:
        return self._group.order

    def evaluate(self, ring: NDArray[Any]) -> NDArray[np.int64]:
        """Image in F_p of group-ring arrays of shape (..., K)."""
        residues = np.asarray(np.asarray(ring) % self._p, dtype=np.int64)
        return mod_matmul(residues, self._powers[:, None], self._p)[..., 0]

    def root_power(self, exponents: NDArray[np.int64]) -> NDArray[np.int64]:
        return self._powers[np.asarray(exponents) % self._K]

    def apply_t(self, X: NDArray[np.int64], k: int = 1) -> NDArray[np.int64]:
        phase = self._powers[(k * self._t) % self._K]
        return X * phase % self._p

    def _dft_matrix(self, d: int) -> NDArray[np.int64]:
        if d not in self._dft:
            a = np.arange(d, dtype=np.int64)
            self._dft[d] = self._powers[(-(self._K // d) * np.outer(a, a)) % self._K]
        return self._dft[d]

    def apply_s(self, X: NDArray[np.int64]) -> NDArray[np.int64]:
        """|G|^(1/2) rho(S) applied along the group axis."""
        d1, d2 = self._group.invariants
        lead = X.shape[:-1]
        Y = X.reshape(*lead, d1, d2)
        Y = mod_matmul(Y, self._dft_matrix(d2), self._p)
        Y = np.swapaxes(Y, -2, -1)
        Y = mod_matmul(Y, self._dft_matrix(d1), self._p)
        freq = self._group.freq
        return Y[..., freq[:, 1], freq[:, 0]]

    def apply_word(self, X: NDArray[np.int64], word: Sequence[Letter]) -> NDArray[np.int64]:
        for name, k in word:
            X = self.apply_t(X, k) if name == "T" else self.apply_s(X)
        return X

    def identity_rows(self) -> NDArray[np.int64]:
        return np.eye(self.order, dtype=np.int64)

    def __repr__(self) -> str:
        return f"ModularWeilRepresentation({self._group!r}, K={self._K}, p={self._p})"


# ---------------------------------------------------------------------------
# Gamma_0(N) cosets
# ---------------------------------------------------------------------------


def psi_index(N: int) -> int:
    """[SL2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    result = Fraction(N)
    for p in sympy.primefactors(N):
        result *= Fraction(p + 1, p)
    return int(result)


def _projective_key(c: int, d: int, N: int, units: Sequence[int]) -> tuple[int, int]:
    return min(((u * c) % N, (u * d) % N) for u in units)


@lru_cache(maxsize=None)
def coset_reps(N: int) -> tuple[SL2Elem, ...]:
    """One representative of each coset Gamma_0(N)g, indexed by P^1(Z/N)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    if N == 1:
        return (SL2Elem.identity(),)
    units = [u for u in range(1, N) if math.gcd(u, N) == 1]
    keys = sorted(
        {
            _projective_key(c, d, N, units)
            for c in range(N)
            for d in range(N)
            if math.gcd(math.gcd(c, d), N) == 1
        }
    )
    reps = []
    for c, d in keys:
        if c == 0:
            reps.append(SL2Elem.identity())
            continue
        while math.gcd(c, d) != 1:
            d += N
        x, y, _ = igcdex(d, c)
        reps.append(SL2Elem(int(x), -int(y), c, d))
    if len(reps) != psi_index(N):
        raise DomainError(f"Found {len(reps)} cosets for N={N}, expected {psi_index(N)}")
    return tuple(reps)


@dataclass(frozen=True)
class CosetData:
    """(N 0; 0 1) gamma = gamma_n (n_gamma b; 0 N/n_gamma)."""

    gamma: SL2Elem
    gamma_n: SL2Elem
    n_gamma: int
    b: int
    N: int


def gamma_decompose(g: SL2Elem, N: int) -> CosetData:
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    n_gamma = math.gcd(N, g.c)
    c1, n1 = g.c // n_gamma, N // n_gamma
    b = 0 if n1 == 1 else (g.d * pow(c1, -1, n1)) % n1
    gamma_n = SL2Elem(
        g.a * n1,
        g.b * n_gamma - g.a * b,
        c1,
        (g.d * n_gamma - g.c * b) // N,
    )
    return CosetData(g, gamma_n, n_gamma, b, N)


# ---------------------------------------------------------------------------
# Intertwining matrices
# ---------------------------------------------------------------------------


def psi_map(sub: QuadLattice, lattice: QuadLattice) -> NDArray[np.int64]:
    """For each h in P*/P, the index of h mod L in L*/L, or -1 when h is not in L*."""
    if not all(lattice.contains(x) for x in sub.basis):
        raise DomainError(f"{sub} is not a sublattice of {lattice}")
    big = lattice.group
    return np.array(
        [big.index_of(h) if lattice.in_dual(h) else -1 for h in sub.group.reps],
        dtype=np.int64,
    )


def psi_matrix(sub: QuadLattice, lattice: QuadLattice) -> NDArray[np.int64]:
    """psi: C[P*/P] -> C[L*/L] as a |L*/L| x |P*/P| matrix for P in L.

    e_h goes to e_{h mod L} when h is in L*, and to 0 otherwise.
    """
    image = psi_map(sub, lattice)
    matrix = np.zeros((lattice.group.order, len(image)), dtype=np.int64)
    hit = np.flatnonzero(image >= 0)
    matrix[image[hit], hit] = 1
    return matrix


def scaling_projection(lattice: QuadLattice, N: int) -> NDArray[np.int64]:
    """For each delta in L*/NL, the index of delta mod L in L*/L."""
    big, small = lattice.group, lattice.scaled(N).group
    return np.array([big.index_of(delta) for delta in small.reps], dtype=np.int64)


def c_LN(lattice: QuadLattice, N: int) -> NDArray[np.int64]:
    """C_{L,N} = (1_L(h - delta)) for h in L*/L and delta in L*/NL."""
    pi = scaling_projection(lattice, N)
    matrix = np.zeros((lattice.group.order, len(pi)), dtype=np.int64)
    matrix[pi, np.arange(len(pi))] = 1
    return matrix


def c_am(lattice: IdealLattice, ring: ResidueRing) -> NDArray[np.int64]:
    """C_{a,m} transposed: rows sigma in O/m, columns h in L*/L, entry 1_{ma}(h - sigma).

    ``lattice`` is L_{a d, M}, so L* = a sits inside O and a/ma is identified
    with O/m.
    """
    if lattice.D != ring.D or lattice.M != ring.norm:
        raise DomainError(f"{lattice} does not match the modulus {ring}")
    group = lattice.group
    matrix = np.zeros((ring.order, group.order), dtype=np.int64)
    for j, h in enumerate(group.reps):
        matrix[ring.index_of(h), j] = 1
    return matrix


class ResidueCharacter(Protocol):
    @property
    def ring(self) -> ResidueRing: ...

    def value_at(self, index: int) -> Coeff: ...


def c_phi(character: ResidueCharacter) -> list[Coeff]:
    """The row vector (phi_f(sigma)) over O/m, zero off the units."""
    return [character.value_at(i) for i in range(character.ring.order)]


def rho_m(ring: ResidueRing, g: SL2Elem) -> NDArray[Any]:
    """rho_m(g)e_sigma = chi_D(d) e_{d sigma} for g in Gamma_0(D*Nm(m))."""
    N = ring.D * ring.norm
    if not g.in_gamma0(N):
        raise DomainError(f"{g} is not in Gamma_0({N})")
    chi = Fraction(kronecker_chi(ring.D, g.d))
    matrix = np.full((ring.order, ring.order), Fraction(0), dtype=object)
    for sigma in range(ring.order):
        matrix[ring.scalar(g.d, sigma), sigma] = chi
    return matrix


def group_quotient(lattice: QuadLattice, sub: QuadLattice) -> LatticeQuotient:
    """L/P for a sublattice P of L."""
    return LatticeQuotient(lattice.basis, sub.basis)


def intertwines(
    big: DiscGroup,
    small: DiscGroup,
    image: NDArray[np.int64],
    g_big: SL2Elem,
    g_small: SL2Elem,
) -> bool:
    """Exact test of rho_big(g_big) C = C rho_small(g_small).

    C sends e_j to e_{image[j]}, or to 0 where image[j] is negative, so it is
    applied as an index gather rather than a matrix product.
    """
    image = np.asarray(image, dtype=np.int64)
    if len(image) != small.order or (image >= big.order).any():
        raise DomainError(f"Index map does not go from {small} to {big}")
    K = math.lcm(weil_conductor(big), weil_conductor(small))
    outer, inner = WeilRepresentation(big, K), WeilRepresentation(small, K)
    word_big, word_small = word_decompose(g_big), word_decompose(g_small)
    hit = np.flatnonzero(image >= 0)

    full = outer.apply_word(outer.identity_rows(), word_big)
    left = np.zeros((outer.order, inner.order, K), dtype=full.dtype)
    left[:, hit, :] = full[:, image[hit], :]
    rows = np.zeros((outer.order, inner.order, K), dtype=np.int64)
    rows[image[hit], hit, 0] = 1
    right = inner.apply_word(rows, word_small)

    lhs = finalize_ring(left, s_count(word_big), outer.order, K)
    rhs = finalize_ring(right, s_count(word_small), inner.order, K)
    return bool(np.array_equal(lhs, rhs))


def weil_identity_holds(lattice: QuadLattice, N: int, g: SL2Elem) -> bool:
    """rho_{-L}(g) C_{L,N} = C_{L,N} rho_{-NL}(g_N) with g_N = (a, Nb; c/N, d)."""
    if not g.in_gamma0(N):
        raise DomainError(f"{g} is not in Gamma_0({N})")
    g_n = SL2Elem(g.a, N * g.b, g.c // N, g.d)
    return intertwines(
        lattice.negated().group,
        lattice.scaled(N).negated().group,
        scaling_projection(lattice, N),
        g,
        g_n,
    )


def _bil_block(
    group: DiscGroup, rows: NDArray[np.int64], cols: NDArray[np.int64]
) -> NDArray[np.int64]:
    """d2 * B(rows[i], cols[j]) mod d2, where (d1, d2) are the invariants of ``group``."""
    d1, d2 = group.invariants
    k = group.freq[rows]
    y1, y2 = np.divmod(cols, d2)
    return (np.outer(k[:, 0], y1) * (d2 // d1) + np.outer(k[:, 1], y2)) % d2


def _psi_commutes_with_t(
    big: DiscGroup, small: DiscGroup, image: NDArray[np.int64]
) -> bool:
    inside = np.flatnonzero(image >= 0)
    return all(small.qval(int(j)) == big.qval(int(image[j])) for j in inside)


def _psi_commutes_with_s(
    big: DiscGroup, small: DiscGroup, image: NDArray[np.int64]
) -> bool:
    """rho_L(S) psi e_j = psi rho_P(S) e_j for every j in P*/P.

    On the fibre d0 + L/P of psi the P-side sum is e(-B(d0, j)) * chi_j with
    chi_j = sum_{x in L/P} e(-B(x, j)). The two sides agree iff the fibres are
    cosets of L/P, chi_j is |L/P| on L*/P and 0 elsewhere, |P*/P| equals
    |L/P|^2 |L*/L|, and the phases e(-B(d0, j)) match on lifts of L*/L.
    """
    kernel = np.flatnonzero(image == 0)
    inside = np.flatnonzero(image >= 0)
    c = len(kernel)
    if c * c * big.order != small.order or len(inside) != c * big.order:
        return False
    lifts = np.full(big.order, -1, dtype=np.int64)
    lifts[image[inside]] = inside
    if (lifts < 0).any():
        return False
    for d0 in lifts:
        if any(image[small.add(int(d0), int(x))] != image[d0] for x in kernel):
            return False

    m = small.invariants[1]
    everything = np.arange(small.order, dtype=np.int64)
    keys, inverse = np.unique(
        _bil_block(small, kernel, everything).T, axis=0, return_inverse=True
    )
    chi = [
        sum((cyclo_root_of_unity(-int(k), m, m) for k in key), Cyclotomic.zero(m))
        for key in keys
    ]
    is_full = np.array([value == c for value in chi])
    is_zero = np.array([value.is_zero() for value in chi])
    inverse = np.asarray(inverse).reshape(-1)
    if not is_full[inverse[inside]].all():
        return False
    if not is_zero[inverse[image < 0]].all():
        return False

    n = big.invariants[1]
    common = math.lcm(m, n)
    p_side = _bil_block(small, lifts, inside) * (common // m)
    l_side = _bil_block(big, np.arange(big.order, dtype=np.int64), image[inside])
    return bool(np.array_equal(p_side % common, (l_side * (common // n)) % common))


def psi_equivariant(sub: QuadLattice, lattice: QuadLattice, g: SL2Elem) -> bool:
    """rho_L(g) psi = psi rho_P(g) for a sublattice P of L with the restricted form.

    Checked on the letters of a word for g, in time linear in |P*/P|.
    """
    if sub.scale != lattice.scale or sub.sign != lattice.sign:
        raise DomainError(f"{sub} does not carry the quadratic form of {lattice}")
    image = psi_map(sub, lattice)
    big, small = lattice.group, sub.group
    letters = {name for name, _ in word_decompose(g)}
    if "T" in letters and not _psi_commutes_with_t(big, small, image):
        return False
    if "S" in letters and not _psi_commutes_with_s(big, small, image):
        return False
    return True
