"""Holomorphic parts of the weight one theta lifts.

``ttheta_plus_special`` builds the mixed mock modular form for lattices
L_{a,2AN'^2} as a product of a weight 1/2 mock theta function and a unary
theta series. ``ttheta_plus`` reaches every other L_{a,M} by averaging the
special form of NL over Gamma_0(N)\\SL2(Z); the Weil representation words are
applied to row vectors of group-ring arrays and contracted against the
coefficient matrix of the special form in one pass per coset. When those
arrays would be too large the same sum is taken modulo several primes and the
rational coefficients are rebuilt by the Chinese remainder theorem.

The coefficients c+_L(n, h) come out of ``holo_coefficient`` as exact
``LogValue`` objects.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from numpy.typing import NDArray
from sympy.ntheory.modular import crt

from .errors import ConsistencyError, DomainError
from .exact import (
    LogValue,
    QuadElem,
    as_fraction,
    cyclotomic_field,
    ring_multiply,
    ring_sqrt,
)
from .log import get_logger
from .qseries import QSeries, VVForm, mock_theta_plus, theta_half
from .quadfield import (
    IdealLattice,
    QuadLattice,
    a_of_orbit,
    enumerate_orbits,
    eps_exponent,
    orbit_table,
    unit_data,
)
from .weilrep import (
    CosetData,
    Letter,
    ModularWeilRepresentation,
    SL2Elem,
    WeilRepresentation,
    coset_reps,
    gamma_decompose,
    group_quotient,
    int_matmul,
    mod_matmul,
    modular_primes,
    psi_index,
    s_count,
    scaling_projection,
    weil_conductor,
    word_decompose,
)

logger = get_logger(__name__)

_T = TypeVar("_T")

# group-ring entries above which the coset sum is taken modulo primes
EXACT_AVERAGE_LIMIT = 2**26
MAX_PRIMES = 8


@dataclass(frozen=True)
class MockPlusForm:
    """The holomorphic part of a theta lift together with its denominator certificate."""

    lattice: IdealLattice
    form: VVForm
    kappa: int

    @property
    def prec(self) -> Fraction:
        return self.form.prec

    def component(self, h: int) -> QSeries:
        return self.form.component(h)

    def coefficient(self, h: int, n: Fraction | int | str) -> Fraction:
        value = self.form.coefficient(h, as_fraction(n))
        return Fraction(value)

    def truncate(self, prec: Fraction | int) -> MockPlusForm:
        return MockPlusForm(self.lattice, self.form.truncate(prec), self.kappa)

    def check_denominators(self) -> None:
        """Raise ConsistencyError unless kappa times every coefficient is an integer."""
        for h, comp in enumerate(self.form.components):
            for e, c in comp.terms():
                if (Fraction(c) * self.kappa).denominator != 1:
                    raise ConsistencyError(
                        f"Coefficient {c} of q^{e} in component {h} has a denominator "
                        f"above the certificate {self.kappa}"
                    )

    def to_json(self) -> dict[str, Any]:
        return {
            "lattice": self.lattice.to_json(),
            "kappa": self.kappa,
            "form": self.form.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> MockPlusForm:
        lattice = IdealLattice.from_json(data["lattice"])
        return cls(lattice, VVForm.from_json(data["form"], lattice.group), int(data["kappa"]))


def kappa_certificate(lattice: IdealLattice) -> int:
    """kappa_L = 12 A^3 N'^3 [SL2(Z) : Gamma_0(N)]."""
    N, n_prime = lattice.level_data()
    return 12 * lattice.A**3 * n_prime**3 * psi_index(N)


# ---------------------------------------------------------------------------
# Cusp forms from orbits
# ---------------------------------------------------------------------------


def vartheta(lattice: QuadLattice, sign_q: int, prec: Fraction | int) -> VVForm:
    """The cusp form theta(tau, +-L): sum over orbits of sgn(lambda0) q^|Q(lambda0)|."""
    prec = Fraction(prec)
    group = lattice.group
    if unit_data(lattice).has_negative_unit:
        logger.debug(f"{lattice} has a negative unit in its discriminant kernel")
        components = tuple(QSeries.zero(prec) for _ in range(group.order))
        return VVForm(components, Fraction(1), sign_q, group)
    terms: list[dict[Fraction, int]] = [{} for _ in range(group.order)]
    if prec > 0:
        for (h, n), reps in orbit_table(lattice, prec, sign_q).items():
            if n < prec:
                terms[h][n] = terms[h].get(n, 0) + sum(r.sign_lambda0 for r in reps)
    components = tuple(QSeries.from_terms(t, prec) for t in terms)
    return VVForm(components, Fraction(1), sign_q, group)


# ---------------------------------------------------------------------------
# Special case
# ---------------------------------------------------------------------------


def ttheta_plus_special(lattice: IdealLattice, prec: Fraction | int) -> MockPlusForm:
    """Theta+ for L = L_{a, 2AN'^2} as 2*psi(theta+_{2AN'} (x) theta_{2AN'sqrt(D)}).

    With P = 2A^2N'^2 (Z + sqrt(D)Z), the component at delta in L*/L sums
    theta+_{2AN'}(a/(AN')) * theta_{2AN'sqrt(D)}(b/(AN')) over the cosets
    delta + l = a + b sqrt(D), l in L/P.
    """
    prec = Fraction(prec)
    N, n_prime = lattice.level_data()
    if N != 1:
        raise DomainError(f"{lattice} is not of the form L_(a, 2AN'^2)")
    if lattice.sign != 1:
        raise DomainError("The special construction needs a lattice with sign +1")
    A, D = lattice.A, lattice.D
    level = 2 * A * n_prime
    scale = A * n_prime
    side = 2 * A * A * n_prime * n_prime
    P = QuadLattice(D, [QuadElem(D, side), QuadElem(D, 0, side)], lattice.scale, 1)
    cosets = group_quotient(lattice, P).reps
    group = lattice.group
    logger.debug(
        f"Special lift for {lattice}: |L*/L|={group.order}, |L/P|={len(cosets)}, prec={prec}"
    )

    components = []
    for delta in group.reps:
        total = QSeries.zero(prec)
        for ell in cosets:
            x = delta + ell
            mock = mock_theta_plus(level, x.a / scale, prec)
            if mock.is_zero():
                continue
            unary = theta_half(level, x.b / scale, prec + Fraction(1, 8), radicand=D)
            total = total + (mock * unary).truncate(prec)
        components.append((total * 2).truncate(prec))
    form = VVForm(tuple(components), Fraction(1), -1, group)
    result = MockPlusForm(lattice, form, 6 * A * n_prime)
    result.check_denominators()
    return result


# ---------------------------------------------------------------------------
# General case
# ---------------------------------------------------------------------------


def working_conductor(lattice: IdealLattice, N: int) -> int:
    """lcm(8, 4D, d_L, d_NL, N d_L), enlarged to hold both S normalizations."""
    group, scaled = lattice.group, lattice.scaled(N).group
    return math.lcm(
        8,
        4 * lattice.D,
        group.level,
        scaled.level,
        N * group.level,
        weil_conductor(group),
        weil_conductor(scaled),
    )


@dataclass(frozen=True)
class _CosetPlan:
    data: CosetData
    outer: list[Letter]
    inner: list[Letter]
    factor: Fraction

    @property
    def sqrt_power(self) -> int:
        return s_count(self.outer) + s_count(self.inner)


class _CosetAverager:
    """Accumulates rho_{-L}(gamma)^-1 C_{L,N} rho_{-NL}(gamma_N) Theta+(tau_gamma, NL)."""

    def __init__(self, lattice: IdealLattice, inner: MockPlusForm, prec: Fraction):
        N, _ = lattice.level_data()
        self.lattice = lattice
        self.N = N
        self.prec = prec
        self.K = working_conductor(lattice, N)
        scaled = lattice.scaled(N)
        self.outer_group = lattice.negated().group
        self.inner_group = scaled.negated().group
        self.outer_rep = WeilRepresentation(self.outer_group, self.K)
        self.inner_rep = WeilRepresentation(self.inner_group, self.K)
        self.projection = scaling_projection(lattice, N)
        self.order = lattice.group.order
        self.inner_order = len(inner.form)

        exponents = sorted({e for comp in inner.form.components for e, _ in comp.terms()})
        self.exponents = exponents
        position = {e: i for i, e in enumerate(exponents)}
        entries: list[tuple[list[int], list[int]]] = [([], []) for _ in exponents]
        for delta, comp in enumerate(inner.form.components):
            for e, c in comp.terms():
                rows, values = entries[position[e]]
                rows.append(delta)
                values.append(int(Fraction(c) * inner.kappa))
        # one sparse column per exponent of the inner form
        self.columns = [(np.array(r, dtype=np.int64), v) for r, v in entries]
        self.inner_kappa = inner.kappa

    @property
    def array_size(self) -> int:
        """Entries of the group-ring array one exact coset contribution needs."""
        return self.order * self.inner_order * self.K

    def plan(self, gamma: SL2Elem) -> _CosetPlan:
        data = gamma_decompose(gamma, self.N)
        outer = word_decompose(gamma.inverse())
        inner = word_decompose(data.gamma_n)
        s1, s2 = s_count(outer), s_count(inner)
        total = s1 + s2
        factor = Fraction(data.n_gamma, self.N) / psi_index(self.N) / self.inner_kappa
        factor /= Fraction(self.N) ** s2
        factor /= Fraction(self.order) ** ((total + 1) // 2)
        if total % 2:
            factor *= ring_sqrt(self.order, self.K)[1]
        return _CosetPlan(data, outer, inner, factor)

    def _targets(self, plan: _CosetPlan) -> tuple[list[int], list[Fraction]]:
        """Inner exponents x with x * N_gamma^2 / N below the precision, and their images."""
        ratio = Fraction(plan.data.n_gamma * plan.data.n_gamma, self.N)
        selected, targets = [], []
        for i, x in enumerate(self.exponents):
            e = x * ratio
            if e < self.prec:
                selected.append(i)
                targets.append(e)
        return selected, targets

    def _shifts(self, plan: _CosetPlan, targets: Sequence[Fraction]) -> NDArray[np.int64]:
        data = plan.data
        return np.array(
            [int(self.K * e * data.b / data.n_gamma) % self.K for e in targets], dtype=np.int64
        )

    def contribution(self, plan: _CosetPlan, multiplier: int) -> dict[Fraction, NDArray[Any]]:
        K = self.K
        selected, targets = self._targets(plan)
        if not selected:
            return {}
        rows = self.outer_rep.apply_word(self.outer_rep.identity_rows(), plan.outer)
        rows = rows[:, self.projection, :]
        rows = self.inner_rep.apply_word(rows, plan.inner)

        coefficients = np.zeros((self.inner_order, len(selected)), dtype=object)
        for j, i in enumerate(selected):
            index, values = self.columns[i]
            coefficients[index, j] = values

        # (|G_L|, |G_NL|, K) x (|G_NL|, E) -> (|G_L|, E, K)
        flat = np.ascontiguousarray(np.moveaxis(rows, 1, 2)).reshape(-1, rows.shape[1])
        product = int_matmul(flat, coefficients)
        product = product.reshape(self.order, K, len(selected)).transpose(0, 2, 1)

        shifts = self._shifts(plan, targets)
        idx = (np.arange(K)[None, :] - shifts[:, None]) % K
        product = np.take_along_axis(product, idx[None, :, :], axis=2)
        if plan.sqrt_power % 2:
            product = ring_multiply(product, ring_sqrt(self.order, K)[0].astype(object), K)

        out: dict[Fraction, NDArray[Any]] = {}
        for j, e in enumerate(targets):
            block = product[:, j, :] * multiplier
            if e in out:
                out[e] = out[e] + block
            else:
                out[e] = block
        return out

    def modular_reps(
        self, p: int, root: int
    ) -> tuple[ModularWeilRepresentation, ModularWeilRepresentation]:
        return (
            ModularWeilRepresentation(self.outer_group, self.K, p, root),
            ModularWeilRepresentation(self.inner_group, self.K, p, root),
        )

    def residues(
        self,
        plan: _CosetPlan,
        multiplier: int,
        reps: tuple[ModularWeilRepresentation, ModularWeilRepresentation],
    ) -> dict[Fraction, NDArray[np.int64]]:
        """``contribution`` sent to F_p by the embedding of ``reps``, one vector per exponent."""
        outer, inner = reps
        p = outer.p
        selected, targets = self._targets(plan)
        if not selected:
            return {}
        rows = outer.apply_word(outer.identity_rows(), plan.outer)
        rows = rows[:, self.projection]
        rows = inner.apply_word(rows, plan.inner)

        product = np.zeros((self.order, len(selected)), dtype=np.int64)
        for j, i in enumerate(selected):
            index, values = self.columns[i]
            if len(index):
                column = np.array([v % p for v in values], dtype=np.int64)
                product[:, j] = mod_matmul(rows[:, index], column[:, None], p)[:, 0]

        product = product * outer.root_power(self._shifts(plan, targets))[None, :] % p
        if plan.sqrt_power % 2:
            product = product * int(outer.evaluate(ring_sqrt(self.order, self.K)[0])) % p
        product = product * (multiplier % p) % p

        out: dict[Fraction, NDArray[np.int64]] = {}
        for j, e in enumerate(targets):
            out[e] = (out[e] + product[:, j]) % p if e in out else product[:, j]
        return out


def ttheta_plus(
    lattice: IdealLattice,
    prec: Fraction | int,
    workers: int = 1,
    cache: MockFormCache | None = None,
) -> MockPlusForm:
    """Theta+(tau, L) for any L_{a,M}, certified rational with denominator kappa_L.

    Args:
        lattice: the lattice L_{a,M} with sign +1
        prec: coefficients of q^n are returned for n < prec
        workers: threads used for the coset sum
        cache: optional JSON cache of earlier results

    Returns:
        the mock form with its denominator certificate

    Raises:
        ConsistencyError: if a coefficient is not rational or exceeds kappa_L
    """
    prec = Fraction(prec)
    if cache is not None:
        cached = cache.load(lattice, prec)
        if cached is not None:
            return cached

    N, _ = lattice.level_data()
    if N == 1:
        result = ttheta_plus_special(lattice, prec)
    else:
        result = _ttheta_plus_general(lattice, prec, workers)

    if cache is not None:
        cache.store(result)
    return result


def _rational_terms(
    lattice: IdealLattice,
    totals: dict[Fraction, NDArray[Any]],
    K: int,
    common: int,
) -> list[dict[Fraction, Fraction]]:
    """Reduce summed coset contributions to rational coefficients.

    Every coefficient at an exponent outside ``-q(h) + Z`` must cancel across
    the coset sum, and every surviving one must lie in Q.
    """
    field = cyclotomic_field(K)
    qvals = lattice.group.qvals
    terms: list[dict[Fraction, Fraction]] = [{} for _ in range(len(qvals))]
    for e in sorted(totals):
        coords = field.reduce(totals[e])
        for h, q in enumerate(qvals):
            if (e + q) % 1:
                if any(coords[h]):
                    raise ConsistencyError(
                        f"Coefficient of q^{e} in component {h} of Theta+ for {lattice} "
                        f"does not cancel over the cosets"
                    )
                continue
            if any(coords[h, 1:]):
                raise ConsistencyError(
                    f"Coefficient of q^{e} in component {h} of Theta+ for {lattice} "
                    f"is not rational"
                )
            value = Fraction(int(coords[h, 0]), common)
            if value:
                terms[h][e] = value
    return terms


def _modular_terms(
    lattice: IdealLattice,
    averager: _CosetAverager,
    plans: Sequence[_CosetPlan],
    multipliers: Sequence[int],
    common: int,
    workers: int,
) -> list[dict[Fraction, Fraction]]:
    """The coset sum rebuilt from its images modulo primes p = 1 mod K.

    Numerators come from the Chinese remainder theorem and are accepted once
    another prime leaves every symmetric residue unchanged. Each prime embeds
    zeta_K through its own root, so a coefficient outside Q does not settle.
    """
    order = averager.order
    moduli: list[int] = []
    stacks: dict[Fraction, list[NDArray[np.int64]]] = {}
    previous: dict[Fraction, tuple[int, ...]] | None = None
    for p, root in islice(modular_primes(averager.K), MAX_PRIMES):
        reps = averager.modular_reps(p, root)
        logger.info(f"Coset sum modulo p={p} for {lattice}")
        parts = _map_cosets(
            lambda i: averager.residues(plans[i], multipliers[i], reps), len(plans), workers
        )
        totals: dict[Fraction, NDArray[np.int64]] = {}
        for part in parts:
            for e, vector in part.items():
                totals[e] = (totals[e] + vector) % p if e in totals else vector
        moduli.append(p)
        for e, vector in totals.items():
            stacks.setdefault(e, []).append(vector)
        values = {
            e: tuple(
                int(crt(moduli, [int(v[h]) for v in stack], symmetric=True)[0])
                for h in range(order)
            )
            for e, stack in stacks.items()
        }
        if values == previous:
            break
        previous = values
    else:
        raise ConsistencyError(
            f"Theta+ for {lattice} did not settle modulo {len(moduli)} primes"
        )

    qvals = lattice.group.qvals
    terms: list[dict[Fraction, Fraction]] = [{} for _ in range(order)]
    for e in sorted(values):
        for h, value in enumerate(values[e]):
            if not value:
                continue
            if (e + qvals[h]) % 1:
                raise ConsistencyError(
                    f"Coefficient of q^{e} in component {h} of Theta+ for {lattice} "
                    f"does not cancel over the cosets"
                )
            terms[h][e] = Fraction(value, common)
    return terms


def _map_cosets(run: Callable[[int], _T], count: int, workers: int) -> list[_T]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, range(count)))
    return [run(i) for i in range(count)]


def _ttheta_plus_general(lattice: IdealLattice, prec: Fraction, workers: int) -> MockPlusForm:
    N, _ = lattice.level_data()
    inner = ttheta_plus_special(lattice.scaled(N), prec * N)
    averager = _CosetAverager(lattice, inner, prec)
    reps = coset_reps(N)
    plans = [averager.plan(g) for g in reps]
    common = math.lcm(*(p.factor.denominator for p in plans))
    multipliers = [int(p.factor * common) for p in plans]
    logger.info(
        f"Averaging over {len(reps)} cosets of Gamma_0({N}) for {lattice} "
        f"(K={averager.K}, |L*/NL|={len(inner.form)})"
    )

    if averager.array_size > EXACT_AVERAGE_LIMIT:
        terms = _modular_terms(lattice, averager, plans, multipliers, common, workers)
    else:

        def run(i: int) -> dict[Fraction, NDArray[Any]]:
            plan = plans[i]
            logger.info(
                f"Coset {i + 1}/{len(plans)}: gamma={plan.data.gamma}, "
                f"N_gamma={plan.data.n_gamma}, b={plan.data.b}"
            )
            return averager.contribution(plan, multipliers[i])

        totals: dict[Fraction, NDArray[Any]] = {}
        for part in _map_cosets(run, len(plans), workers):
            for e, block in part.items():
                totals[e] = totals[e] + block if e in totals else block
        terms = _rational_terms(lattice, totals, averager.K, common)

    components = tuple(QSeries.from_terms(t, prec) for t in terms)
    form = VVForm(components, Fraction(1), -1, lattice.group)
    result = MockPlusForm(lattice, form, kappa_certificate(lattice))
    result.check_denominators()
    return result


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoloCoefficient:
    """c+_L(n, h) with the data it was assembled from."""

    h: int
    n: Fraction
    value: LogValue
    mock_coefficient: Fraction
    orbit_count: int
    shadow: int

    def to_json(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "n": str(self.n),
            "value": self.value.to_json(),
            "mockCoefficient": str(self.mock_coefficient),
            "orbitCount": self.orbit_count,
            "shadow": self.shadow,
        }


def holo_coefficient(
    lattice: IdealLattice,
    h: int | QuadElem,
    n: Fraction | int | str,
    form: MockPlusForm | None = None,
) -> HoloCoefficient:
    """c+_L(n, h) = sum a(Lambda) over orbits with Q = -n, plus log(eps_L) [q^n]Theta+_h.

    Raises:
        PrecisionShortfallError: if ``form`` is not known at q^n
    """
    n = as_fraction(n)
    group = lattice.group
    index = h if isinstance(h, int) else group.index_of(h)
    if form is None:
        form = ttheta_plus(lattice, max(n + 1, Fraction(1)))
    mock = form.coefficient(index, n)
    units = unit_data(lattice)

    value = LogValue.log_eps(eps_exponent(units.eps_l) * mock)
    orbits = []
    shadow = 0
    if n > 0:
        orbits = enumerate_orbits(lattice, index, n, sign_q=-1)
        for rep in orbits:
            value = value + a_of_orbit(rep, units.eps_l)
        if not units.has_negative_unit:
            shadow = sum(r.sign_lambda0 for r in enumerate_orbits(lattice, index, n, 1))
    return HoloCoefficient(index, n, value, mock, len(orbits), shadow)


def eigen_coefficient(
    lattice: IdealLattice,
    weights: Mapping[int, Fraction | int],
    n: Fraction | int | str,
    form: MockPlusForm | None = None,
) -> LogValue:
    """sum_h w_h c+_L(n, h)."""
    total = LogValue.zero()
    for h, w in weights.items():
        if w:
            total = total + holo_coefficient(lattice, h, n, form).value * Fraction(w)
    return total


def coefficient_table(
    lattice: IdealLattice, h: int, exponents: Sequence[Fraction], form: MockPlusForm
) -> list[HoloCoefficient]:
    return [holo_coefficient(lattice, h, n, form) for n in exponents]


# ---------------------------------------------------------------------------
# Cache
# ---------------------------------------------------------------------------


class MockFormCache:
    """JSON files of MockPlusForms keyed by the SHA-256 of the lattice."""

    def __init__(self, directory: Path | str):
        self._directory = Path(directory)

    @property
    def directory(self) -> Path:
        return self._directory

    @staticmethod
    def key(lattice: IdealLattice) -> str:
        canonical = json.dumps(lattice.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def path(self, lattice: IdealLattice) -> Path:
        return self._directory / f"{self.key(lattice)}.json"

    def load(self, lattice: IdealLattice, prec: Fraction) -> MockPlusForm | None:
        """A cached form of precision at least ``prec``, truncated to ``prec``."""
        path = self.path(lattice)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text())
            form = MockPlusForm.from_json(data)
        except (OSError, ValueError, KeyError) as exc:
            logger.warning(f"Ignoring unreadable cache entry {path}: {exc}")
            return None
        if form.prec < prec:
            logger.debug(f"Cached form at {path} only reaches q^{form.prec}")
            return None
        logger.debug(f"Loaded {lattice} from {path}")
        return form.truncate(prec)

    def store(self, form: MockPlusForm) -> Path:
        path = self.path(form.lattice)
        existing = self.load(form.lattice, form.prec)
        if existing is not None:
            return path
        self._directory.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(form.to_json(), sort_keys=True))
        tmp.replace(path)
        logger.debug(f"Stored {form.lattice} at {path}")
        return path
