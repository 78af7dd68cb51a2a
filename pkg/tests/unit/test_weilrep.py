"""Unit tests for SL2(Z) words, Gamma_0(N) cosets and exact Weil representations."""

import numpy as np
import pytest

from maassforge.errors import ConductorError, DomainError
from maassforge.exact import QuadElem
from maassforge.quadfield import IdealLattice, QuadLattice, ResidueRing
from maassforge.weilrep import (
    ModularWeilRepresentation,
    SL2Elem,
    WeilRepresentation,
    c_am,
    c_LN,
    coset_reps,
    gamma_decompose,
    intertwines,
    mod_matmul,
    modular_primes,
    psi_equivariant,
    psi_index,
    psi_map,
    psi_matrix,
    rho_m,
    scaling_projection,
    weil_identity_holds,
    word_decompose,
    word_product,
)

SAMPLE_MATRICES = [
    SL2Elem.identity(),
    SL2Elem.S(),
    SL2Elem.T(5),
    -SL2Elem.identity(),
    SL2Elem(2, 1, 7, 4),
    SL2Elem(5, 2, 2, 1),
    SL2Elem(3, -1, 7, -2),
    SL2Elem(7, 3, 16, 7),
]


class TestSL2:
    """Test matrices and their S/T words."""

    def test_determinant(self):
        with pytest.raises(DomainError):
            SL2Elem(1, 1, 1, 1)

    @pytest.mark.parametrize("g", SAMPLE_MATRICES, ids=str)
    @pytest.mark.parametrize("rounding", ["floor", "nearest"])
    def test_word_round_trip(self, g, rounding):
        """Test that the letters multiply back to g."""
        assert word_product(word_decompose(g, rounding)) == g

    def test_inverse(self):
        g = SL2Elem(2, 1, 7, 4)
        assert g @ g.inverse() == SL2Elem.identity()


class TestCosets:
    """Test coset representatives of Gamma_0(N)."""

    @pytest.mark.parametrize(
        "N, index", [(1, 1), (2, 3), (4, 6), (6, 12), (10, 18), (12, 24)]
    )
    def test_psi_index(self, N, index):
        assert psi_index(N) == index

    @pytest.mark.parametrize("N", [2, 6, 12])
    def test_representatives_are_distinct(self, N):
        """Test that no two representatives lie in the same coset."""
        reps = coset_reps(N)
        assert len(reps) == psi_index(N)
        for i, g in enumerate(reps):
            for h in reps[i + 1 :]:
                assert not (g @ h.inverse()).in_gamma0(N)

    @pytest.mark.parametrize("N", [2, 6, 12])
    def test_decomposition(self, N):
        """Test (N 0; 0 1) gamma = gamma_N (n_gamma b; 0 N/n_gamma) on every coset."""
        for g in coset_reps(N):
            data = gamma_decompose(g, N)
            n, b, m = data.n_gamma, data.b, N // data.n_gamma
            x = data.gamma_n
            assert (N * g.a, N * g.b, g.c, g.d) == (
                x.a * n,
                x.a * b + x.b * m,
                x.c * n,
                x.c * b + x.d * m,
            )
            assert 0 <= b < m

    def test_bad_level(self):
        with pytest.raises(DomainError):
            coset_reps(0)


class TestWeilRepresentation:
    """Test rho_L through the relations of SL2(Z)."""

    @pytest.fixture(params=[(5, 1), (12, 1)], ids=["D5", "D12"])
    def rep(self, request):
        D, M = request.param
        return WeilRepresentation(IdealLattice.from_order(D, M).group)

    def test_relations(self, rep):
        """Test S^4 = 1 and (ST)^3 = S^2 for even signature."""
        T, S = rep.generators()
        assert (S @ S @ S @ S).is_identity()
        ST = S @ T
        assert ST @ ST @ ST == S @ S

    def test_unitary(self, rep):
        _, S = rep.generators()
        assert (S @ S.conjugate_transpose()).is_identity()

    def test_level_kills_t(self, rep):
        """Test that T^d_L acts trivially."""
        assert rep.matrix(SL2Elem.T(rep.group.level)).is_identity()

    def test_homomorphism(self, rep):
        g, h = SL2Elem(2, 1, 7, 4), SL2Elem(5, 2, 2, 1)
        assert rep.matrix(g @ h) == rep.matrix(g) @ rep.matrix(h)

    def test_rounding_independent(self, rep):
        """Test that two different words for g give the same matrix."""
        g = SL2Elem(7, 3, 16, 7)
        assert rep.matrix(g, "nearest") == rep.matrix(g)

    def test_conductor(self, d5):
        with pytest.raises(ConductorError):
            WeilRepresentation(d5.group, 7)


class TestModularReduction:
    """Test the Weil representation over F_p against the group-ring one."""

    @pytest.fixture
    def reps(self, d12):
        exact = WeilRepresentation(d12.group)
        p, root = next(modular_primes(exact.K))
        return exact, ModularWeilRepresentation(d12.group, exact.K, p, root)

    def test_primes(self):
        for p, root in list(modular_primes(24))[:3]:
            assert p % 24 == 1
            assert pow(root, 24, p) == 1
            assert pow(root, 12, p) != 1 and pow(root, 8, p) != 1

    @pytest.mark.parametrize("g", SAMPLE_MATRICES)
    def test_matches_group_ring(self, reps, g):
        """Test that applying a word mod p agrees with evaluating the group-ring result."""
        exact, modular = reps
        word = word_decompose(g)
        expected = modular.evaluate(exact.apply_word(exact.identity_rows(), word))
        assert np.array_equal(modular.apply_word(modular.identity_rows(), word), expected)

    def test_mod_matmul_is_exact(self):
        p, _ = next(modular_primes(8))
        rng = np.random.default_rng(7)
        A = rng.integers(0, p, size=(3, 5000))
        B = rng.integers(0, p, size=(5000, 2))
        expected = (A.astype(object) @ B.astype(object)) % p
        assert np.array_equal(mod_matmul(A, B, p), expected.astype(np.int64))

    def test_root_must_be_primitive(self, d12):
        K = WeilRepresentation(d12.group).K
        p, root = next(modular_primes(K))
        with pytest.raises(DomainError):
            ModularWeilRepresentation(d12.group, K, p, pow(root, 2, p))

    def test_prime_must_match_conductor(self, d12):
        K = WeilRepresentation(d12.group).K
        p, root = next(modular_primes(2 * K))
        with pytest.raises(ConductorError):
            ModularWeilRepresentation(d12.group, K + 1, p, root)


class TestIntertwiners:
    """Test the 0/1 matrices between discriminant groups."""

    def test_c_ln_shape(self, d5):
        """Test that each h in L*/L has |L/NL| = N^2 preimages in L*/NL."""
        matrix = c_LN(d5, 2)
        assert (matrix.sum(axis=1) == 4).all()
        assert (matrix.sum(axis=0) == 1).all()

    @pytest.mark.parametrize(
        "g", [SL2Elem.T(), SL2Elem(1, 0, 2, 1), SL2Elem(3, 1, 2, 1)], ids=str
    )
    def test_scaling_identity(self, d5, g):
        assert weil_identity_holds(d5, 2, g)

    def test_scaling_identity_needs_gamma0(self, d5):
        with pytest.raises(DomainError):
            weil_identity_holds(d5, 2, SL2Elem.S())

    def test_sublattice(self, d5):
        """Test psi for 2L inside L with the restricted form."""
        sub = QuadLattice(5, [b * 2 for b in d5.basis], d5.scale, d5.sign)
        matrix = psi_matrix(sub, d5)
        assert (matrix.sum(axis=0) <= 1).all()
        assert psi_equivariant(sub, d5, SL2Elem.S())
        assert psi_equivariant(sub, d5, SL2Elem.T())

    @pytest.mark.parametrize(
        "g", [SL2Elem.S(), SL2Elem.T(), SL2Elem(2, 1, 1, 1)], ids=str
    )
    def test_sublattice_agrees_with_full_matrices(self, d5, g):
        """Test the letter-wise psi check against the full matrix products."""
        sub = QuadLattice(5, [b * 2 for b in d5.basis], d5.scale, d5.sign)
        image = psi_map(sub, d5)
        assert intertwines(d5.group, sub.group, image, g, g)
        assert psi_equivariant(sub, d5, g)

    def test_psi_on_the_d12_special_lattice(self, d12):
        """Test psi for P = 2A^2 (Z + sqrt(12) Z) inside L_{a, 2AN'^2}, |P*/P| = 15552."""
        special = d12.scaled(6)
        side = 2 * special.A**2
        sub = QuadLattice(12, [QuadElem(12, side), QuadElem(12, 0, side)], special.scale)
        assert sub.group.order == 15552
        assert psi_equivariant(sub, special, SL2Elem.S())
        assert psi_equivariant(sub, special, SL2Elem.T())

    def test_psi_needs_the_restricted_form(self, d5):
        sub = QuadLattice(5, [b * 2 for b in d5.basis], d5.scale * 2, d5.sign)
        with pytest.raises(DomainError):
            psi_equivariant(sub, d5, SL2Elem.S())

    def test_index_map_size(self, d5):
        with pytest.raises(DomainError):
            intertwines(d5.group, d5.group, scaling_projection(d5, 2), SL2Elem.T(), SL2Elem.T())

    def test_not_a_sublattice(self, d5):
        with pytest.raises(DomainError):
            psi_matrix(d5, d5.scaled(2))

    def test_c_am_modulus_mismatch(self, d5, d29_modulus):
        with pytest.raises(DomainError):
            c_am(d5, ResidueRing(29, d29_modulus))


class TestRhoM:
    """Test the finite representation on O/m."""

    def test_identity_and_twist(self, d29_modulus):
        """Test chi_D(d) e_{d sigma} for d = 1 and d = 2."""
        ring = ResidueRing(29, d29_modulus)
        identity = rho_m(ring, SL2Elem(1, 0, 145, 1))
        assert (identity == np.eye(ring.order, dtype=int)).all()
        twisted = rho_m(ring, SL2Elem(73, 1, 145, 2))
        assert all(sum(twisted[:, j]) == -1 for j in range(ring.order))

    def test_outside_gamma0(self, d29_modulus):
        with pytest.raises(DomainError):
            rho_m(ResidueRing(29, d29_modulus), SL2Elem.S())
