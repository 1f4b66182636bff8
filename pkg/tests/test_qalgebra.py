import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from mixsat import qalgebra


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestCanonicalRay:
    def test_normalizes_and_fixes_phase(self):
        v = np.array([0.0, 2.0j, -1.0, 0.5], dtype=complex)
        c = qalgebra.canonical_ray(v)
        assert abs(np.linalg.norm(c) - 1.0) < 1e-12
        k = int(np.argmax(np.abs(c) > 1e-12))
        assert c[k].imag == 0.0 and c[k].real > 0.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            qalgebra.canonical_ray(np.zeros(4, dtype=complex))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            qalgebra.canonical_ray(np.array([np.nan, 1.0]))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bitwise_idempotent(self, seed):
        rng = _rng(seed)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        once = qalgebra.canonical_ray(v)
        twice = qalgebra.canonical_ray(once)
        assert np.array_equal(once, twice)

    def test_vectorized_matches_stability(self):
        rng = _rng(5)
        rows = rng.standard_normal((64, 4)) + 1j * rng.standard_normal((64, 4))
        batch = qalgebra.canonical_rays(rows)
        assert np.array_equal(qalgebra.canonical_rays(batch), batch)
        for row in batch:
            assert np.array_equal(qalgebra.canonical_ray(row), row)


class TestHaarRay:
    def test_unit_norm_and_canonical(self):
        rng = _rng(1)
        for dim in (2, 4):
            for _ in range(50):
                v = qalgebra.haar_ray(dim, rng)
                assert v.shape == (dim,)
                assert abs(np.linalg.norm(v) - 1.0) < 1e-12
                assert np.array_equal(qalgebra.canonical_ray(v), v)

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            qalgebra.haar_ray(3, _rng(0))

    def test_dim2_overlap_uniform(self):
        # |amplitude_0|^2 of a Haar ray on C^2 is uniform on [0, 1]
        rng = _rng(2)
        draws = np.array([abs(qalgebra.haar_ray(2, rng)[0]) ** 2 for _ in range(30000)])
        stat = scipy.stats.kstest(draws, "uniform")
        assert stat.pvalue > 0.001

    def test_dim4_component_moments(self):
        # |a_k|^2 ~ Beta(1, 3): mean 1/4, var 3/80
        rng = _rng(3)
        n = 20000
        draws = np.array([np.abs(qalgebra.haar_ray(4, rng)) ** 2 for _ in range(n)])
        sigma_mean = np.sqrt(3.0 / 80.0 / n)
        for k in range(4):
            assert abs(draws[:, k].mean() - 0.25) < 3 * sigma_mean


class TestTransferMatrix:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_orthogonality_identity(self, seed):
        # <phi | (T psi) x psi> = 0 for every phi and psi
        rng = _rng(seed)
        phi = qalgebra.haar_ray(4, rng)
        psi = qalgebra.haar_ray(2, rng)
        t = qalgebra.transfer_matrix(phi)
        assert abs(qalgebra.clause_inner(phi, t @ psi, psi)) < 1e-12

    def test_orthogonality_identity_bulk(self):
        rng = _rng(11)
        worst = 0.0
        for _ in range(10000):
            phi = qalgebra.haar_ray(4, rng)
            psi = qalgebra.haar_ray(2, rng)
            worst = max(worst, abs(qalgebra.clause_inner(phi, qalgebra.transfer_matrix(phi) @ psi, psi)))
        assert worst < 1e-12

    def test_classical_projector_rank_one(self):
        # phi = |00>: forbids (0, 0); T psi lands on |1>_i unless psi kills it
        phi = np.array([1.0, 0, 0, 0], dtype=complex)
        t = qalgebra.transfer_matrix(phi)
        assert np.linalg.matrix_rank(t) == 1
        rng = _rng(4)
        for _ in range(20):
            psi = qalgebra.haar_ray(2, rng)
            out = t @ psi
            if abs(psi[0]) > 1e-12:
                assert abs(out[0]) < 1e-12 and abs(out[1]) > 0
        # clause already satisfied by the parent: child unconstrained
        assert np.allclose(t @ np.array([0.0, 1.0]), 0.0)


class TestNullspace:
    def test_identity_has_empty_kernel(self):
        _, dim = qalgebra.nullspace(np.eye(2))
        assert dim == 0

    def test_eps_has_empty_kernel(self):
        _, dim = qalgebra.nullspace(qalgebra.EPS)
        assert dim == 0

    def test_rank_one_projector_on_dim4(self):
        rng = _rng(6)
        phi = qalgebra.haar_ray(4, rng)
        proj = np.outer(phi, phi.conj())
        basis, dim = qalgebra.nullspace(proj)
        assert dim == 3
        assert np.allclose(proj @ basis, 0.0, atol=1e-12)
        # orthonormal
        assert np.allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)

    def test_rank_plus_nullity(self):
        rng = _rng(7)
        for cols in (3, 5, 8):
            for rank in range(0, cols + 1):
                a = np.zeros((10, cols), dtype=complex)
                for _ in range(rank):
                    u = rng.standard_normal(10) + 1j * rng.standard_normal(10)
                    v = rng.standard_normal(cols) + 1j * rng.standard_normal(cols)
                    a += np.outer(u, v)
                _, dim = qalgebra.nullspace(a)
                assert dim == cols - min(rank, cols)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            qalgebra.nullspace(np.array([[np.inf, 0], [0, 1.0]]))


class TestCommonEigenvector:
    def test_simultaneous_diagonal(self):
        v = qalgebra.common_eigenvector([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])
        assert v is not None
        assert min(np.linalg.norm(v - [1, 0]), np.linalg.norm(v - [0, 1])) < 1e-9

    def test_eps_swaps_candidates(self):
        assert qalgebra.common_eigenvector([np.diag([1.0, 2.0]), qalgebra.EPS]) is None

    def test_single_matrix_always_has_one(self):
        rng = _rng(8)
        for _ in range(50):
            m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            v = qalgebra.common_eigenvector([m])
            assert v is not None
            lam = np.vdot(v, m @ v)
            assert np.linalg.norm(m @ v - lam * v) < 1e-9 * (1 + np.abs(m).max())

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            qalgebra.common_eigenvector([])

    def test_scalar_matrices(self):
        v = qalgebra.common_eigenvector([np.eye(2) * 2.0, np.eye(2) * -1.0])
        assert v is not None
