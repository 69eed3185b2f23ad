import numpy as np
import pytest

from ssmcascade.linalg import (
    ContractError,
    MatvecCounter,
    SignalBlock,
    as_matrix,
    as_signal,
    block_svd,
    deterministic,
    is_deterministic,
    mat_mul,
    mat_vec,
    repeated_squares,
    spectral_norm,
    spectral_radius_estimate,
)

from conftest import HIPPO_D1


class TestMatMul:
    def test_identity(self, rng):
        m = rng.standard_normal((2, 2))
        np.testing.assert_array_equal(mat_mul(np.eye(2), m), m)

    def test_scalar(self):
        assert mat_mul([[0.5]], [[0.5]]).tolist() == [[0.25]]

    def test_hand_product(self):
        a = [[1, 1], [0, 1]]
        assert mat_mul(a, a).tolist() == [[1, 2], [0, 1]]

    def test_mismatch(self):
        with pytest.raises(ContractError):
            mat_mul(np.ones((2, 3)), np.ones((2, 3)))

    def test_associativity(self, rng):
        for _ in range(20):
            a, b, c = (rng.uniform(-1, 1, (8, 8)) for _ in range(3))
            lhs = mat_mul(mat_mul(a, b), c)
            rhs = mat_mul(a, mat_mul(b, c))
            scale = np.linalg.norm(a, 2) * np.linalg.norm(b, 2) * np.linalg.norm(c, 2)
            assert np.linalg.norm(lhs - rhs, 2) <= 1e-12 * scale


class TestMatVec:
    def test_identity(self):
        assert mat_vec(np.eye(3), [1.0, 2.0, 3.0]).tolist() == [1.0, 2.0, 3.0]

    def test_zero(self):
        assert mat_vec(np.zeros((3, 3)), [1.0, 2.0, 3.0]).tolist() == [0.0, 0.0, 0.0]

    def test_hand(self):
        assert mat_vec([[2, 0], [1, 1]], [1, 1]).tolist() == [2.0, 2.0]

    def test_counter(self):
        counter = MatvecCounter()
        mat_vec(np.eye(3), np.ones(3), counter)
        mat_vec(np.eye(3), np.ones(3), counter)
        assert counter.count == 2
        assert counter.flops == 2 * 2 * 9

    def test_mismatch(self):
        with pytest.raises(ContractError):
            mat_vec(np.eye(3), np.ones(2))


class TestRepeatedSquares:
    def test_identity(self):
        powers = repeated_squares(np.eye(3), 4)
        assert len(powers) == 4
        for p in powers:
            np.testing.assert_array_equal(p, np.eye(3))

    def test_published_power_decay(self):
        last = repeated_squares([[HIPPO_D1]], 16)[-1][0, 0]
        assert last == pytest.approx(5.87548e-15, rel=1e-4)

    def test_hippo_powers_stay_triangular(self, hippo):
        powers = repeated_squares(hippo.Abar, 16)
        diag = np.diag(hippo.Abar).copy()
        # Oracle: scalar repeated squaring of the diagonal entries.
        for k, p in enumerate(powers):
            assert np.all(np.triu(p, 1) == 0.0)
            np.testing.assert_allclose(np.diag(p), diag, rtol=1e-15, atol=0)
            diag = diag * diag

    def test_matches_repeated_multiplication(self, rng):
        for _ in range(10):
            a = rng.uniform(-1, 1, (4, 4))
            a *= 0.9 / np.linalg.norm(a, 2)
            powers = repeated_squares(a, 7)
            for k in range(7):
                ref = a.copy()
                for _ in range(2 ** k - 1):
                    ref = mat_mul(ref, a)
                np.testing.assert_allclose(powers[k], ref, rtol=1e-12, atol=0)

    def test_non_square(self):
        with pytest.raises(ContractError):
            repeated_squares(np.ones((2, 3)), 2)

    def test_count(self):
        with pytest.raises(ContractError):
            repeated_squares(np.eye(2), 0)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([0.5, 0.9])) == pytest.approx(0.9, rel=1e-10)

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 3))) == 0.0

    def test_nilpotent(self):
        assert spectral_norm([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0, rel=1e-10)

    def test_dominates_eigenvalues(self, rng):
        for _ in range(50):
            a = np.tril(rng.standard_normal((6, 6)))
            assert spectral_norm(a) >= np.max(np.abs(np.diag(a))) * (1 - 1e-14)


class TestBlockSVD:
    def test_outer_product(self, rng):
        u, v = rng.standard_normal(7), rng.standard_normal(5)
        U, S, V, rank = block_svd(np.outer(u, v), 1e-12)
        assert rank == 1
        np.testing.assert_allclose(U @ np.diag(S) @ V.T, np.outer(u, v), atol=1e-14 * np.abs(np.outer(u, v)).max())

    def test_zero(self):
        U, S, V, rank = block_svd(np.zeros((4, 3)), 1e-12)
        assert rank == 0
        assert U.shape == (4, 0) and V.shape == (3, 0)

    def test_full_reconstruction(self, rng):
        a = rng.standard_normal((8, 8))
        U, S, V, rank = block_svd(a, 0.0)
        assert rank == 8
        smax = np.linalg.norm(a, 2)
        assert np.linalg.norm(a - U @ np.diag(S) @ V.T, 2) <= 1e-13 * smax

    def test_truncation_error_bound(self, rng):
        a = rng.standard_normal((10, 6)) @ np.diag(10.0 ** -np.arange(6)) @ rng.standard_normal((6, 9))
        for tol in (1e-1, 1e-3, 1e-5):
            U, S, V, rank = block_svd(a, tol)
            smax = np.linalg.norm(a, 2)
            assert np.linalg.norm(a - U @ np.diag(S) @ V.T, 2) <= tol * smax

    def test_negative_tol(self):
        with pytest.raises(ContractError):
            block_svd(np.eye(2), -1.0)


def test_as_matrix_rejects_nan():
    with pytest.raises(ContractError):
        as_matrix([[np.nan]])


def test_spectral_radius_triangular_uses_diagonal():
    assert spectral_radius_estimate([[0.5, 0.0], [100.0, -0.7]]) == 0.7


def test_signal_block_views():
    block = SignalBlock(np.arange(6.0).reshape(2, 3))
    assert (block.dim, block.length) == (2, 3)
    assert block.column(1).tolist() == [1.0, 4.0]
    assert as_signal([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(ContractError):
        as_signal(block, dim=3)


def test_deterministic_context():
    assert is_deterministic()
    with deterministic(False):
        assert not is_deterministic()
    assert is_deterministic()
