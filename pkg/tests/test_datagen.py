import numpy as np
import pytest

from odpca.datagen import (
    SeededStream,
    default_spikes,
    make_spiked_model,
    sample_gaussian,
    sample_heavy_shuffled,
)
from odpca.linalg import empirical_covariance, top_k_eig
from odpca.subspace import projection_distance, spectrum_stats


class TestSeededStream:
    def test_deterministic(self):
        a = SeededStream(99).standard_normal((4, 3))
        b = SeededStream(99).standard_normal((4, 3))
        np.testing.assert_array_equal(a, b)

    def test_counter_advances_per_draw(self):
        s = SeededStream(5)
        s.standard_normal((3, 7))
        assert s.counter == 21
        s.random(10)
        assert s.counter == 31

    def test_draws_are_pure_functions_of_counter(self):
        # one long pull equals the concatenation of arbitrary shorter pulls
        whole = SeededStream(11).standard_normal(100)
        s = SeededStream(11)
        parts = np.concatenate([s.standard_normal(13), s.standard_normal(50), s.standard_normal(37)])
        np.testing.assert_array_equal(whole, parts)

    def test_at_repositions(self):
        whole = SeededStream(3).standard_normal(60)
        tail = SeededStream(3).at(23).standard_normal(37)
        np.testing.assert_array_equal(whole[23:], tail)

    def test_disjoint_ranges_are_independent_of_batching(self):
        # (node, round) cells generated separately match the pooled slices
        d, n = 4, 5
        pooled = SeededStream(8).standard_normal((4 * n, d))
        for cell in range(4):
            start = cell * n * d
            block = SeededStream(8).at(start).standard_normal((n, d))
            np.testing.assert_array_equal(pooled[cell * n : (cell + 1) * n], block)


class TestSpikedModel:
    def test_arithmetic_example(self):
        model = make_spiked_model(3, 1, (4.0,), 1.0, 0)
        stats = spectrum_stats(model.eigenvalues, 1)
        assert stats.eigengap == pytest.approx(3.0)
        assert stats.effective_rank == pytest.approx(1.5)

    def test_stats_round_trip(self, default_model):
        stats = default_model.stats()
        assert stats.lambda1 == 10.0
        assert stats.lambda_k == 6.0
        assert stats.lambda_k1 == 1.0

    def test_covariance_top_k_matches_ground_truth(self, default_model):
        _, basis = top_k_eig(default_model.covariance(), default_model.rank)
        assert projection_distance(basis, default_model.ground_truth) <= 1e-8

    def test_basis_orthonormal_and_deterministic(self):
        a = make_spiked_model(12, 3, (5.0, 4.0, 3.0), 0.5, 7)
        b = make_spiked_model(12, 3, (5.0, 4.0, 3.0), 0.5, 7)
        np.testing.assert_array_equal(a.full_basis, b.full_basis)
        np.testing.assert_allclose(a.full_basis.T @ a.full_basis, np.eye(12), atol=1e-12)

    def test_ground_truth_prefix(self, default_model):
        np.testing.assert_array_equal(
            default_model.ground_truth, default_model.full_basis[:, :5]
        )

    def test_default_spikes(self):
        np.testing.assert_array_equal(default_spikes(5), [10.0, 9.0, 8.0, 7.0, 6.0])

    def test_ordering_violations(self):
        with pytest.raises(ValueError, match="non-increasing"):
            make_spiked_model(5, 2, (3.0, 4.0), 1.0, 0)
        with pytest.raises(ValueError, match="bulk"):
            make_spiked_model(5, 2, (3.0, 2.0), 2.5, 0)
        with pytest.raises(ValueError, match="bulk"):
            make_spiked_model(5, 2, (3.0, 2.0), 0.0, 0)


def _covariance_se(cov, n):
    # Gaussian covariance-entry standard errors: Var(x_i x_j) = S_ii S_jj + S_ij^2
    diag = np.diag(cov)
    return np.sqrt((np.outer(diag, diag) + cov**2) / n)


class TestSamplers:
    def test_gaussian_deterministic(self, default_model):
        a = sample_gaussian(default_model, 10, SeededStream(1))
        b = sample_gaussian(default_model, 10, SeededStream(1))
        np.testing.assert_array_equal(a, b)

    def test_gaussian_covariance_clt(self):
        model = make_spiked_model(5, 1, (4.0,), 1.0, 2)
        n = 100_000
        x = sample_gaussian(model, n, SeededStream(12))
        cov = model.covariance()
        emp = empirical_covariance(x)
        assert np.all(np.abs(emp - cov) <= 5.0 * _covariance_se(cov, n))

    def test_gaussian_zero_mean(self):
        model = make_spiked_model(5, 1, (4.0,), 1.0, 2)
        n = 100_000
        x = sample_gaussian(model, n, SeededStream(21))
        sigma = np.sqrt(np.diag(model.covariance()))
        assert np.all(np.abs(x.mean(axis=0)) <= 5.0 * sigma / np.sqrt(n))

    def test_gaussian_counter_advance(self, default_model):
        s = SeededStream(0)
        sample_gaussian(default_model, 7, s)
        assert s.counter == 7 * default_model.ambient_dim

    def test_heavy_deterministic(self, default_model):
        a = sample_heavy_shuffled(default_model, 10, SeededStream(1))
        b = sample_heavy_shuffled(default_model, 10, SeededStream(1))
        np.testing.assert_array_equal(a, b)

    def test_heavy_covariance_clt(self):
        model = make_spiked_model(5, 1, (4.0,), 1.0, 2)
        n = 100_000
        x = sample_heavy_shuffled(model, n, SeededStream(34))
        cov = model.covariance()
        emp = empirical_covariance(x)
        assert np.all(np.abs(emp - cov) <= 5.0 * _covariance_se(cov, n))

    def test_heavy_symmetric_marginals(self):
        model = make_spiked_model(5, 1, (4.0,), 1.0, 2)
        n = 20_000
        x = sample_heavy_shuffled(model, n, SeededStream(55))
        centered = x - x.mean(axis=0)
        m2 = np.mean(centered**2, axis=0)
        m3 = np.mean(centered**3, axis=0)
        skew = m3 / m2**1.5
        assert np.all(np.abs(skew) <= 5.0 * np.sqrt(6.0 / n))

    def test_heavy_counter_advance(self, default_model):
        s = SeededStream(0)
        sample_heavy_shuffled(default_model, 7, s)
        assert s.counter == 2 * 7 * default_model.ambient_dim

    def test_bad_n(self, default_model):
        with pytest.raises(ValueError):
            sample_gaussian(default_model, 0, SeededStream(0))
