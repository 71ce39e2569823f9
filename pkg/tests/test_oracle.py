import math

import numpy as np
import pytest

from condvendi import OracleFailure, ParamError, pair
from condvendi.kernels import cosine_kernel, hadamard, trace_normalize
from condvendi.oracle import (MixtureSpec, check_covariance_spectrum,
                              check_mixture_aggregation,
                              explicit_feature_covariance,
                              gaussian_conditional_sampler, jacobi_eigenvalues,
                              make_correlated_pairs, make_mode_sweep_dataset,
                              sample_mixture, separated_mixture_setup)


class TestJacobi:
    @pytest.mark.parametrize("n", [1, 2, 3, 5, 16, 64])
    def test_agrees_with_lapack(self, n):
        rng = np.random.default_rng(n + 100)
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        lam = jacobi_eigenvalues(a)
        ref = np.sort(np.linalg.eigvalsh(a))[::-1]
        assert np.abs(lam - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())

    def test_diagonal_matrix(self):
        lam = jacobi_eigenvalues(np.diag([3.0, -1.0, 2.0]))
        assert np.array_equal(lam, [3.0, 2.0, -1.0])

    def test_rank_deficient(self):
        v = np.array([1.0, 2.0, 2.0])
        a = np.outer(v, v)
        lam = jacobi_eigenvalues(a)
        assert lam[0] == pytest.approx(9.0, abs=1e-12)
        assert np.abs(lam[1:]).max() <= 1e-12

    def test_rejects_non_square(self):
        with pytest.raises(ParamError):
            jacobi_eigenvalues(np.ones((2, 3)))


class TestFeatureCovariance:
    def test_repeated_unit_vector_is_rank_one(self):
        v = np.array([0.6, 0.8])
        cov = explicit_feature_covariance(np.tile(v, (5, 1)))
        assert np.allclose(cov.matrix, np.outer(v, v), atol=1e-15)

    def test_two_orthonormal_samples(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        cov = explicit_feature_covariance(x)
        assert np.allclose(cov.matrix, np.diag([0.5, 0.5]), atol=1e-15)

    def test_joint_matches_hadamard_kernel_spectrum(self):
        rng = np.random.default_rng(80)
        x, t = rng.standard_normal((16, 3)), rng.standard_normal((16, 4))
        cov = explicit_feature_covariance(x, t)
        assert cov.feature_dim == 12
        joint = trace_normalize(hadamard(cosine_kernel(x), cosine_kernel(t)))
        lam_kernel = np.sort(np.linalg.eigvalsh(joint.values))[::-1]
        lam_cov = np.sort(np.linalg.eigvalsh(cov.matrix))[::-1]
        width = max(16, 12)
        a = np.zeros(width)
        a[:16] = np.clip(lam_kernel, 0, None)
        b = np.zeros(width)
        b[:12] = np.clip(lam_cov, 0, None)
        assert np.abs(a - b).max() <= 1e-9

    def test_dimension_cap(self):
        rng = np.random.default_rng(81)
        with pytest.raises(ParamError):
            explicit_feature_covariance(rng.standard_normal((4, 70)),
                                        rng.standard_normal((4, 70)))


class TestCovarianceSpectrumCheck:
    def test_single_sample(self):
        report = check_covariance_spectrum(pair(np.array([[1.0, 2.0]]),
                                                np.array([[3.0]])))
        assert report.max_eigenvalue_discrepancy <= 1e-12

    def test_random_datasets(self):
        rng = np.random.default_rng(82)
        for _ in range(5):
            n = int(rng.integers(2, 33))
            d = pair(rng.standard_normal((n, 3)), rng.standard_normal((n, 5)))
            report = check_covariance_spectrum(d)
            assert report.max_eigenvalue_discrepancy <= 1e-8
            assert report.max_entropy_discrepancy <= 1e-8

    def test_x_equals_t(self):
        rng = np.random.default_rng(83)
        x = rng.standard_normal((10, 4))
        report = check_covariance_spectrum(pair(x, x))
        assert report.max_eigenvalue_discrepancy <= 1e-8
        assert report.max_entropy_discrepancy <= 1e-8


class TestMixture:
    def test_zero_variance_single_component(self):
        spec = MixtureSpec(weights=np.ones(1), means=np.array([[2.0, -1.0]]),
                           total_variances=np.zeros(1), seed=4)
        samples, labels = sample_mixture(spec, 6)
        assert np.array_equal(samples.data, np.tile([2.0, -1.0], (6, 1)))
        assert np.array_equal(labels, np.ones(6, dtype=int))

    def test_degenerate_weights_rejected_at_construction(self):
        with pytest.raises(ParamError):
            MixtureSpec(weights=np.array([1.0, 0.0]), means=np.zeros((2, 2)),
                        total_variances=np.zeros(2))

    def test_sampling_is_deterministic(self):
        spec = MixtureSpec(weights=np.full(3, 1 / 3), means=np.eye(3) * 5,
                           total_variances=np.full(3, 0.5), seed=11)
        a, la = sample_mixture(spec, 50)
        b, lb = sample_mixture(spec, 50)
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(la, lb)

    def test_total_variance_convention(self):
        # E||T - mu||^2 must track the requested total variance
        spec = MixtureSpec(weights=np.ones(1), means=np.zeros((1, 8)),
                           total_variances=np.array([4.0]), seed=12)
        samples, _ = sample_mixture(spec, 4000)
        emp = np.mean(np.sum(samples.data ** 2, axis=1))
        assert emp == pytest.approx(4.0, rel=0.1)

    def test_conditional_sampler_shapes(self):
        sampler = gaussian_conditional_sampler(np.zeros((3, 5)), np.ones(3))
        out = sampler(np.array([1, 2, 3, 1]), np.random.default_rng(0))
        assert out.shape == (4, 5)


class TestMixtureAggregationCheck:
    def test_single_group_gap_is_negligible(self):
        spec, sampler, sigma_t, sigma_x = separated_mixture_setup(1, seed=0)
        report = check_mixture_aggregation(spec, sampler, 400, sigma_t=sigma_t,
                                           sigma_x=sigma_x, alpha=2.0)
        assert report.passed
        assert report.gap <= 1e-3

    def test_separated_groups_pass(self):
        spec, sampler, sigma_t, sigma_x = separated_mixture_setup(4, seed=1)
        report = check_mixture_aggregation(spec, sampler, 1000, sigma_t=sigma_t,
                                           sigma_x=sigma_x, alpha=2.0)
        assert report.passed
        assert not report.vacuous
        assert report.gap <= report.bound
        assert len(report.group_entropies) == 4

    def test_overlapping_groups_flag_vacuous_bound(self):
        spec, sampler, sigma_t, sigma_x = separated_mixture_setup(
            3, seed=2, separation=0.5, sigma_ratio=1.0)
        report = check_mixture_aggregation(spec, sampler, 300, sigma_t=sigma_t,
                                           sigma_x=sigma_x, alpha=2.0)
        assert report.vacuous
        assert report.passed
        assert math.isinf(report.bound)

    def test_alpha_below_two_rejected(self):
        spec, sampler, sigma_t, sigma_x = separated_mixture_setup(2, seed=3)
        with pytest.raises(ParamError):
            check_mixture_aggregation(spec, sampler, 100, sigma_t=sigma_t,
                                      sigma_x=sigma_x, alpha=1.0)


class TestGenerators:
    def test_mode_sweep_shapes_and_labels(self):
        d = make_mode_sweep_dataset(5, samples_per_mode=20, seed=0)
        assert d.n == 100
        assert d.num_groups == 5
        assert d.x.d == 2 and d.t.d == 1

    def test_mode_sweep_determinism(self):
        a = make_mode_sweep_dataset(3, seed=9)
        b = make_mode_sweep_dataset(3, seed=9)
        assert np.array_equal(a.x.data, b.x.data)
        assert np.array_equal(a.t.data, b.t.data)

    def test_unspecified_prompts_are_uninformative(self):
        d = make_mode_sweep_dataset(4, specified=False, seed=0)
        assert np.abs(d.t.data).max() < 1.0  # jitter only, no mode signal

    def test_substitution_prefixes_are_nested(self):
        base = make_correlated_pairs(64, substitution_rate=0.25, seed=5)
        more = make_correlated_pairs(64, substitution_rate=0.5, seed=5)
        # prompts identical; the first 16 substituted x rows agree too
        assert np.array_equal(base.t.data, more.t.data)
        assert np.array_equal(base.x.data[:16], more.x.data[:16])
        assert np.array_equal(base.x.data[32:], more.x.data[32:])

    def test_substitution_rate_bounds(self):
        with pytest.raises(ParamError):
            make_correlated_pairs(16, substitution_rate=1.5)

    def test_zero_rate_pairs_are_aligned(self):
        d = make_correlated_pairs(32, num_modes=4, substitution_rate=0.0, seed=0)
        x_modes = np.round(d.x.data[:, 0] / 1000.0)
        t_modes = np.round(d.t.data[:, 0] / 1000.0)
        assert np.array_equal(x_modes, t_modes)


def test_oracle_failure_raised_on_discrepancy(monkeypatch):
    import condvendi.oracle as oracle_mod
    rng = np.random.default_rng(84)
    d = pair(rng.standard_normal((6, 2)), rng.standard_normal((6, 2)))
    monkeypatch.setattr(oracle_mod, "_oracle_eigenvalues",
                        lambda m: np.linalg.eigvalsh(m)[::-1] + 1e-3)
    with pytest.raises(OracleFailure):
        check_covariance_spectrum(d)
