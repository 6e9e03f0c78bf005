import math

import numpy as np
import pytest

from rank1_spectra.ensemble import (
    EnsembleConfig,
    derive_trial_seed,
    eigenvalues,
    empirical_moments,
    esd_histogram,
    monte_carlo,
    sample_matrix,
    spectral_sample,
)
from rank1_spectra.sigma_model import SigmaSpec, parse_sigma_spec

EXP_SPEC = "expr:exp(-4*i/n)"


def explicit_spec(values):
    return SigmaSpec("explicit", tuple(values), "explicit:inline")


def ones_spec():
    return parse_sigma_spec("const:1")


class TestSeedDerivation:
    def test_distinct_and_mixed(self):
        seeds = {derive_trial_seed(12345, t) for t in range(1000)}
        assert len(seeds) == 1000
        assert derive_trial_seed(12345, 0) != 12345

    def test_deterministic(self):
        assert derive_trial_seed(7, 3) == derive_trial_seed(7, 3)


class TestSampling:
    def test_single_site_rademacher(self):
        cfg = EnsembleConfig(n=1, sigma=ones_spec(), seed=1)
        seen = {sample_matrix(cfg, t)[0, 0] for t in range(64)}
        assert seen == {-1.0, 1.0}

    def test_two_site_values_and_determinism(self):
        cfg = EnsembleConfig(n=2, sigma=ones_spec(), seed=5)
        A = sample_matrix(cfg)
        B = sample_matrix(cfg)
        np.testing.assert_array_equal(A, B)
        root_half = 1.0 / math.sqrt(2.0)
        assert np.all(np.isin(np.abs(A), [root_half]))
        assert A[0, 1] == A[1, 0]

    def test_rademacher_entry_variance_is_deterministic(self):
        sigma = (0.5, 0.25)
        cfg = EnsembleConfig(n=2, sigma=explicit_spec(sigma), seed=9)
        for t in range(20):
            A = sample_matrix(cfg, t)
            assert (A[0, 1] * math.sqrt(2)) ** 2 == pytest.approx(0.125, rel=1e-12)

    def test_uniform_entries_bounded_and_variance(self):
        sigma = (0.5, 0.25)
        cfg = EnsembleConfig(n=2, sigma=explicit_spec(sigma), distribution="uniform", seed=17)
        vals = np.array([sample_matrix(cfg, t)[0, 1] * math.sqrt(2) for t in range(4000)])
        assert np.max(np.abs(vals)) <= math.sqrt(3 * 0.125) + 1e-12
        se = np.std(vals ** 2, ddof=1) / math.sqrt(vals.size)
        assert abs(np.mean(vals ** 2) - 0.125) < 3 * se

    def test_truncated_gaussian_bounded_and_variance(self):
        sigma = (0.8, 0.6, 0.9)
        K = 3.0 * 0.9
        cfg = EnsembleConfig(
            n=3, sigma=explicit_spec(sigma), distribution="truncated_gaussian", K=K, seed=23
        )
        entries = []
        for t in range(1500):
            A = sample_matrix(cfg, t) * math.sqrt(3)
            entries.append(A[0, 1])
        vals = np.array(entries)
        assert np.max(np.abs(vals)) <= K + 1e-9
        target = sigma[0] * sigma[1]
        se = np.std(vals ** 2, ddof=1) / math.sqrt(vals.size)
        assert abs(np.mean(vals ** 2) - target) < 4 * se

    def test_bound_feasibility_errors(self):
        with pytest.raises(ValueError):
            sample_matrix(EnsembleConfig(n=2, sigma=ones_spec(), K=0.5, seed=0))
        with pytest.raises(ValueError):
            sample_matrix(
                EnsembleConfig(n=2, sigma=ones_spec(), distribution="uniform", K=1.0, seed=0)
            )
        with pytest.raises(ValueError):
            sample_matrix(
                EnsembleConfig(
                    n=2, sigma=ones_spec(), distribution="truncated_gaussian", K=1.7, seed=0
                )
            )

    def test_unknown_distribution_rejected(self):
        with pytest.raises(ValueError):
            EnsembleConfig(n=2, sigma=ones_spec(), distribution="gaussian", seed=0)

    def test_scaling_by_two_is_exact(self):
        base = EnsembleConfig(n=30, sigma=parse_sigma_spec(EXP_SPEC), seed=77)
        scaled = EnsembleConfig(n=30, sigma=parse_sigma_spec("expr:2*exp(-4*i/n)"), seed=77)
        A = sample_matrix(base, 4)
        B = sample_matrix(scaled, 4)
        np.testing.assert_array_equal(B, 2.0 * A)
        ra = spectral_sample(base, 4).radius
        rb = spectral_sample(scaled, 4).radius
        assert rb == pytest.approx(2.0 * ra, rel=1e-12)


class TestEigenvalues:
    def test_identity(self):
        np.testing.assert_allclose(eigenvalues(np.eye(3)), [1.0, 1.0, 1.0])

    def test_swap_matrix(self):
        np.testing.assert_allclose(eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1.0, 1.0])

    def test_rejects_asymmetric(self):
        M = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            eigenvalues(M)

    def test_trace_and_frobenius_identities(self):
        cfg = EnsembleConfig(n=50, sigma=parse_sigma_spec(EXP_SPEC), seed=321)
        A = sample_matrix(cfg)
        lam = eigenvalues(A)
        norm = np.linalg.norm(A, 2)
        assert abs(lam.sum() - np.trace(A)) <= 50 * 1e-9 * norm
        assert np.sum(lam ** 2) == pytest.approx(np.sum(A * A), rel=1e-9)

    def test_residual_contract_spot_check(self):
        cfg = EnsembleConfig(n=40, sigma=parse_sigma_spec(EXP_SPEC), seed=5150)
        A = sample_matrix(cfg)
        w, V = np.linalg.eigh(A)
        norm = np.linalg.norm(A, 2)
        for idx in (0, 20, 39):
            r = np.linalg.norm(A @ V[:, idx] - w[idx] * V[:, idx])
            assert r <= 40 * 1e-9 * norm


class TestMomentsAndHistogram:
    def test_hand_moments(self):
        s = spectral_sample(EnsembleConfig(n=2, sigma=ones_spec(), seed=0))
        fake = s.__class__(
            eigenvalues=np.array([-1.0, 1.0]), radius=1.0, trial_index=0, seed_used=0
        )
        m = empirical_moments(fake, 2)
        assert m[0] == 0.0
        assert m[1] == 1.0
        single = s.__class__(
            eigenvalues=np.array([2.0]), radius=2.0, trial_index=0, seed_used=0
        )
        assert empirical_moments(single, 3)[2] == pytest.approx(8.0)

    def test_moment_matches_matrix_power_trace(self):
        cfg = EnsembleConfig(n=20, sigma=parse_sigma_spec(EXP_SPEC), seed=99)
        A = sample_matrix(cfg)
        s = spectral_sample(cfg)
        m2 = empirical_moments(s, 2)[1]
        assert m2 == pytest.approx(np.trace(A @ A) / 20, rel=1e-10)

    def test_histogram_examples(self):
        mk = lambda lam: spectral_sample(
            EnsembleConfig(n=2, sigma=ones_spec(), seed=0)
        ).__class__(eigenvalues=np.asarray(lam), radius=0.0, trial_index=0, seed_used=0)
        h = esd_histogram(mk([-1.0, 1.0]), bins=2)
        np.testing.assert_array_equal(h.counts, [1, 1])
        h3 = esd_histogram(mk([0.0, 0.0, 0.0]), bins=3, value_range=(-1.0, 1.0))
        np.testing.assert_array_equal(h3.counts, [0, 3, 0])
        with pytest.raises(ValueError):
            esd_histogram(mk([0.0]), bins=2, value_range=(1.0, 1.0))

    def test_histogram_conservation(self):
        s = spectral_sample(EnsembleConfig(n=300, sigma=parse_sigma_spec(EXP_SPEC), seed=12))
        assert esd_histogram(s, bins=37).total == 300


class TestMonteCarlo:
    def test_bit_identical_reruns(self):
        cfg = EnsembleConfig(n=40, sigma=parse_sigma_spec(EXP_SPEC), seed=2024)
        a = monte_carlo(cfg, trials=8, k_max=6)
        b = monte_carlo(cfg, trials=8, k_max=6)
        np.testing.assert_array_equal(a.per_trial_moments, b.per_trial_moments)
        np.testing.assert_array_equal(a.radii, b.radii)

    def test_thread_pool_matches_serial(self):
        cfg = EnsembleConfig(n=30, sigma=parse_sigma_spec(EXP_SPEC), seed=11)
        serial = monte_carlo(cfg, trials=10, k_max=4, threads=1)
        pooled = monte_carlo(cfg, trials=10, k_max=4, threads=4)
        np.testing.assert_array_equal(serial.per_trial_moments, pooled.per_trial_moments)

    def test_env_var_controls_threads(self, monkeypatch):
        from rank1_spectra.ensemble import resolve_thread_count

        monkeypatch.delenv("RANK1_SPECTRA_THREADS", raising=False)
        assert resolve_thread_count() == 1
        monkeypatch.setenv("RANK1_SPECTRA_THREADS", "3")
        assert resolve_thread_count() == 3
        monkeypatch.setenv("RANK1_SPECTRA_THREADS", "0")
        assert resolve_thread_count() >= 1

    def test_single_trial_has_no_stderr(self):
        cfg = EnsembleConfig(n=10, sigma=ones_spec(), seed=3)
        mc = monte_carlo(cfg, trials=1, k_max=2)
        assert mc.moment_stderrs is None
        assert mc.radius_stderr is None

    def test_radius_stats_consistent(self):
        cfg = EnsembleConfig(n=25, sigma=ones_spec(), seed=31)
        mc = monte_carlo(cfg, trials=12, k_max=2)
        assert mc.radius_min <= mc.radius_mean <= mc.radius_max
        assert mc.radius_mean == pytest.approx(mc.radii.mean())

    def test_semicircle_second_moment(self):
        cfg = EnsembleConfig(n=600, sigma=ones_spec(), seed=606)
        mc = monte_carlo(cfg, trials=30, k_max=2)
        assert abs(mc.moment_means[1] - 1.0) < 3.0 * mc.moment_stderrs[1]

    def test_odd_moments_are_noise(self):
        cfg = EnsembleConfig(n=80, sigma=parse_sigma_spec(EXP_SPEC), seed=44)
        mc = monte_carlo(cfg, trials=60, k_max=5)
        for k in (1, 3, 5):
            assert abs(mc.moment_means[k - 1]) < 4.0 * mc.moment_stderrs[k - 1]

    def test_pooled_eigenvalues(self):
        cfg = EnsembleConfig(n=15, sigma=ones_spec(), seed=8)
        mc = monte_carlo(cfg, trials=4, k_max=2, collect_eigenvalues=True)
        assert mc.pooled_eigenvalues.shape == (60,)
