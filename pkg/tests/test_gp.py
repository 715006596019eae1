"""Surrogate tests: kernel, evidence gradient, fitting, fantasy conditioning."""

import math

import numpy as np
import pytest

from molbo.gp import (
    GPNumericsError,
    KernelParams,
    _build_model,
    fantasize,
    fit_gp,
    joint_sample,
    log_marginal_likelihood,
    matern52_ard,
    posterior,
    posterior_marginals,
)

# Hand evaluation of the closed form (1 + sqrt5 + 5/3) * exp(-sqrt5).
MATERN_AT_UNIT_DISTANCE = 0.5239941088318203


def unit_kernel(d=1, noise=0.0):
    return KernelParams(lengthscales=np.ones(d), signal_variance=1.0, noise_variance=noise)


def finite_difference_gradient(kernel, X, y, h=1e-6):
    d = kernel.d
    theta = np.log(np.concatenate([kernel.lengthscales, [kernel.signal_variance, kernel.noise_variance]]))
    grad = np.zeros(d + 2)
    for i in range(d + 2):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        kp = KernelParams(np.exp(tp[:d]), float(np.exp(tp[d])), float(np.exp(tp[d + 1])))
        km = KernelParams(np.exp(tm[:d]), float(np.exp(tm[d])), float(np.exp(tm[d + 1])))
        grad[i] = (log_marginal_likelihood(kp, X, y)[0] - log_marginal_likelihood(km, X, y)[0]) / (2 * h)
    return grad


class TestKernel:
    def test_zero_distance_is_signal_variance(self):
        k = KernelParams(np.array([0.3, 0.7]), 2.5, 0.0)
        assert matern52_ard([0.1, 0.9], [0.1, 0.9], k) == 2.5

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        k = KernelParams(rng.random(4) + 0.1, 1.7, 0.0)
        for _ in range(10):
            a, b = rng.random(4), rng.random(4)
            assert matern52_ard(a, b, k) == pytest.approx(matern52_ard(b, a, k), abs=0.0)

    def test_unit_distance_value(self):
        assert matern52_ard([0.0], [1.0], unit_kernel()) == pytest.approx(
            MATERN_AT_UNIT_DISTANCE, abs=1e-15
        )

    def test_nonpositive_lengthscale_rejected(self):
        with pytest.raises(ValueError):
            KernelParams(np.array([0.0]), 1.0, 0.0)


class TestLogMarginalLikelihood:
    def test_single_point_value(self):
        k = KernelParams(np.ones(2), 1.0, 1.0)
        value, _ = log_marginal_likelihood(k, np.array([[0.5, 0.5]]), np.array([0.0]))
        assert value == pytest.approx(-0.5 * math.log(2.0 * math.pi * 2.0), abs=1e-14)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(20):
            n, d = int(rng.integers(4, 12)), int(rng.integers(1, 4))
            X = rng.random((n, d))
            y = rng.standard_normal(n)
            k = KernelParams(rng.random(d) * 0.8 + 0.15, float(rng.random() + 0.5), float(rng.random() * 0.2 + 0.01))
            _, grad = log_marginal_likelihood(k, X, y)
            fd = finite_difference_gradient(k, X, y)
            worst = max(worst, np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12))
        assert worst <= 1e-4

    def test_duplicate_point_zero_noise_is_singular(self):
        X = np.array([[0.5], [0.5]])
        with pytest.raises(GPNumericsError):
            log_marginal_likelihood(unit_kernel(noise=0.0), X, np.array([0.0, 0.0]))


class TestFit:
    def test_constant_targets(self):
        rng = np.random.default_rng(1)
        X = rng.random((10, 2))
        model = fit_gp(X, np.full(10, 3.25), restarts=2, seed=0)
        post = posterior(model, rng.random((7, 2)))
        assert np.allclose(post.mean, 3.25, atol=1e-6)

    def test_same_seed_bitwise_identical(self):
        rng = np.random.default_rng(2)
        X, y = rng.random((12, 3)), rng.standard_normal(12)
        a = fit_gp(X, y, restarts=4, seed=9)
        b = fit_gp(X, y, restarts=4, seed=9)
        assert np.array_equal(a.kernel.lengthscales, b.kernel.lengthscales)
        assert a.kernel.signal_variance == b.kernel.signal_variance
        assert a.kernel.noise_variance == b.kernel.noise_variance

    def test_recovers_known_lengthscale_within_factor_two(self):
        # Data simulated from a GP with an isotropic lengthscale of 0.3.
        rng = np.random.default_rng(3)
        true = KernelParams(np.array([0.3]), 1.0, 1e-6)
        X = rng.random((50, 1))
        K = np.array([[matern52_ard(a, b, true) for b in X] for a in X])
        L = np.linalg.cholesky(K + 1e-8 * np.eye(50))
        y = L @ rng.standard_normal(50)
        model = fit_gp(X, y, restarts=8, seed=0)
        fitted = float(model.kernel.lengthscales[0])
        assert 0.15 <= fitted <= 0.6

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_gp(np.array([[0.5]]), np.array([1.0]), restarts=1, seed=0)

    def test_non_finite_targets_rejected(self):
        X = np.random.default_rng(0).random((5, 2))
        y = np.array([1.0, 2.0, np.nan, 0.5, 0.25])
        with pytest.raises(ValueError):
            fit_gp(X, y, restarts=2, seed=0)

    def test_unusable_objective_at_every_start_rejected(self, monkeypatch):
        import molbo.gp as gp_mod
        from molbo.gp import GPFitError, GPNumericsError

        def always_singular(kernel, X, y):
            raise GPNumericsError("synthetic factorization failure")

        monkeypatch.setattr(gp_mod, "log_marginal_likelihood", always_singular)
        X = np.random.default_rng(0).random((5, 2))
        y = np.arange(5.0)
        with pytest.raises(GPFitError):
            fit_gp(X, y, restarts=2, seed=0)


def toy_model(noise=1e-6, seed=0, n=12, d=2):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = np.sin(3 * X[:, 0]) + np.cos(2 * X[:, -1])
    y_mean, y_scale = float(np.mean(y)), float(np.std(y))
    kernel = KernelParams(np.full(d, 0.4), 1.0, noise)
    return _build_model(kernel, X, (y - y_mean) / y_scale, y_mean, y_scale), X, y


class TestPosterior:
    def test_interpolates_training_targets(self):
        model, X, y = toy_model(noise=1e-6)
        post = posterior(model, X)
        assert np.max(np.abs(post.mean - y)) <= 1e-4

    def test_reverts_to_prior_far_away(self):
        # Tiny lengthscales make any distant in-cube query effectively
        # uncorrelated with the data: mean reverts to the output mean and
        # variance to the signal variance.
        rng = np.random.default_rng(4)
        X = rng.random((8, 2)) * 0.2
        y = rng.standard_normal(8)
        y_mean, y_scale = float(np.mean(y)), float(np.std(y))
        kernel = KernelParams(np.full(2, 0.02), 1.0, 1e-6)
        model = _build_model(kernel, X, (y - y_mean) / y_scale, y_mean, y_scale)
        mean, var = posterior_marginals(model, np.array([[0.95, 0.95]]))
        assert mean[0] == pytest.approx(y_mean, abs=1e-8)
        assert var[0] == pytest.approx(kernel.signal_variance * y_scale**2, rel=1e-8)

    def test_covariance_symmetric_psd(self):
        model, _, _ = toy_model(noise=1e-3)
        rng = np.random.default_rng(5)
        post = posterior(model, rng.random((9, 2)))
        assert np.max(np.abs(post.cov - post.cov.T)) <= 1e-10
        assert np.min(np.linalg.eigvalsh(post.cov)) >= -1e-8

    def test_marginals_match_joint_diagonal(self):
        model, _, _ = toy_model(noise=1e-3)
        rng = np.random.default_rng(6)
        Xq = rng.random((6, 2))
        post = posterior(model, Xq)
        mean, var = posterior_marginals(model, Xq)
        assert np.allclose(mean, post.mean, atol=0.0)
        assert np.allclose(var, np.diag(post.cov), atol=1e-12)


class TestFantasize:
    def test_mean_invariant(self):
        model, _, _ = toy_model(noise=1e-4)
        rng = np.random.default_rng(7)
        Xq = rng.random((100, 2))
        fm = fantasize(model, np.array([0.3, 0.6]))
        assert np.max(np.abs(posterior(fm, Xq).mean - posterior(model, Xq).mean)) <= 1e-9

    def test_variance_pointwise_nonincreasing(self):
        model, _, _ = toy_model(noise=1e-4)
        rng = np.random.default_rng(8)
        Xq = rng.random((100, 2))
        fm = fantasize(model, np.array([0.3, 0.6]))
        old = posterior(model, Xq).var
        new = posterior(fm, Xq).var
        assert np.max(new - old) <= 1e-10

    def test_variance_collapses_at_fantasy_point(self):
        model, _, _ = toy_model(noise=1e-4)
        x = np.array([0.25, 0.75])
        fm = fantasize(model, x)
        _, var = posterior_marginals(fm, x[None, :])
        noise_out = model.kernel.noise_variance * model.y_scale**2
        assert var[0] <= noise_out + 1e-8

    def test_double_fantasize_same_point_is_idempotent(self):
        model, _, _ = toy_model(noise=1e-4)
        rng = np.random.default_rng(9)
        Xq = rng.random((60, 2))
        x = np.array([0.4, 0.4])
        once = posterior(fantasize(model, x), Xq)
        twice = posterior(fantasize(fantasize(model, x), x), Xq)
        assert np.max(np.abs(twice.var - once.var)) <= 1e-8

    def test_matches_direct_conditioning_oracle(self):
        # Oracle: explicit Gaussian conditioning of the joint prior on the
        # pseudo-observation, computed from scratch with dense algebra.
        model, X, y = toy_model(noise=1e-3)
        x_new = np.array([0.55, 0.15])
        rng = np.random.default_rng(10)
        Xq = rng.random((5, 2))
        fm = fantasize(model, x_new)
        got = posterior(fm, Xq)

        joint = posterior(model, np.vstack([Xq, x_new]))
        c_qq = joint.cov[:5, :5]
        c_qf = joint.cov[:5, 5:]
        c_ff = joint.cov[5:, 5:]
        expected_cov = c_qq - c_qf @ np.linalg.solve(c_ff + 1e-12 * model.y_scale**2 * np.eye(1), c_qf.T)
        assert np.allclose(got.cov, expected_cov, atol=1e-8)
        assert np.allclose(got.mean, joint.mean[:5], atol=0.0)

    def test_outside_cube_rejected(self):
        model, _, _ = toy_model()
        with pytest.raises(ValueError):
            fantasize(model, np.array([1.5, 0.5]))


class TestJointSample:
    def test_sample_mean_converges(self):
        model, _, _ = toy_model(noise=1e-3)
        rng = np.random.default_rng(11)
        Xq = rng.random((4, 2))
        n = 10**5
        s = joint_sample([model], Xq, n, seed=12)
        post = posterior(model, Xq)
        sd = np.sqrt(np.clip(np.diag(post.cov), 1e-300, None))
        err = np.abs(s[:, :, 0].mean(axis=0) - post.mean)
        assert np.all(err <= 3.0 * sd / math.sqrt(n) + 1e-12)

    def test_empirical_covariance_converges(self):
        model, _, _ = toy_model(noise=1e-3)
        rng = np.random.default_rng(13)
        Xq = rng.random((5, 2))
        s = joint_sample([model], Xq, 10**5, seed=14)[:, :, 0]
        emp = np.cov(s.T, bias=True)
        post = posterior(model, Xq)
        denom = np.linalg.norm(post.cov)
        assert np.linalg.norm(emp - post.cov) / denom <= 0.05

    def test_zero_variance_returns_mean(self):
        model, X, y = toy_model(noise=1e-6)
        s = joint_sample([model], X[:3], 50, seed=15)
        post = posterior(model, X[:3])
        assert np.max(np.abs(s[:, :, 0] - post.mean[None, :])) <= 1e-2 * model.y_scale

    def test_same_seed_identical_tensor(self):
        model, _, _ = toy_model(noise=1e-3)
        Xq = np.array([[0.2, 0.8], [0.6, 0.1]])
        a = joint_sample([model, model], Xq, 64, seed=16)
        b = joint_sample([model, model], Xq, 64, seed=16)
        assert np.array_equal(a, b)

    def test_duplicate_rows_identical_samples(self):
        model, _, _ = toy_model(noise=1e-3)
        Xq = np.array([[0.2, 0.8], [0.2, 0.8], [0.5, 0.5]])
        s = joint_sample([model], Xq, 32, seed=17)
        assert np.array_equal(s[:, 0, :], s[:, 1, :])
