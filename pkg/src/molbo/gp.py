"""Gaussian-process surrogates with a Matern 5/2 ARD kernel.

One independent GP per objective. Inputs live in the unit cube, targets are
standardized internally, and all randomness is reproducible from explicit
seeds. Lookahead conditioning ("fantasizing") appends pseudo-observations at
the model's own posterior mean, which leaves the posterior mean invariant and
can only shrink the posterior variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from .sampling import normal_base_samples

__all__ = [
    "KernelParams",
    "GPModel",
    "PosteriorGaussian",
    "GPNumericsError",
    "GPFitError",
    "matern52_ard",
    "log_marginal_likelihood",
    "fit_gp",
    "posterior",
    "posterior_marginals",
    "fantasize",
    "joint_sample",
]

_SQRT5 = math.sqrt(5.0)
_JITTER_LADDER = (0.0, 1e-6, 1e-4, 1e-2)
_FANTASY_JITTER_LADDER = (1e-12, 1e-9, 1e-6)

# Box bounds for hyperparameter search, in natural units.
_LS_BOUNDS = (1e-3, 10.0)
_SIG_BOUNDS = (1e-3, 1e3)
_NOISE_BOUNDS = (1e-6, 1.0)


class GPNumericsError(RuntimeError):
    """A covariance factorization failed beyond recovery."""


class GPFitError(RuntimeError):
    """Hyperparameter optimization produced no usable result."""


@dataclass(frozen=True)
class KernelParams:
    """Matern 5/2 ARD hyperparameters: one lengthscale per input dimension."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if np.any(ls <= 0.0) or not np.all(np.isfinite(ls)):
            raise ValueError(f"lengthscales must be positive and finite, got {ls}")
        if self.signal_variance <= 0.0 or not np.isfinite(self.signal_variance):
            raise ValueError(f"signal variance must be positive, got {self.signal_variance}")
        if self.noise_variance < 0.0 or not np.isfinite(self.noise_variance):
            raise ValueError(f"noise variance must be nonnegative, got {self.noise_variance}")
        ls = ls.copy()
        ls.setflags(write=False)
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def d(self) -> int:
        return int(self.lengthscales.size)


@dataclass(frozen=True)
class PosteriorGaussian:
    """Joint Gaussian predictive distribution at a set of query points."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def var(self) -> np.ndarray:
        return np.diag(self.cov).copy()


@dataclass(frozen=True)
class GPModel:
    """A fitted GP: hyperparameters, training data, and factored covariance.

    ``fantasy_inputs`` holds pseudo-observation locations added by
    :func:`fantasize`. They only affect predictive covariances.
    """

    kernel: KernelParams
    train_inputs: np.ndarray
    train_targets_std: np.ndarray
    y_mean: float
    y_scale: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    fantasy_inputs: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.train_inputs.shape[0])

    @property
    def d(self) -> int:
        return int(self.train_inputs.shape[1])

    @property
    def train_targets(self) -> np.ndarray:
        return self.y_mean + self.y_scale * self.train_targets_std


def _scaled_sq_diffs(X1: np.ndarray, X2: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    diff = (X1[:, None, :] - X2[None, :, :]) / lengthscales
    return diff * diff


def _matern52_from_rho(rho: np.ndarray, signal_variance: float) -> np.ndarray:
    s = _SQRT5 * rho
    return signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


def _cov_matrix(X1: np.ndarray, X2: np.ndarray, kernel: KernelParams) -> np.ndarray:
    sq = _scaled_sq_diffs(X1, X2, kernel.lengthscales)
    rho = np.sqrt(np.sum(sq, axis=2))
    return _matern52_from_rho(rho, kernel.signal_variance)


def matern52_ard(x, x2, kernel: KernelParams) -> float:
    """Matern 5/2 ARD kernel value between two input vectors."""
    a = np.atleast_1d(np.asarray(x, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.size != b.size or a.size != kernel.d:
        raise ValueError(
            f"dimension mismatch: x has {a.size}, x2 has {b.size}, kernel has {kernel.d}"
        )
    return float(_cov_matrix(a[None, :], b[None, :], kernel)[0, 0])


def _cholesky(A: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise GPNumericsError("covariance matrix is not positive definite") from exc


def _cholesky_with_escalation(A: np.ndarray, ladder=_JITTER_LADDER) -> tuple[np.ndarray, float]:
    eye = np.eye(A.shape[0])
    last: Exception | None = None
    for jitter in ladder:
        try:
            return _cholesky(A + jitter * eye), jitter
        except GPNumericsError as exc:
            last = exc
    raise GPNumericsError(
        f"covariance not positive definite after jitter escalation up to {ladder[-1]}"
    ) from last


def log_marginal_likelihood(
    kernel: KernelParams, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Gaussian log evidence and its gradient w.r.t. log-hyperparameters.

    Gradient layout: d entries for the log-lengthscales, then log signal
    variance, then log noise variance. Raises :class:`GPNumericsError` when
    the Gram matrix (plus the kernel's own noise) cannot be factored; jitter
    escalation is the fitting path's job, not this objective's.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 1:
        raise ValueError("need at least one observation")
    if y.size != n:
        raise ValueError(f"X has {n} rows but y has {y.size} entries")
    if d != kernel.d:
        raise ValueError(f"X has {d} columns but kernel has {kernel.d} lengthscales")

    sq = _scaled_sq_diffs(X, X, kernel.lengthscales)
    rho = np.sqrt(np.sum(sq, axis=2))
    K_signal = _matern52_from_rho(rho, kernel.signal_variance)
    K = K_signal + kernel.noise_variance * np.eye(n)
    L = _cholesky(K)
    alpha = cho_solve((L, True), y)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(L))))
        - 0.5 * n * math.log(2.0 * math.pi)
    )

    K_inv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - K_inv
    grad = np.zeros(d + 2)
    # dK/dlog(ls_i) = sig * (5/3) * (1 + sqrt5*rho) * exp(-sqrt5*rho) * sq_i;
    # the 1/rho singularity cancels against drho/dlog(ls).
    base = kernel.signal_variance * (5.0 / 3.0) * (1.0 + _SQRT5 * rho) * np.exp(-_SQRT5 * rho)
    for i in range(d):
        grad[i] = 0.5 * float(np.sum(W * (base * sq[:, :, i])))
    grad[d] = 0.5 * float(np.sum(W * K_signal))
    grad[d + 1] = 0.5 * kernel.noise_variance * float(np.trace(W))
    return lml, grad


def _theta_to_params(theta: np.ndarray, d: int) -> KernelParams:
    return KernelParams(
        lengthscales=np.exp(theta[:d]),
        signal_variance=float(np.exp(theta[d])),
        noise_variance=float(np.exp(theta[d + 1])),
    )


def _build_model(
    kernel: KernelParams,
    X: np.ndarray,
    y_std: np.ndarray,
    y_mean: float,
    y_scale: float,
) -> GPModel:
    n = X.shape[0]
    K = _cov_matrix(X, X, kernel) + kernel.noise_variance * np.eye(n)
    L, jitter = _cholesky_with_escalation(K)
    alpha = cho_solve((L, True), y_std)
    return GPModel(
        kernel=kernel,
        train_inputs=X,
        train_targets_std=y_std,
        y_mean=y_mean,
        y_scale=y_scale,
        chol=L,
        alpha=alpha,
        jitter=jitter,
    )


def fit_gp(X, y, restarts: int = 8, seed: int = 0) -> GPModel:
    """Fit hyperparameters by multi-start gradient ascent on the log evidence.

    Inputs must already live in the unit cube; targets are standardized here.
    Deterministic given ``seed``: the first start is a fixed heuristic, the
    remaining ``restarts - 1`` are log-uniform draws within the search box.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least two observations to standardize targets")
    if y.size != n:
        raise ValueError(f"X has {n} rows but y has {y.size} entries")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(X)):
        raise ValueError("training data must be finite")
    if np.any(X < -1e-9) or np.any(X > 1.0 + 1e-9):
        raise ValueError("training inputs must lie in the unit cube")
    X = np.clip(X, 0.0, 1.0)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    y_mean = float(np.mean(y))
    spread = float(np.std(y))
    y_scale = spread if spread > 1e-12 else 1.0
    y_std = (y - y_mean) / y_scale

    lo = np.log(np.array([_LS_BOUNDS[0]] * d + [_SIG_BOUNDS[0], _NOISE_BOUNDS[0]]))
    hi = np.log(np.array([_LS_BOUNDS[1]] * d + [_SIG_BOUNDS[1], _NOISE_BOUNDS[1]]))
    bounds = list(zip(lo, hi))

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        try:
            value, grad = log_marginal_likelihood(_theta_to_params(theta, d), X, y_std)
        except GPNumericsError:
            return 1e25, np.zeros(d + 2)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            return 1e25, np.zeros(d + 2)
        return -value, -grad

    starts = [np.log(np.array([0.5] * d + [1.0, 1e-3]))]
    rng = np.random.default_rng(seed)
    for _ in range(restarts - 1):
        starts.append(lo + rng.random(d + 2) * (hi - lo))

    best_theta = None
    best_value = np.inf
    for theta0 in starts:
        res = minimize(
            objective,
            theta0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200},
        )
        if np.isfinite(res.fun) and res.fun < min(best_value, 1e24):
            best_value = float(res.fun)
            best_theta = np.asarray(res.x, dtype=float)

    if best_theta is None:
        raise GPFitError("hyperparameter optimization failed at every start")
    return _build_model(_theta_to_params(best_theta, d), X, y_std, y_mean, y_scale)


def _base_predict(model: GPModel, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standardized latent mean and the triangular solve against the queries."""
    Ks = _cov_matrix(model.train_inputs, Xq, model.kernel)
    A = solve_triangular(model.chol, Ks, lower=True)
    mean = Ks.T @ model.alpha
    return mean, A


def _base_cov(model: GPModel, A1: np.ndarray, X1: np.ndarray, A2: np.ndarray, X2: np.ndarray) -> np.ndarray:
    Kqq = _cov_matrix(X1, X2, model.kernel)
    return Kqq - A1.T @ A2


def _fantasy_downdate(
    model: GPModel, Xq: np.ndarray, cov_qq: np.ndarray, A_q: np.ndarray
) -> np.ndarray:
    """Schur-complement variance reduction from the fantasy pseudo-points.

    The pseudo-observations sit exactly at the posterior mean, so only the
    covariance changes; a small jitter keeps the conditioning block
    invertible when fantasy points coincide with queries or each other.
    """
    F = model.fantasy_inputs
    _, A_f = _base_predict(model, F)
    C_ff = _base_cov(model, A_f, F, A_f, F)
    C_fq = _base_cov(model, A_f, F, A_q, Xq)
    C_ff = 0.5 * (C_ff + C_ff.T)
    eye = np.eye(F.shape[0])
    last: Exception | None = None
    for jitter in _FANTASY_JITTER_LADDER:
        try:
            Lf = _cholesky(C_ff + jitter * eye)
            break
        except GPNumericsError as exc:
            last = exc
    else:
        raise GPNumericsError(
            "fantasy conditioning block is singular after jitter escalation"
        ) from last
    W = solve_triangular(Lf, C_fq, lower=True)
    return cov_qq - W.T @ W


def posterior(model: GPModel, Xq) -> PosteriorGaussian:
    """Exact joint latent posterior at query points, in output units."""
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    mean_std, A_q = _base_predict(model, Xq)
    cov_std = _base_cov(model, A_q, Xq, A_q, Xq)
    if model.fantasy_inputs is not None and model.fantasy_inputs.shape[0]:
        cov_std = _fantasy_downdate(model, Xq, cov_std, A_q)
    cov_std = 0.5 * (cov_std + cov_std.T)
    mean = model.y_mean + model.y_scale * mean_std
    cov = (model.y_scale**2) * cov_std
    return PosteriorGaussian(mean=mean, cov=cov)


def posterior_marginals(model: GPModel, Xq) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise posterior mean and variance; cheaper than the full joint."""
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    mean_std, A_q = _base_predict(model, Xq)
    var_std = model.kernel.signal_variance - np.sum(A_q * A_q, axis=0)
    if model.fantasy_inputs is not None and model.fantasy_inputs.shape[0]:
        F = model.fantasy_inputs
        _, A_f = _base_predict(model, F)
        C_ff = _base_cov(model, A_f, F, A_f, F)
        C_fq = _base_cov(model, A_f, F, A_q, Xq)
        C_ff = 0.5 * (C_ff + C_ff.T)
        eye = np.eye(F.shape[0])
        for jitter in _FANTASY_JITTER_LADDER:
            try:
                Lf = _cholesky(C_ff + jitter * eye)
                break
            except GPNumericsError:
                continue
        else:
            raise GPNumericsError("fantasy conditioning block is singular")
        W = solve_triangular(Lf, C_fq, lower=True)
        var_std = var_std - np.sum(W * W, axis=0)
    mean = model.y_mean + model.y_scale * mean_std
    var = (model.y_scale**2) * var_std
    return mean, var


def fantasize(model: GPModel, x_new) -> GPModel:
    """Condition on a pseudo-observation at the current posterior mean.

    The returned model predicts the same mean everywhere; its predictive
    variance is pointwise no larger than before and collapses at ``x_new``.
    """
    x = np.atleast_1d(np.asarray(x_new, dtype=float))
    if x.size != model.d:
        raise ValueError(f"dimension mismatch: x_new has {x.size}, model has {model.d}")
    if np.any(x < -1e-9) or np.any(x > 1.0 + 1e-9):
        raise ValueError("fantasy input must lie in the unit cube")
    x = np.clip(x, 0.0, 1.0)
    prior = model.fantasy_inputs
    stacked = x[None, :] if prior is None or prior.shape[0] == 0 else np.vstack([prior, x])
    return replace(model, fantasy_inputs=stacked)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """A matrix L with L @ L.T == cov, robust to semidefinite inputs."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(0.5 * (cov + cov.T))
        w = np.clip(w, 0.0, None)
        return V * np.sqrt(w)[None, :]


def _unique_rows(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bitwise row dedup in canonical (lexicographic) order.

    Returns (unique rows sorted lexicographically, inverse map from original
    rows to unique rows). Canonical ordering makes batch acquisition values
    invariant to row permutations: the j-th base-sample column always belongs
    to the j-th unique row in canonical order.
    """
    seen: dict[bytes, int] = {}
    first = []
    for row in X:
        key = row.tobytes()
        if key not in seen:
            seen[key] = len(first)
            first.append(row)
    U = np.vstack(first)
    order = np.lexsort(U.T[::-1])
    rank = np.empty(len(order), dtype=int)
    rank[order] = np.arange(len(order))
    U_sorted = U[order]
    inverse = np.array([rank[seen[row.tobytes()]] for row in X], dtype=int)
    return U_sorted, inverse


def _joint_sample_unique(
    models, Xq: np.ndarray, n_samples: int, seed: int, base_samples: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    """Joint posterior samples at the unique rows of Xq.

    Duplicated inputs are perfectly correlated, so they are collapsed before
    factorization; the returned inverse map reinflates them when needed. The
    base tensor, whether supplied or drawn from ``seed``, has one column per
    original row; the leading columns are consumed by the unique rows in
    canonical order.
    """
    k = len(models)
    q = Xq.shape[0]
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if base_samples is None:
        base = normal_base_samples(n_samples, q, k, seed)
    else:
        base = np.asarray(base_samples, dtype=float)
        if base.ndim != 3 or base.shape[1] != q or base.shape[2] != k:
            raise ValueError(
                f"base_samples must have shape (n, {q}, {k}), got {base.shape}"
            )
    U, inverse = _unique_rows(Xq)
    m_u = U.shape[0]
    samples = np.empty((base.shape[0], m_u, k))
    for j, model in enumerate(models):
        post = posterior(model, U)
        L = _psd_factor(post.cov)
        z = base[:, :m_u, j]
        samples[:, :, j] = post.mean[None, :] + z @ L.T
    return samples, inverse


def joint_sample(models, Xq, n_samples: int, seed: int, base_samples=None) -> np.ndarray:
    """Draw joint posterior samples at Xq, independently per objective.

    Returns an (n_samples, m, K) tensor. Samples are a deterministic function
    of the seed (or of an explicitly supplied standard-normal base tensor)
    via the reparameterization ``mean + L z``.
    """
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if not models:
        raise ValueError("need at least one model")
    samples, inverse = _joint_sample_unique(models, Xq, n_samples, seed, base_samples)
    return samples[:, inverse, :]
