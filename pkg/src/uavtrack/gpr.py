"""Gaussian-process regression over beam-magnitude measurements.

A squared-exponential kernel with per-axis length scales models the
received magnitude as a function of the two direction cosines. Hyper-
parameters are fitted by gradient ascent on the log marginal likelihood
in log-parameter space with backtracking, and the fitted model supports
cheap point appends through a rank-one extension of its Cholesky factor.
All gradients are analytic; finite differences appear only in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

__all__ = [
    "Hyperparams",
    "FitOptions",
    "FitResult",
    "GprModel",
    "kernel",
    "log_marginal_likelihood",
    "likelihood_gradient",
    "default_init",
    "fit_hyperparams",
    "make_model",
    "posterior",
    "posterior_mean_gradient",
]

JITTER_BASE = 1e-10
JITTER_MAX = 1e-6
LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Hyperparams:
    """Signal std sigma_s, per-axis length scales, noise std sigma_n."""

    sigma_s: float
    lengthscales: tuple[float, float]
    sigma_n: float

    def __post_init__(self):
        if self.sigma_s <= 0.0 or min(self.lengthscales) <= 0.0:
            raise ValueError("sigma_s and length scales must be positive")
        if self.sigma_n < 0.0:
            raise ValueError("sigma_n must be nonnegative")

    def as_vector(self, with_noise: bool = True) -> np.ndarray:
        v = [self.sigma_s, *self.lengthscales]
        if with_noise:
            v.append(self.sigma_n)
        return np.array(v)


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 60
    step0: float = 0.5  # initial log-space step scale per iteration
    max_halvings: int = 20
    grad_tol: float = 1e-4
    fit_noise: bool = True  # freeze sigma_n when False
    bound_lo: float = 1e-8  # clamp on every parameter, natural units
    bound_hi: float = 1e8


@dataclass(frozen=True)
class FitResult:
    hyperparams: Hyperparams
    log_marginal: float
    iterations: int
    warning: str | None = None
    trace: tuple[float, ...] = field(default=())


def kernel(xa: np.ndarray, xb: np.ndarray, hp: Hyperparams) -> np.ndarray:
    """Squared-exponential covariance matrix between two point sets.

    k(x, x') = sigma_s^2 * exp(-0.5 * sum_d ((x_d - x'_d) / ell_d)^2)
    """
    xa = np.atleast_2d(np.asarray(xa, dtype=float))
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    d = xa[:, None, :] - xb[None, :, :]
    ell = np.asarray(hp.lengthscales, dtype=float)
    return hp.sigma_s**2 * np.exp(-0.5 * np.sum((d / ell) ** 2, axis=-1))


class _Objective:
    """Marginal likelihood and gradient over one training set.

    Caches the per-axis squared differences so repeated evaluations during
    hyperparameter search cost one matrix exponential and one Cholesky.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.x = np.atleast_2d(np.asarray(x, dtype=float))
        self.y = np.asarray(y, dtype=float)
        self.n = len(self.y)
        self.d2 = [
            (self.x[:, None, d] - self.x[None, :, d]) ** 2 for d in range(self.x.shape[1])
        ]
        self.eye = np.eye(self.n)

    def gram(self, hp: Hyperparams) -> np.ndarray:
        q = sum(d2 / ell**2 for d2, ell in zip(self.d2, hp.lengthscales))
        return hp.sigma_s**2 * np.exp(-0.5 * q)

    def chol(self, hp: Hyperparams) -> tuple[np.ndarray, np.ndarray, float]:
        """Lower Cholesky of K + (sigma_n^2 + jitter) I, escalating jitter.

        Starts at JITTER_BASE * sigma_s^2 and multiplies by 10 up to
        JITTER_MAX * sigma_s^2 before giving up. Returns (K, L, jitter).
        """
        k = self.gram(hp)
        jitter = JITTER_BASE * hp.sigma_s**2
        limit = JITTER_MAX * hp.sigma_s**2
        diag = np.diag_indices(self.n)
        while True:
            kn = k.copy()
            kn[diag] += hp.sigma_n**2 + jitter
            try:
                return k, cholesky(kn, lower=True, check_finite=False), jitter
            except np.linalg.LinAlgError:
                pass
            if jitter >= limit:
                raise np.linalg.LinAlgError(
                    f"Gram matrix not positive definite up to jitter {jitter:.1e}"
                )
            jitter *= 10.0

    def lml(self, chol: np.ndarray, alpha: np.ndarray) -> float:
        return float(
            -0.5 * self.y @ alpha - np.sum(np.log(np.diag(chol))) - 0.5 * self.n * LOG2PI
        )

    def gradient(
        self, hp: Hyperparams, k: np.ndarray, chol: np.ndarray, alpha: np.ndarray, fit_noise: bool
    ) -> np.ndarray:
        # 0.5 a^T dK a - 0.5 tr(Kn^-1 dK) = 0.5 sum(A * dK) with
        # A = alpha alpha^T - Kn^-1, valid because every dK is symmetric.
        kinv = cho_solve((chol, True), self.eye, check_finite=False)
        a = np.outer(alpha, alpha) - kinv
        ak = a * k
        grads = [float(np.sum(ak)) / hp.sigma_s]
        for d2, ell in zip(self.d2, hp.lengthscales):
            grads.append(0.5 * float(np.sum(ak * d2)) / ell**3)
        if fit_noise:
            grads.append(hp.sigma_n * float(np.trace(a)))
        return np.array(grads)


def _chol_with_escalation(x: np.ndarray, hp: Hyperparams) -> tuple[np.ndarray, float]:
    _, chol, jitter = _Objective(x, np.zeros(len(np.atleast_2d(x)))).chol(hp)
    return chol, jitter


def log_marginal_likelihood(x: np.ndarray, y: np.ndarray, hp: Hyperparams) -> float:
    """-0.5 y^T Kn^-1 y - 0.5 log|Kn| - n/2 log(2 pi), Kn = K + sigma_n^2 I."""
    obj = _Objective(x, y)
    _, chol, _ = obj.chol(hp)
    alpha = cho_solve((chol, True), obj.y, check_finite=False)
    return obj.lml(chol, alpha)


def likelihood_gradient(
    x: np.ndarray, y: np.ndarray, hp: Hyperparams, fit_noise: bool = True
) -> np.ndarray:
    """Gradient of the log marginal likelihood in natural parameters.

    For each parameter theta, 0.5 * alpha^T dK alpha - 0.5 tr(Kn^-1 dK)
    with alpha = Kn^-1 y. Order: sigma_s, ell_u, ell_v, then sigma_n when
    fit_noise is set.
    """
    obj = _Objective(x, y)
    k, chol, _ = obj.chol(hp)
    alpha = cho_solve((chol, True), obj.y, check_finite=False)
    return obj.gradient(hp, k, chol, alpha, fit_noise)


def default_init(x: np.ndarray, y: np.ndarray) -> Hyperparams:
    """Data-driven starting point: output std, half the span per axis."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    sd = float(np.std(y))
    sigma_s = sd if sd > 0.0 else 1e-3
    spans = np.ptp(x, axis=0) / 2.0
    ells = tuple(float(s) if s > 0.0 else 1e-2 for s in spans)
    return Hyperparams(sigma_s=sigma_s, lengthscales=ells, sigma_n=0.1 * sigma_s + 1e-12)


def fit_hyperparams(
    x: np.ndarray,
    y: np.ndarray,
    init: Hyperparams | None = None,
    opts: FitOptions = FitOptions(),
) -> FitResult:
    """Maximize the log marginal likelihood by log-space gradient ascent.

    Each iteration takes the analytic gradient, rescales it by the
    parameter values (chain rule to log space), and backtracks the step
    until the likelihood improves; the accepted-likelihood trace is
    therefore monotone. Stops on a small log-space gradient, on an
    exhausted backtracking line search, or after max_iter iterations.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    hp = init if init is not None else default_init(x, y)
    lo, hi = math.log(opts.bound_lo), math.log(opts.bound_hi)

    def pack(h: Hyperparams) -> np.ndarray:
        return np.log(h.as_vector(opts.fit_noise))

    def unpack(t: np.ndarray) -> Hyperparams:
        vals = np.exp(t)
        sigma_n = vals[3] if opts.fit_noise else hp.sigma_n
        return Hyperparams(
            sigma_s=float(vals[0]),
            lengthscales=(float(vals[1]), float(vals[2])),
            sigma_n=float(sigma_n),
        )

    obj = _Objective(x, y)

    def evaluate(t: np.ndarray):
        h = unpack(t)
        k, chol, _ = obj.chol(h)
        alpha = cho_solve((chol, True), obj.y, check_finite=False)
        return h, k, chol, alpha, obj.lml(chol, alpha)

    if opts.fit_noise and hp.sigma_n == 0.0:
        hp = replace(hp, sigma_n=opts.bound_lo)
    theta = np.clip(pack(hp), lo, hi)
    current, k, chol, alpha, lml = evaluate(theta)
    trace = [lml]
    warning = None
    it = 0
    # Step length carries over between iterations (doubled, capped at
    # step0) so the line search rarely needs more than one probe.
    step = opts.step0
    for it in range(1, opts.max_iter + 1):
        g_nat = obj.gradient(current, k, chol, alpha, opts.fit_noise)
        g_log = g_nat * np.exp(theta)
        if np.linalg.norm(g_log) < opts.grad_tol:
            it -= 1
            break
        scale = max(1.0, float(np.max(np.abs(g_log))))
        step = min(2.0 * step, opts.step0)
        accepted = False
        for _ in range(opts.max_halvings):
            cand_theta = np.clip(theta + step * g_log / scale, lo, hi)
            if np.all(np.abs(cand_theta - theta) <= 1e-8 + 1e-5 * np.abs(theta)):
                break
            try:
                cand = evaluate(cand_theta)
            except np.linalg.LinAlgError:
                step *= 0.5
                continue
            if cand[4] > lml:
                theta = cand_theta
                current, k, chol, alpha, lml = cand
                trace.append(lml)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            warning = "no ascent step found; returning best iterate"
            break
    return FitResult(
        hyperparams=current,
        log_marginal=lml,
        iterations=it,
        warning=warning,
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class GprModel:
    """Fitted model with cached Cholesky factor and weights alpha.

    Treated as a value: with_point returns a new model and never mutates
    the original. jitter records the diagonal inflation actually used so
    that incremental appends stay consistent with a fresh factorization.
    """

    x: np.ndarray
    y: np.ndarray
    hp: Hyperparams
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float

    @property
    def n(self) -> int:
        return len(self.y)

    def with_point(self, x_new: np.ndarray, y_new: float) -> "GprModel":
        """Append one training point by extending the Cholesky factor.

        Solves L t = k(X, x_new) and appends the row [t^T, sqrt(d)] with
        d the new diagonal minus t^T t; falls back to a fresh
        factorization if roundoff drives d nonpositive.
        """
        x_new = np.asarray(x_new, dtype=float).reshape(1, 2)
        x_all = np.vstack([self.x, x_new])
        y_all = np.append(self.y, y_new)
        k_cross = kernel(self.x, x_new, self.hp)[:, 0]
        t = solve_triangular(self.chol, k_cross, lower=True, check_finite=False)
        d2 = self.hp.sigma_s**2 + self.hp.sigma_n**2 + self.jitter - t @ t
        if d2 <= 0.0:
            return make_model(x_all, y_all, self.hp)
        n = self.n
        chol = np.zeros((n + 1, n + 1))
        chol[:n, :n] = self.chol
        chol[n, :n] = t
        chol[n, n] = math.sqrt(d2)
        alpha = cho_solve((chol, True), y_all, check_finite=False)
        return GprModel(x=x_all, y=y_all, hp=self.hp, chol=chol, alpha=alpha, jitter=self.jitter)


def make_model(x: np.ndarray, y: np.ndarray, hp: Hyperparams) -> GprModel:
    """Factorize the training set once; posterior queries reuse the cache."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    chol, jitter = _chol_with_escalation(x, hp)
    alpha = cho_solve((chol, True), y, check_finite=False)
    return GprModel(x=x, y=y, hp=hp, chol=chol, alpha=alpha, jitter=jitter)


def posterior(model: GprModel, xstar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and latent variance at query points.

    mean = k*^T alpha; var = sigma_s^2 - sum of squares of L^-1 k*,
    floored at zero against roundoff.
    """
    xstar = np.atleast_2d(np.asarray(xstar, dtype=float))
    k_cross = kernel(model.x, xstar, model.hp)
    mean = k_cross.T @ model.alpha
    t = solve_triangular(model.chol, k_cross, lower=True, check_finite=False)
    var = model.hp.sigma_s**2 - np.sum(t * t, axis=0)
    return mean, np.maximum(var, 0.0)


def posterior_mean_gradient(model: GprModel, xstar: np.ndarray) -> np.ndarray:
    """Analytic gradient of the predictive mean at one query point.

    d mean / d x*_d = sum_i -(x*_d - x_i_d) / ell_d^2 * k(x*, x_i) * alpha_i
    """
    xstar = np.asarray(xstar, dtype=float).reshape(1, 2)
    k_cross = kernel(model.x, xstar, model.hp)[:, 0]
    diffs = (xstar[0] - model.x) / np.asarray(model.hp.lengthscales) ** 2
    return -(diffs * k_cross[:, None]).T @ model.alpha
