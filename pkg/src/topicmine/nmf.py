"""Nonnegative matrix factorization ``A ~ W H``.

Three solvers share one interface:

* ``nmf_mu``   -- Lee-Seung multiplicative updates,
* ``nmf_als``  -- alternating least squares with negative entries clamped,
* ``nmf_acls`` -- the same with ridge terms on both normal equations.

``A`` may be a scipy sparse matrix, a dense array, or a TermDocMatrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import BadK, NonNegativityViolation, ShapeMismatch

log = logging.getLogger(__name__)

ALGORITHMS = ("mu", "als", "acls")

# dense residuals are used for the error history below this many entries
_DENSE_ERROR_LIMIT = 2_000_000


@dataclass(frozen=True)
class NmfConfig:
    algorithm: str = "acls"
    max_iter: int | None = None
    seed: int = 0
    lambda_w: float = 0.5
    lambda_h: float = 0.5
    denom_eps: float = 1e-9
    early_stop: bool = False
    early_stop_tol: float = 1e-6

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.denom_eps > 0:
            raise ValueError("denom_eps must be > 0")
        if self.lambda_w < 0 or self.lambda_h < 0:
            raise ValueError("lambdas must be >= 0")

    @property
    def iterations(self) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return 200 if self.algorithm == "mu" else 50


@dataclass(frozen=True)
class FactorPair:
    W: np.ndarray
    H: np.ndarray
    history: tuple[float, ...] = ()
    algorithm: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def k(self):
        return self.W.shape[1]


def _matrix(A):
    A = getattr(A, "matrix", A)
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=np.float64)
    return np.asarray(A, dtype=np.float64)


def _check(A, k):
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise BadK(f"k={k} outside [1, {min(m, n)}]")
    data = A.data if sp.issparse(A) else A
    if np.any(data < 0):
        raise ValueError("A has negative entries")


def _check_nonneg(*mats):
    for M in mats:
        if np.any(M < 0) or not np.all(np.isfinite(M)):
            raise NonNegativityViolation("factor has negative or non-finite entries")


def _frob_sq(A):
    if sp.issparse(A):
        return float(A.multiply(A).sum())
    return float(np.sum(A * A))


class _ErrorTracker:
    """Frobenius error of A - WH, exact for small A, trace identity for large."""

    def __init__(self, A):
        self.A = A
        self.dense = None
        m, n = A.shape
        if m * n <= _DENSE_ERROR_LIMIT:
            self.dense = A.toarray() if sp.issparse(A) else A
        self.norm_sq = _frob_sq(A)

    def __call__(self, W, H):
        if self.dense is not None:
            return float(np.linalg.norm(self.dense - W @ H))
        cross = float(np.sum((self.A @ H.T) * W))
        quad = float(np.sum((W.T @ W) * (H @ H.T)))
        return float(np.sqrt(max(self.norm_sq - 2 * cross + quad, 0.0)))


def reconstruction_error(A, W, H) -> float:
    """``||A - WH||_F``."""
    A = _matrix(A)
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if W.ndim != 2 or H.ndim != 2 or W.shape[0] != A.shape[0] or H.shape[1] != A.shape[1] or W.shape[1] != H.shape[0]:
        raise ShapeMismatch(f"A{A.shape} vs W{W.shape} H{H.shape}")
    dense = A.toarray() if sp.issparse(A) else A
    return float(np.linalg.norm(dense - W @ H))


def _init(rng, shape):
    # uniform on (0, 1]; exact zeros would stay locked under MU
    return 1.0 - rng.random(shape)


def _stop_early(config, history, scale):
    # change measured against ||A||_F; the error itself may reach rounding level
    if not config.early_stop or len(history) < 2:
        return False
    return abs(history[-2] - history[-1]) <= config.early_stop_tol * scale


def nmf_mu(A, k: int, config: NmfConfig | None = None, W0=None, H0=None,
           callback: Callable | None = None) -> FactorPair:
    """Multiplicative updates, H then W each sweep.

    Entries that are exactly zero stay zero. ``W0``/``H0`` override the
    random start.
    """
    config = config or NmfConfig(algorithm="mu")
    A = _matrix(A)
    _check(A, k)
    m, n = A.shape
    rng = np.random.default_rng(config.seed)
    W = _init(rng, (m, k)) if W0 is None else np.array(W0, dtype=np.float64)
    H = _init(rng, (k, n)) if H0 is None else np.array(H0, dtype=np.float64)
    eps = config.denom_eps
    err = _ErrorTracker(A)
    history = []
    for it in range(config.iterations):
        WtA = np.asarray((A.T @ W).T)
        H = H * WtA / (W.T @ W @ H + eps)
        AHt = np.asarray(A @ H.T)
        W = W * AHt / (W @ (H @ H.T) + eps)
        _check_nonneg(W, H)
        history.append(err(W, H))
        if callback is not None:
            callback(it, W, H)
        if _stop_early(config, history, np.sqrt(err.norm_sq)):
            break
    return FactorPair(W, H, tuple(history), "mu")


def _ridge_solve(G, R, lam, what):
    """Solve ``(G + lam I) X = R`` for symmetric PSD ``G`` (k x k)."""
    k = G.shape[0]
    M = G + lam * np.eye(k) if lam > 0 else G.copy()
    if lam == 0:
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e12:
            log.warning("%s normal matrix is near singular (cond=%.3g); adding 1e-12*I", what, cond)
            M = M + 1e-12 * np.eye(k)
    try:
        factor = scipy.linalg.cho_factor(M, lower=False, check_finite=False)
        return scipy.linalg.cho_solve(factor, R, check_finite=False)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(M, R, rcond=None)[0]


def _alternating(A, k, config, lambda_w, lambda_h, W0, callback, name):
    A = _matrix(A)
    _check(A, k)
    m, n = A.shape
    rng = np.random.default_rng(config.seed)
    W = _init(rng, (m, k)) if W0 is None else np.array(W0, dtype=np.float64)
    err = _ErrorTracker(A)
    history = []
    H = np.zeros((k, n))
    for it in range(config.iterations):
        # (W'W + lh I) H = W'A
        WtA = np.asarray((A.T @ W).T)
        H = _ridge_solve(W.T @ W, WtA, lambda_h, "H")
        np.maximum(H, 0.0, out=H)
        # (HH' + lw I) W' = H A'
        HAt = np.asarray(A @ H.T).T
        W = _ridge_solve(H @ H.T, HAt, lambda_w, "W").T
        W = np.maximum(W, 0.0)
        _check_nonneg(W, H)
        history.append(err(W, H))
        if callback is not None:
            callback(it, W, H)
        if _stop_early(config, history, np.sqrt(err.norm_sq)):
            break
    return FactorPair(np.ascontiguousarray(W), H, tuple(history), name)


def nmf_als(A, k: int, config: NmfConfig | None = None, W0=None,
            callback: Callable | None = None) -> FactorPair:
    """Alternating least squares. Only W is initialized; H follows from it."""
    config = config or NmfConfig(algorithm="als")
    return _alternating(A, k, config, 0.0, 0.0, W0, callback, "als")


def nmf_acls(A, k: int, config: NmfConfig | None = None, W0=None,
             callback: Callable | None = None) -> FactorPair:
    """ALS with ``lambda_h``/``lambda_w`` ridge terms; zero lambdas give ALS."""
    config = config or NmfConfig(algorithm="acls")
    return _alternating(A, k, config, config.lambda_w, config.lambda_h, W0, callback, "acls")


def factorize(A, k: int, config: NmfConfig | None = None) -> FactorPair:
    config = config or NmfConfig()
    solver = {"mu": nmf_mu, "als": nmf_als, "acls": nmf_acls}[config.algorithm]
    return solver(A, k, config)
