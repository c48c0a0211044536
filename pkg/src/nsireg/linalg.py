"""Dense symmetric kernels and seeded Gaussian sampling."""
from __future__ import annotations

import numpy as np
from scipy import linalg as sla

from .core import InputError, NotPositiveDefiniteError


def as_symmetric(S, atol: float = 1e-10) -> np.ndarray:
    """Validate squareness and symmetry; return a float copy with exact symmetry."""
    S = np.array(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InputError("matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > atol * scale:
        raise InputError("matrix is not symmetric")
    return (S + S.T) / 2


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises
    ------
    NotPositiveDefiniteError
        If a non-positive pivot is met.
    """
    S = as_symmetric(S)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from None
    if not np.all(np.diag(L) > 0):
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return L


def is_positive_definite(S) -> bool:
    try:
        cholesky(S)
    except (NotPositiveDefiniteError, InputError):
        return False
    return True


def spd_inverse(S) -> np.ndarray:
    L = cholesky(S)
    inv = sla.cho_solve((L, True), np.eye(L.shape[0]))
    return (inv + inv.T) / 2


def sample_covariance(W, center: bool = False) -> np.ndarray:
    """``W.T @ W / n``; mean-zero models need no centering."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] < 1:
        raise InputError(f"expected an n x q matrix with n >= 1, got shape {W.shape}")
    if center:
        W = W - W.mean(axis=0)
    S = W.T @ W / W.shape[0]
    return (S + S.T) / 2


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by an int or a tuple of ints."""
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = list(seed) if isinstance(seed, (tuple, list)) else seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(*keys: int) -> int:
    """Collapse a tuple of non-negative ints into one 64-bit seed."""
    state = np.random.SeedSequence(list(keys)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def gaussian_sample(chol: np.ndarray, n: int, rng) -> np.ndarray:
    """Rows drawn from ``N(0, L L^T)`` as ``G @ L.T`` with ``G`` standard normal."""
    if n < 1:
        raise InputError("n must be >= 1")
    L = np.asarray(chol, dtype=float)
    G = make_rng(rng).standard_normal((n, L.shape[0]))
    return G @ L.T
