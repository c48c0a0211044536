"""Generators for the Example 1 / Example 2 simulation designs."""
from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .core import Dataset, InputError, TrueModel
from .linalg import cholesky, gaussian_sample, make_rng, spd_inverse


@dataclass(frozen=True)
class SimulationConfig:
    """Design parameters. ``rho = 0`` gives Example 1 (identity precision)."""

    n: int = 100
    p: int = 50
    q: int = 50
    rho: float = 0.0
    beta_value: float = 4.0
    beta_support: int = 10
    gamma_value: float = 6.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be >= 1")
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise InputError("need p, q >= 0 and p + q >= 1")
        if not -1 < self.rho < 1:
            raise InputError("rho must lie in (-1, 1)")
        if not 0 <= self.beta_support <= self.p:
            raise InputError(f"beta_support must lie in [0, p={self.p}]")
        if self.sigma < 0:
            raise InputError("sigma must be >= 0")

    def with_ratio(self, ratio: float) -> "SimulationConfig":
        p, q = sparsity_split(self.p + self.q, ratio)
        return replace(self, p=p, q=q)


@dataclass(frozen=True)
class SimulationInstance:
    data: Dataset
    truth: TrueModel
    config: SimulationConfig
    noise: np.ndarray
    sigma_full: np.ndarray  # covariance of the joint design (Z, W)


def make_tridiagonal_precision(dim: int, rho: float) -> np.ndarray:
    """Unit diagonal with ``rho`` on the first off-diagonals; checked PD."""
    if dim < 1:
        raise InputError("dim must be >= 1")
    omega = np.eye(dim)
    if dim > 1 and rho != 0:
        i = np.arange(dim - 1)
        omega[i, i + 1] = rho
        omega[i + 1, i] = rho
    cholesky(omega)
    return omega


def sparsity_split(p_plus_q: int, ratio: float) -> tuple[int, int]:
    """Return ``(p, q)`` with ``q = round(ratio * (p + q))``, halves rounded up."""
    if not 0 < ratio < 1:
        raise InputError("ratio must lie in (0, 1)")
    q = int(Decimal(repr(ratio * p_plus_q)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    p = p_plus_q - q
    if p == 0 or q == 0:
        raise InputError(f"split of {p_plus_q} at ratio {ratio} leaves an empty block")
    return p, q


def gen_instance(config: SimulationConfig) -> SimulationInstance:
    """Draw ``(y, Z, W)`` from ``y = Z beta + W gamma + eps``.

    The precision is built over all ``p + q`` columns, so with ``rho != 0``
    neighbouring columns are correlated across the block boundary. The
    truth carries the precision of the marginal law of ``W``.
    """
    p, q, n = config.p, config.q, config.n
    omega = make_tridiagonal_precision(p + q, config.rho)
    sigma_full = spd_inverse(omega)
    rng = make_rng(config.seed)
    X = gaussian_sample(cholesky(sigma_full), n, rng)
    Z, W = X[:, :p], X[:, p:]
    beta = np.zeros(p)
    beta[: config.beta_support] = config.beta_value
    gamma = np.full(q, float(config.gamma_value))
    noise = config.sigma * rng.standard_normal(n)
    y = Z @ beta + W @ gamma + noise
    omega_w = spd_inverse(sigma_full[p:, p:]) if q else None
    truth = TrueModel(beta=beta, gamma=gamma, sigma=config.sigma, Omega=omega_w)
    return SimulationInstance(Dataset(y, Z, W), truth, config, noise, sigma_full)
