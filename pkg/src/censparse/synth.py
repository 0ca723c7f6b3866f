"""Synthetic instances: covariance models, sparse truth, Gaussian designs, masks.

Everything is a pure function of (config, seed).  Substreams are derived from
``numpy.random.SeedSequence([seed, *key])`` where ``key`` is a documented
tuple of small integers (see :func:`substream`), so trials are independent
and reproducible regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import CensoredMatrix
from .errors import ValidationError

# substream tags for the documented splitting rule
STREAM_TRUTH = 0
STREAM_DATA = 1
STREAM_MASK = 2

MASK_REDRAW_LIMIT = 100


def substream(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the substream identified by (seed, *key)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


# ---------------------------------------------------------------------------
# covariance specs


@dataclass(frozen=True)
class Equicorrelation:
    """Unit diagonal, constant off-diagonal rho; PD iff -1/(p-1) < rho < 1."""

    rho: float


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class CustomSigma:
    matrix: np.ndarray


SigmaSpec = Equicorrelation | Identity | CustomSigma


def make_sigma(spec: SigmaSpec, p: int) -> np.ndarray:
    if isinstance(spec, Identity):
        return np.eye(p)
    if isinstance(spec, Equicorrelation):
        rho = spec.rho
        if p > 1 and not (-1.0 / (p - 1) < rho < 1.0):
            raise ValidationError(
                f"equicorrelation rho={rho} is not positive definite for p={p}"
            )
        return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))
    if isinstance(spec, CustomSigma):
        sigma = np.asarray(spec.matrix, dtype=np.float64)
        if sigma.shape != (p, p):
            raise ValidationError(f"custom sigma shape {sigma.shape}, expected {(p, p)}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise ValidationError("custom sigma must be symmetric")
        min_eig = float(np.linalg.eigvalsh(sigma).min())
        if min_eig < -1e-10:
            raise ValidationError(f"custom sigma is indefinite (min eigenvalue {min_eig:.3e})")
        return sigma
    raise ValidationError(f"unknown sigma spec {spec!r}")


# ---------------------------------------------------------------------------
# mask specs


@dataclass(frozen=True)
class FractionMask:
    """Exactly round(theta * n * p) censored entries, placed uniformly."""

    theta: float


@dataclass(frozen=True)
class ChainMask:
    """Staircase pattern: consecutive feature blocks of ``width`` overlapping in
    one feature, each observed only on its own contiguous band of samples."""

    width: int


@dataclass(frozen=True)
class CustomMask:
    matrix: np.ndarray


MaskSpec = FractionMask | ChainMask | CustomMask


@dataclass(frozen=True)
class GenerationConfig:
    n: int
    p: int
    s: int
    sigma_spec: SigmaSpec = field(default_factory=lambda: Equicorrelation(0.8))
    wstar_low: float = 0.25
    wstar_high: float = 1.0
    sigma_eps: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.p < 1:
            raise ValidationError("n and p must be positive")
        if not 1 <= self.s <= self.p:
            raise ValidationError(f"support size s={self.s} must be in [1, p={self.p}]")
        if not 0 < self.wstar_low <= self.wstar_high:
            raise ValidationError("need 0 < wstar_low <= wstar_high")
        if self.sigma_eps < 0:
            raise ValidationError("sigma_eps must be non-negative")
        # fail fast on an inconsistent covariance spec
        make_sigma(self.sigma_spec, self.p)


@dataclass(frozen=True)
class GroundTruth:
    w_star: np.ndarray
    support: tuple[int, ...]


@dataclass(frozen=True)
class SyntheticDataset:
    x_true: np.ndarray
    y: np.ndarray
    epsilon: np.ndarray


def sample_ground_truth(config: GenerationConfig, rng: np.random.Generator) -> GroundTruth:
    """Support = first s of a seeded permutation; magnitudes uniform with random sign."""
    perm = rng.permutation(config.p)
    chosen = perm[: config.s]
    signs = rng.integers(0, 2, size=config.s) * 2 - 1
    mags = rng.uniform(config.wstar_low, config.wstar_high, size=config.s)
    w = np.zeros(config.p)
    w[chosen] = signs * mags
    return GroundTruth(w_star=w, support=tuple(sorted(int(i) for i in chosen)))


def sample_dataset(
    config: GenerationConfig,
    sigma: np.ndarray,
    truth: GroundTruth,
    rng: np.random.Generator,
) -> SyntheticDataset:
    """Rows are z L^T for standard-normal z and Cholesky factor L of sigma."""
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        min_eig = float(np.linalg.eigvalsh(sigma).min())
        raise ValidationError(
            f"sigma is not positive definite (min eigenvalue {min_eig:.3e})"
        ) from None
    x = rng.standard_normal((config.n, config.p)) @ chol.T
    eps = rng.normal(0.0, config.sigma_eps, size=config.n)
    return SyntheticDataset(x_true=x, y=x @ truth.w_star + eps, epsilon=eps)


def _chain_mask(n: int, p: int, width: int) -> np.ndarray:
    if width < 2:
        raise ValidationError("chain width must be at least 2 (blocks share one feature)")
    if width > p:
        raise ValidationError(f"chain width {width} exceeds p={p}")
    step = width - 1
    n_blocks = max(1, -(-(p - 1) // step))  # ceil((p-1)/step)
    mask = np.zeros((n, p), dtype=bool)
    bounds = np.linspace(0, n, n_blocks + 1).astype(int)
    for b in range(n_blocks):
        lo_f = b * step
        hi_f = min(lo_f + width, p)
        mask[bounds[b] : bounds[b + 1], lo_f:hi_f] = True
    return mask


def _fraction_mask(n: int, p: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    n_zero = round(theta * n * p)
    for _ in range(MASK_REDRAW_LIMIT):
        flat = np.ones(n * p, dtype=bool)
        flat[rng.choice(n * p, size=n_zero, replace=False)] = False
        mask = flat.reshape(n, p)
        if mask.any(axis=0).all():  # every feature keeps >= 1 observed sample
            return mask
    raise ValidationError(
        f"could not place {n_zero} censored entries leaving every feature observed"
    )


def make_mask(spec: MaskSpec, n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Binary observation mask (True = observed) for the requested pattern."""
    if isinstance(spec, FractionMask):
        if not 0.0 <= spec.theta < 1.0:
            raise ValidationError(f"fraction theta={spec.theta} must be in [0, 1)")
        return _fraction_mask(n, p, spec.theta, rng)
    if isinstance(spec, ChainMask):
        return _chain_mask(n, p, spec.width)
    if isinstance(spec, CustomMask):
        mask = np.asarray(spec.matrix)
        if mask.shape != (n, p):
            raise ValidationError(f"custom mask shape {mask.shape}, expected {(n, p)}")
        if mask.dtype != np.bool_:
            if not np.isin(mask, (0, 1)).all():
                raise ValidationError("custom mask entries must be 0 or 1")
            mask = mask.astype(bool)
        return mask.copy()
    raise ValidationError(f"unknown mask spec {spec!r}")


def apply_mask(x_true: np.ndarray, mask: np.ndarray) -> CensoredMatrix:
    """Censor a fully observed matrix: masked entries become NaN."""
    x_true = np.asarray(x_true, dtype=np.float64)
    mask = np.asarray(mask)
    if mask.shape != x_true.shape:
        raise ValidationError(f"mask shape {mask.shape} != data shape {x_true.shape}")
    values = np.where(mask.astype(bool), x_true, np.nan)
    return CensoredMatrix(values=values, mask=mask)
