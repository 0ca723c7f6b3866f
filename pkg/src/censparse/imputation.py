"""Fill censored design entries: ranked-neighbor regression and reference baselines.

Every imputer copies observed entries through bit-exactly and only writes at
masked positions.  The neighbor imputer walks each feature's ranking and uses
the first neighbor observed in that row, recomputing the regression ratio for
the neighbor actually used; rows with nothing observed fall back to zero (the
modeled column mean).  Fallbacks (any rank > 0, or zero fill) are logged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .covariance import NeighborModel
from .data import CensoredMatrix
from .errors import ValidationError

BASELINE_STRATEGIES = ("zero", "mean", "median")


class FallbackEntry(NamedTuple):
    """One masked entry not filled from its rank-0 neighbor."""

    sample: int
    feature: int
    neighbor: int | None  # None when zero-filled
    rank: int | None


@dataclass(frozen=True)
class ImputedDesign:
    """A fully numeric design; ``source_mask`` marks the entries that were observed."""

    xhat: np.ndarray
    source_mask: np.ndarray
    fallback_log: tuple[FallbackEntry, ...] = ()
    converged: bool = True

    def __post_init__(self) -> None:
        xhat = np.asarray(self.xhat, dtype=np.float64)
        if not np.isfinite(xhat).all():
            raise ValidationError("imputed design must be entirely finite")
        object.__setattr__(self, "xhat", xhat)
        xhat.setflags(write=False)


@dataclass(frozen=True)
class ImputationError:
    """Entrywise deviation from the ground truth, zero wherever observed."""

    delta: np.ndarray
    sup_norm: float
    frobenius: float


def _start_from_observed(data: CensoredMatrix) -> np.ndarray:
    return np.where(data.mask, data.values, 0.0)


def _sorted_log(entries: list[FallbackEntry]) -> tuple[FallbackEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (e.sample, e.feature)))


def impute_top_neighbor(data: CensoredMatrix, model: NeighborModel) -> ImputedDesign:
    """Fill each masked entry from the best-ranked neighbor observed in its row."""
    if model.n_features != data.n_features:
        raise ValidationError(
            f"model built for {model.n_features} features, data has {data.n_features}"
        )
    xhat = _start_from_observed(data)
    log: list[FallbackEntry] = []
    for i in range(data.n_features):
        remaining = np.flatnonzero(~data.mask[:, i])
        for rank, j in enumerate(model.ranking[i]):
            if remaining.size == 0:
                break
            hit = remaining[data.mask[remaining, j]]
            if hit.size:
                xhat[hit, i] = data.values[hit, j] * model.ratio_for(i, int(j))
                if rank > 0:
                    log.extend(FallbackEntry(int(k), i, int(j), rank) for k in hit)
                remaining = remaining[~data.mask[remaining, j]]
        # nothing observed in these rows at all
        log.extend(FallbackEntry(int(k), i, None, None) for k in remaining)
    return ImputedDesign(xhat=xhat, source_mask=data.mask, fallback_log=_sorted_log(log))


def impute_baseline(data: CensoredMatrix, strategy: str) -> ImputedDesign:
    """Column-constant fill: zero, observed mean, or observed median."""
    if strategy not in BASELINE_STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}, expected one of {BASELINE_STRATEGIES}")
    xhat = _start_from_observed(data)
    log: list[FallbackEntry] = []
    if strategy != "zero":
        for i in range(data.n_features):
            rows = np.flatnonzero(~data.mask[:, i])
            if rows.size == 0:
                continue
            obs = data.values[data.mask[:, i], i]
            if obs.size == 0:
                log.extend(FallbackEntry(int(k), i, None, None) for k in rows)
                continue  # xhat already zero there
            fill = float(np.mean(obs)) if strategy == "mean" else float(np.median(obs))
            xhat[rows, i] = fill
    return ImputedDesign(xhat=xhat, source_mask=data.mask, fallback_log=_sorted_log(log))


def impute_lowrank(
    data: CensoredMatrix,
    rank_budget: int | None = None,
    shrinkage: float = 0.0,
    max_iters: int = 200,
    tol: float = 1e-6,
) -> ImputedDesign:
    """Iterative SVD completion: threshold singular values, rewrite masked entries.

    Starts from zero fill and alternates full SVD, singular-value shrinkage and
    truncation to ``rank_budget``, and overwriting masked entries from the
    reconstruction, until successive reconstructions differ by less than
    ``tol`` in Frobenius norm.  Non-convergence returns the last iterate with
    ``converged=False`` rather than raising.
    """
    n, p = data.values.shape
    if rank_budget is None:
        rank_budget = min(n, p)
    if not 1 <= rank_budget <= min(n, p):
        raise ValidationError(f"rank_budget must be in [1, {min(n, p)}], got {rank_budget}")
    if shrinkage < 0:
        raise ValidationError("shrinkage must be non-negative")
    if max_iters < 1 or tol <= 0:
        raise ValidationError("max_iters must be >= 1 and tol > 0")
    xhat = _start_from_observed(data)
    holes = ~data.mask
    if not holes.any():
        return ImputedDesign(xhat=xhat, source_mask=data.mask)
    converged = False
    prev = None
    for _ in range(max_iters):
        u, s, vt = np.linalg.svd(xhat, full_matrices=False)
        s = np.maximum(s - shrinkage, 0.0)
        s[rank_budget:] = 0.0
        recon = (u * s) @ vt
        xhat[holes] = recon[holes]
        if prev is not None and np.linalg.norm(recon - prev) < tol:
            converged = True
            break
        prev = recon
    return ImputedDesign(xhat=xhat, source_mask=data.mask, converged=converged)


def imputation_error(imp: ImputedDesign, truth: np.ndarray) -> ImputationError:
    """Deviation of the imputed design from the true matrix."""
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != imp.xhat.shape:
        raise ValidationError(f"truth shape {truth.shape} != design shape {imp.xhat.shape}")
    delta = imp.xhat - truth
    return ImputationError(
        delta=delta,
        sup_norm=float(np.abs(delta).max()),
        frobenius=float(np.linalg.norm(delta)),
    )
