"""Pairwise-complete covariance and the neighbor ranking used for imputation.

The sample covariance ``h[i, j]`` averages products over the samples where
both features are observed; no mean is subtracted since the data model is
zero-mean.  Each feature ranks the others by the score ``h[i, j]^2 / h[j, j]``
(how well feature j linearly predicts feature i); the top-ranked feature
supplies the regression ratio used to fill missing values of i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CensoredMatrix
from .errors import ValidationError

SCORE_SENTINEL = -np.inf


def _mirror_upper(a: np.ndarray) -> np.ndarray:
    # bit-exact symmetry from the upper triangle
    return np.triu(a) + np.triu(a, 1).T


@dataclass(frozen=True)
class SampleCovariance:
    """Pairwise-complete second-moment matrix with per-pair co-observation counts."""

    h: np.ndarray
    co_counts: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.float64)
        counts = np.asarray(self.co_counts, dtype=np.int64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError(f"h must be square, got {h.shape}")
        if counts.shape != h.shape:
            raise ValidationError("co_counts shape must match h")
        if not np.array_equal(h, h.T):
            raise ValidationError("h must be exactly symmetric")
        if not np.array_equal(counts, counts.T) or (counts < 0).any():
            raise ValidationError("co_counts must be symmetric and non-negative")
        if not (h[counts == 0] == 0).all():
            raise ValidationError("pairs with no co-observations must have h == 0")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "co_counts", counts)
        for a in (self.h, self.co_counts):
            a.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class NeighborModel:
    """Empirical neighbor scores, full per-feature ranking, top neighbor and ratio.

    ``ranking[i]`` lists the p-1 other features by descending score with
    ascending-index tie-break; ``top[i] = ranking[i][0]``.  ``ratio[i]`` is the
    regression coefficient ``h[i, top] / h[top, top]``, 0 when the denominator
    is not positive (``ratio_ok[i]`` is False for such degenerate features).
    The covariance the model was built from rides along so that imputation can
    recompute ratios for lower-ranked neighbors.
    """

    scores: np.ndarray
    ranking: np.ndarray
    top: np.ndarray
    ratio: np.ndarray
    ratio_ok: np.ndarray
    cov: SampleCovariance

    @property
    def n_features(self) -> int:
        return self.scores.shape[0]

    def ratio_for(self, i: int, j: int) -> float:
        """Regression ratio h[i, j] / h[j, j]; 0 for a degenerate denominator."""
        hjj = self.cov.h[j, j]
        return float(self.cov.h[i, j] / hjj) if hjj > 0 else 0.0


@dataclass(frozen=True)
class PopulationNeighborModel:
    """Population counterpart of :class:`NeighborModel`, built from a known sigma."""

    scores: np.ndarray
    ranking: np.ndarray
    top: np.ndarray
    ratio: np.ndarray


def pairwise_covariance(data: CensoredMatrix) -> SampleCovariance:
    """Second moments averaged over co-observed samples, zeros where none exist."""
    x0 = np.where(data.mask, data.values, 0.0)
    mf = data.mask.astype(np.float64)
    cross = x0.T @ x0
    counts = np.rint(mf.T @ mf).astype(np.int64)
    with np.errstate(invalid="ignore"):
        h = np.where(counts > 0, cross / np.maximum(counts, 1), 0.0)
    return SampleCovariance(h=_mirror_upper(h), co_counts=_mirror_upper(counts))


def _score_matrix(h: np.ndarray, selectable: np.ndarray) -> np.ndarray:
    p = h.shape[0]
    diag = np.diag(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = h**2 / diag[np.newaxis, :]
    scores = np.where(selectable, scores, SCORE_SENTINEL)
    np.fill_diagonal(scores, SCORE_SENTINEL)
    return scores


def neighbor_scores(cov: SampleCovariance) -> np.ndarray:
    """Score matrix ``h[i,j]^2 / h[j,j]``; -inf marks unselectable pairs."""
    selectable = (np.diag(cov.h) > 0)[np.newaxis, :] & (cov.co_counts > 0)
    return _score_matrix(cov.h, selectable)


def _rank_rows(scores: np.ndarray) -> np.ndarray:
    p = scores.shape[0]
    ranking = np.empty((p, p - 1), dtype=np.int64)
    idx = np.arange(p)
    for i in range(p):
        order = np.lexsort((idx, -scores[i]))
        ranking[i] = order[order != i]
    return ranking


def _model_parts(h: np.ndarray, scores: np.ndarray):
    p = h.shape[0]
    if p < 2:
        raise ValidationError("neighbor model needs at least two features")
    ranking = _rank_rows(scores)
    top = ranking[:, 0].copy()
    denom = h[top, top]
    ratio_ok = denom > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ratio_ok, h[np.arange(p), top] / np.where(ratio_ok, denom, 1.0), 0.0)
    return ranking, top, ratio, ratio_ok


def build_neighbor_model(cov: SampleCovariance) -> NeighborModel:
    """Rank neighbors per feature and extract the top neighbor and its ratio."""
    scores = neighbor_scores(cov)
    ranking, top, ratio, ratio_ok = _model_parts(cov.h, scores)
    return NeighborModel(
        scores=scores, ranking=ranking, top=top, ratio=ratio, ratio_ok=ratio_ok, cov=cov
    )


def population_neighbor_model(sigma: np.ndarray) -> PopulationNeighborModel:
    """Neighbor model computed from a population covariance instead of samples."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValidationError(f"sigma must be square, got {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
        raise ValidationError("sigma must be symmetric")
    if (np.diag(sigma) <= 0).any():
        raise ValidationError("sigma must have a positive diagonal")
    scores = _score_matrix(sigma, np.ones_like(sigma, dtype=bool))
    ranking, top, ratio, _ = _model_parts(sigma, scores)
    return PopulationNeighborModel(scores=scores, ranking=ranking, top=top, ratio=ratio)
