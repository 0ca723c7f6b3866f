"""Shared test helpers: independent oracles for the l1 solver."""

from __future__ import annotations

import itertools

import numpy as np
import pytest


def lasso_objective(design: np.ndarray, labels: np.ndarray, w: np.ndarray, lam: float) -> float:
    n = design.shape[0]
    resid = design @ w - labels
    return float(resid @ resid) / (2 * n) + lam * float(np.abs(w).sum())


def brute_force_lasso(design: np.ndarray, labels: np.ndarray, lam: float) -> np.ndarray:
    """Exact minimizer by enumerating all 3^p active-sign patterns.

    For each pattern, the candidate solves the linear stationarity system on
    its active set; a candidate is kept only if its signs match the pattern
    and the inactive coordinates satisfy the subgradient bound.  The feasible
    candidate with the smallest objective is the optimum (convexity).
    """
    n, p = design.shape
    gram = design.T @ design / n
    rhs = design.T @ labels / n
    best_w = np.zeros(p)
    best_obj = lasso_objective(design, labels, best_w, lam)
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=p):
        s = np.array(signs)
        active = np.flatnonzero(s != 0)
        if active.size == 0:
            continue
        w = np.zeros(p)
        try:
            wa = np.linalg.solve(
                gram[np.ix_(active, active)], rhs[active] - lam * s[active]
            )
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.sign(wa) == s[active]):
            continue
        w[active] = wa
        inactive = np.flatnonzero(s == 0)
        grad_off = gram[np.ix_(inactive, active)] @ wa - rhs[inactive]
        if inactive.size and np.abs(grad_off).max() > lam + 1e-10:
            continue
        obj = lasso_objective(design, labels, w, lam)
        if obj < best_obj:
            best_obj = obj
            best_w = w
    return best_w


def grid_minimize(design: np.ndarray, labels: np.ndarray, lam: float,
                  half_width: float = 3.0, points: int = 21, rounds: int = 12) -> np.ndarray:
    """Coarse-to-fine grid search over the objective; independent of any solver.

    Only usable for p <= 3; evaluates the objective on a full grid and shrinks
    the box around the best point each round.
    """
    p = design.shape[1]
    assert p <= 3, "grid oracle is exponential in p"
    center = np.zeros(p)
    width = half_width
    for _ in range(rounds):
        axes = [np.linspace(c - width, c + width, points) for c in center]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
        resid = mesh @ design.T - labels[np.newaxis, :]
        obj = (resid**2).sum(axis=1) / (2 * design.shape[0]) + lam * np.abs(mesh).sum(axis=1)
        center = mesh[int(np.argmin(obj))]
        width = width * 2.5 / (points - 1)  # keep a couple of cells of slack
    return center


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
