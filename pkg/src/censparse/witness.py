"""Dual certificates and theoretical condition checks for support recovery.

The certificate construction: solve the support-restricted l1 problem, read
the dual vector off the stationarity conditions, and test strict feasibility
``max |z_j| < 1`` over the off-support coordinates.  When ground truth is
available the off-support dual splits into a projection-residual part (noise
plus imputation error pushed outside the support column space) and a
correlation part (off-support columns regressed on support columns); their
sum reproduces the dual exactly, which is itself a checked identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import SampleCovariance, population_neighbor_model
from .errors import BoundUndefinedError, ValidationError, WitnessUndefinedError
from .lasso import LassoConfig, solve_lasso

ZS_SLACK = 1e-10  # tolerance on |z_S| <= 1 at a converged restricted solution


def infnorm_op(a: np.ndarray) -> float:
    """Max absolute row sum; 0 for an empty matrix."""
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=1).max())


def _as_support(support, p: int) -> np.ndarray:
    sup = np.asarray(sorted(int(i) for i in support), dtype=np.int64)
    if sup.size == 0:
        raise ValidationError("support must be nonempty")
    if sup.size != np.unique(sup).size:
        raise ValidationError("support must not repeat indices")
    if sup.min() < 0 or sup.max() >= p:
        raise ValidationError(f"support indices must lie in [0, {p})")
    return sup


@dataclass(frozen=True)
class PopulationModel:
    """A known covariance, support and scale parameters, with derived constants.

    ``beta`` (smallest support eigenvalue) and ``gamma`` (incoherence margin)
    are always recomputed from sigma; gamma is NaN when the support block is
    singular.
    """

    sigma: np.ndarray
    support: tuple[int, ...]
    sigma_x2: float = 1.0
    sigma_eps2: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    sigma_dmax: float = 0.0
    sigma_dmin: float = 0.0

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValidationError(f"sigma must be square, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise ValidationError("sigma must be symmetric")
        if self.sigma_x2 <= 0:
            raise ValidationError("sigma_x2 must be positive")
        if self.sigma_eps2 < 0:
            raise ValidationError("sigma_eps2 must be non-negative")
        p = sigma.shape[0]
        sup = _as_support(self.support, p)
        comp = np.setdiff1d(np.arange(p), sup)
        sigma_ss = sigma[np.ix_(sup, sup)]
        beta = float(np.linalg.eigvalsh(sigma_ss).min())
        try:
            cross = np.linalg.solve(sigma_ss, sigma[np.ix_(sup, comp)])
            gamma = 1.0 - infnorm_op(cross.T)
        except np.linalg.LinAlgError:
            gamma = float("nan")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "support", tuple(int(i) for i in sup))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma_dmax", float(np.diag(sigma).max()))
        object.__setattr__(self, "sigma_dmin", float(np.diag(sigma).min()))

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    @property
    def complement(self) -> tuple[int, ...]:
        sup = set(self.support)
        return tuple(i for i in range(self.p) if i not in sup)


@dataclass(frozen=True)
class AssumptionReport:
    beta: float
    gamma: float
    pass_pd: bool
    pass_incoherence: bool


def check_assumptions(model: PopulationModel) -> AssumptionReport:
    """Positive definiteness on the support and the incoherence margin."""
    pass_pd = model.beta > 0
    pass_incoherence = bool(np.isfinite(model.gamma) and model.gamma > 0)
    return AssumptionReport(
        beta=model.beta, gamma=model.gamma, pass_pd=pass_pd, pass_incoherence=pass_incoherence
    )


@dataclass(frozen=True)
class WitnessTruth:
    """Ground truth of a synthetic run: coefficients, noise and imputation error."""

    w_star: np.ndarray
    epsilon: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class WitnessReport:
    w_restricted: np.ndarray
    z_s: np.ndarray
    z_sc: np.ndarray
    z_a: np.ndarray | None
    z_b: np.ndarray | None
    max_abs_zsc: float
    strictly_feasible: bool
    sign_consistent: bool | None
    zs_in_range: bool  # |z_S| <= 1 + ZS_SLACK; False flags solver-tolerance artifacts


def restricted_lasso(
    xhat: np.ndarray,
    y: np.ndarray,
    support,
    lam: float,
    tol: float = 1e-12,
    max_sweeps: int = 50_000,
) -> np.ndarray:
    """Solve the l1 problem over the support columns only."""
    xhat = np.asarray(xhat, dtype=np.float64)
    sup = _as_support(support, xhat.shape[1])
    sol = solve_lasso(xhat[:, sup], y, LassoConfig(lam=lam, tol=tol, max_sweeps=max_sweeps))
    return sol.w


def _support_gram(xs: np.ndarray, sup: np.ndarray) -> np.ndarray:
    gram = xs.T @ xs
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(gram)
        null = eigvecs[:, 0]
        involved = sup[np.abs(null) > 1e-8 * max(np.abs(null).max(), 1e-300)]
        raise WitnessUndefinedError(
            "restricted Gram matrix is singular; dependent support columns "
            f"{[int(i) for i in involved]}"
        ) from None


def _chol_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    # two triangular solves; sizes are s x s so plain solve is fine
    return np.linalg.solve(chol.T, np.linalg.solve(chol, b))


def construct_witness(
    xhat: np.ndarray,
    y: np.ndarray,
    support,
    lam: float,
    truth: WitnessTruth | None = None,
    tol: float = 1e-12,
    max_sweeps: int = 50_000,
) -> WitnessReport:
    """Build the dual certificate for the restricted solution at ``lam``.

    Without ground truth the off-support dual comes from the stationarity
    residual of the restricted solution.  With ground truth the same vector is
    assembled from (noise - imputation error) and additionally decomposed into
    the projection part ``z_a`` and the correlation part ``z_b``.
    """
    xhat = np.asarray(xhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = xhat.shape
    if lam <= 0:
        raise ValidationError("lam must be positive for the dual construction")
    sup = _as_support(support, p)
    comp = np.setdiff1d(np.arange(p), sup)
    xs = xhat[:, sup]
    xsc = xhat[:, comp]
    chol = _support_gram(xs, sup)

    w_restricted = restricted_lasso(xhat, y, sup, lam, tol=tol, max_sweeps=max_sweeps)
    scale = 1.0 / (lam * n)
    fit_residual = xs @ w_restricted - y
    z_s = -scale * (xs.T @ fit_residual)
    zs_in_range = bool(np.abs(z_s).max() <= 1.0 + ZS_SLACK)

    z_a = z_b = None
    sign_consistent = None
    if truth is None:
        z_sc = -scale * (xsc.T @ fit_residual)
    else:
        w_star = np.asarray(truth.w_star, dtype=np.float64)
        eps = np.asarray(truth.epsilon, dtype=np.float64)
        delta = np.asarray(truth.delta, dtype=np.float64)
        if w_star.shape != (p,) or eps.shape != (n,) or delta.shape != (n, p):
            raise ValidationError("truth shapes do not match the design")
        noise = eps - delta[:, sup] @ w_star[sup]
        z_sc = -scale * (xsc.T @ (xs @ (w_restricted - w_star[sup]) - noise))
        proj_resid = noise - xs @ _chol_solve(chol, xs.T @ noise)
        z_a = scale * (xsc.T @ proj_resid)
        z_b = xsc.T @ (xs @ _chol_solve(chol, z_s))
        sign_consistent = bool(np.array_equal(np.sign(w_restricted), np.sign(w_star[sup])))

    max_abs_zsc = float(np.abs(z_sc).max()) if z_sc.size else 0.0
    return WitnessReport(
        w_restricted=w_restricted,
        z_s=z_s,
        z_sc=z_sc,
        z_a=z_a,
        z_b=z_b,
        max_abs_zsc=max_abs_zsc,
        strictly_feasible=bool(max_abs_zsc < 1.0),
        sign_consistent=sign_consistent,
        zs_in_range=zs_in_range,
    )


def score_separation_condition(model: PopulationModel) -> np.ndarray:
    """Per-feature check that the top population score dominates every rival.

    Entry i is True when ``score(i, top) - 3*score(i, j)`` exceeds
    ``|sigma[top, top]| + 3*|sigma[j, j]| + min diag`` for every other j.
    Under this margin the empirical ranking agrees with the population one
    with probability approaching one as n grows.
    """
    sigma = model.sigma
    p = model.p
    if p < 2:
        raise ValidationError("score separation needs at least two features")
    pop = population_neighbor_model(sigma)
    out = np.ones(p, dtype=bool)
    diag = np.diag(sigma)
    for i in range(p):
        top = int(pop.top[i])
        lead = pop.scores[i, top]
        rivals = [j for j in range(p) if j != i and j != top]
        for j in rivals:
            lhs = lead - 3.0 * pop.scores[i, j]
            rhs = abs(sigma[top, top]) + 3.0 * abs(diag[j]) + model.sigma_dmin
            if not lhs > rhs:
                out[i] = False
                break
    return out


@dataclass(frozen=True)
class LambdaBound:
    """Variance proxies and the regularization threshold they imply."""

    h_per_sample: np.ndarray
    g_per_entry: np.ndarray
    h_max: float
    g_max: float
    lambda_min: float


def lambda_bound(
    model: PopulationModel,
    mask: np.ndarray,
    w_star: np.ndarray,
    top: np.ndarray,
    tau_h: np.ndarray,
    tau_g: np.ndarray,
) -> LambdaBound:
    """Per-sample and per-entry variance proxies and the lambda threshold.

    ``tau_h`` feeds the sample proxy (the ratios actually used to impute,
    typically empirical) and ``tau_g`` the per-entry proxy (typically
    population); pass the same vector twice to collapse the distinction.
    """
    if not np.isfinite(model.gamma) or model.gamma <= 0:
        raise BoundUndefinedError(f"incoherence margin gamma={model.gamma} is not positive")
    mask = np.asarray(mask).astype(bool)
    n, p = mask.shape
    if p != model.p:
        raise ValidationError("mask width does not match the model dimension")
    w_star = np.asarray(w_star, dtype=np.float64)
    top = np.asarray(top, dtype=np.int64)
    tau_h = np.asarray(tau_h, dtype=np.float64)
    tau_g = np.asarray(tau_g, dtype=np.float64)
    sup = np.asarray(model.support, dtype=np.int64)
    comp = np.asarray(model.complement, dtype=np.int64)
    diag = np.diag(model.sigma)

    # h_k^2: noise power plus imputation power over censored support entries
    coef = (tau_h[sup] ** 2 * diag[top[sup]] + diag[sup]) * w_star[sup] ** 2
    holes = ~mask[:, sup]
    h_sq = model.sigma_eps2 + model.sigma_x2 * (holes * coef[np.newaxis, :]).sum(axis=1)
    h_per_sample = np.sqrt(h_sq)

    # g_k(i)^2 over off-support entries: observed vs imputed variance proxy
    obs = mask[:, comp].astype(np.float64)
    g_obs = model.sigma_x2 * diag[comp]
    g_imp = 2.25 * model.sigma_x2 * diag[top[comp]] * tau_g[comp] ** 2
    g_sq = obs * g_obs[np.newaxis, :] + (1.0 - obs) * g_imp[np.newaxis, :]
    g_per_entry = np.sqrt(g_sq)

    h_max = float(h_per_sample.max())
    g_max = float(g_per_entry.max()) if g_per_entry.size else 0.0
    return LambdaBound(
        h_per_sample=h_per_sample,
        g_per_entry=g_per_entry,
        h_max=h_max,
        g_max=g_max,
        lambda_min=20.0 * h_max * g_max / model.gamma,
    )


def sample_incoherence(h: SampleCovariance, support) -> float:
    """Incoherence of the pairwise-complete covariance over the given support."""
    p = h.n_features
    sup = _as_support(support, p)
    comp = np.setdiff1d(np.arange(p), sup)
    try:
        cross = np.linalg.solve(h.h[np.ix_(sup, sup)], h.h[np.ix_(sup, comp)])
    except np.linalg.LinAlgError:
        raise ValidationError("sample covariance is singular on the support") from None
    return infnorm_op(cross.T)


def sample_min_eigen(h: SampleCovariance, support) -> float:
    """Smallest eigenvalue of the support block of the sample covariance."""
    sup = _as_support(support, h.n_features)
    return float(np.linalg.eigvalsh(h.h[np.ix_(sup, sup)]).min())


@dataclass(frozen=True)
class ImputedCovariance:
    """Second-moment matrix of a fully imputed design."""

    hhat: np.ndarray

    def __post_init__(self) -> None:
        hhat = np.asarray(self.hhat, dtype=np.float64)
        if not np.array_equal(hhat, hhat.T):
            raise ValidationError("hhat must be exactly symmetric")
        min_eig = float(np.linalg.eigvalsh(hhat).min())
        if min_eig < -1e-10:
            raise ValidationError(f"hhat must be PSD, min eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "hhat", hhat)


def imputed_covariance(xhat: np.ndarray) -> ImputedCovariance:
    """(1/n) Xhat^T Xhat, exactly symmetrized."""
    xhat = np.asarray(xhat, dtype=np.float64)
    g = xhat.T @ xhat / xhat.shape[0]
    g = np.triu(g) + np.triu(g, 1).T
    return ImputedCovariance(hhat=g)
