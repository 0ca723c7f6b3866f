"""Benchmark drivers: censoring sweeps, sample-complexity sweeps, chain masks.

Each driver is a pure function of its configuration and the top-level seed.
Per-trial substreams follow the rule in :mod:`censparse.synth`:
``substream(seed, experiment_tag, stream, trial, cell)`` where ``cell``
distinguishes grid cells (sample-complexity sweep) or the swept mask setting
(mask streams only); the generated data of a trial is shared across mask
settings so sweeps are paired.

Regularization policies:

- ``FixedLambda(value)``: passthrough.
- ``ScaledLambda(c)``: ``c * sigma_hat * sqrt(log p / n)`` with the noise
  scale estimated from a preliminary ridge fit residual.
- ``TheoryLambda(margin)``: ``margin`` times the variance-proxy threshold
  (needs the population model and mask; truth-aware).
- ``SupportPathLambda()``: truth-aware like the theory policy, but data
  driven: bisect the regularization path for the entry edges of the
  ``size``-th and ``size+1``-th coordinates and return their geometric
  midpoint, the center of the widest exact-recovery window.  This is the
  driver default; the scale-based policies sit far from the narrow window
  this problem family leaves (see README).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .covariance import build_neighbor_model, pairwise_covariance, population_neighbor_model
from .data import format_value, save_table
from .errors import BoundUndefinedError, ValidationError
from .imputation import impute_baseline, impute_lowrank, impute_top_neighbor
from .lasso import LassoConfig, solve_lasso
from .synth import (
    STREAM_DATA,
    STREAM_MASK,
    STREAM_TRUTH,
    ChainMask,
    Equicorrelation,
    FractionMask,
    GenerationConfig,
    apply_mask,
    make_mask,
    make_sigma,
    sample_dataset,
    sample_ground_truth,
    substream,
)
from .witness import PopulationModel, lambda_bound

LAMBDA_FLOOR = 1e-8

EXP1_TAG, EXP2_TAG, EXP3_TAG = 1, 2, 3

EXP1_METHODS = ("neighbor", "zero", "mean", "median")
EXP3_METHODS = ("neighbor", "lowrank")

DEFAULT_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4)
DEFAULT_WIDTHS = tuple(range(2, 21))
DEFAULT_EXP2_GRID = (
    (200, 50, 10),
    (500, 50, 10),
    (1000, 50, 10),
    (2000, 50, 10),
    (500, 50, 5),
    (1000, 50, 5),
    (2000, 50, 5),
    (500, 50, 3),
    (1000, 50, 3),
    (2000, 50, 3),
)


# ---------------------------------------------------------------------------
# lambda policies


@dataclass(frozen=True)
class FixedLambda:
    value: float


@dataclass(frozen=True)
class ScaledLambda:
    c: float = 2.0
    ridge_penalty: float = 1e-3


@dataclass(frozen=True)
class TheoryLambda:
    margin: float = 1.05


@dataclass(frozen=True)
class SupportPathLambda:
    probe_tol: float = 1e-5
    probe_sweeps: int = 1000
    bisect_steps: int = 12


LambdaPolicy = FixedLambda | ScaledLambda | TheoryLambda | SupportPathLambda


@dataclass(frozen=True)
class LambdaContext:
    """Everything a policy might need; drivers fill what they have."""

    design: np.ndarray | None = None
    labels: np.ndarray | None = None
    target_size: int | None = None
    model: PopulationModel | None = None
    mask: np.ndarray | None = None
    w_star: np.ndarray | None = None
    top: np.ndarray | None = None
    tau_h: np.ndarray | None = None
    tau_g: np.ndarray | None = None


def _ridge_sigma(design: np.ndarray, labels: np.ndarray, penalty: float) -> float:
    n, p = design.shape
    gram = design.T @ design / n
    rhs = design.T @ labels / n
    w = np.linalg.solve(gram + penalty * np.eye(p), rhs)
    rss = float(((labels - design @ w) ** 2).sum())
    return math.sqrt(rss / max(n - p, 1))


def _clamped(lam: float, origin: str) -> float:
    if lam < LAMBDA_FLOOR:
        warnings.warn(f"{origin} produced lambda={lam:.3g}; clamping to {LAMBDA_FLOOR}")
        return LAMBDA_FLOOR
    return lam


def _probe_cycle(gram, indices, diag, w, gw, rhs, lam) -> float:
    max_change = 0.0
    for j in indices:
        old = w[j]
        rho = rhs[j] - gw[j] + diag[j] * old
        new = (math.copysign(abs(rho) - lam, rho) if abs(rho) > lam else 0.0) / diag[j]
        if new != old:
            gw += gram[:, j] * (new - old)
            w[j] = new
            change = abs(new - old)
            if change > max_change:
                max_change = change
    return max_change


class _PathProber:
    """Warm-started second-moment-form probe solves along the bisection path."""

    def __init__(self, gram: np.ndarray, rhs: np.ndarray, policy: SupportPathLambda):
        self.gram = gram
        self.rhs = rhs
        self.policy = policy
        self.diag = np.diag(gram).copy()
        self.live = np.flatnonzero(self.diag > 0)
        self.cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _warm_start(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        if not self.cache:
            return np.zeros(self.rhs.size), np.zeros(self.rhs.size)
        nearest = min(self.cache, key=lambda l: abs(math.log(l) - math.log(lam)))
        w, gw = self.cache[nearest]
        return w.copy(), gw.copy()

    def support_size(self, lam: float) -> int:
        w, gw = self._warm_start(lam)
        sweeps = 0
        while sweeps < self.policy.probe_sweeps:
            change = _probe_cycle(self.gram, self.live, self.diag, w, gw, self.rhs, lam)
            sweeps += 1
            if change < self.policy.probe_tol:
                break
            active = self.live[w[self.live] != 0]
            while active.size and sweeps < self.policy.probe_sweeps:
                change = _probe_cycle(self.gram, active, self.diag, w, gw, self.rhs, lam)
                sweeps += 1
                if change < self.policy.probe_tol:
                    break
        self.cache[lam] = (w, gw)
        return int((np.abs(w) > 1e-6).sum())


def _entry_edge(prober: _PathProber, k: int, hi: float, floor: float, steps: int):
    """Largest lambda (up to bisection resolution) whose solution has >= k nonzeros."""
    if prober.support_size(hi) >= k:
        return hi
    lo = hi
    while lo > floor:
        lo *= 0.5
        if prober.support_size(lo) >= k:
            break
    else:
        return None
    for _ in range(steps):
        mid = math.sqrt(lo * hi)
        if prober.support_size(mid) >= k:
            lo = mid
        else:
            hi = mid
    return lo


def _support_path_lambda(ctx: LambdaContext, policy: SupportPathLambda) -> float:
    design, labels, size = ctx.design, ctx.labels, ctx.target_size
    if design is None or labels is None or size is None:
        raise ValidationError("support-path policy needs design, labels and target_size")
    n, p = design.shape
    if not 1 <= size <= p:
        raise ValidationError(f"target_size must be in [1, {p}]")
    gram = design.T @ design / n
    rhs = design.T @ labels / n
    lam_max = float(np.abs(rhs).max())
    if lam_max <= 0:
        return LAMBDA_FLOOR
    floor = lam_max * 1e-6
    prober = _PathProber(gram, rhs, policy)
    edge_s = _entry_edge(prober, size, lam_max, floor, policy.bisect_steps)
    if edge_s is None:
        return _clamped(floor, "support-path policy")
    if size + 1 <= p:
        edge_next = _entry_edge(prober, size + 1, edge_s, floor, policy.bisect_steps)
    else:
        edge_next = None
    if edge_next is None:
        edge_next = edge_s / 1.21  # no further entry found; fall back to a fixed margin
    return _clamped(math.sqrt(edge_s * edge_next), "support-path policy")


def choose_lambda(policy: LambdaPolicy, ctx: LambdaContext) -> float:
    """Resolve a regularization weight under the given policy."""
    if isinstance(policy, FixedLambda):
        return policy.value
    if isinstance(policy, ScaledLambda):
        if ctx.design is None or ctx.labels is None:
            raise ValidationError("scaled policy needs design and labels")
        n, p = ctx.design.shape
        sigma_hat = _ridge_sigma(ctx.design, ctx.labels, policy.ridge_penalty)
        return _clamped(policy.c * sigma_hat * math.sqrt(math.log(p) / n), "scaled policy")
    if isinstance(policy, TheoryLambda):
        missing = [f for f in ("model", "mask", "w_star", "top", "tau_h", "tau_g")
                   if getattr(ctx, f) is None]
        if missing:
            raise ValidationError(f"theory policy needs {', '.join(missing)}")
        bound = lambda_bound(ctx.model, ctx.mask, ctx.w_star, ctx.top, ctx.tau_h, ctx.tau_g)
        return _clamped(policy.margin * bound.lambda_min, "theory policy")
    if isinstance(policy, SupportPathLambda):
        return _support_path_lambda(ctx, policy)
    raise ValidationError(f"unknown lambda policy {policy!r}")


# ---------------------------------------------------------------------------
# records


RECORD_FIELDS = (
    "experiment_id",
    "trial",
    "seed",
    "n",
    "p",
    "s",
    "missing_fraction",
    "chain_width",
    "method",
    "lambda_used",
    "recovered",
    "linf_error",
    "c_constant",
    "error",
)


@dataclass(frozen=True)
class ExperimentRecord:
    experiment_id: str
    trial: int
    seed: int
    n: int
    p: int
    s: int
    method: str
    missing_fraction: float | None = None
    chain_width: int | None = None
    lambda_used: float | None = None
    recovered: bool | None = None
    linf_error: float | None = None
    c_constant: float | None = None
    error: str = ""

    def to_row(self) -> dict:
        return {f: getattr(self, f) for f in RECORD_FIELDS}


def weighted_constant(n: int, p: int, s: int) -> float | None:
    """log(n / (s^3 log(s (p - s)))) when defined, else None."""
    prod = s * (p - s)
    if prod <= 1:
        return None
    return math.log(n / (s**3 * math.log(prod)))


# ---------------------------------------------------------------------------
# the shared per-trial pipeline


@dataclass(frozen=True)
class TrialArtifacts:
    """Inputs and outputs of a single (trial, mask, method) cell, for diagnostics."""

    truth_w: np.ndarray
    support: tuple[int, ...]
    x_true: np.ndarray
    y: np.ndarray
    epsilon: np.ndarray
    mask: np.ndarray
    xhat: np.ndarray
    lambda_used: float
    solution_w: np.ndarray
    recovered: bool


def _impute(method: str, data, nbr_model):
    if method == "neighbor":
        return impute_top_neighbor(data, nbr_model)
    if method == "lowrank":
        return impute_lowrank(data)
    return impute_baseline(data, method)


def run_trial_cell(
    config: GenerationConfig,
    mask_spec,
    method: str,
    trial: int,
    exp_tag: int,
    cell: int,
    mask_cell: int,
    lambda_policy: LambdaPolicy,
) -> TrialArtifacts:
    """Generate, censor, impute and solve one cell; deterministic in all args."""
    truth = sample_ground_truth(config, substream(config.seed, exp_tag, STREAM_TRUTH, trial, cell))
    sigma = make_sigma(config.sigma_spec, config.p)
    ds = sample_dataset(config, sigma, truth,
                        substream(config.seed, exp_tag, STREAM_DATA, trial, cell))
    mask = make_mask(mask_spec, config.n, config.p,
                     substream(config.seed, exp_tag, STREAM_MASK, trial, mask_cell))
    data = apply_mask(ds.x_true, mask)
    nbr_model = build_neighbor_model(pairwise_covariance(data))
    imp = _impute(method, data, nbr_model)
    if isinstance(lambda_policy, TheoryLambda):
        pop = population_neighbor_model(sigma)
        ctx = LambdaContext(
            design=imp.xhat, labels=ds.y, target_size=config.s,
            model=PopulationModel(
                sigma=sigma, support=truth.support,
                sigma_x2=1.0, sigma_eps2=config.sigma_eps**2,
            ),
            mask=mask, w_star=truth.w_star, top=pop.top,
            tau_h=nbr_model.ratio, tau_g=pop.ratio,
        )
    else:
        ctx = LambdaContext(design=imp.xhat, labels=ds.y, target_size=config.s)
    lam = choose_lambda(lambda_policy, ctx)
    sol = solve_lasso(imp.xhat, ds.y, LassoConfig(lam=lam))
    return TrialArtifacts(
        truth_w=truth.w_star,
        support=truth.support,
        x_true=ds.x_true,
        y=ds.y,
        epsilon=ds.epsilon,
        mask=mask,
        xhat=imp.xhat,
        lambda_used=lam,
        solution_w=sol.w,
        recovered=sol.support == truth.support,
    )


def _metric_record(base_kwargs: dict, art: TrialArtifacts) -> ExperimentRecord:
    return ExperimentRecord(
        lambda_used=art.lambda_used,
        recovered=art.recovered,
        linf_error=float(np.abs(art.solution_w - art.truth_w).max()),
        **base_kwargs,
    )


# ---------------------------------------------------------------------------
# drivers


def run_experiment1(
    trials: int,
    fractions=DEFAULT_FRACTIONS,
    base: GenerationConfig | None = None,
    lambda_policy: LambdaPolicy = SupportPathLambda(),
    methods=EXP1_METHODS,
) -> list[ExperimentRecord]:
    """Censoring-fraction sweep comparing imputers on recovery and l_inf error."""
    config = base or GenerationConfig(n=1000, p=50, s=10)
    records: list[ExperimentRecord] = []
    for frac in fractions:
        mask_cell = int(round(frac * 1_000_000))
        for trial in range(trials):
            for method in methods:
                kwargs = dict(
                    experiment_id="exp1", trial=trial, seed=config.seed,
                    n=config.n, p=config.p, s=config.s,
                    missing_fraction=frac, method=method,
                )
                try:
                    art = run_trial_cell(
                        config, FractionMask(frac), method, trial,
                        EXP1_TAG, 0, mask_cell, lambda_policy,
                    )
                    records.append(_metric_record(kwargs, art))
                except Exception as exc:  # record, never abort the sweep
                    records.append(ExperimentRecord(error=str(exc), **kwargs))
    return sort_records(records)


def run_experiment2(
    trials: int,
    grid=DEFAULT_EXP2_GRID,
    base: GenerationConfig | None = None,
    lambda_policy: LambdaPolicy = SupportPathLambda(),
    missing_fraction: float = 0.2,
) -> list[ExperimentRecord]:
    """Sample-complexity sweep at fixed censoring; neighbor method only."""
    base = base or GenerationConfig(n=1000, p=50, s=10)
    records: list[ExperimentRecord] = []
    mask_cell_base = int(round(missing_fraction * 1_000_000))
    for cell, (n, p, s) in enumerate(grid):
        config = GenerationConfig(
            n=n, p=p, s=s, sigma_spec=base.sigma_spec,
            wstar_low=base.wstar_low, wstar_high=base.wstar_high,
            sigma_eps=base.sigma_eps, seed=base.seed,
        )
        c_const = weighted_constant(n, p, s)
        for trial in range(trials):
            kwargs = dict(
                experiment_id="exp2", trial=trial, seed=config.seed,
                n=n, p=p, s=s, missing_fraction=missing_fraction,
                method="neighbor", c_constant=c_const,
            )
            try:
                art = run_trial_cell(
                    config, FractionMask(missing_fraction), "neighbor", trial,
                    EXP2_TAG, cell, mask_cell_base + cell, lambda_policy,
                )
                records.append(_metric_record(kwargs, art))
            except Exception as exc:
                records.append(ExperimentRecord(error=str(exc), **kwargs))
    return sort_records(records)


def run_experiment3(
    trials: int,
    widths=DEFAULT_WIDTHS,
    base: GenerationConfig | None = None,
    lambda_policy: LambdaPolicy = SupportPathLambda(),
    methods=EXP3_METHODS,
) -> list[ExperimentRecord]:
    """Chain-censorship sweep comparing neighbor imputation to low-rank completion."""
    config = base or GenerationConfig(n=200, p=50, s=10)
    records: list[ExperimentRecord] = []
    for width in widths:
        for trial in range(trials):
            for method in methods:
                kwargs = dict(
                    experiment_id="exp3", trial=trial, seed=config.seed,
                    n=config.n, p=config.p, s=config.s,
                    chain_width=width, method=method,
                )
                try:
                    art = run_trial_cell(
                        config, ChainMask(width), method, trial,
                        EXP3_TAG, 0, width, lambda_policy,
                    )
                    records.append(_metric_record(kwargs, art))
                except Exception as exc:
                    records.append(ExperimentRecord(error=str(exc), **kwargs))
    return sort_records(records)


def sort_records(records: list[ExperimentRecord]) -> list[ExperimentRecord]:
    """Stable order for write-out: (experiment, sweep value, trial, method)."""

    def key(r: ExperimentRecord):
        sweep = r.missing_fraction if r.chain_width is None else float(r.chain_width)
        if r.experiment_id == "exp2":
            sweep = (r.n, r.p, r.s)
        return (r.experiment_id, sweep, r.trial, r.method)

    return sorted(records, key=key)


# ---------------------------------------------------------------------------
# aggregation and persistence


SUMMARY_FIELDS = (
    "experiment_id",
    "method",
    "sweep_name",
    "sweep_value",
    "recovery_probability",
    "mean_linf",
    "std_linf",
    "trial_count",
)

_SWEEP_NAME = {"exp1": "missing_fraction", "exp2": "c_constant", "exp3": "chain_width"}


def summarize(records: list[ExperimentRecord]) -> list[dict]:
    """Group metric rows by (experiment, method, sweep value); error rows excluded."""
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        if r.error:
            continue
        sweep_name = _SWEEP_NAME.get(r.experiment_id, "missing_fraction")
        sweep_value = getattr(r, sweep_name)
        groups.setdefault((r.experiment_id, r.method, sweep_name, sweep_value), []).append(r)
    def group_key(item):
        (exp_id, method, _name, sweep_value), _ = item
        num = float(sweep_value) if sweep_value is not None else float("inf")
        return (exp_id, num, method)

    rows = []
    for (exp_id, method, sweep_name, sweep_value), rs in sorted(groups.items(), key=group_key):
        linf = np.array([r.linf_error for r in rs])
        rows.append(
            {
                "experiment_id": exp_id,
                "method": method,
                "sweep_name": sweep_name,
                "sweep_value": sweep_value,
                "recovery_probability": float(np.mean([r.recovered for r in rs])),
                "mean_linf": float(linf.mean()),
                "std_linf": float(linf.std()),
                "trial_count": len(rs),
            }
        )
    return rows


def write_records(records: list[ExperimentRecord], path, timestamp: bool = True) -> None:
    """Write records.csv; the leading comment line carries the only run-varying text."""
    comment = (
        f"generated {datetime.now(timezone.utc).isoformat()}" if timestamp else None
    )
    save_table(
        [r.to_row() for r in records], path,
        fieldnames=RECORD_FIELDS, header_comment=comment,
    )


def write_summary(records: list[ExperimentRecord], path) -> None:
    save_table(summarize(records), path, fieldnames=SUMMARY_FIELDS)
