"""Command-line interface.

Subcommands: ``synth`` (generate a censored benchmark instance), ``impute``,
``solve``, ``witness``, ``inspect`` (covariance/neighbor tables) and the
experiment drivers ``exp1``/``exp2``/``exp3``.  Experiment flags can also be
given in a flat ``key=value`` config file; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as exps
from .covariance import build_neighbor_model, pairwise_covariance
from .data import (
    default_feature_names,
    format_value,
    load_design,
    load_labels,
    save_design,
    save_table,
)
from .errors import CensparseError, ValidationError
from .imputation import impute_baseline, impute_lowrank, impute_top_neighbor
from .lasso import LassoConfig, solve_lasso
from .synth import (
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
from .witness import WitnessTruth, construct_witness, infnorm_op


def _write_matrix(a: np.ndarray, path, names=None) -> None:
    a = np.atleast_2d(np.asarray(a))
    names = names or default_feature_names(a.shape[1])
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in a:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def _load_matrix(path) -> np.ndarray:
    design = load_design(path)
    if not design.mask.all():
        raise ValidationError(f"{path}: expected a fully observed matrix")
    return design.values


def _parse_mask_spec(text: str):
    kind, _, arg = text.partition(":")
    if kind == "fraction":
        return FractionMask(float(arg))
    if kind == "chain":
        return ChainMask(int(arg))
    raise ValidationError(f"mask spec must be fraction:THETA or chain:WIDTH, got {text!r}")


def _parse_lambda_policy(text: str):
    kind, _, arg = text.partition(":")
    if kind == "path":
        return exps.SupportPathLambda()
    if kind == "scaled":
        return exps.ScaledLambda(c=float(arg)) if arg else exps.ScaledLambda()
    if kind == "theory":
        return exps.TheoryLambda()
    if kind == "fixed":
        return exps.FixedLambda(float(arg))
    raise ValidationError(
        f"lambda policy must be path, scaled[:c], theory or fixed:value, got {text!r}"
    )


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _parse_widths(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(t) for t in text.split(",") if t.strip())


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_synth(args) -> int:
    config = GenerationConfig(
        n=args.n, p=args.p, s=args.s,
        sigma_spec=Equicorrelation(args.rho),
        sigma_eps=args.sigma_eps, seed=args.seed,
    )
    truth = sample_ground_truth(config, substream(args.seed, 0, 0))
    sigma = make_sigma(config.sigma_spec, config.p)
    ds = sample_dataset(config, sigma, truth, substream(args.seed, 0, 1))
    mask = make_mask(_parse_mask_spec(args.mask), config.n, config.p, substream(args.seed, 0, 2))
    data = apply_mask(ds.x_true, mask)
    prefix = args.out_prefix
    save_design(data, f"{prefix}.design.csv")
    _write_matrix(truth.w_star[np.newaxis, :], f"{prefix}.truth.csv")
    _write_matrix(ds.y[:, np.newaxis], f"{prefix}.labels.csv", names=["y"])
    _write_matrix(mask.astype(int), f"{prefix}.mask.csv")
    print(f"wrote {prefix}.design.csv, .truth.csv, .labels.csv, .mask.csv")
    return 0


def _cmd_impute(args) -> int:
    data = load_design(args.input)
    if args.method == "neighbor":
        imp = impute_top_neighbor(data, build_neighbor_model(pairwise_covariance(data)))
    elif args.method == "lowrank":
        imp = impute_lowrank(data)
    else:
        imp = impute_baseline(data, args.method)
    _write_matrix(imp.xhat, args.output)
    if imp.fallback_log:
        sidecar = str(args.output) + ".fallbacks.csv"
        save_table(
            [e._asdict() for e in imp.fallback_log],
            sidecar,
            fieldnames=("sample", "feature", "neighbor", "rank"),
        )
        print(f"wrote {args.output} ({len(imp.fallback_log)} fallbacks -> {sidecar})")
    else:
        print(f"wrote {args.output}")
    return 0


def _cmd_solve(args) -> int:
    design = _load_matrix(args.design)
    labels = load_labels(args.labels)
    config = LassoConfig(
        lam=args.lam, tol=args.tol,
        max_sweeps=args.max_sweeps, support_threshold=args.support_threshold,
    )
    sol = solve_lasso(design, labels, config)
    out = sys.stdout
    out.write("feature,coefficient,in_support\n")
    support = set(sol.support)
    for i, wi in enumerate(sol.w):
        out.write(f"x{i + 1},{format_value(wi)},{format_value(i in support)}\n")
    print(
        f"# converged={sol.converged} sweeps={sol.sweeps_used} "
        f"kkt_residual={sol.kkt_residual:.3e}",
        file=sys.stderr,
    )
    return 0


def _cmd_witness(args) -> int:
    design = _load_matrix(args.design)
    labels = load_labels(args.labels)
    support = tuple(int(t) for t in args.support.split(",") if t.strip())
    truth = None
    if args.truth:
        truth = WitnessTruth(
            w_star=_load_matrix(f"{args.truth}.wstar.csv").ravel(),
            epsilon=_load_matrix(f"{args.truth}.epsilon.csv").ravel(),
            delta=_load_matrix(f"{args.truth}.delta.csv"),
        )
    report = construct_witness(design, labels, support, args.lam, truth=truth)
    # plug-in curvature/incoherence from the imputed design's own covariance
    n = design.shape[0]
    gram = design.T @ design / n
    sup = np.asarray(support)
    comp = np.setdiff1d(np.arange(design.shape[1]), sup)
    beta = float(np.linalg.eigvalsh(gram[np.ix_(sup, sup)]).min())
    try:
        gamma = 1.0 - infnorm_op(
            np.linalg.solve(gram[np.ix_(sup, sup)], gram[np.ix_(sup, comp)]).T
        )
    except np.linalg.LinAlgError:
        gamma = float("nan")
    row = {
        "max_abs_zsc": report.max_abs_zsc,
        "strictly_feasible": report.strictly_feasible,
        "sign_consistent": report.sign_consistent,
        "beta": beta,
        "gamma": gamma,
    }
    if args.output:
        save_table([row], args.output)
        print(f"wrote {args.output}")
    else:
        print(",".join(row.keys()))
        print(",".join(format_value(v) for v in row.values()))
    return 0


def _cmd_inspect(args) -> int:
    data = load_design(args.input)
    cov = pairwise_covariance(data)
    model = build_neighbor_model(cov)
    prefix = args.out_prefix
    _write_matrix(cov.h, f"{prefix}.covariance.csv")
    _write_matrix(cov.co_counts, f"{prefix}.co_counts.csv")
    _write_matrix(model.scores, f"{prefix}.scores.csv")
    _write_matrix(model.ranking, f"{prefix}.ranking.csv",
                  names=[f"rank{r}" for r in range(model.ranking.shape[1])])
    save_table(
        [
            {"feature": i, "top": int(model.top[i]),
             "ratio": float(model.ratio[i]), "ratio_ok": bool(model.ratio_ok[i])}
            for i in range(model.n_features)
        ],
        f"{prefix}.neighbors.csv",
    )
    print(f"wrote {prefix}.covariance.csv, .co_counts.csv, .scores.csv, .ranking.csv, .neighbors.csv")
    return 0


def _experiment_output(records, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    exps.write_records(records, out / "records.csv")
    exps.write_summary(records, out / "summary.csv")
    print(f"wrote {out / 'records.csv'} and {out / 'summary.csv'}")


def _base_config(args, n: int, p: int, s: int) -> GenerationConfig:
    return GenerationConfig(
        n=n, p=p, s=s,
        sigma_spec=Equicorrelation(args.rho),
        sigma_eps=args.sigma_eps, seed=args.seed,
    )


def _cmd_exp1(args) -> int:
    records = exps.run_experiment1(
        trials=args.trials,
        fractions=_parse_floats(args.fractions),
        base=_base_config(args, args.n, args.p, args.s),
        lambda_policy=_parse_lambda_policy(args.lambda_policy),
    )
    _experiment_output(records, args.out)
    return 0


def _cmd_exp2(args) -> int:
    if args.grid:
        grid = []
        for line in Path(args.grid).read_text().splitlines():
            line = line.split("#")[0].strip()
            if not line:
                continue
            n, p, s = (int(t) for t in line.replace(",", " ").split())
            grid.append((n, p, s))
        grid = tuple(grid)
    else:
        grid = exps.DEFAULT_EXP2_GRID
    records = exps.run_experiment2(
        trials=args.trials,
        grid=grid,
        base=_base_config(args, 1000, 50, 10),
        lambda_policy=_parse_lambda_policy(args.lambda_policy),
        missing_fraction=args.fraction,
    )
    _experiment_output(records, args.out)
    return 0


def _cmd_exp3(args) -> int:
    records = exps.run_experiment3(
        trials=args.trials,
        widths=_parse_widths(args.widths),
        base=_base_config(args, args.n, args.p, args.s),
        lambda_policy=_parse_lambda_policy(args.lambda_policy),
    )
    _experiment_output(records, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_experiment_shared(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="flat key=value file mirroring the flags; flags override")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="run", help="output directory for records.csv/summary.csv")
    sp.add_argument("--rho", type=float, default=0.8)
    sp.add_argument("--sigma-eps", type=float, default=0.1, dest="sigma_eps")
    sp.add_argument(
        "--lambda-policy", default="path", dest="lambda_policy",
        help="path | scaled[:c] | theory | fixed:value",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="censparse",
        description="Censored-design sparse recovery: imputation, Lasso, certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a censored synthetic instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--rho", type=float, default=0.8)
    sp.add_argument("--sigma-eps", type=float, default=0.1, dest="sigma_eps")
    sp.add_argument("--mask", required=True, help="fraction:THETA or chain:WIDTH")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-prefix", required=True, dest="out_prefix")
    sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("impute", help="fill the missing entries of a design CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", required=True,
                    choices=["neighbor", "zero", "mean", "median", "lowrank"])
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=_cmd_impute)

    sp = sub.add_parser("solve", help="solve the l1 program on a complete design")
    sp.add_argument("--design", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--lambda", type=float, required=True, dest="lam")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-sweeps", type=int, default=10_000, dest="max_sweeps")
    sp.add_argument("--support-threshold", type=float, default=1e-6, dest="support_threshold")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("witness", help="construct the dual certificate for a support")
    sp.add_argument("--design", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--support", required=True, help="comma-separated 0-based indices")
    sp.add_argument("--lambda", type=float, required=True, dest="lam")
    sp.add_argument("--truth", help="prefix of a truth bundle: PREFIX.{wstar,epsilon,delta}.csv")
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_witness)

    sp = sub.add_parser("inspect", help="emit covariance and neighbor-model tables")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out-prefix", required=True, dest="out_prefix")
    sp.set_defaults(func=_cmd_inspect)

    sp = sub.add_parser("exp1", help="censoring-fraction sweep over imputers")
    _add_experiment_shared(sp)
    sp.add_argument("--fractions", default="0,0.1,0.2,0.3,0.4")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--p", type=int, default=50)
    sp.add_argument("--s", type=int, default=10)
    sp.set_defaults(func=_cmd_exp1)

    sp = sub.add_parser("exp2", help="sample-complexity sweep at fixed censoring")
    _add_experiment_shared(sp)
    sp.add_argument("--grid", help="file of 'n p s' rows; default grid if omitted")
    sp.add_argument("--fraction", type=float, default=0.2)
    sp.set_defaults(func=_cmd_exp2)

    sp = sub.add_parser("exp3", help="chain-censorship sweep, neighbor vs low rank")
    _add_experiment_shared(sp)
    sp.add_argument("--widths", default="2..20", help="RANGE like 2..20 or comma list")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--p", type=int, default=50)
    sp.add_argument("--s", type=int, default=10)
    sp.set_defaults(func=_cmd_exp3)

    return parser


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Prepend config-file values as flags so explicit flags override them."""
    if not argv or argv[0] not in {"exp1", "exp2", "exp3"} or "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    injected: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not key or not value.strip():
            raise ValidationError(f"{path}: malformed config line {line!r}")
        injected.extend([f"--{key}", value.strip()])
    return [argv[0], *injected, *argv[1:]]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv, parser)
        args = parser.parse_args(argv)
        return args.func(args)
    except CensparseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
