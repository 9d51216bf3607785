"""Command-line surface: simulate | sweep | tune | validate | study |
report. Every command writes a manifest with its fully resolved
configuration next to the output."""

import argparse
import csv
import json
import sys

import numpy as np

from . import backends, simgen
from .data import load_csv, standardize, write_csv
from .glm import FitConfig
from .loss import parse_loss_spec
from .metrics import MEASURE_NAMES
from .tuner import TuningConfig, sweep_measures, tune_multi
from .validate import bootstrap_validate, jackknife_measures, \
    bca_interval, run_study

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


def _write_manifest(out_path, command, params):
    resolved = {"command": command, "backend": backends.BACKEND_NAME,
                "params": params}
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)


def _mark_standardized(d):
    from .data import Dataset
    return Dataset(d.predictors, d.outcome, d.feature_names,
                   standardized=True)


def _load_standardized(path, outcome_col):
    # CSVs emitted by `simulate` are already in [-1, 1]; trust the range
    d = load_csv(path, outcome_col)
    if d.predictors.min() >= -1.0 and d.predictors.max() <= 1.0:
        return _mark_standardized(d)
    return standardize(d)


def _tuning_config(args, seed):
    return TuningConfig(
        K=args.K, v=args.v, grid_lower_frac=args.lower,
        grid_upper_frac=args.upper, grid_size=args.grid_size,
        explicit_grid=tuple(args.grid) if args.grid else None,
        random_subset=args.random_subset, seed=seed, fit=FitConfig())


def _add_cv_args(p):
    p.add_argument("--K", type=int, default=10, help="folds")
    p.add_argument("--v", type=int, default=20, help="CV repeats")
    p.add_argument("--grid-size", type=int, default=11)
    p.add_argument("--lower", type=float, default=0.2,
                   help="grid lower bound as a fraction of n_train")
    p.add_argument("--upper", type=float, default=None,
                   help="grid upper bound fraction (default: by alpha)")
    p.add_argument("--grid", type=int, nargs="*", default=None,
                   help="explicit M grid (overrides bounds)")
    p.add_argument("--random-subset", type=int, default=None,
                   help="random grid search: evaluate only this many "
                        "seeded grid points")


def cmd_simulate(args):
    if args.scenario not in simgen.scenario_ids():
        raise ConfigError("invalid scenario %r; valid ids: %s"
                          % (args.scenario,
                             ", ".join(simgen.scenario_ids())))
    n1 = args.n // 2
    n2 = args.n - n1
    d = simgen.scenario(args.scenario, n1, n2, args.seed)
    write_csv(d, args.out, outcome_column=args.outcome_col)
    _write_manifest(args.out, "simulate", {
        "scenario": args.scenario, "n": args.n, "seed": args.seed,
        "outcome_col": args.outcome_col, "out": args.out})
    print("wrote %s (%d rows, %d predictors, prevalence %.4f)"
          % (args.out, d.n, d.p, float(d.outcome.mean())))


def cmd_sweep(args):
    d = _load_standardized(args.data, args.outcome_col)
    measures = args.measures.split(",")
    cfg = _tuning_config(args, args.seed)
    rows = sweep_measures(d, measures, cfg, loess_span=args.span)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "measure", "mean", "sd", "n_evals"])
        for M, m, mean, sd, n in rows:
            w.writerow([M, m, "%.17g" % mean, "%.17g" % sd, n])
    if args.plot:
        _plot_sweep(rows, measures, args.plot)
    _write_manifest(args.out, "sweep", {
        "data": args.data, "outcome_col": args.outcome_col,
        "measures": measures, "K": args.K, "v": args.v,
        "grid_size": args.grid_size, "lower": args.lower,
        "upper": args.upper, "grid": args.grid,
        "random_subset": args.random_subset, "span": args.span,
        "seed": args.seed, "out": args.out})
    print("wrote %s (%d rows)" % (args.out, len(rows)))


def _plot_sweep(rows, measures, path):
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    fig, axes = plt.subplots(1, len(measures),
                             figsize=(4 * len(measures), 3.2))
    if len(measures) == 1:
        axes = [axes]
    for ax, m in zip(axes, measures):
        pts = [(M, mean) for M, name, mean, _, _ in rows if name == m]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-")
        ax.set_xlabel("M")
        ax.set_title(m)
    fig.tight_layout()
    fig.savefig(path)


def cmd_tune(args):
    d = _load_standardized(args.data, args.outcome_col)
    spec = parse_loss_spec(args.loss, args.alpha, args.span)
    cfg = _tuning_config(args, args.seed)
    res = tune_multi(d, [spec], cfg)[0]
    payload = {
        "m_opt": res.m_opt, "m_prop_opt": res.m_prop_opt,
        "alpha": res.alpha, "n_train_per_fold": res.n_train_per_fold,
        "loss_by_m": [{"M": M, "mean_loss": mean, "sd_loss": sd,
                       "n_evals": n} for M, mean, sd, n in res.loss_by_m],
        "excluded": [list(e) for e in res.excluded]}
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    csv_path = args.out + ".csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "M", "mean_loss", "sd_loss", "n_evals"])
        for M, mean, sd, n in res.loss_by_m:
            w.writerow(["%.17g" % res.alpha, M, "%.17g" % mean,
                        "%.17g" % sd, n])
    _write_manifest(args.out, "tune", {
        "data": args.data, "outcome_col": args.outcome_col,
        "loss": args.loss, "alpha": args.alpha, "span": args.span,
        "K": args.K, "v": args.v, "grid_size": args.grid_size,
        "lower": args.lower, "upper": args.upper, "grid": args.grid,
        "random_subset": args.random_subset,
        "seed": args.seed, "out": args.out})
    print("m_opt=%d  m_prop_opt=%.4f  (wrote %s)"
          % (res.m_opt, res.m_prop_opt, args.out))


def cmd_validate(args):
    d = _load_standardized(args.data, args.outcome_col)
    run = bootstrap_validate(d, args.m_prop, args.B, FitConfig(),
                             args.seed, args.span)
    jack = jackknife_measures(d, args.m_prop, FitConfig(), args.seed,
                              args.span)
    out = {"m_prop": args.m_prop, "B": args.B, "seed": args.seed,
           "measures": {}}
    for j, name in enumerate(MEASURE_NAMES):
        col = run.estimates[:, j]
        col = col[np.isfinite(col)]
        point = getattr(run.point, name)
        entry = {"point": point,
                 "se": float(np.std(col, ddof=1)) if col.size >= 2 else None,
                 "lower": None, "upper": None,
                 "n_excluded": run.exclusion_counts[j]}
        if point is not None:
            try:
                iv = bca_interval(run.estimates[:, j], point, jack[:, j],
                                  args.level)
                entry["lower"], entry["upper"] = iv.lower, iv.upper
            except ValueError as exc:
                entry["interval_error"] = str(exc)
        out["measures"][name] = entry
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
    _write_manifest(args.out, "validate", {
        "data": args.data, "outcome_col": args.outcome_col,
        "m_prop": args.m_prop, "B": args.B, "level": args.level,
        "span": args.span, "seed": args.seed, "out": args.out})
    print("wrote %s" % args.out)


def cmd_study(args):
    d = load_csv(args.data, args.outcome_col)
    if args.standardization == "pooled":
        lo, hi = d.predictors.min(), d.predictors.max()
        d = _mark_standardized(d) if lo >= -1.0 and hi <= 1.0 \
            else standardize(d)
    alphas = [float(a) for a in args.alphas.split(",")]
    spec = parse_loss_spec(args.loss, alphas[0], args.span)
    cfg = _tuning_config(args, args.seed)
    rep = run_study(d, alphas, spec, cfg, q=args.q, B=args.B, Z=args.Z,
                    seed=args.seed, level=args.level,
                    standardization=args.standardization)
    with open(args.out, "w") as fh:
        fh.write(rep.to_json())
    csv_path = args.out + ".csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in rep.to_csv_rows():
            w.writerow(row)
    _write_manifest(args.out, "study", {
        "data": args.data, "outcome_col": args.outcome_col,
        "loss": args.loss, "alphas": alphas, "q": args.q, "B": args.B,
        "Z": args.Z, "level": args.level, "span": args.span,
        "K": args.K, "v": args.v, "grid_size": args.grid_size,
        "lower": args.lower, "upper": args.upper, "grid": args.grid,
        "random_subset": args.random_subset,
        "standardization": args.standardization,
        "seed": args.seed, "out": args.out})
    print("wrote %s and %s (%d rows)" % (args.out, csv_path,
                                         len(rep.cells)))


# Columns for the wide, table-shaped report.
REPORT_MEASURES = ("auprc", "lack_of_spread", "citl",
                   "calibration_slope", "ici")


def cmd_report(args):
    with open(args.study) as fh:
        study = json.load(fh)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "alpha", "proportion"]
                   + ["%s" % m for m in REPORT_MEASURES])
        for row in study["rows"]:
            alpha = row["alpha"]
            cells = [str(row["z"]),
                     "full-model" if alpha is None else "%g" % alpha,
                     "" if row["m_prop"] is None else "%.3f" % row["m_prop"]]
            for m in REPORT_MEASURES:
                e = row["measures"][m]
                if e["point"] is None:
                    cells.append("")
                elif e["lower"] is None:
                    cells.append("%.3f" % e["point"])
                else:
                    cells.append("%.3f (%.3f, %.3f)"
                                 % (e["point"], e["lower"], e["upper"]))
            w.writerow(cells)
    _write_manifest(args.out, "report", {"study": args.study,
                                         "out": args.out})
    print("wrote %s" % args.out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ppmtune",
        description="Personalized predictive models: tune the similar-"
                    "subpopulation size M and validate with BCa bootstrap.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a scenario dataset CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--n", type=int, default=10000,
                   help="total rows (split evenly across the two clusters)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="raw measures across the M grid")
    p.add_argument("--data", required=True)
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--measures",
                   default="auroc,auprc,lack_of_spread,citl,"
                           "calibration_slope,ici")
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None, help="optional SVG path")
    _add_cv_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune", help="tune M by minimizing a mixture loss")
    p.add_argument("--data", required=True)
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--loss", default="ici+spread")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    _add_cv_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("validate",
                       help="bootstrap-validate a fixed M proportion")
    p.add_argument("--data", required=True)
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--m-prop", type=float, required=True)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("study", help="full Z-repeat split+tune+validate")
    p.add_argument("--data", required=True)
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--loss", default="ici+spread")
    p.add_argument("--alphas", default="0.1,0.25,0.4,0.5,0.6,0.75,0.9")
    p.add_argument("--q", type=float, default=0.2)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--Z", type=int, default=10)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--standardization", choices=("pooled", "split"),
                   default="pooled")
    p.add_argument("--seed", type=int, default=0)
    _add_cv_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("report", help="table-shaped CSV from a study JSON")
    p.add_argument("--study", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failure
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
