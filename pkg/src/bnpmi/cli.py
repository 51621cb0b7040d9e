"""Command-line front end.

    bnpmi estimate --input data.csv --columns AT,V,AP,RH [--subsample 50]
    bnpmi simulate normal:d=4:cov=sigma --n 50 --r 200 --out results/
    bnpmi sweep-k student:df=3:d=4 --n 50 --r 100 --k-list 1..20
    bnpmi sweep-prior normal:d=3:cov=a --n 30 --a-list 0.05,5,10 --base normal:d=3 ...
    bnpmi compare normal:d=4 --n 50 --r 200

Exit codes: 0 success, 1 unexpected failure, 2 usage error, 3 data error,
4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import make_scenario, parse_scenario
from .errors import BnpmiError, DataError, DegenerateInputError, ParameterError
from .estimator import QUARTILE_METHODS, EstimatorConfig, estimate_mi
from .harness import (
    SUMMARY_KEYS,
    ExperimentPlan,
    default_workers,
    run_experiment,
    summary_table,
    sweep_k,
    sweep_prior,
    write_result,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4

# the UCI power-plant file calls temperature AT
COLUMN_ALIASES = {"t": "at"}


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSelection:
    columns: tuple = ()
    subsample: int | None = None
    subsample_seed: int = 0


@dataclass(frozen=True, eq=False)
class LoadedData:
    values: np.ndarray
    columns: tuple
    rows_read: int
    rows_rejected: int


def _resolve_columns(header: list[str], wanted) -> list[int]:
    if not wanted:
        return list(range(len(header)))
    lookup = {h.strip().lower(): i for i, h in enumerate(header)}
    out = []
    for item in wanted:
        key = str(item).strip()
        if key.isdigit():
            idx = int(key)
            if idx >= len(header):
                raise DataError(f"column index {idx} out of range (file has {len(header)} columns)")
            out.append(idx)
            continue
        low = key.lower()
        if low not in lookup and COLUMN_ALIASES.get(low) in lookup:
            low = COLUMN_ALIASES[low]
        if low not in lookup:
            raise DataError(f"unknown column {key!r}; available: {', '.join(header)}")
        out.append(lookup[low])
    return out


def load_csv(path, selection: ColumnSelection | None = None) -> LoadedData:
    """Read selected numeric columns of a headered CSV into an n x d matrix.

    Rows whose selected fields are missing or non-numeric are dropped and
    counted.  With ``selection.subsample`` set, that many rows are then drawn
    uniformly without replacement.
    """
    selection = selection or ColumnSelection()
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        cols = _resolve_columns(header, selection.columns)
        if len(cols) < 2:
            raise ParameterError(f"need at least 2 columns for mutual information, selected {len(cols)}")
        rows, read, rejected = [], 0, 0
        for record in reader:
            if not record or all(not f.strip() for f in record):
                continue
            read += 1
            try:
                vals = [float(record[c]) for c in cols]
            except (IndexError, ValueError):
                rejected += 1
                continue
            if not all(np.isfinite(vals)):
                rejected += 1
                continue
            rows.append(vals)
    if len(rows) < 2:
        raise DataError(f"only {len(rows)} usable rows in {path} ({rejected} rejected)")
    values = np.array(rows)
    if selection.subsample is not None:
        m = selection.subsample
        if not 2 <= m <= values.shape[0]:
            raise ParameterError(f"subsample must be in [2, {values.shape[0]}], got {m}")
        idx = np.random.default_rng(selection.subsample_seed).choice(values.shape[0], m, replace=False)
        values = values[idx]
    names = tuple(header[c].strip() for c in cols)
    return LoadedData(values, names, read, rejected)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    """'1..20' or '1,3,5'."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a..b' or comma list, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--a", type=float, default=0.05, help="DP concentration (default 0.05)")
    g.add_argument("--k", type=int, default=3, help="nearest-neighbour order (default 3)")
    g.add_argument("--atoms", type=int, default=1000, help="atoms N per posterior draw (default 1000)")
    g.add_argument("--draws", type=int, default=1000, help="posterior draws ell (default 1000)")
    g.add_argument("--jitter-scale", type=float, default=0.01, help="jitter sd as a fraction of column sd")
    g.add_argument("--jitter-per-atom", action="store_true", help="jitter every resampled atom separately")
    g.add_argument("--quartile-method", choices=QUARTILE_METHODS, default="linear")
    g.add_argument("--marginals", choices=("projected", "independent"), default="projected")
    g.add_argument("--seed", type=int, default=0)


def _config(args, **overrides) -> EstimatorConfig:
    kw = dict(
        a=args.a,
        k=args.k,
        N=args.atoms,
        ell=args.draws,
        jitter_scale=args.jitter_scale,
        jitter_per_atom=args.jitter_per_atom,
        quartile_method=args.quartile_method,
        marginals=args.marginals,
        seed=args.seed,
    )
    kw.update(overrides)
    try:
        return EstimatorConfig(**kw)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnpmi", description="Bayesian nonparametric mutual information")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate MI among columns of a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--columns", default="", help="comma-separated names or 0-based indices")
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--subsample-seed", type=int, default=None, help="defaults to --seed")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    _add_estimator_flags(p)

    def experiment_parser(name, help_text):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("scenario", help="e.g. normal:d=4:cov=sigma, student:df=3:d=4, maxwell:c=10:d=2")
        q.add_argument("--n", type=int, required=True, help="sample size per replicate")
        q.add_argument("--r", type=int, default=200, help="replicates (default 200)")
        q.add_argument("--out", default=None, help="directory for CSV and manifest output")
        q.add_argument("--workers", type=int, default=None, help="processes (default $BNPMI_WORKERS or 1)")
        _add_estimator_flags(q)
        return q

    q = experiment_parser("simulate", "Monte Carlo average and MSE for one scenario")
    q.add_argument("--baseline-k", type=int, default=None, help="also run the plain kNN MI with this k")
    q = experiment_parser("sweep-k", "average estimate for each k")
    q.add_argument("--k-list", type=_int_list, required=True)
    q = experiment_parser("sweep-prior", "grid over concentration a and base measure G")
    q.add_argument("--a-list", type=_float_list, required=True)
    q.add_argument("--base", action="append", default=[], help="base measure scenario token (repeatable)")
    experiment_parser("compare", "posterior mean vs midhinge of MI_pos and MI_pos+")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _fmt3(x) -> str:
    return "NA" if x is None else f"{x:.3f}"


def cmd_estimate(args, out) -> int:
    config = _config(args)
    cols = tuple(c for c in args.columns.split(",") if c.strip())
    seed = args.seed if args.subsample_seed is None else args.subsample_seed
    data = load_csv(args.input, ColumnSelection(cols, args.subsample, seed))
    post = estimate_mi(data.values, config)
    report = {
        "estimate": post.estimate,
        "mean": post.mean,
        "median": post.median,
        "quantiles": {str(p): v for p, v in post.quantiles().items()},
        "summaries": post.summaries(),
        "n": int(data.values.shape[0]),
        "d": int(data.values.shape[1]),
        "columns": list(data.columns),
        "rows_read": data.rows_read,
        "rows_rejected": data.rows_rejected,
        "zero_distance_draws": int(np.count_nonzero(post.zero_distance_counts)),
        "flagged_draws": post.flagged_draws,
        "config": config.as_dict(),
        "draws": post.draws.tolist(),
    }
    if args.format == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        w = csv.writer(out)
        w.writerow(["quantity", "value"])
        for key in ("estimate", "mean", "median", "n", "d", "rows_rejected", "flagged_draws"):
            w.writerow([key, repr(report[key]) if isinstance(report[key], float) else report[key]])
        for p, v in report["quantiles"].items():
            w.writerow([f"q{p}", repr(v)])
        for key, v in report["config"].items():
            w.writerow([f"config.{key}", v])
    else:
        out.write(f"MI estimate (midhinge of MI_pos+): {_fmt3(post.estimate)} nats\n")
        out.write(f"data: n={report['n']} d={report['d']} columns={','.join(data.columns)}"
                  f" (rejected rows: {data.rows_rejected})\n")
        qs = "  ".join(f"q{p}={_fmt3(v)}" for p, v in report["quantiles"].items())
        out.write(f"draws: mean={_fmt3(post.mean)} median={_fmt3(post.median)}  {qs}\n")
        out.write(f"diagnostics: draws with zero distances={report['zero_distance_draws']}"
                  f" flagged={post.flagged_draws}\n")
        out.write("config: " + " ".join(f"{k}={v}" for k, v in report["config"].items()) + "\n")
    return EXIT_OK


def _scenario(token: str):
    try:
        return make_scenario(token)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _emit(result, args, out, prefix) -> None:
    rows = result.summary_rows()
    out.write(f"scenario {result.plan.scenario.label}  n={result.plan.n} r={result.plan.r}"
              f"  true MI={_fmt3(result.plan.scenario.true_mi)}  seed={result.plan.seed}\n")
    for label, cfg in zip(result.plan.labels, result.plan.configs):
        out.write(f"  config {label}: " + " ".join(f"{k}={v}" for k, v in cfg.as_dict().items() if k != "seed") + "\n")
    for row in rows:
        out.write(f"  {row['label']:<40} average={_fmt3(row['average'])}  MSE={_fmt3(row['mse'])}\n")
    if args.out:
        paths = write_result(result, args.out, prefix)
        out.write("wrote " + ", ".join(str(p) for p in paths.values()) + "\n")


def cmd_simulate(args, out) -> int:
    scen = _scenario(args.scenario)
    plan = ExperimentPlan(scen, args.n, args.r, (_config(args),), ("bnp",), args.baseline_k, args.seed)
    _emit(run_experiment(plan, args.workers), args, out, "simulate")
    return EXIT_OK


def cmd_sweep_k(args, out) -> int:
    scen = _scenario(args.scenario)
    cfg = _config(args)
    if max(args.k_list) > cfg.N - 1 or min(args.k_list) < 1:
        raise UsageError(f"k values must lie in [1, {cfg.N - 1}]")
    _emit(sweep_k(scen, args.n, args.k_list, args.r, cfg, args.seed, args.workers), args, out, "sweep_k")
    return EXIT_OK


def cmd_sweep_prior(args, out) -> int:
    scen = _scenario(args.scenario)
    try:
        bases = [parse_scenario(b) for b in args.base] or [None]
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    if any(a <= 0 for a in args.a_list):
        raise UsageError("every a must be positive")
    result = sweep_prior(scen, args.n, args.a_list, bases, args.r, args.k, _config(args), args.seed, args.workers)
    _emit(result, args, out, "sweep_prior")
    return EXIT_OK


def cmd_compare(args, out) -> int:
    scen = _scenario(args.scenario)
    plan = ExperimentPlan(scen, args.n, args.r, (_config(args),), ("bnp",), seed=args.seed)
    result = run_experiment(plan, args.workers)
    table = summary_table(result.cells[0])
    out.write(f"scenario {scen.label}  n={args.n} r={args.r}  true MI={_fmt3(scen.true_mi)}  seed={args.seed}\n")
    out.write("  config: " + " ".join(f"{k}={v}" for k, v in result.plan.configs[0].as_dict().items() if k != "seed") + "\n")
    for key in SUMMARY_KEYS:
        avg, mse = table[key]
        out.write(f"  {key:<20} average={_fmt3(avg)}  MSE={_fmt3(mse)}\n")
    if args.out:
        paths = write_result(result, args.out, "compare")
        out.write("wrote " + ", ".join(str(p) for p in paths.values()) + "\n")
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "sweep-k": cmd_sweep_k,
    "sweep-prior": cmd_sweep_prior,
    "compare": cmd_compare,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = default_workers()
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParameterError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except DataError as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA
    except DegenerateInputError as exc:
        err.write(f"degenerate input: {exc}\n")
        return EXIT_DEGENERATE
    except (BnpmiError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_FAILURE


def run(argv: list[str]) -> tuple[int, str, str]:
    """Invoke ``main`` capturing stdout and stderr; handy in tests."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
