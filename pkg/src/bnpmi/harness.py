"""Monte Carlo experiments: replicate averages, MSE, k and prior sweeps.

A plan fixes a scenario, a sample size ``n``, a replicate count ``r`` and
one or more estimator configurations.  Replicate j draws its dataset and its
estimator seed from child j of the master SeedSequence, so results do not
depend on how replicates are scheduled across workers, and every config in
a plan sees the same datasets.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import ScenarioSpec, format_scenario
from .errors import BnpmiError, ParameterError
from .estimator import EstimatorConfig, estimate_mi, knn_mi_plain

SUMMARY_KEYS = ("mean_pos", "midhinge_pos", "mean_pos_plus", "midhinge_pos_plus")


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    scenario: ScenarioSpec
    n: int
    r: int
    configs: tuple
    labels: tuple = ()
    baseline_k: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.r < 1:
            raise ParameterError(f"need at least one replicate, got r={self.r}")
        if self.n < 2:
            raise ParameterError(f"sample size must be >= 2, got n={self.n}")
        configs = tuple(self.configs) if not isinstance(self.configs, EstimatorConfig) else (self.configs,)
        if not configs:
            raise ParameterError("plan needs at least one estimator config")
        for cfg in configs:
            if cfg.base is not None and cfg.base.dim != self.scenario.dim:
                raise ParameterError(
                    f"base measure dimension {cfg.base.dim} != scenario dimension {self.scenario.dim}"
                )
        labels = tuple(self.labels) or tuple(f"config{i}" for i in range(len(configs)))
        if len(labels) != len(configs):
            raise ParameterError("one label per config required")
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "labels", labels)


def replicate_seeds(master_seed: int, r: int) -> list[tuple[int, int]]:
    """(data_seed, estimator_seed) for each replicate, derived from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(r)
    return [tuple(int(s) for s in c.generate_state(2, np.uint64)) for c in children]


@dataclass(eq=False)
class CellResult:
    """All replicates of one estimator config."""

    label: str
    config: EstimatorConfig
    true_mi: float | None
    summaries: dict = field(default_factory=dict)  # key -> length-r array
    flagged_draws: np.ndarray | None = None

    @property
    def estimates(self) -> np.ndarray:
        return self.summaries["midhinge_pos_plus"]

    @property
    def average(self) -> float:
        return float(np.mean(self.estimates))

    def average_of(self, key: str) -> float:
        return float(np.mean(self.summaries[key]))

    def mse_of(self, key: str) -> float | None:
        if self.true_mi is None:
            return None
        return float(np.mean((self.summaries[key] - self.true_mi) ** 2))

    @property
    def mse(self) -> float | None:
        return self.mse_of("midhinge_pos_plus")


@dataclass(eq=False)
class ExperimentResult:
    plan: ExperimentPlan
    cells: list
    seeds: list
    baseline: np.ndarray | None = None
    runtime: float = 0.0

    def cell(self, label: str) -> CellResult:
        for c in self.cells:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def baseline_mse(self) -> float | None:
        t = self.plan.scenario.true_mi
        if self.baseline is None or t is None:
            return None
        return float(np.mean((self.baseline - t) ** 2))

    def summary_rows(self) -> list[dict]:
        plan = self.plan
        rows = []
        for c in self.cells:
            row = {
                "scenario": plan.scenario.label,
                "n": plan.n,
                "r": plan.r,
                "label": c.label,
                "a": c.config.a,
                "k": c.config.k,
                "N": c.config.N,
                "ell": c.config.ell,
                "base": c.config.as_dict()["base"],
                "true_mi": plan.scenario.true_mi,
                "average": c.average,
                "mse": c.mse,
            }
            for key in SUMMARY_KEYS:
                row[f"avg_{key}"] = c.average_of(key)
                row[f"mse_{key}"] = c.mse_of(key)
            rows.append(row)
        if self.baseline is not None:
            rows.append(
                {
                    "scenario": plan.scenario.label,
                    "n": plan.n,
                    "r": plan.r,
                    "label": f"knn_plain_k{plan.baseline_k}",
                    "k": plan.baseline_k,
                    "true_mi": plan.scenario.true_mi,
                    "average": float(np.mean(self.baseline)),
                    "mse": self.baseline_mse,
                }
            )
        return rows

    def raw_rows(self) -> list[dict]:
        rows = []
        for j, (data_seed, est_seed) in enumerate(self.seeds):
            for c in self.cells:
                row = {
                    "replicate": j,
                    "label": c.label,
                    "data_seed": data_seed,
                    "estimator_seed": est_seed,
                }
                row.update({key: float(c.summaries[key][j]) for key in SUMMARY_KEYS})
                rows.append(row)
            if self.baseline is not None:
                rows.append(
                    {
                        "replicate": j,
                        "label": f"knn_plain_k{self.plan.baseline_k}",
                        "data_seed": data_seed,
                        "estimator_seed": est_seed,
                        "midhinge_pos_plus": float(self.baseline[j]),
                    }
                )
        return rows

    def manifest(self) -> dict:
        plan = self.plan
        return {
            "scenario": plan.scenario.label,
            "true_mi": plan.scenario.true_mi,
            "n": plan.n,
            "r": plan.r,
            "master_seed": plan.seed,
            "seed_derivation": "numpy SeedSequence(master_seed).spawn(r)[j].generate_state(2, uint64)",
            "replicate_seeds": [list(s) for s in self.seeds],
            "baseline_k": plan.baseline_k,
            "configs": {lab: cfg.as_dict() for lab, cfg in zip(plan.labels, plan.configs)},
            "runtime_seconds": self.runtime,
            "versions": {
                "bnpmi": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
        }


def _run_replicate(plan: ExperimentPlan, j: int, seeds: tuple[int, int]):
    data_seed, est_seed = seeds
    try:
        x = plan.scenario.sample(plan.n, np.random.default_rng(data_seed))
        out = []
        for cfg in plan.configs:
            post = estimate_mi(x, replace(cfg, seed=est_seed))
            out.append((post.summaries(), post.flagged_draws))
        base = knn_mi_plain(x, plan.baseline_k) if plan.baseline_k else None
    except BnpmiError as exc:
        raise type(exc)(f"replicate {j} (data_seed={data_seed}, estimator_seed={est_seed}) failed: {exc}") from exc
    return out, base


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BNPMI_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(plan: ExperimentPlan, workers: int | None = None) -> ExperimentResult:
    """Run every replicate of ``plan`` and aggregate per config."""
    workers = default_workers() if workers is None else workers
    seeds = replicate_seeds(plan.seed, plan.r)
    start = time.perf_counter()
    if workers > 1 and plan.r > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_replicate, plan, j, s) for j, s in enumerate(seeds)]
            results = [f.result() for f in futures]
    else:
        results = [_run_replicate(plan, j, s) for j, s in enumerate(seeds)]
    runtime = time.perf_counter() - start

    true_mi = plan.scenario.true_mi
    cells = []
    for i, (label, cfg) in enumerate(zip(plan.labels, plan.configs)):
        summaries = {key: np.array([res[0][i][0][key] for res in results]) for key in SUMMARY_KEYS}
        flagged = np.array([res[0][i][1] for res in results])
        cells.append(CellResult(label, cfg, true_mi, summaries, flagged))
    baseline = np.array([res[1] for res in results]) if plan.baseline_k else None
    return ExperimentResult(plan, cells, seeds, baseline, runtime)


def sweep_k(
    scenario: ScenarioSpec,
    n: int,
    k_list,
    r: int,
    config: EstimatorConfig | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> ExperimentResult:
    """One cell per k, labelled ``k=<k>``; all cells share the same datasets."""
    config = config or EstimatorConfig()
    k_list = list(k_list)
    if max(k_list) > config.N - 1:
        raise ParameterError(f"max k {max(k_list)} exceeds N - 1 = {config.N - 1}")
    plan = ExperimentPlan(
        scenario,
        n,
        r,
        tuple(replace(config, k=k) for k in k_list),
        tuple(f"k={k}" for k in k_list),
        seed=seed,
    )
    return run_experiment(plan, workers)


def sweep_prior(
    scenario: ScenarioSpec,
    n: int,
    a_list,
    base_list,
    r: int,
    k: int = 3,
    config: EstimatorConfig | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> ExperimentResult:
    """Grid over concentration ``a`` and base measure; labels ``a=<a>|G=<base>``."""
    config = config or EstimatorConfig()
    configs, labels = [], []
    for base in base_list:
        for a in a_list:
            configs.append(replace(config, a=a, k=k, base=base))
            labels.append(f"a={a:g}|G={'normal:standard' if base is None else format_scenario(base)}")
    return run_experiment(ExperimentPlan(scenario, n, r, tuple(configs), tuple(labels), seed=seed), workers)


def compare_summaries(
    scenario: ScenarioSpec,
    n: int,
    r: int,
    config: EstimatorConfig | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> dict[str, tuple[float, float | None]]:
    """Average and MSE of the posterior mean and midhinge of MI_pos and MI_pos+."""
    result = run_experiment(ExperimentPlan(scenario, n, r, (config or EstimatorConfig(),), seed=seed), workers)
    return summary_table(result.cells[0])


def summary_table(cell: CellResult) -> dict[str, tuple[float, float | None]]:
    return {key: (cell.average_of(key), cell.mse_of(key)) for key in SUMMARY_KEYS}


def _write_csv(path: Path, rows: list[dict]) -> None:
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def write_result(result: ExperimentResult, outdir, prefix: str = "experiment") -> dict[str, Path]:
    """Write ``<prefix>_summary.csv``, ``<prefix>_raw.csv`` and ``<prefix>_manifest.json``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": outdir / f"{prefix}_summary.csv",
        "raw": outdir / f"{prefix}_raw.csv",
        "manifest": outdir / f"{prefix}_manifest.json",
    }
    _write_csv(paths["summary"], result.summary_rows())
    _write_csv(paths["raw"], result.raw_rows())
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(result.manifest(), fh, indent=2)
    return paths
