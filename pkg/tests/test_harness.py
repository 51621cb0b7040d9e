import csv
import json
from dataclasses import replace

import numpy as np
import pytest

from bnpmi.distributions import make_scenario
from bnpmi.errors import ParameterError
from bnpmi.estimator import EstimatorConfig, estimate_mi, knn_mi_plain
from bnpmi.harness import (
    SUMMARY_KEYS,
    ExperimentPlan,
    compare_summaries,
    replicate_seeds,
    run_experiment,
    sweep_k,
    sweep_prior,
    write_result,
)

TINY = EstimatorConfig(N=150, ell=12)
SCEN = make_scenario("normal:d=2:cov=sigma")


def test_replicate_seeds_are_stable_and_distinct():
    a = replicate_seeds(7, 5)
    assert a == replicate_seeds(7, 5)
    assert a[:3] == replicate_seeds(7, 3)
    assert len({s for pair in a for s in pair}) == 10


def test_single_replicate_is_a_direct_call():
    res = run_experiment(ExperimentPlan(SCEN, 30, 1, (TINY,), baseline_k=3, seed=11))
    data_seed, est_seed = replicate_seeds(11, 1)[0]
    x = SCEN.sample(30, np.random.default_rng(data_seed))
    post = estimate_mi(x, replace(TINY, seed=est_seed))
    cell = res.cells[0]
    assert cell.estimates[0] == post.estimate
    for key, value in post.summaries().items():
        assert cell.summaries[key][0] == value
    assert res.baseline[0] == knn_mi_plain(x, 3)


def test_mse_identity():
    res = run_experiment(ExperimentPlan(SCEN, 30, 6, (TINY,), baseline_k=3, seed=1))
    cell = res.cells[0]
    raw = [row["midhinge_pos_plus"] for row in res.raw_rows() if row["label"] == cell.label]
    assert cell.mse == pytest.approx(np.mean((np.array(raw) - SCEN.true_mi) ** 2), abs=1e-12)
    assert cell.mse >= 0
    assert res.baseline_mse == pytest.approx(np.mean((res.baseline - SCEN.true_mi) ** 2), abs=1e-12)


def test_worker_count_does_not_change_results():
    plan = ExperimentPlan(SCEN, 25, 4, (TINY, replace(TINY, k=2)), seed=5)
    serial = run_experiment(plan, workers=1)
    parallel = run_experiment(plan, workers=2)
    for a, b in zip(serial.cells, parallel.cells):
        for key in SUMMARY_KEYS:
            np.testing.assert_array_equal(a.summaries[key], b.summaries[key])
    assert serial.seeds == parallel.seeds


def test_configs_share_datasets():
    plan = ExperimentPlan(SCEN, 25, 3, (TINY, TINY), ("x", "y"), seed=2)
    res = run_experiment(plan)
    np.testing.assert_array_equal(res.cell("x").estimates, res.cell("y").estimates)


def test_plan_validation():
    with pytest.raises(ParameterError):
        ExperimentPlan(SCEN, 30, 0, (TINY,))
    with pytest.raises(ParameterError):
        ExperimentPlan(SCEN, 30, 1, ())
    with pytest.raises(ParameterError):
        ExperimentPlan(SCEN, 30, 1, (TINY,), ("a", "b"))
    with pytest.raises(ParameterError):
        ExperimentPlan(SCEN, 30, 1, (replace(TINY, base=make_scenario("normal:d=3").family),))


def test_missing_truth_gives_no_mse():
    res = run_experiment(ExperimentPlan(make_scenario("spherical:d=2:logsd=0.5"), 25, 2, (TINY,)))
    assert res.cells[0].mse is None


def test_sweep_k_labels_and_single_k_composition():
    res = sweep_k(SCEN, 30, [1, 2, 3], 2, TINY, seed=4)
    assert [c.label for c in res.cells] == ["k=1", "k=2", "k=3"]
    single = sweep_k(SCEN, 30, [3], 2, TINY, seed=4)
    direct = run_experiment(ExperimentPlan(SCEN, 30, 2, (replace(TINY, k=3),), seed=4))
    np.testing.assert_array_equal(single.cells[0].estimates, direct.cells[0].estimates)
    np.testing.assert_array_equal(res.cell("k=3").estimates, direct.cells[0].estimates)
    with pytest.raises(ParameterError):
        sweep_k(SCEN, 30, [200], 1, TINY)


def test_sweep_prior_grid():
    bases = [None, make_scenario("normal:d=2:mean=3").family]
    res = sweep_prior(SCEN, 30, [0.05, 5.0], bases, 2, k=3, config=TINY, seed=3)
    assert [c.label for c in res.cells] == [
        "a=0.05|G=normal:standard",
        "a=5|G=normal:standard",
        "a=0.05|G=normal:d=2:cov=identity:mean=3",
        "a=5|G=normal:d=2:cov=identity:mean=3",
    ]
    assert all(c.config.k == 3 for c in res.cells)


def test_compare_summaries_single_replicate():
    table = compare_summaries(SCEN, 30, 1, TINY, seed=9)
    data_seed, est_seed = replicate_seeds(9, 1)[0]
    post = estimate_mi(SCEN.sample(30, np.random.default_rng(data_seed)), replace(TINY, seed=est_seed))
    for key, value in post.summaries().items():
        assert table[key][0] == value
        assert table[key][1] == pytest.approx((value - SCEN.true_mi) ** 2)


def test_write_result(tmp_path):
    res = run_experiment(ExperimentPlan(SCEN, 25, 3, (TINY,), ("bnp",), baseline_k=3, seed=8))
    paths = write_result(res, tmp_path, "run")
    with open(paths["raw"], newline="") as fh:
        raw = list(csv.DictReader(fh))
    assert len(raw) == 6
    assert {r["label"] for r in raw} == {"bnp", "knn_plain_k3"}
    with open(paths["summary"], newline="") as fh:
        summary = list(csv.DictReader(fh))
    assert [r["label"] for r in summary] == ["bnp", "knn_plain_k3"]
    assert float(summary[0]["mse"]) == pytest.approx(res.cells[0].mse)
    manifest = json.loads(paths["manifest"].read_text())
    assert manifest["master_seed"] == 8
    assert manifest["replicate_seeds"] == [list(s) for s in res.seeds]
    assert manifest["configs"]["bnp"]["N"] == 150
    assert "numpy" in manifest["versions"]
