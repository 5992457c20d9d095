import json
import logging

import pandas as pd
import pytest

from conftest import make_config
from internal.CoreModel import TaskDesign, dump_config
from internal.ItemGenerator import pool_to_csv
from internal.JudgmentLog import write_judgments
from internal.SimulationManager import RESULT_COLUMNS, simulate_trial
from main import run_cli


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    dump_config(make_config(trials=10, beta_weights=(1.0, 10.0)), path)
    return path


def test_simulate_writes_results(tmp_path, config_path):
    out = tmp_path / "results.csv"
    assert run_cli(["simulate", "--config", str(config_path), "--seed", "7", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == RESULT_COLUMNS
    assert len(frame) == 3 * 10 * 2


def test_simulate_overrides(tmp_path, config_path):
    out = tmp_path / "results.csv"
    argv = ["simulate", "--config", str(config_path), "--seed", "7", "--trials", "4",
            "--designs", "separate_tasks,baseline", "--out", str(out)]
    assert run_cli(argv) == 0
    frame = pd.read_csv(out)
    assert list(frame["design"].unique()) == ["baseline", "separate_tasks"]
    assert frame["trial"].max() == 3


def test_simulate_is_reproducible(tmp_path, config_path):
    outputs = []
    for k, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"run{k}.csv"
        argv = ["simulate", "--config", str(config_path), "--seed", "99", "--threads", threads, "--out", str(out)]
        assert run_cli(argv) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_seed_changes_results(tmp_path, config_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(["simulate", "--config", str(config_path), "--seed", "1", "--out", str(a)])
    run_cli(["simulate", "--config", str(config_path), "--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_invalid_penalty_exits_1(tmp_path, caplog):
    config = tmp_path / "config.json"
    dump_config(make_config(gamma=1.5, trials=2), config)
    out = tmp_path / "results.csv"
    with caplog.at_level(logging.ERROR):
        code = run_cli(["simulate", "--config", str(config), "--seed", "1", "--out", str(out)])
    assert code == 1
    assert "penalty" in caplog.text
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["simulate", "--config", "x.json", "--out", "y.csv"],
    ["simulate", "--config", "x.json", "--seed", "abc", "--out", "y.csv"],
    ["bogus"],
    [],
])
def test_usage_errors_exit_1(argv, capsys):
    assert run_cli(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_seed_out_of_range(tmp_path, config_path):
    out = tmp_path / "results.csv"
    assert run_cli(["simulate", "--config", str(config_path), "--seed", "-1", "--out", str(out)]) == 1
    assert run_cli(["simulate", "--config", str(config_path), "--seed", str(2 ** 64), "--out", str(out)]) == 1


def test_unknown_design_exits_1(tmp_path, config_path):
    out = tmp_path / "results.csv"
    argv = ["simulate", "--config", str(config_path), "--seed", "1", "--designs", "pairs", "--out", str(out)]
    assert run_cli(argv) == 1


def test_missing_config_exits_2(tmp_path):
    out = tmp_path / "results.csv"
    assert run_cli(["simulate", "--config", str(tmp_path / "nope.json"), "--seed", "1", "--out", str(out)]) == 2


def test_unwritable_output_exits_2(tmp_path, config_path):
    out = tmp_path / "missing_dir" / "results.csv"
    assert run_cli(["simulate", "--config", str(config_path), "--seed", "1", "--out", str(out)]) == 2


def test_sweep(tmp_path, config_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"mu": [0.6, 0.8], "budget": [3, 5], "beta": [1.0]}))
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--grid", str(grid), "--config", str(config_path), "--seed", "5",
            "--trials", "2", "--threads", "2", "--out", str(out)]
    assert run_cli(argv) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 4 * 3 * 2
    assert sorted(frame["budget"].unique()) == [3, 5]


def test_sweep_bad_grid_exits_1(tmp_path, config_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"temperature": [1]}))
    argv = ["sweep", "--grid", str(grid), "--config", str(config_path), "--seed", "5", "--out", str(tmp_path / "o.csv")]
    assert run_cli(argv) == 1


@pytest.fixture
def simulated_log(tmp_path):
    config = make_config(trials=1, seed=4)
    records = []
    for design in TaskDesign:
        records.extend(simulate_trial(config, design, 0).to_judgments())
    log, truth = tmp_path / "log.csv", tmp_path / "truth.csv"
    write_judgments(records, log)
    pool_to_csv(simulate_trial(config, TaskDesign.BASELINE, 0).pool, truth)
    return log, truth


def test_analyze_report(tmp_path, simulated_log):
    log, truth = simulated_log
    out = tmp_path / "report.json"
    assert run_cli(["analyze", "--judgments", str(log), "--truth", str(truth), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report["f1"]) == {"baseline", "p1_p2", "p1&p2", "p1", "p2"}
    assert report["items"] == 100
    assert "hybrid" not in report
    assert report["tests"]["worker_accuracy"]["kruskal_wallis"]["df"] == 3


def test_analyze_with_machine(tmp_path, simulated_log):
    log, truth = simulated_log
    machine = tmp_path / "ml.csv"
    bits = pd.read_csv(truth)
    rows = [(item, f"p{j}", bits.loc[k, f"p_{j}"]) for k, item in enumerate(bits["item_id"]) for j in (1, 2)]
    pd.DataFrame(rows, columns=["item_id", "predicate_id", "prediction"]).to_csv(machine, index=False)
    out = tmp_path / "report.json"
    argv = ["analyze", "--judgments", str(log), "--truth", str(truth), "--machine", str(machine), "--out", str(out)]
    assert run_cli(argv) == 0
    hybrid = json.loads(out.read_text())["hybrid"]
    assert hybrid["ml"] == 1.0
    assert set(hybrid) == {"crowd", "ml", "crowd_ml", "ml_crowd", "hybrid"}


def test_analyze_malformed_log_exits_1(tmp_path, simulated_log):
    _, truth = simulated_log
    log = tmp_path / "bad.csv"
    log.write_text("worker_id,item_id,condition,predicate_id,answer,decision_time_s\nw,i0,baseline,P,2,\n")
    assert run_cli(["analyze", "--judgments", str(log), "--truth", str(truth), "--out", str(tmp_path / "r.json")]) == 1


def test_analyze_unlabeled_predicate_exits_1(tmp_path, simulated_log, caplog):
    log, truth = simulated_log
    item = pd.read_csv(truth, dtype=str)["item_id"][0]
    with open(log, "a", encoding="utf-8") as handle:
        handle.write(f"w3,{item},p3,p3,1,2.0\n")
    out = tmp_path / "report.json"
    with caplog.at_level(logging.ERROR):
        code = run_cli(["analyze", "--judgments", str(log), "--truth", str(truth), "--out", str(out)])
    assert code == 1
    assert "p3" in caplog.text
    assert not out.exists()


def test_analyze_column_map(tmp_path, simulated_log):
    log, truth = simulated_log
    renamed = tmp_path / "renamed.csv"
    pd.read_csv(log, dtype=str, keep_default_na=False).rename(columns={"worker_id": "annotator"}).to_csv(renamed, index=False)
    out = tmp_path / "report.json"
    argv = ["analyze", "--judgments", str(renamed), "--truth", str(truth),
            "--column-map", '{"annotator": "worker_id"}', "--out", str(out)]
    assert run_cli(argv) == 0


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(["--version"])
    assert info.value.code == 0
    assert "crowdsim" in capsys.readouterr().out
