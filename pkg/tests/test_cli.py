from __future__ import annotations

import csv
import json

import pytest

from graspbench.cli import main
from graspbench.io import load_predictions
from graspbench.model import Split
from graspbench.synth import synthetic_annotations

ENTRY3_VECTOR = {
    "algorithm": "entry-3",
    "n_tasks": 5,
    "scores": {"s1": 77.40, "s2": 99.13, "s3": 59.51, "s4": 58.78,
               "s5": 80.01, "s6": 76.09, "s7": 74.33, "s8": 65.25,
               "s9": 71.19, "s10": 79.32},
}


@pytest.fixture()
def report_path(dataset_dir, tmp_path):
    out = tmp_path / "perfect" / "report.json"
    code = main([
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(dataset_dir / "predictions_perfect.csv"),
        "--algorithm", "perfect",
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_evaluate_perfect_predictions(report_path, capsys):
    payload = json.loads(report_path.read_text())
    for key in ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s11", "s12"):
        assert payload["scores"][key] == 100.0
    assert payload["scores"]["S"] == 75.0  # no simulation scores merged
    assert payload["n_tasks"] == 5
    assert payload["split"] == "combined"


def test_evaluate_writes_figures_and_csv(report_path):
    assert report_path.with_name("report_scores.png").exists()
    per_config = report_path.with_name("report_per_config.csv")
    with per_config.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 6 * 24
    assert {row["measure"] for row in rows} == {
        "capacity", "container_mass", "width_top", "width_bottom", "height",
        "fill_mass"}


def test_evaluate_with_simulation_reaches_hundred(dataset_dir, tmp_path, capsys):
    out = tmp_path / "sim_report.json"
    code = main([
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(dataset_dir / "predictions_perfect.csv"),
        "--simulate", "--no-figures",
        "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["scores"]["s9"] == 100.0
    assert payload["scores"]["s10"] == 100.0
    assert payload["scores"]["S"] == 100.0
    assert payload["sim"]["discarded"] == []
    assert payload["run"]["sim_params"]["friction"] == 1.0


def test_evaluate_missing_prediction_file(dataset_dir, tmp_path):
    code = main([
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(tmp_path / "nope.csv"),
    ])
    assert code == 2


def test_evaluate_malformed_prediction_file(dataset_dir, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("config_id,fill_level\nx,1\n")
    code = main([
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(bad),
    ])
    assert code == 2
    assert "missing column" in capsys.readouterr().err


def test_evaluate_replay_vector(tmp_path, capsys):
    vector = tmp_path / "entry3.json"
    vector.write_text(json.dumps(ENTRY3_VECTOR))
    out = tmp_path / "replay.json"
    code = main(["evaluate", "--replay", str(vector), "--out", str(out),
                 "--no-figures"])
    assert code == 0
    payload = json.loads(out.read_text())
    assert abs(payload["scores"]["S"] - 73.43) <= 0.01 + 1e-9
    assert abs(payload["scores"]["s12"] - 68.16) <= 0.01 + 1e-9
    stdout = capsys.readouterr().out
    assert "entry-3" in stdout


def test_evaluate_fill_missing_keeps_task_count(dataset_dir, tmp_path):
    partial = tmp_path / "partial.csv"
    annotations = synthetic_annotations()
    test_ids = [a.config_id for a in annotations
                if a.split is not Split.TRAIN]
    with partial.open("w") as handle:
        handle.write("config_id,fill_level,fill_type,capacity_ml,mass_g,"
                     "wt_mm,wb_mm,h_mm\n")
        for cid in test_ids:
            handle.write(f"{cid},-1,-1,-1,42.0,-1,-1,-1\n")
    out = tmp_path / "filled.json"
    code = main([
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(partial),
        "--fill-missing", "avg", "--no-figures",
        "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["n_tasks"] == 1
    # The filler provides classification guesses, so s1 is now nonzero.
    assert payload["scores"]["s1"] > 0


def test_simulate_ground_truth(dataset_dir, tmp_path, capsys):
    out = tmp_path / "outcomes.csv"
    trace = tmp_path / "trace.csv"
    code = main([
        "simulate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--out", str(out), "--trace", str(trace), "--no-figures",
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "object safety score:    100.00" in stdout
    assert "delivery accuracy score: 100.00" in stdout
    with out.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 24
    assert all(row["safety"] == "1.0" for row in rows)
    with trace.open() as handle:
        trace_rows = list(csv.DictReader(handle))
    assert trace_rows
    assert {"approach", "deliver"} <= {row["state"] for row in trace_rows}
    assert out.with_suffix(".json").exists()


def test_simulate_quarter_masses_drop(dataset_dir, tmp_path, capsys):
    annotations = synthetic_annotations()
    test_anns = [a for a in annotations if a.split is not Split.TRAIN]
    quarter = tmp_path / "quarter.csv"
    with quarter.open("w") as handle:
        handle.write("config_id,fill_level,fill_type,capacity_ml,mass_g,"
                     "wt_mm,wb_mm,h_mm\n")
        for a in test_anns:
            handle.write(f"{a.config_id},{int(a.fill_level)},{int(a.fill_type)},"
                         f"{0.25 * a.capacity_ml!r},{0.25 * a.container_mass_g!r},"
                         f"-1,-1,-1\n")
    out = tmp_path / "outcomes.csv"
    code = main([
        "simulate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(quarter),
        "--out", str(out), "--no-figures",
    ])
    assert code == 0
    with out.open() as handle:
        rows = list(csv.DictReader(handle))
    assert all(row["dropped"] == "1" for row in rows)
    assert all(row["delivery"] == "0.0" for row in rows)


def test_simulate_missing_track(tmp_path):
    annotations = [a for a in synthetic_annotations()
                   if a.split is Split.PUBLIC_TEST][:1]
    from graspbench.io import save_annotations

    ann_path = tmp_path / "annotations.csv"
    save_annotations(annotations, ann_path)
    code = main(["simulate", "--annotations", str(ann_path)])
    assert code == 2


def test_baseline_round_trip(dataset_dir, tmp_path):
    out = tmp_path / "ran.csv"
    code = main([
        "baseline", "--annotations", str(dataset_dir / "annotations.csv"),
        "--mode", "ran", "--seed", "9", "--out", str(out),
    ])
    assert code == 0
    annotations = synthetic_annotations()
    test_ids = [a.config_id for a in annotations if a.split is not Split.TRAIN]
    preds = load_predictions(out, test_ids)
    assert len(preds.records) == len(test_ids)
    assert preds.tasks_addressed == frozenset({"T1", "T2", "T3", "T4", "T5"})

    again = tmp_path / "ran2.csv"
    assert main([
        "baseline", "--annotations", str(dataset_dir / "annotations.csv"),
        "--mode", "ran", "--seed", "9", "--out", str(again),
    ]) == 0
    assert out.read_text() == again.read_text()


def test_baseline_avg_scores_between_zero_and_hundred(dataset_dir, tmp_path):
    out = tmp_path / "avg.csv"
    assert main([
        "baseline", "--annotations", str(dataset_dir / "annotations.csv"),
        "--mode", "avg", "--out", str(out),
    ]) == 0
    report = tmp_path / "avg_report.json"
    assert main([
        "evaluate", "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(out), "--algorithm", "AVG",
        "--out", str(report), "--no-figures",
    ]) == 0
    payload = json.loads(report.read_text())
    assert 0.0 < payload["scores"]["S"] < 100.0


def make_report(path, algorithm, overall, missing=(), n_tasks=5):
    scores = {f"s{i}": 50.0 for i in range(1, 13)}
    scores["S"] = overall
    for key in missing:
        scores[key] = None
    path.write_text(json.dumps({
        "algorithm": algorithm, "split": "combined", "scores": scores,
        "weights": {}, "n_tasks": n_tasks, "config_count": 4,
        "addressed": {key: scores[key] is not None for key in scores},
        "per_config": [],
    }))
    return path


class TestLeaderboard:
    def test_sorted_by_overall(self, tmp_path, capsys):
        a = make_report(tmp_path / "a.json", "alpha", 40.0)
        b = make_report(tmp_path / "b.json", "beta", 73.0)
        c = make_report(tmp_path / "c.json", "gamma", 55.5)
        out = tmp_path / "board.csv"
        code = main(["leaderboard", str(a), str(b), str(c), "--out", str(out),
                     "--no-figures"])
        assert code == 0
        lines = [line for line in capsys.readouterr().out.splitlines()
                 if line.strip()]
        order = [line.split()[0] for line in lines[1:4]]
        assert order == ["beta", "gamma", "alpha"]
        with out.open() as handle:
            rows = list(csv.DictReader(handle))
        assert [row["algorithm"] for row in rows] == ["beta", "gamma", "alpha"]

    def test_missing_score_shows_hyphen(self, tmp_path, capsys):
        report = make_report(tmp_path / "a.json", "alpha", 40.0, missing=("s3",))
        code = main(["leaderboard", str(report)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "--" in stdout

    def test_tie_breaks_by_name(self, tmp_path, capsys):
        b = make_report(tmp_path / "b.json", "bravo", 50.0)
        a = make_report(tmp_path / "a.json", "alpha", 50.0)
        code = main(["leaderboard", str(b), str(a)])
        assert code == 0
        lines = [line for line in capsys.readouterr().out.splitlines()
                 if line.strip()]
        assert [line.split()[0] for line in lines[1:3]] == ["alpha", "bravo"]

    def test_malformed_report_skipped(self, tmp_path, capsys):
        good = make_report(tmp_path / "good.json", "alpha", 40.0)
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["leaderboard", str(bad), str(good)])
        assert code == 0
        captured = capsys.readouterr()
        assert "skipping" in captured.err
        assert "alpha" in captured.out

    def test_all_malformed_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["leaderboard", str(bad)])
        assert code == 2


def test_validate_ok(dataset_dir, capsys):
    code = main([
        "validate", "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(dataset_dir / "predictions_perfect.csv"),
        "--check-tracks",
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert stdout.count("OK") == 3


def test_validate_rejects_bad_annotations(tmp_path, capsys):
    bad = tmp_path / "ann.csv"
    bad.write_text("config_id,container_id\nx,y\n")
    code = main(["validate", "--annotations", str(bad)])
    assert code == 2
    assert "FAIL" in capsys.readouterr().err


def test_config_file_defaults_and_flag_precedence(dataset_dir, tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(
        f"annotations = {dataset_dir / 'annotations.csv'}\n"
        f"predictions = {dataset_dir / 'predictions_perfect.csv'}\n"
        "split = public-test\n"
        "# comment lines are ignored\n"
    )
    code = main(["evaluate", "--config", str(config)])
    assert code == 0
    assert "split: public-test" in capsys.readouterr().out

    out = tmp_path / "private.json"
    code = main(["evaluate", "--config", str(config), "--split", "private-test",
                 "--out", str(out), "--no-figures"])
    assert code == 0
    assert json.loads(out.read_text())["split"] == "private-test"


def test_config_file_unknown_key(dataset_dir, tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("nonsense = 1\n")
    code = main(["evaluate", "--config", str(config)])
    assert code == 1
    assert "unknown config key" in capsys.readouterr().err


def test_synth_command(tmp_path):
    code = main(["synth", "--out", str(tmp_path / "data"), "--unreachable"])
    assert code == 0
    assert (tmp_path / "data" / "annotations.csv").exists()
    assert (tmp_path / "data" / "poses" / "pu-far-01-c01.csv").exists()


def test_byte_identical_reports(dataset_dir, tmp_path):
    args = [
        "evaluate",
        "--annotations", str(dataset_dir / "annotations.csv"),
        "--predictions", str(dataset_dir / "predictions_perfect.csv"),
        "--no-figures",
    ]
    first = tmp_path / "r1.json"
    second = tmp_path / "r2.json"
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    left = json.loads(first.read_text())
    right = json.loads(second.read_text())
    left.pop("run"), right.pop("run")  # run echo carries the output path
    assert json.dumps(left) == json.dumps(right)
