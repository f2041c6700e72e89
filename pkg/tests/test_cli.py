import json

import pytest

from soccerevents.cli import build_parser, parse_run_config, run

PASS_SCRIPT = [{"kind": "Pass", "placements": {"kicker": [30, 20], "receiver": [45, 20]}, "v0": 12, "mu": 3}]


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "script.json").write_text(json.dumps(PASS_SCRIPT))
    return tmp_path


def test_version_and_usage(capsys):
    assert run(["--version"]) == 0
    assert "soccerevents" in capsys.readouterr().out
    assert run([]) == 2
    assert run(["detect"]) == 2


def test_run_config():
    args = build_parser().parse_args(["-q", "evaluate", "det.jsonl", "truth.jsonl", "-o", "report.json"])
    run_config = parse_run_config(args)
    assert run_config.inputs == ("det.jsonl", "truth.jsonl")
    assert run_config.output == "report.json"
    assert run_config.verbosity == -1


def test_missing_input_is_a_data_error(workspace, capsys):
    assert run(["detect", "absent.csv"]) == 3
    assert "absent.csv" in capsys.readouterr().err


def test_malformed_script(workspace):
    (workspace / "bad.json").write_text(json.dumps([{"kind": "Header"}]))
    assert run(["generate", "bad.json", "-o", "gen"]) == 3


def test_generate_detect_evaluate_stats(workspace, capsys):
    assert run(["generate", "script.json", "-o", "gen"]) == 0
    assert (workspace / "gen" / "trace.csv").exists()
    assert (workspace / "gen" / "truth.jsonl").exists()

    assert run(["detect", "gen/trace.csv", "--truth", "gen/truth.jsonl", "-o", "det/events.jsonl"]) == 0
    assert (workspace / "det" / "report.json").exists()

    capsys.readouterr()
    assert run(["evaluate", "det/events.jsonl", "gen/truth.jsonl", "-o", "det/report.txt"]) == 0
    assert "macro" in capsys.readouterr().out
    assert (workspace / "det" / "report.txt").exists()

    assert run(["stats", "gen/truth.jsonl", "-o", "det/durations.csv"]) == 0
    assert "Pass" in capsys.readouterr().out


def test_bad_rule_file(workspace, capsys):
    assert run(["generate", "script.json", "-o", "gen"]) == 0
    (workspace / "bad.cer").write_text("complex X: Header as h\n")
    assert run(["detect", "gen/trace.csv", "--rules", "bad.cer", "-o", "det/events.jsonl"]) == 4
    assert "Header" in capsys.readouterr().err


def test_optimize(workspace):
    assert run(["generate", "script.json", "-o", "train"]) == 0
    (workspace / "optimizer.json").write_text(json.dumps({"population_size": 4, "generations": 1,
                                                           "archive_size": 3}))
    assert run(["optimize", "optimizer.json", "train", "--seed", "2", "-o", "opt/archive.json"]) == 0
    content = json.loads((workspace / "opt" / "archive.json").read_text())
    assert content["seed"] == 2
    assert set(content) == {"seed", "population_size", "generations", "detector", "archive", "best_per_event"}
    assert content["detector"] == {"smoothing_window": 1, "speed_span": 1, "strike_radius": 0}
