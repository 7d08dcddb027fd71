"""Command-line interface: exit codes, payload shapes, determinism."""

import json

import pytest

from segmentix import cli
from segmentix.sweeps import CSV_HEADER

WORKED = {"valuations": [1.0, 2.0], "mu": [0.4, 0.6], "k": 0.8}


def write(tmp_path, name, payload) -> str:
    p = tmp_path / name
    p.write_text(json.dumps(payload) if not isinstance(payload, str) else payload)
    return str(p)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# -------------------- solve --------------------

def test_solve_writes_segmentation(tmp_path):
    inp = write(tmp_path, "inst.json", WORKED)
    out = str(tmp_path / "seg.json")
    assert cli.main(["solve", "--input", inp, "--output", out]) == 0
    seg = read_json(out)
    assert seg["prior"] == [0.4, 0.6]
    weights = sorted(s["weight"] for s in seg["segments"])
    assert weights[0] == pytest.approx(0.3196897763013975, abs=1e-9)
    assert weights[1] == pytest.approx(0.6803102236986025, abs=1e-9)
    assert sorted(s["price"] for s in seg["segments"]) == [1.0, 2.0]


def test_solve_defaults_to_stdout(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    assert cli.main(["solve", "--input", inp]) == 0
    seg = json.loads(capsys.readouterr().out)
    assert len(seg["segments"]) == 2


def test_solve_rejects_csv_format(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    assert cli.main(["solve", "--input", inp, "--format", "csv"]) == 2
    assert "output_format" in capsys.readouterr().err


def test_solve_rejects_same_input_output(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    assert cli.main(["solve", "--input", inp, "--output", inp]) == 2
    assert "distinct_paths" in capsys.readouterr().err


def test_solve_missing_file_exit_2(tmp_path, capsys):
    assert cli.main(["solve", "--input", str(tmp_path / "nope.json")]) == 2
    assert "file_format" in capsys.readouterr().err


def test_solve_invalid_instance_exit_2(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", {"valuations": [1, 2], "mu": [0.4, 0.6], "k": -1.0})
    assert cli.main(["solve", "--input", inp]) == 2
    assert "cost_scale" in capsys.readouterr().err


def test_solve_is_deterministic(tmp_path):
    inp = write(tmp_path, "inst.json", WORKED)
    out1, out2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    cli.main(["solve", "--input", inp, "--output", out1])
    cli.main(["solve", "--input", inp, "--output", out2])
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_solve_iteration_budget_exit_3(tmp_path, capsys):
    inst = {"valuations": [1.0, 2.0, 3.0], "mu": [0.3, 0.4, 0.3], "k": 0.5}
    inp = write(tmp_path, "inst.json", inst)
    assert cli.main(["solve", "--input", inp, "--max-iters", "2"]) == 3
    assert "no_convergence" in capsys.readouterr().err


# -------------------- sweep --------------------

def test_sweep_csv_shape(tmp_path):
    inp = write(tmp_path, "inst.json", {"valuations": [1.0, 2.0], "mu": [0.4, 0.6]})
    out = str(tmp_path / "sweep.csv")
    code = cli.main(
        ["sweep", "--input", inp, "--output", out, "--format", "csv", "--k-grid", "0.1:10:40"]
    )
    assert code == 0
    lines = open(out).read().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 41


def test_sweep_svg(tmp_path):
    inp = write(tmp_path, "inst.json", {"valuations": [1.0, 2.0], "mu": [0.4, 0.6]})
    out = str(tmp_path / "sweep.svg")
    code = cli.main(
        ["sweep", "--input", inp, "--output", out, "--format", "svg", "--k-grid", "0.1:10:20"]
    )
    assert code == 0
    assert open(out).read().startswith("<svg")


def test_sweep_rejects_json_format(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", {"valuations": [1.0, 2.0], "mu": [0.4, 0.6]})
    assert cli.main(["sweep", "--input", inp, "--format", "json"]) == 2
    assert "output_format" in capsys.readouterr().err


def test_sweep_bad_grid_string(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", {"valuations": [1.0, 2.0], "mu": [0.4, 0.6]})
    assert cli.main(["sweep", "--input", inp, "--format", "csv", "--k-grid", "0.1:ten:5"]) == 2
    assert "k_grid" in capsys.readouterr().err


def test_sweep_thread_count_does_not_change_bytes(tmp_path, monkeypatch):
    inp = write(tmp_path, "inst.json", {"valuations": [1.0, 2.0], "mu": [0.4, 0.6]})
    serial, parallel = str(tmp_path / "s.csv"), str(tmp_path / "p.csv")
    args = ["sweep", "--input", inp, "--format", "csv", "--k-grid", "0.2:5:12"]
    monkeypatch.setenv("SEGMENTIX_THREADS", "1")
    assert cli.main(args + ["--output", serial]) == 0
    monkeypatch.setenv("SEGMENTIX_THREADS", "3")
    assert cli.main(args + ["--output", parallel]) == 0
    assert open(serial, "rb").read() == open(parallel, "rb").read()


def test_bad_thread_env_exit_2(tmp_path, monkeypatch, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    monkeypatch.setenv("SEGMENTIX_THREADS", "many")
    assert cli.main(["solve", "--input", inp]) == 2
    assert "threads" in capsys.readouterr().err


# -------------------- verify --------------------

def test_verify_round_trip_passes(tmp_path):
    inp = write(tmp_path, "inst.json", WORKED)
    seg_path = str(tmp_path / "seg.json")
    cli.main(["solve", "--input", inp, "--output", seg_path])
    out = str(tmp_path / "report.json")
    code = cli.main(["verify", "--input", seg_path, "--instance", inp, "--output", out])
    assert code == 0
    report = read_json(out)
    assert report["passed"] is True
    assert report["failures"] == []
    assert abs(report["ilr_residual"]) < 1e-10


def test_verify_structural_only_without_instance(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    seg_path = str(tmp_path / "seg.json")
    cli.main(["solve", "--input", inp, "--output", seg_path])
    assert cli.main(["verify", "--input", seg_path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert "note" in report


def test_verify_flags_tampered_weights(tmp_path, capsys):
    inp = write(tmp_path, "inst.json", WORKED)
    seg_path = str(tmp_path / "seg.json")
    cli.main(["solve", "--input", inp, "--output", seg_path])
    seg = read_json(seg_path)
    seg["segments"][0]["weight"] += 0.01
    seg["segments"][1]["weight"] -= 0.01
    bad = write(tmp_path, "bad.json", seg)
    assert cli.main(["verify", "--input", bad, "--instance", inp]) == 2
    err = capsys.readouterr().err
    assert "bayes_plausibility" in err


def test_verify_flags_suboptimal_segmentation(tmp_path, capsys):
    # pooling is structurally valid but fails the optimality certificate at k = 0.8
    inp = write(tmp_path, "inst.json", WORKED)
    pooled = write(
        tmp_path,
        "pool.json",
        {"prior": [0.4, 0.6], "segments": [{"mu": [0.4, 0.6], "weight": 1.0, "price": 2.0}]},
    )
    out = str(tmp_path / "report.json")
    assert cli.main(["verify", "--input", pooled, "--instance", inp, "--output", out]) == 2
    assert read_json(out)["passed"] is False


# -------------------- rationalize --------------------

def test_rationalize_writes_cost_spec(tmp_path):
    target = write(
        tmp_path, "t.json", {"cs": 0.2, "ps": 1.1, "valuations": [1, 2], "mu": [0.6, 0.4]}
    )
    out = str(tmp_path / "cost.json")
    assert cli.main(["rationalize", "--input", target, "--output", out]) == 0
    spec = read_json(out)
    assert len(spec["knots"]) == 5
    assert len(spec["quadratics"]) == 4
    assert spec["knots"][0] == 0.0 and spec["knots"][-1] == 1.0


def test_rationalize_rejects_boundary_target(tmp_path, capsys):
    target = write(
        tmp_path, "t.json", {"cs": 0.0, "ps": 1.1, "valuations": [1, 2], "mu": [0.6, 0.4]}
    )
    assert cli.main(["rationalize", "--input", target]) == 2
    assert "rationalizable_region" in capsys.readouterr().err


def test_rationalize_grid_floor(tmp_path, capsys):
    target = write(
        tmp_path, "t.json", {"cs": 0.2, "ps": 1.1, "valuations": [1, 2], "mu": [0.6, 0.4]}
    )
    assert cli.main(["rationalize", "--input", target, "--grid-n", "50"]) == 2
    assert "grid_size" in capsys.readouterr().err


# -------------------- oracle --------------------

def test_oracle_matches_frozen_value(tmp_path):
    inp = write(tmp_path, "inst.json", WORKED)
    out = str(tmp_path / "orc.json")
    assert cli.main(["oracle", "--input", inp, "--output", out]) == 0
    payload = read_json(out)
    assert payload["value"] == pytest.approx(1.263133931468893, abs=1e-9)
    assert payload["method"] == "binary_grid"
    assert payload["grid_value"] <= payload["value"] + 1e-12


def test_oracle_grid_n_flows_through(tmp_path):
    inp = write(tmp_path, "inst.json", WORKED)
    out = str(tmp_path / "orc.json")
    assert cli.main(["oracle", "--input", inp, "--output", out, "--grid-n", "500"]) == 0
    payload = read_json(out)
    assert payload["grid_step"] == pytest.approx(1.0 / 500.0)


# -------------------- argparse surface --------------------

def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit):
        cli.main(["frobnicate", "--input", "x.json"])


def test_input_flag_required(capsys):
    with pytest.raises(SystemExit):
        cli.main(["solve"])
