import json
import subprocess
import sys

import pytest

from rcgibbs.cli import main


MODEL = {
    "graph": {"n": 3, "bonds": [[0, 1], [1, 2]]},
    "interaction": {"template": "example1", "J12": 1.0, "J23": 1.0},
}


@pytest.fixture()
def model_file(tmp_path):
    p = tmp_path / "model.json"
    p.write_text(json.dumps(MODEL))
    return str(p)


def run_cli(args):
    return main(args)


def test_example1_exits_zero(tmp_path):
    assert run_cli(["--out", str(tmp_path), "exp", "example1"]) == 0
    payload = json.loads((tmp_path / "results.json").read_text())
    assert payload["results"]["all_counterexample"] is True
    assert "config" in payload and payload["config"]["exp_command"] == "example1"


def test_missing_seed_in_mc_mode_is_usage_error(tmp_path, model_file):
    rc = run_cli(
        ["--out", str(tmp_path), "perc", "ibar", "--model", model_file, "--A", "0", "--B", "2", "--mc", "100"]
    )
    assert rc == 2


def test_unknown_flag_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(["--out", str(tmp_path), "exp", "example1", "--bogus"])
    assert exc.value.code == 2


def test_cap_violation_exits_three(tmp_path):
    model = {
        "graph": {"grid": "6x6"},
        "interaction": {"template": "ising", "J": 0.5},
    }
    p = tmp_path / "big.json"
    p.write_text(json.dumps(model))
    rc = run_cli(
        ["--out", str(tmp_path), "perc", "ibar", "--model", str(p), "--A", "0", "--B", "35", "--exact"]
    )
    assert rc == 3


def test_bad_model_file_exits_two(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    rc = run_cli(["--out", str(tmp_path), "gibbs", "eval", "--model", str(p)])
    assert rc == 2


def test_exact_ibar_and_csv_schema(tmp_path, model_file):
    out = tmp_path / "run"
    rc = run_cli(
        ["--out", str(out), "--format", "csv", "perc", "ibar",
         "--model", model_file, "--A", "0", "--B", "2", "--exact"]
    )
    assert rc == 0
    payload = json.loads((out / "results.json").read_text())
    assert abs(payload["results"]["estimate"] - 0.026694033379259074) < 1e-12
    lines = (out / "table.csv").read_text().splitlines()
    assert lines[0] == "sigma,rho,p_connect"
    assert len(lines) > 1


def test_csv_empty_rows_header_only(tmp_path, model_file):
    out = tmp_path / "run"
    rc = run_cli(
        ["--out", str(out), "--format", "csv", "rcr", "check",
         "--model", model_file, "--roundtrip"]
    )
    assert rc == 0
    assert (out / "table.csv").read_text() == "\n" or (out / "table.csv").read_text() == ""


def test_same_seed_byte_identical(tmp_path, model_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = run_cli(
            ["--out", str(out), "--seed", "42", "perc", "ibar",
             "--model", model_file, "--A", "0", "--B", "2", "--mc", "400"]
        )
        assert rc == 0
        outs.append((out / "results.json").read_bytes())
    assert outs[0] == outs[1]


def test_thread_count_does_not_change_bytes(tmp_path, model_file):
    blobs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        rc = run_cli(
            ["--out", str(out), "--seed", "7", "--threads", threads,
             "perc", "ibar", "--model", model_file, "--A", "0", "--B", "2", "--mc", "400"]
        )
        assert rc == 0
        blobs.append((out / "results.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_timing_sidecar_only_with_flag(tmp_path, model_file):
    out1 = tmp_path / "no_meta"
    run_cli(["--out", str(out1), "exp", "example1"])
    assert not (out1 / "meta.json").exists()
    out2 = tmp_path / "with_meta"
    run_cli(["--out", str(out2), "--timing", "exp", "example1"])
    assert (out2 / "meta.json").exists()


def test_gibbs_eval_report(tmp_path, model_file):
    out = tmp_path / "run"
    rc = run_cli(["--out", str(out), "gibbs", "eval", "--model", model_file])
    assert rc == 0
    payload = json.loads((out / "results.json").read_text())
    assert payload["results"]["n_states"] == 8
    assert len(payload["results"]["rows"]) == 8


def test_model_file_boundary_defaults_region(tmp_path):
    # with region "all", boundary vertices are treated as exterior
    model = {
        "graph": {"n": 3, "bonds": [[0, 1], [1, 2]]},
        "interaction": {"template": "ising", "J": 0.9},
        "boundary": {"2": 1},
    }
    p = tmp_path / "m.json"
    p.write_text(json.dumps(model))
    out = tmp_path / "run"
    assert run_cli(["--out", str(out), "gibbs", "eval", "--model", str(p)]) == 0
    payload = json.loads((out / "results.json").read_text())
    assert payload["results"]["region"] == [0, 1]
    assert payload["results"]["n_states"] == 4


def test_gibbs_eval_large_model_site_means(tmp_path):
    # 18 spins routes through the array-backed distribution
    model = {"graph": {"grid": "6x3"}, "interaction": {"template": "ising", "J": 0.3}}
    p = tmp_path / "big.json"
    p.write_text(json.dumps(model))
    out = tmp_path / "run"
    assert run_cli(["--out", str(out), "gibbs", "eval", "--model", str(p)]) == 0
    payload = json.loads((out / "results.json").read_text())
    assert "rows" not in payload["results"]
    means = payload["results"]["site_means"]
    assert len(means) == 18 and all(abs(m) < 1e-9 for m in means)


def test_twocopy_commands(tmp_path, model_file):
    out = tmp_path / "rho"
    assert run_cli(["--out", str(out), "twocopy", "rho", "--model", model_file]) == 0
    payload = json.loads((out / "results.json").read_text())
    assert payload["results"]["n_sigma"] == 27
    out = tmp_path / "slice"
    assert run_cli(
        ["--out", str(out), "twocopy", "slice", "--model", model_file, "--sigma", "0,0,0"]
    ) == 0
    payload = json.loads((out / "results.json").read_text())
    assert payload["results"]["symmetry_defect"] == 0.0


def test_rcr_solve_monotone(tmp_path, model_file):
    out = tmp_path / "solve"
    assert run_cli(["--out", str(out), "rcr", "solve", "--model", model_file, "--monotone"]) == 0
    payload = json.loads((out / "results.json").read_text())
    rows = payload["results"]["rows"]
    assert len(rows) == 2
    assert abs(rows[0]["probs"][0] - (1 - 2.718281828459045**-1.0)) < 1e-12


def test_violation_finding_exits_one(tmp_path, model_file):
    # an unmeetable tolerance turns the round-trip check into a finding
    out = tmp_path / "run"
    rc = run_cli(
        ["--out", str(out), "--tolerance", "1e-30", "rcr", "check",
         "--model", model_file, "--roundtrip"]
    )
    assert rc == 1
    payload = json.loads((out / "results.json").read_text())
    assert payload["results"]["violations"] == 1


def test_unwritable_output_exits_two(model_file):
    rc = run_cli(
        ["--out", "/proc/definitely/not/writable", "exp", "example1"]
    )
    assert rc == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rcgibbs.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "rcgibbs" in proc.stdout
