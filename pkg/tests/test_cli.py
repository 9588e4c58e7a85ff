"""Command line behavior: outputs, exit codes, error reporting."""

import json

import numpy as np
import pytest

from clipcov.cli import main, read_matrix_csv


@pytest.fixture()
def data_csv(tmp_path):
    rng = np.random.default_rng(40)
    path = tmp_path / "rows.csv"
    np.savetxt(path, rng.standard_normal((220, 5)), fmt="%.10g", delimiter=",")
    return str(path)


def test_estimate_happy_path(tmp_path, data_csv, capsys):
    out = str(tmp_path / "cov.csv")
    code = main(["estimate", "--input", data_csv, "--output", out, "--seed", "3"])
    assert code == 0
    est = np.loadtxt(out, delimiter=",")
    assert est.shape == (5, 5)
    assert np.allclose(est, est.T)
    diag = json.loads((tmp_path / "cov.diagnostics.json").read_text())
    assert diag["method"] == "minupper"
    assert diag["selected_gamma"] in diag["gamma_grid"]
    assert len(diag["psi_bar"]) == len(diag["gamma_grid"])
    assert diag["budget"]["mom_blocks"] >= 1
    assert "wrote" in capsys.readouterr().out


def test_estimate_deterministic_output_bytes(tmp_path, data_csv):
    out_a = str(tmp_path / "a.csv")
    out_b = str(tmp_path / "b.csv")
    assert main(["estimate", "--input", data_csv, "--output", out_a, "--seed", "3"]) == 0
    assert main(["estimate", "--input", data_csv, "--output", out_b, "--seed", "3"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_estimate_selector_and_centering_flags(tmp_path, data_csv):
    out = str(tmp_path / "lep.csv")
    code = main([
        "estimate", "--input", data_csv, "--output", out,
        "--selector", "lepski", "--center", "paired", "--seed", "1",
    ])
    assert code == 0
    diag = json.loads((tmp_path / "lep.diagnostics.json").read_text())
    assert diag["method"] == "lepski"
    assert diag["admissible"] is not None


def test_estimate_header_flag(tmp_path):
    path = tmp_path / "with_header.csv"
    rng = np.random.default_rng(41)
    body = "\n".join(",".join(f"{v:.6f}" for v in row) for row in rng.standard_normal((200, 3)))
    path.write_text("x,y,z\n" + body + "\n")
    out = str(tmp_path / "cov.csv")
    assert main(["estimate", "--input", str(path), "--output", out, "--header"]) == 0


def test_estimate_ragged_csv_exits_2_with_line_number(tmp_path, capsys):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0\n3.0,4.0\n5.0\n")
    code = main(["estimate", "--input", str(path), "--output", str(tmp_path / "o.csv")])
    assert code == 2
    err = capsys.readouterr().err
    assert "ragged.csv:3" in err


def test_estimate_non_numeric_csv_exits_2_with_line_number(tmp_path, capsys):
    path = tmp_path / "words.csv"
    path.write_text("1.0,2.0\noops,4.0\n")
    code = main(["estimate", "--input", str(path), "--output", str(tmp_path / "o.csv")])
    assert code == 2
    assert "words.csv:2" in capsys.readouterr().err


def test_estimate_missing_file_exits_2(tmp_path, capsys):
    code = main(["estimate", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.csv")])
    assert code == 2


def test_estimate_too_small_exits_1(tmp_path, capsys):
    path = tmp_path / "tiny.csv"
    path.write_text("1.0,2.0\n3.0,4.0\n")
    code = main(["estimate", "--input", str(path), "--output", str(tmp_path / "o.csv")])
    assert code == 1
    assert "fold" in capsys.readouterr().err


def test_read_matrix_csv_skips_blank_lines(tmp_path):
    path = tmp_path / "gaps.csv"
    path.write_text("1.0,2.0\n\n3.0,4.0\n")
    mat = read_matrix_csv(str(path))
    assert mat.shape == (2, 2)


def test_bench_happy_path(tmp_path, capsys):
    scenario = {
        "distribution": "gaussian", "n": 140, "d": 6, "r": 2, "theta": 4.0,
        "epsilon": 0.05, "kappa": 25.0, "replications": 2, "seed": 5,
    }
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps(scenario))
    out_dir = tmp_path / "results"
    code = main(["bench", "--config", str(config), "--out", str(out_dir)])
    assert code == 0
    for name in ("metrics.csv", "aggregate.json", "report.md"):
        assert (out_dir / name).exists()
    stdout = capsys.readouterr().out
    assert "| estimator |" in stdout
    assert "ours-minupper" in stdout
    agg = json.loads((out_dir / "aggregate.json").read_text())
    assert agg["scenario"]["n"] == 140
    assert set(agg["aggregates"]) == {"ours-minupper", "ours-lepski", "scm", "mom-entry"}
    header = (out_dir / "metrics.csv").read_text().splitlines()[0]
    assert header == "estimator,replication,cov_err,subspace_err,eig_err,wall_time_seconds"


def test_bench_estimator_subset(tmp_path):
    scenario = {
        "distribution": "gaussian", "n": 140, "d": 6, "r": 2, "theta": 4.0,
        "epsilon": 0.0, "kappa": 1.0, "replications": 1, "seed": 5,
    }
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps(scenario))
    out_dir = tmp_path / "results"
    code = main(["bench", "--config", str(config), "--out", str(out_dir),
                 "--estimators", "scm", "mom-entry"])
    assert code == 0
    agg = json.loads((out_dir / "aggregate.json").read_text())
    assert set(agg["aggregates"]) == {"scm", "mom-entry"}


def test_bench_unknown_scenario_key_exits_2(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"distribution": "gaussian", "n": 100, "d": 5,
                                  "r": 1, "theta": 2.0, "epsilon": 0.0, "kappa": 1.0,
                                  "replications": 1, "seed": 0, "bogus": 1}))
    code = main(["bench", "--config", str(config), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "bogus" in capsys.readouterr().err


def test_bench_invalid_json_exits_2(tmp_path, capsys):
    config = tmp_path / "broken.json"
    config.write_text("{not json")
    code = main(["bench", "--config", str(config), "--out", str(tmp_path / "o")])
    assert code == 2


def test_validate_subcommand(capsys):
    code = main(["validate", "--n", "80", "--d", "4", "--reps", "100",
                 "--seed", "0", "--oracle-size", "50000"])
    assert code == 0
    out = capsys.readouterr().out
    assert "coverage" in out and "CI" in out


def test_validate_bad_reps_exits_1(capsys):
    code = main(["validate", "--reps", "10"])
    assert code == 1
    assert "100" in capsys.readouterr().err
