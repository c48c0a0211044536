import json

import numpy as np
import pytest

from nsireg.cli import (CsvParseError, UsageError, emit_table, load_matrix_csv, main, parse_args,
                        read_table_csv)
from nsireg.harness import AggregateRow, read_records

BENCH_CFG = """\
[design]
n = 40
p_plus_q = 20
ratio = 0.5
beta_support = 3

[experiment]
replications = 5
cv_folds = 3
grid_size = 5
methods = nsi, lasso

[run]
seed = 11
"""


@pytest.fixture
def bench_cfg(tmp_path):
    path = tmp_path / "example1.cfg"
    path.write_text(BENCH_CFG)
    return path


def test_flag_overrides_file(bench_cfg, tmp_path):
    cfg = parse_args(["bench", "--config", str(bench_cfg), "--reps", "100", "--out", str(tmp_path)])
    assert cfg["experiment"]["replications"] == 100
    assert cfg["experiment"]["cv_folds"] == 3  # from file
    assert cfg["experiment"]["grid_min_ratio"] == 1e-3  # default


def test_seed_precedence(bench_cfg, tmp_path):
    base = ["bench", "--config", str(bench_cfg), "--out", str(tmp_path)]
    assert parse_args(base)["run"]["seed"] == 11
    assert parse_args(base + ["--seed", "3"])["run"]["seed"] == 3


def test_unknown_flag(tmp_path):
    with pytest.raises(UsageError):
        parse_args(["simulate", "--colour", "red", "--out", str(tmp_path)])


def test_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[design]\nwidth = 3\n")
    with pytest.raises(UsageError, match="design.width"):
        parse_args(["simulate", "--config", str(path), "--out", str(tmp_path)])


def test_unknown_section(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[colours]\nred = 1\n")
    with pytest.raises(UsageError, match="colours"):
        parse_args(["simulate", "--config", str(path), "--out", str(tmp_path)])


def test_invalid_value_names_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[design]\nn = many\n")
    with pytest.raises(UsageError, match="design.n"):
        parse_args(["simulate", "--config", str(path), "--out", str(tmp_path)])


def test_bench_requires_config(tmp_path):
    with pytest.raises(UsageError, match="--config"):
        parse_args(["bench", "--out", str(tmp_path)])


def test_missing_out():
    with pytest.raises(UsageError, match="--out"):
        parse_args(["simulate"])


def test_main_exit_codes(tmp_path, capsys):
    assert main(["bench", "--out", str(tmp_path)]) == 2
    assert "--config" in capsys.readouterr().err
    assert main(["fit", "--data", str(tmp_path / "nowhere"), "--out", str(tmp_path / "o")]) == 1


def test_csv_plain(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,4\n")
    np.testing.assert_array_equal(load_matrix_csv(path), [[1, 2], [3, 4]])


def test_csv_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("a,b\n1,2\n")
    np.testing.assert_array_equal(load_matrix_csv(path), [[1, 2]])


def test_csv_ragged(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,4\n5\n")
    with pytest.raises(CsvParseError) as info:
        load_matrix_csv(path)
    assert info.value.row == 3


def test_csv_non_numeric(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("x,y\n1,2\n3,oops\n")
    with pytest.raises(CsvParseError) as info:
        load_matrix_csv(path)
    assert (info.value.row, info.value.col) == (3, 2)


def _rows():
    mean = {"l2": 10.947, "l1": 50.5, "fpr": 0.046, "tpr": 1.0, "nz": 61.14}
    sd = {"l2": 2.018, "l1": 7.25, "fpr": 0.031, "tpr": 0.0, "nz": 1.2}
    return [AggregateRow("ratio=0.5", "nsi", 100, mean, sd)]


def test_emit_single_row(tmp_path):
    path = tmp_path / "t.csv"
    emit_table(_rows(), path, "csv")
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 2


def test_emit_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = _rows()
    emit_table(rows, path, "csv")
    (back,) = read_table_csv(path)
    for m in rows[0].mean:
        assert float(back[f"{m}_mean"]) == rows[0].mean[m]
        assert float(back[f"{m}_sd"]) == rows[0].sd[m]


def test_emit_markdown(tmp_path):
    path = tmp_path / "t.md"
    emit_table(_rows(), path, "markdown")
    assert "10.947(2.018)" in path.read_text()


def test_simulate_then_fit(tmp_path):
    sim = tmp_path / "sim"
    assert main(["simulate", "--seed", "4", "--out", str(sim)]) == 0
    Z = load_matrix_csv(sim / "Z.csv")
    assert Z.shape == (100, 50)
    out = tmp_path / "fit"
    assert main(["fit", "--data", str(sim), "--lambda", "0.1", "--out", str(out)]) == 0
    summary = json.loads((out / "fit.json").read_text())
    assert summary["lambda"] == 0.1 and summary["converged"]
    assert summary["precision"] == "graphical_lasso"
    assert load_matrix_csv(out / "beta_hat.csv").shape == (50, 1)


def test_cv_command(tmp_path):
    sim = tmp_path / "sim"
    main(["simulate", "--out", str(sim)])
    cfg = tmp_path / "cv.cfg"
    cfg.write_text("[precision]\nmethod = known\n[run]\ncv_folds = 5\n")
    out = tmp_path / "cv"
    assert main(["cv", "--config", str(cfg), "--data", str(sim), "--out", str(out)]) == 0
    table = load_matrix_csv(out / "cv.csv")
    assert table.shape == (50, 2)
    best = json.loads((out / "cv.json").read_text())["best_lambda"]
    assert best == table[np.argmin(table[:, 1]), 0]


def test_screen_command(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 10))
    y = X[:, :4] @ [3.0, 3.0, 2.5, 2.0]
    np.savetxt(tmp_path / "X.csv", X, delimiter=",")
    np.savetxt(tmp_path / "y.csv", y, delimiter=",")
    out = tmp_path / "screen"
    assert main(["screen", "--data", str(tmp_path), "--threshold", "0.1", "--out", str(out)]) == 0
    res = json.loads((out / "screen.json").read_text())
    assert res["mse"]["nsi"] <= 0.01


def test_manifest_rerun_bitwise(bench_cfg, tmp_path):
    first = tmp_path / "first"
    assert main(["bench", "--config", str(bench_cfg), "--threads", "1", "--out", str(first)]) == 0
    manifest = first / "manifest.cfg"
    assert "version" in manifest.read_text()
    second = tmp_path / "second"
    assert main(["bench", "--config", str(manifest), "--threads", "2", "--out", str(second)]) == 0
    a = (first / "records.jsonl").read_bytes()
    assert a == (second / "records.jsonl").read_bytes()
    assert len(read_records(first / "records.jsonl")) == 10
    assert (first / "table.md").read_text() == (second / "table.md").read_text()
