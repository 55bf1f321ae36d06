import csv
import json

import pytest

from dmg.cli import EXIT_CHECK_FAILED, EXIT_INVALID_CONFIG, EXIT_IO, EXIT_OK, EXIT_SINGULAR, RunConfig, main
from dmg.matrix_io import write_matrix_market
from dmg.problems import helmholtz_periodic_1d


def test_verify_sine_basis(tmp_path, capsys):
    code = main(["verify", "--suite", "aliasing", "--basis", "sine8", "--n", "8", "--output", str(tmp_path)])
    assert code == EXIT_OK
    assert "✅" in capsys.readouterr().out
    report = json.loads((tmp_path / "verify_report.json").read_text(encoding="utf-8"))
    assert all(c["passed"] for c in report["checks"])


def test_verify_broken_symbol_fails(tmp_path, capsys):
    code = main(["verify", "--suite", "twogrid", "--break-symbol", "1e-3", "--output", str(tmp_path)])
    assert code == EXIT_CHECK_FAILED
    assert "❌" in capsys.readouterr().out


def test_solve_torus_with_fields(tmp_path):
    code = main([
        "solve", "--problem", "helmholtz2d", "--N", "8", "--k", "pi/3",
        "--source", "two-frequency", "--dump-fields", "--output", str(tmp_path),
    ])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "solve_report.json").read_text(encoding="utf-8"))
    assert report["problem"]["size"] == 64
    assert report["relative_residual"] < 1e-9
    for name in ("source", "solution", "v0", "e0"):
        assert (tmp_path / f"field_{name}.csv").exists()


def test_solve_multichannel_fields(tmp_path):
    code = main([
        "solve", "--problem", "helmholtz2d", "--N", "8", "--method", "additive-multichannel",
        "--depth", "2", "--source", "point-patch", "--dump-fields", "--output", str(tmp_path),
    ])
    assert code == EXIT_OK
    assert (tmp_path / "field_channel_rb.csv").exists()


def test_solve_singular_torus(tmp_path, capsys):
    code = main(["solve", "--problem", "helmholtz2d", "--N", "8", "--k", "0", "--source", "point-patch",
                 "--output", str(tmp_path)])
    assert code == EXIT_SINGULAR
    assert "singulier" in capsys.readouterr().out


def test_solve_external_matrix(tmp_path):
    path = tmp_path / "ring.mtx"
    write_matrix_market(path, helmholtz_periodic_1d(64).A)
    code = main(["solve", "--matrix", str(path), "--method", "additive", "--output", str(tmp_path)])
    assert code == EXIT_OK


def test_solve_missing_matrix(tmp_path):
    code = main(["solve", "--matrix", str(tmp_path / "absent.mtx"), "--output", str(tmp_path)])
    assert code == EXIT_IO


def test_bench_writes_csv(tmp_path):
    code = main(["bench", "--sizes", "64", "128", "--output", str(tmp_path)])
    assert code == EXIT_OK
    with open(tmp_path / "bench_helmholtz1d_multiplicative.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "multiplications", "wall_time", "was_vcycle_fraction"]
    assert [r[0] for r in rows[1:]] == ["64", "128"]


def test_unknown_method_is_invalid_config(tmp_path):
    assert main(["solve", "--method", "gauss-seidel", "--output", str(tmp_path)]) == EXIT_INVALID_CONFIG


def test_unknown_flag_exits_with_invalid_config():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--precision", "high"])
    assert exc.value.code == EXIT_INVALID_CONFIG


def test_file_source_requires_path(tmp_path):
    assert main(["solve", "--source", "file", "--output", str(tmp_path)]) == EXIT_INVALID_CONFIG


def test_config_file_with_override(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"problem": "helmholtz1d", "n": 64, "method": "dense"}), encoding="utf-8")
    code = main(["solve", "--config", str(config), "--method", "additive", "--output", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "solve_report.json").read_text(encoding="utf-8"))
    assert report["method"] == "additive"
    assert report["problem"]["size"] == 64


def test_invalid_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_text("{problem: helmholtz1d", encoding="utf-8")
    assert main(["solve", "--config", str(config)]) == EXIT_INVALID_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "absent.json")]) == EXIT_IO


def test_run_config_defaults():
    assert RunConfig(command="solve").problem == "helmholtz2d"
    assert RunConfig(command="bench").problem == "helmholtz1d"
    assert RunConfig(command="solve", k="2pi/3").k == pytest.approx(2.0943951023931953)


def test_solve_dirichlet_interval(tmp_path):
    code = main(["solve", "--problem", "dirichlet1d", "--n", "64", "--method", "additive", "--output", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "solve_report.json").read_text(encoding="utf-8"))
    assert report["relative_residual"] < 1e-9
    assert max(v["level"] for v in report["levels_visited"]) == 1
