"""Tests for the command line front end: flag handling, config files,
output modes, and exit codes."""

import pytest

import lpmc.cli as cli
from lpmc.errors import NumericError


def fast_args(*extra):
    return ["single-solve", "--n", "24", "--r", "2", "--s", "4",
            "--p-grid", "0.8", "--seed", "9"] + list(extra)


# ---------------------------------------------------------------- exit status

def test_missing_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1
    capsys.readouterr()


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(fast_args("--bogus"))
    assert exc.value.code == 1
    capsys.readouterr()


def test_bad_grid_value_returns_one(capsys):
    assert cli.main(fast_args("--p-grid", "0.0")) == 1
    assert "p_grid" in capsys.readouterr().err


def test_missing_config_file_returns_one(capsys):
    assert cli.main(fast_args("--config", "/no/such/file.cfg")) == 1
    capsys.readouterr()


def test_unknown_config_key_returns_one(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("bogus = 3\n")
    assert cli.main(fast_args("--config", str(path))) == 1
    assert "bogus" in capsys.readouterr().err


def test_numeric_failure_returns_two(monkeypatch, capsys):
    def boom(config):
        raise NumericError("sour")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(fast_args()) == 2
    assert "numeric failure" in capsys.readouterr().err


def test_failing_diagnostics_return_two(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_diagnostics",
                        lambda config, stream=None: ("result: FAIL\n", False))
    assert cli.main(["diagnostics"]) == 2
    capsys.readouterr()


# ----------------------------------------------------------------- run modes

def test_solve_writes_csv(tmp_path, capsys):
    out = tmp_path / "run.csv"
    assert cli.main(fast_args("--out", str(out))) == 0
    captured = capsys.readouterr()
    assert f"wrote 1 records to {out}" in captured.out
    lines = out.read_text().splitlines()
    assert lines[0].startswith("experiment,trial,")
    assert lines[1].startswith("single-solve,0,0.8,4,subspace,")


def test_solve_stdout_mode_prints_summaries_only(capsys):
    assert cli.main(fast_args()) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0].startswith("experiment,trial,")
    assert all(l.startswith("#summary") for l in lines[1:])
    assert "1 solves" in captured.err


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("n = 24\nr = 2\ns = 4\np-grid = 0.8\n"
                    "trials = 2\nseed = 9\n# comment line\n")
    out = tmp_path / "run.csv"
    assert cli.main(["single-solve", "--config", str(path),
                     "--trials", "1", "--out", str(out)]) == 0
    capsys.readouterr()
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 2     # header plus the single overridden trial


def test_repeat_runs_write_identical_files(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(fast_args("--out", str(a))) == 0
    assert cli.main(fast_args("--out", str(b))) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_diagnostics_stdout_and_file(tmp_path, capsys):
    out = tmp_path / "report.txt"
    code = cli.main(["diagnostics", "--n", "16", "--s", "6",
                     "--p-grid", "0.6", "--seed", "1", "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.endswith("result: PASS\n")
    assert out.read_text() == captured.out


def test_single_solve_kind_flag(tmp_path, capsys):
    out = tmp_path / "psd.csv"
    assert cli.main(fast_args("--kind", "psd", "--out", str(out))) == 0
    capsys.readouterr()
    assert ",psd," in out.read_text().splitlines()[1]
