import json
import subprocess
import sys

import pytest

from ttlab.cli import build_parser, main


def test_parser_subcommands():
    ap = build_parser()
    args = ap.parse_args(["run", "--config", "formation4", "--law", "self", "--seed", "7"])
    assert args.command == "run"
    assert args.law == "self"
    assert args.seed == 7
    args = ap.parse_args(["sweep", "--config", "formation4", "--lambda-grid", "0.1,0.5"])
    assert args.lambda_grid == "0.1,0.5"
    assert args.parallel is False


def test_parser_rejects_unknown_law():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--config", "formation4", "--law", "psychic"])


def test_run_prints_summary(capsys):
    rc = main(["run", "--config", "formation4", "--duration", "2", "--tightness", "0.3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "law=team" in out
    assert "V(0)=21451" in out
    assert "N_comm=" in out


def test_run_writes_outputs(tmp_path, capsys):
    outdir = tmp_path / "res"
    rc = main(
        ["run", "--config", "formation4", "--duration", "2", "--out", str(outdir)]
    )
    assert rc == 0
    for name in ("metrics.json", "lyapunov.csv", "messages.csv", "trace.csv"):
        assert (outdir / name).is_file()
    metrics = json.loads((outdir / "metrics.json").read_text())
    assert metrics["law"] == "team"
    assert metrics["n_comm"] > 0


def test_run_accepts_config_path(tmp_path, capsys, scenario):
    from ttlab.config import save_config

    p = tmp_path / "scenario.cfg"
    save_config(scenario, p)
    rc = main(["run", "--config", str(p), "--duration", "1", "--law", "self"])
    assert rc == 0
    assert "law=self" in capsys.readouterr().out


def test_unknown_bundled_name_fails(capsys):
    rc = main(["run", "--config", "no_such_scenario"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_sweep_table(tmp_path, capsys):
    rc = main(
        [
            "sweep",
            "--config",
            "formation4",
            "--duration",
            "2",
            "--lambda-grid",
            "0.2,1.0",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "lambda=0.2" in out
    assert "lambda=1" in out
    assert "2 runs" in out
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header.startswith("lambda,")


def test_compare_table(tmp_path, capsys):
    rc = main(
        ["compare", "--config", "formation4", "--duration", "2", "--out", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    for variant in ("self:", "fpfd:", "fpad:", "apfd:", "apad:"):
        assert variant in out
    assert (tmp_path / "compare.csv").is_file()


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ttlab.cli", "run", "--config", "formation4", "--duration", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "N_comm=" in proc.stdout
