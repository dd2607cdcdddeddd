import json
import pathlib
import sys

import pytest

from qetransport import cli
from qetransport.config import ConfigError

TWO_SITES = """
chain.omega = 1.5, 0.5
chain.v = 0.1
chain.kappa = 0.05
noise.c = -1
alpha = 1
integrator.snapshot_stride = 100
output.states = false
"""


def write_config(directory: pathlib.Path, extra: str = "", name: str = "run.cfg") -> pathlib.Path:
    path = directory / name
    path.write_text(TWO_SITES + extra, encoding="utf-8")
    return path


def run(monkeypatch: pytest.MonkeyPatch, *args: str) -> int:
    monkeypatch.setattr(sys, "argv", ["qet", *args])
    return cli.cli_main()


def test_argparse() -> None:
    parser = cli.make_argument_parser()

    result = parser.parse_args(["simulate", "-c", "fig2a"])
    assert result.command == "simulate"
    assert result.config == "fig2a"
    assert result.out is None
    assert result.jobs is None
    assert not result.force

    result = parser.parse_args(["plot", "--input", "a.csv", "b.csv", "-o", "figs", "-q"])
    assert result.input == ["a.csv", "b.csv"]
    assert result.out == pathlib.Path("figs")
    assert result.quiet

    with pytest.raises(SystemExit):
        parser.parse_args(["run"])
    with pytest.raises(SystemExit):
        parser.parse_args(["simulate", "-v", "-q"])


def test_resolve_jobs(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("QET_JOBS", raising=False)
    assert cli.resolve_jobs(None) == 1
    assert cli.resolve_jobs(4) == 4
    monkeypatch.setenv("QET_JOBS", "3")
    assert cli.resolve_jobs(None) == 3
    monkeypatch.setenv("QET_JOBS", "many")
    with pytest.raises(ConfigError, match="QET_JOBS"):
        cli.resolve_jobs(None)
    with pytest.raises(ConfigError, match="at least 1"):
        cli.resolve_jobs(0)


def test_simulate(
    monkeypatch: pytest.MonkeyPatch,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    monkeypatch.chdir(tmp_path)
    config = write_config(tmp_path)

    assert run(monkeypatch, "simulate", "-c", str(config), "-o", "out") == cli.EXIT_OK
    output = capsys.readouterr()
    assert pathlib.Path(output.out.rstrip()) == pathlib.Path("out") / "measures.json"

    summary = json.loads((tmp_path / "out" / "measures.json").read_text(encoding="utf-8"))
    assert summary["error"] is None
    assert summary["terminated_by"] == "stop_trace"
    assert summary["measures"]["avg_trapping_time"] > 20.0
    assert "chain.kappa = 0.05" in summary["config"]
    header = (tmp_path / "out" / "trajectory.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,pop_1,pop_2,trace"

    # and a figure of it
    assert run(monkeypatch, "plot", "--input", "trajectory.csv", "-o", "out") == cli.EXIT_OK
    assert (tmp_path / "out" / "plot.svg").is_file()


def test_exit_codes(
    monkeypatch: pytest.MonkeyPatch,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    monkeypatch.chdir(tmp_path)

    assert run(monkeypatch, "simulate") == cli.EXIT_CONFIG
    assert "needs --config" in capsys.readouterr().err

    assert run(monkeypatch, "simulate", "-c", "no_such_recipe") == cli.EXIT_CONFIG
    assert "no config file or recipe" in capsys.readouterr().err

    broken = write_config(tmp_path, "chain.kapa = 1\n", name="broken.cfg")
    assert run(monkeypatch, "simulate", "-c", str(broken)) == cli.EXIT_CONFIG
    output = capsys.readouterr()
    assert "line 9: chain.kapa: unknown key" in output.err
    assert not output.out

    unstable = write_config(tmp_path, "integrator.step = 0.5\n", name="unstable.cfg")
    assert run(monkeypatch, "simulate", "-c", str(unstable)) == cli.EXIT_NUMERICAL
    assert "stability bound" in capsys.readouterr().err

    # the run is kept when the measures can not be evaluated
    untrapped = write_config(tmp_path, "chain.kappa = 0\nintegrator.t_max = 5\n", name="untrapped.cfg")
    assert run(monkeypatch, "simulate", "-c", str(untrapped), "-o", "untrapped") == cli.EXIT_NUMERICAL
    summary = json.loads((tmp_path / "untrapped" / "measures.json").read_text(encoding="utf-8"))
    assert summary["measures"] is None
    assert "trap" in summary["error"]

    assert run(monkeypatch, "plot") == cli.EXIT_CONFIG
    assert "nothing to plot" in capsys.readouterr().err

    with pytest.raises(SystemExit) as info:
        run(monkeypatch, "--version")
    assert info.value.code == 0
    assert capsys.readouterr().out.startswith("qet ")


def test_sweep(
    monkeypatch: pytest.MonkeyPatch,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    monkeypatch.chdir(tmp_path)
    config = write_config(
        tmp_path,
        "output.dir = grid\noutput.trajectories = true\n"
        "sweep.axis.1 = alpha\nsweep.values.1 = 0.3, 1\n"
        "sweep.reduction = avg_minus_offset, eta\n",
    )
    assert run(monkeypatch, "sweep", "-c", str(config)) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == str(pathlib.Path("grid") / "sweep.csv")

    lines = (tmp_path / "grid" / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# qet ")
    assert lines[1] == "index,alpha,avg_minus_offset,eta,tau_1,tau_2,error"
    assert len(lines) == 4
    assert sorted(path.name for path in (tmp_path / "grid" / "points").iterdir()) == [
        "point_0000.csv",
        "point_0001.csv",
    ]
    summary = json.loads((tmp_path / "grid" / "sweep.json").read_text(encoding="utf-8"))
    assert summary["n_points"] == 2
    assert summary["failed"] == []


def test_oracle_and_compare(
    monkeypatch: pytest.MonkeyPatch,
    tmp_path: pathlib.Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    monkeypatch.chdir(tmp_path)
    noiseless = write_config(
        tmp_path, "noise.epsilon_sq = 0\noracle.n_traj = 4\noracle.t_max = 10\n"
    )

    assert run(monkeypatch, "oracle", "-c", str(noiseless), "-o", "mc", "--seed", "5") == cli.EXIT_OK
    capsys.readouterr()
    header = (tmp_path / "mc" / "oracle.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,pop_1,pop_2,trace,stderr_1,stderr_2"
    summary = json.loads((tmp_path / "mc" / "oracle.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 5
    assert summary["n_traj"] == 4

    assert run(monkeypatch, "compare", "-c", str(noiseless), "-o", "same") == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "pass"
    report = json.loads((tmp_path / "same" / "compare.json").read_text(encoding="utf-8"))["report"]
    assert report["passed"]
    assert (tmp_path / "same" / "trajectory.csv").is_file()

    # the sampled noise is switched on, the reference stays noiseless
    mismatched = write_config(
        tmp_path,
        "noise.epsilon_sq = 0\noracle.epsilon_sq = 1\noracle.n_traj = 20\noracle.t_max = 50\n",
        name="mismatched.cfg",
    )
    assert run(monkeypatch, "compare", "-c", str(mismatched), "-o", "other") == cli.EXIT_VERIFICATION
    assert capsys.readouterr().out.strip() == "fail"
