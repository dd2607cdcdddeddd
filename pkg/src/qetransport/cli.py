# entrypoint for the `qet` command
# subcommands share --config/--out/--jobs/--seed/--force and return an exit code

import argparse
import dataclasses
import logging
import os
import pathlib
import sys
import typing

from . import __version__
from .checks import SpecificationError
from .config import ConfigError, PlotConfig, RunConfig, load_config, recipe_names
from .integrator import NotConvergedError, NumericalError
from .output import (
    summary_payload,
    trajectory_summary,
    write_json,
    write_sweep_csv,
    write_trajectory_csv,
)
from .plotting import emit_plot
from .simulation import oracle_config, run_compare, run_oracle, run_simulation
from .sweep import run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFICATION = 4

COMMANDS = ("simulate", "sweep", "oracle", "compare", "plot")
LOG_FORMAT = "[%(module)-12s] %(message)s"


def make_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qet",
        description="Dephasing-assisted excitation transport along a chain of sites",
        epilog=f"""
--config takes a config file or the name of a bundled recipe
({", ".join(recipe_names())}).
Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 failed oracle comparison.
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS, help="what to run")
    parser.add_argument("-c", "--config", type=str, help="config file or recipe name")
    parser.add_argument("-o", "--out", type=pathlib.Path, help="output directory (output.dir)")
    parser.add_argument(
        "-j", "--jobs", type=int, help="worker processes (default: $QET_JOBS or 1)"
    )
    parser.add_argument("--seed", type=int, help="master seed of the oracle (oracle.seed)")
    parser.add_argument(
        "--force", action="store_true", help="run sweeps beyond the point limit"
    )
    parser.add_argument(
        "--input", type=str, nargs="+", help="CSV files to plot (replaces plot.input)"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug output")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return parser


def resolve_jobs(jobs: typing.Optional[int]) -> int:
    if jobs is None:
        value = os.environ.get("QET_JOBS", "1")
        try:
            jobs = int(value)
        except ValueError:
            raise ConfigError(f"QET_JOBS must be an integer, got `{value}`") from None
    if jobs < 1:
        raise ConfigError(f"--jobs must be at least 1, got {jobs}")
    return jobs


def apply_arguments(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.out is not None:
        config = dataclasses.replace(config, output=dataclasses.replace(config.output, dir=str(args.out)))
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be non-negative, got {args.seed}")
        config = dataclasses.replace(config, oracle=dataclasses.replace(config.oracle, seed=args.seed))
    return config


def simulate(config: RunConfig, out: pathlib.Path) -> int:
    result = run_simulation(config)
    write_trajectory_csv(out / "trajectory.csv", result.trajectory, states=config.output.states)
    measures = result.measures.to_dict() if result.measures is not None else None
    write_json(
        out / "measures.json",
        summary_payload(
            config, measures=measures, error=result.error, **trajectory_summary(result.trajectory)
        ),
    )
    if result.error is not None:
        logger.error(result.error)
        return EXIT_NUMERICAL
    print(out / "measures.json")
    return EXIT_OK


def sweep(config: RunConfig, out: pathlib.Path, jobs: int, force: bool) -> int:
    rows = run_sweep(config, jobs=jobs, force=force)
    write_sweep_csv(out / "sweep.csv", config, rows)
    if config.output.trajectories:
        for row in rows:
            if row.trajectory is not None:
                write_trajectory_csv(
                    out / "points" / f"point_{row.index:04d}.csv",
                    row.trajectory,
                    states=config.output.states,
                )
    failed = [row.index for row in rows if row.error]
    write_json(out / "sweep.json", summary_payload(config, n_points=len(rows), failed=failed))
    print(out / "sweep.csv")
    return EXIT_OK


def oracle(config: RunConfig, out: pathlib.Path, jobs: int) -> int:
    estimate = run_oracle(config, jobs=jobs)
    step = oracle_config(config).integrator.step
    assert step is not None
    write_trajectory_csv(
        out / "oracle.csv",
        estimate.as_trajectory(step),
        states=config.output.states,
        stderr=estimate.stderr,
    )
    write_json(
        out / "oracle.json",
        summary_payload(config, n_traj=estimate.n_traj, seed=config.oracle.seed, step=step),
    )
    print(out / "oracle.csv")
    return EXIT_OK


def compare(config: RunConfig, out: pathlib.Path, jobs: int) -> int:
    estimate, reference, report = run_compare(config, jobs=jobs)
    write_trajectory_csv(
        out / "oracle.csv",
        estimate.as_trajectory(reference.step),
        states=config.output.states,
        stderr=estimate.stderr,
    )
    write_trajectory_csv(out / "trajectory.csv", reference, states=config.output.states)
    write_json(out / "compare.json", summary_payload(config, report=report.to_dict()))
    print("pass" if report.passed else "fail")
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def plot(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = apply_arguments(load_config(args.config), args)
        spec, out = config.plot, pathlib.Path(config.output.dir)
    else:
        spec, out = PlotConfig(), args.out if args.out is not None else pathlib.Path(".")
    if not spec.input and not args.input:
        raise ConfigError("nothing to plot, give --input or `plot.input`")
    print(emit_plot(spec, out, inputs=args.input))
    return EXIT_OK


def run_command(args: argparse.Namespace) -> int:
    if args.command == "plot":
        return plot(args)
    if args.config is None:
        raise ConfigError(f"`qet {args.command}` needs --config")
    config = apply_arguments(load_config(args.config), args)
    out = pathlib.Path(config.output.dir)
    jobs = resolve_jobs(args.jobs)
    if args.command == "simulate":
        return simulate(config, out)
    if args.command == "sweep":
        return sweep(config, out, jobs, args.force)
    if args.command == "oracle":
        return oracle(config, out, jobs)
    return compare(config, out, jobs)


def cli_main() -> int:
    parser = make_argument_parser()
    parse_result = parser.parse_args()
    level = logging.DEBUG if parse_result.verbose else logging.WARNING if parse_result.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)

    try:
        return run_command(parse_result)
    except (ConfigError, SpecificationError) as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, NotConvergedError) as error:
        print(f"numerical failure: {error}", file=sys.stderr)
        return EXIT_NUMERICAL
