import concurrent.futures
import dataclasses
import itertools
import logging
import typing

from .checks import SpecificationError
from .config import ConfigError, Entry, RunConfig, format_float, evaluate_expression, parse_entries
from .integrator import NumericalError, Trajectory
from .simulation import run_simulation

logger = logging.getLogger(__name__)

MAX_POINTS = 10_000


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    """
    One grid point; its config is only built in ``run_point``.
    """

    index: int
    values: typing.Tuple[typing.Tuple[str, float], ...]
    base: RunConfig


@dataclasses.dataclass(frozen=True)
class SweepRow:
    index: int
    values: typing.Tuple[typing.Tuple[str, float], ...]
    derived: typing.Tuple[typing.Tuple[str, float], ...]
    measures: typing.Dict[str, typing.Any]
    error: str = ""
    trajectory: typing.Optional[Trajectory] = None


def point_config(
    base: RunConfig, values: typing.Sequence[typing.Tuple[str, float]]
) -> typing.Tuple[RunConfig, typing.Tuple[typing.Tuple[str, float], ...]]:
    """
    ``base`` with the swept values, then the derived keys evaluated on it.
    """
    entries = base.to_entries(include_sweep=False)
    overrides = [Entry(key, format_float(value)) for key, value in values]
    swept = parse_entries(entries + overrides)
    derived: typing.List[typing.Tuple[str, float]] = []
    if base.sweep is not None:
        for key, expression in base.sweep.derived:
            derived.append((key, evaluate_expression(expression, swept.value_of)))
    if not derived:
        return swept, ()
    extra = [Entry(key, format_float(value)) for key, value in derived]
    return parse_entries(entries + overrides + extra), tuple(derived)


def expand_sweep(base: RunConfig, force: bool = False) -> typing.List[SweepPoint]:
    if base.sweep is None:
        raise ConfigError("no sweep axes configured (`sweep.axis.1`, `sweep.values.1`)")
    n_points = base.sweep.n_points
    if n_points > MAX_POINTS and not force:
        raise ConfigError(f"sweep has {n_points} points, more than {MAX_POINTS}; use --force")
    targets = [axis.target for axis in base.sweep.axes]
    points = []
    for index, combination in enumerate(itertools.product(*(axis.values for axis in base.sweep.axes))):
        points.append(SweepPoint(index, tuple(zip(targets, combination)), base))
    return points


def run_point(point: SweepPoint, keep_trajectory: bool = False) -> SweepRow:
    """
    Builds and runs one grid point; invalid values and failed runs end up
    in the row, not as exceptions.
    """
    derived: typing.Tuple[typing.Tuple[str, float], ...] = ()
    try:
        config, derived = point_config(point.base, point.values)
        result = run_simulation(config)
    except (ConfigError, NumericalError, SpecificationError) as error:
        logger.warning(f"sweep point {point.index} failed: {error}")
        return SweepRow(point.index, point.values, derived, {}, f"{type(error).__name__}: {error}")
    measures = result.measures.to_dict() if result.measures is not None else {}
    error = "" if result.error is None else f"NotConvergedError: {result.error}"
    trajectory = result.trajectory if keep_trajectory else None
    return SweepRow(point.index, point.values, derived, measures, error, trajectory)


def run_sweep(base: RunConfig, jobs: int = 1, force: bool = False) -> typing.List[SweepRow]:
    points = expand_sweep(base, force=force)
    keep = base.output.trajectories
    logger.info(f"sweeping {len(points)} points on {jobs} workers")
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_point, points, itertools.repeat(keep)))
    else:
        rows = [run_point(point, keep) for point in points]
    failed = sum(1 for row in rows if row.error)
    if failed:
        logger.warning(f"{failed} of {len(rows)} sweep points failed")
    return rows
