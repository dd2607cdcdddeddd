# column layouts, UTF-8 with LF line endings:
#   trajectory.csv  t, rho_re_n_m, rho_im_n_m (n <= m, optional), pop_1..pop_N, trace
#   oracle.csv      as trajectory.csv, followed by stderr_1..stderr_N
#   sweep.csv       "# qet <version>", index, swept keys, derived keys, measures, tau_1..tau_N, error

import csv
import dataclasses
import json
import pathlib
import typing

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, SweepSpec
from .integrator import Trajectory
from .sweep import SweepRow

PathLike = typing.Union[str, pathlib.Path]


def format_value(value: typing.Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def trajectory_columns(n_sites: int, states: bool = True, stderr: bool = False) -> typing.List[str]:
    columns = ["t"]
    if states:
        for n in range(1, n_sites + 1):
            for m in range(n, n_sites + 1):
                columns += [f"rho_re_{n}_{m}", f"rho_im_{n}_{m}"]
    columns += [f"pop_{n}" for n in range(1, n_sites + 1)]
    columns.append("trace")
    if stderr:
        columns += [f"stderr_{n}" for n in range(1, n_sites + 1)]
    return columns


def _write_rows(
    path: PathLike,
    header: typing.Sequence[str],
    rows: typing.Iterable[typing.Sequence[typing.Any]],
    comment: str = "",
) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as csv_file:
        if comment:
            csv_file.write(f"# {comment}\n")
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])


def write_trajectory_csv(
    path: PathLike,
    traj: Trajectory,
    states: bool = True,
    stderr: typing.Optional[np.ndarray] = None,
) -> None:
    n_sites = traj.n_sites
    pairs = [(n, m) for n in range(n_sites) for m in range(n, n_sites)]
    populations = traj.populations
    traces = traj.traces

    def rows() -> typing.Iterator[typing.List[typing.Any]]:
        for k, t in enumerate(traj.times):
            row: typing.List[typing.Any] = [float(t)]
            if states:
                rho = traj.states[k]
                for n, m in pairs:
                    row += [float(rho[n, m].real), float(rho[n, m].imag)]
            row += [float(p) for p in populations[k]]
            row.append(float(traces[k]))
            if stderr is not None:
                row += [float(s) for s in stderr[k]]
            yield row

    _write_rows(path, trajectory_columns(n_sites, states, stderr is not None), rows())


def sweep_columns(sweep: SweepSpec, n_sites: int) -> typing.List[str]:
    columns = ["index"] + [axis.target for axis in sweep.axes]
    columns += [key for key, _ in sweep.derived]
    columns += list(sweep.reduction)
    columns += [f"tau_{n}" for n in range(1, n_sites + 1)]
    columns.append("error")
    return columns


def write_sweep_csv(path: PathLike, config: RunConfig, rows: typing.Sequence[SweepRow]) -> None:
    if config.sweep is None:
        raise ConfigError("no sweep configured")
    n_sites = config.chain.n_sites

    def cells(row: SweepRow) -> typing.List[typing.Any]:
        cells: typing.List[typing.Any] = [row.index]
        cells += [value for _, value in row.values]
        derived = dict(row.derived)
        cells += [derived.get(key, "") for key, _ in config.sweep.derived]
        cells += [row.measures.get(name, "") for name in config.sweep.reduction]
        tau_n = row.measures.get("tau_n", [""] * n_sites)
        cells += list(tau_n)
        cells.append(row.error)
        return cells

    _write_rows(
        path,
        sweep_columns(config.sweep, n_sites),
        (cells(row) for row in sorted(rows, key=lambda row: row.index)),
        comment=f"qet {__version__}",
    )


def write_json(path: PathLike, payload: typing.Any) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def summary_payload(config: RunConfig, **fields: typing.Any) -> typing.Dict[str, typing.Any]:
    payload = {
        "version": __version__,
        "config": [str(entry) for entry in config.to_entries()],
    }
    payload.update(fields)
    return payload


def trajectory_summary(traj: Trajectory) -> typing.Dict[str, typing.Any]:
    return {
        "step": traj.step,
        "t_end": traj.t_end,
        "final_trace": float(traj.traces[-1]),
        "terminated_by": traj.terminated_by,
        "min_eigenvalue": traj.min_eigenvalue,
    }


@dataclasses.dataclass(frozen=True)
class Table:
    columns: typing.Tuple[str, ...]
    data: typing.Dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(next(iter(self.data.values()))) if self.data else 0

    def column(self, name: str) -> np.ndarray:
        if name not in self.data:
            raise ConfigError(f"unknown column `{name}`, available: {', '.join(self.columns)}")
        return self.data[name]


def _to_float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return float("nan")


def read_table(path: PathLike) -> Table:
    """
    Reads a CSV written by this package; non-numeric cells become NaN.
    """
    try:
        with open(path, "rt", encoding="utf-8", newline="") as csv_file:
            lines = [line for line in csv_file if not line.startswith("#")]
    except FileNotFoundError:
        raise ConfigError(f"no such file `{path}`") from None
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError(f"`{path}` is empty") from None
    rows = list(reader)
    data = {
        name: np.array([_to_float(row[i]) for row in rows if len(row) > i], dtype=float)
        for i, name in enumerate(header)
    }
    return Table(columns=tuple(header), data=data)
