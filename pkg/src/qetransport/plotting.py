import glob
import logging
import pathlib
import typing

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .config import ConfigError, PlotConfig  # noqa: E402
from .output import Table, read_table  # noqa: E402

logger = logging.getLogger(__name__)

# dashed, dot-dashed, solid, dotted: alpha = 0.1, 0.3, 1, 10 in the bundled recipes
LINE_STYLES = ("--", "-.", "-", ":")
FIGURE_SIZE = (6.4, 4.8)
SVG_SALT = "qetransport"

# axis labels in units of the fluctuation strength Delta
AXIS_LABELS = {
    "t": r"$\tilde t = \Delta t$",
    "trace": r"$\mathrm{Tr}\,\rho$",
    "alpha": r"$\alpha = \Delta \tau_c$",
    "avg_trapping_time": r"$\langle \tilde t \rangle$",
    "avg_minus_offset": r"$\langle \tilde t \rangle - \tilde\kappa^{-1}$",
    "eta": r"$\eta$",
    "quantum_yield": r"$q$",
    "peak_time": r"$\tilde t_\mathrm{peak}$",
    "peak_value": r"$\rho_\mathrm{peak}$",
}


def axis_label(column: str) -> str:
    if column in AXIS_LABELS:
        return AXIS_LABELS[column]
    if column.startswith("pop_"):
        n = column[len("pop_"):]
        return rf"$\rho_{{{n}{n}}}$"
    parts = column.split(".")
    if len(parts) == 4 and parts[0] == "noise":
        return rf"$c_{{{parts[2]}{parts[3]}}}$" if parts[1] == "c" else column
    return column


def resolve_inputs(patterns: typing.Sequence[str], directory: pathlib.Path) -> typing.List[pathlib.Path]:
    """
    Expands each pattern relative to ``directory``, keeping pattern order.
    """
    paths: typing.List[pathlib.Path] = []
    for pattern in patterns:
        full = pattern if pathlib.Path(pattern).is_absolute() else str(directory / pattern)
        matches = sorted(glob.glob(full))
        if not matches:
            raise ConfigError(f"no input matches `{pattern}`", key="plot.input")
        paths.extend(pathlib.Path(match) for match in matches)
    return paths


def _default_y(table: Table) -> typing.List[str]:
    return [name for name in table.columns if name.startswith("pop_")]


def split_series(
    tables: typing.Sequence[typing.Tuple[str, Table]], column: str
) -> typing.List[typing.Tuple[str, Table]]:
    """
    One series per distinct value of ``column``, in ascending order.
    """
    series = []
    for _, table in tables:
        keys = table.column(column)
        for value in np.unique(keys[np.isfinite(keys)]):
            rows = keys == value
            subset = {name: values[rows] for name, values in table.data.items()}
            series.append((f"{column} = {value:g}", Table(table.columns, subset)))
    return series


def line_plot(
    ax: typing.Any,
    tables: typing.Sequence[typing.Tuple[str, Table]],
    x: str,
    ys: typing.Sequence[str],
    x_max: typing.Optional[float] = None,
) -> None:
    """
    One line style per input, one line per y column.
    """
    for i, (label, table) in enumerate(tables):
        style = LINE_STYLES[i % len(LINE_STYLES)]
        xs = table.column(x)
        columns = list(ys) or _default_y(table)
        for column in columns:
            values = table.column(column)
            # points that never trap (inf) are left as gaps
            values = np.where(np.isfinite(values), values, np.nan)
            name = label if len(columns) == 1 else f"{label} {column}"
            ax.plot(xs, values, linestyle=style, label=name)
    ax.set_xlabel(axis_label(x))
    if len(ys) == 1:
        ax.set_ylabel(axis_label(ys[0]))
    if x_max is not None:
        ax.set_xlim(right=x_max)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()


def contour_plot(ax: typing.Any, fig: typing.Any, table: Table, x: str, y: str, z: str) -> None:
    """
    Filled contour of ``z`` over the (x, y) grid of a sweep, with its
    minimum marked.
    """
    xs, ys, zs = table.column(x), table.column(y), table.column(z)
    ax.set_xlabel(axis_label(x))
    ax.set_ylabel(axis_label(y))
    if len(zs) == 0:
        return
    x_grid, y_grid = np.unique(xs), np.unique(ys)
    grid = np.full((len(y_grid), len(x_grid)), np.nan)
    grid[np.searchsorted(y_grid, ys), np.searchsorted(x_grid, xs)] = zs
    finite = np.isfinite(grid)
    if len(x_grid) >= 2 and len(y_grid) >= 2 and finite.sum() >= 2:
        filled = ax.contourf(x_grid, y_grid, np.ma.masked_invalid(grid), levels=20)
        fig.colorbar(filled, ax=ax, label=axis_label(z))
    else:
        ax.scatter(xs, ys, c=zs)
    if finite.any():
        row, col = np.unravel_index(np.nanargmin(grid), grid.shape)
        ax.plot([x_grid[col]], [y_grid[row]], marker="x", color="white", markersize=10)


def save_svg(fig: typing.Any, path: pathlib.Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_plot(
    spec: PlotConfig,
    directory: typing.Union[str, pathlib.Path] = ".",
    inputs: typing.Optional[typing.Sequence[str]] = None,
) -> pathlib.Path:
    """
    Writes the configured figure to ``spec.output`` below ``directory``.

    ``inputs`` replaces ``spec.input``; relative names resolve against
    ``directory``. Unknown columns raise ConfigError.
    """
    directory = pathlib.Path(directory)
    paths = resolve_inputs(inputs if inputs else spec.input, directory)
    if not paths:
        raise ConfigError("nothing to plot", key="plot.input")
    labels = list(spec.labels) + [path.stem for path in paths[len(spec.labels):]]
    tables = [(label, read_table(path)) for label, path in zip(labels, paths)]
    if spec.group:
        tables = split_series(tables, spec.group)

    if spec.kind == "contour" and len(spec.y) != 1:
        raise ConfigError("a contour plot needs exactly one `plot.y` column", key="plot.y")

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    try:
        if spec.kind == "contour":
            contour_plot(ax, fig, tables[0][1], spec.x, spec.y[0], spec.z)
        else:
            line_plot(ax, tables, spec.x, spec.y, spec.x_max)
    except ConfigError:
        plt.close(fig)
        raise
    if spec.title:
        ax.set_title(spec.title)
    target = directory / spec.output
    save_svg(fig, target)
    logger.info(f"wrote {target}")
    return target
