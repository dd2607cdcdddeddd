import ast
import dataclasses
import importlib.resources
import math
import operator
import pathlib
import re
import typing

import numpy as np

from .checks import SpecificationError
from .integrator import IntegratorConfig
from .model import ChainSpec, NoiseSpec
from .tcl2 import TrapMode

ENGINES = ("tcl2", "lindblad")
PLOT_KINDS = ("lines", "contour")
MEASURE_FIELDS = (
    "avg_trapping_time",
    "avg_minus_offset",
    "eta",
    "quantum_yield",
    "peak_time",
    "peak_value",
    "tail_bound",
    "min_eigenvalue",
)


class ConfigError(ValueError):
    """
    Invalid configuration, with the offending key and line when known.
    """

    def __init__(
        self, message: str, key: typing.Optional[str] = None, line: typing.Optional[int] = None
    ):
        self.key = key
        self.line = line
        location = ""
        if line is not None:
            location += f"line {line}: "
        if key is not None:
            location += f"{key}: "
        super().__init__(location + message)


@dataclasses.dataclass(frozen=True)
class Entry:
    key: str
    value: str
    line: typing.Optional[int] = dataclasses.field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.key} = {self.value}"


@dataclasses.dataclass(frozen=True)
class MeasuresConfig:
    t_u: float = 2000.0
    k_d: float = 0.0


@dataclasses.dataclass(frozen=True)
class OracleConfig:
    n_traj: int = 1000
    seed: int = 0
    tolerance: float = 0.01
    batch_size: int = 64
    t_max: float = 500.0
    # noise strength of the sampled trajectories, the run's epsilon_sq if None
    epsilon_sq: typing.Optional[float] = None


@dataclasses.dataclass(frozen=True)
class OutputConfig:
    dir: str = "qet-output"
    states: bool = True
    trajectories: bool = False


@dataclasses.dataclass(frozen=True)
class PlotConfig:
    kind: str = "lines"
    input: typing.Tuple[str, ...] = ()
    x: str = "t"
    y: typing.Tuple[str, ...] = ()
    z: str = "avg_minus_offset"
    labels: typing.Tuple[str, ...] = ()
    # column splitting one input into several series
    group: str = ""
    title: str = ""
    x_max: typing.Optional[float] = None
    output: str = "plot.svg"


@dataclasses.dataclass(frozen=True)
class SweepAxis:
    target: str
    values: typing.Tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """
    Up to two swept keys, derived keys computed per point from expressions
    over other keys, and the measures tabulated per point.
    """

    axes: typing.Tuple[SweepAxis, ...]
    derived: typing.Tuple[typing.Tuple[str, str], ...] = ()
    reduction: typing.Tuple[str, ...] = MEASURE_FIELDS

    @property
    def n_points(self) -> int:
        return int(np.prod([len(axis.values) for axis in self.axes]))


@dataclasses.dataclass(frozen=True)
class RunConfig:
    chain: ChainSpec
    noise: NoiseSpec
    engine: str = "tcl2"
    trap_mode: TrapMode = TrapMode.POPULATION_ONLY
    integrator: IntegratorConfig = IntegratorConfig()
    initial_site: int = 1
    measures: MeasuresConfig = MeasuresConfig()
    oracle: OracleConfig = OracleConfig()
    output: OutputConfig = OutputConfig()
    sweep: typing.Optional[SweepSpec] = None
    plot: PlotConfig = PlotConfig()

    def to_entries(self, include_sweep: bool = True) -> typing.List[Entry]:
        """
        Every setting as explicit entries; ``parse_entries`` of the result
        gives back an equal configuration.
        """
        return list(_echo(self, include_sweep))

    def to_text(self) -> str:
        return "".join(f"{entry}\n" for entry in self.to_entries())

    def value_of(self, key: str) -> float:
        """
        Numeric value behind a configuration key, e.g. ``noise.c.1.2``.
        """
        return _value_of(self, key)


def format_float(value: float) -> str:
    return repr(float(value))


def _format_list(values: typing.Iterable[typing.Any]) -> str:
    return ", ".join(format_float(v) if isinstance(v, float) else str(v) for v in values)


def _echo(config: RunConfig, include_sweep: bool) -> typing.Iterator[Entry]:
    chain, noise = config.chain, config.noise
    n_sites = chain.n_sites
    yield Entry("chain.omega", _format_list(chain.omega))
    pairs = [(n, m) for n in range(n_sites) for m in range(n + 1, n_sites)]
    for n, m in pairs:
        yield Entry(f"chain.v.{n + 1}.{m + 1}", format_float(chain.v[n][m]))
    yield Entry("chain.kappa", format_float(chain.kappa))
    yield Entry("initial_site", str(config.initial_site))
    for n, m in pairs:
        yield Entry(f"noise.c.{n + 1}.{m + 1}", format_float(noise.c[n][m]))
    for name in ("delta", "tau_c"):
        matrix = getattr(noise, name)
        for n in range(n_sites):
            for m in range(n, n_sites):
                yield Entry(f"noise.{name}.{n + 1}.{m + 1}", format_float(matrix[n][m]))
    yield Entry("noise.epsilon_sq", format_float(noise.epsilon_sq))
    yield Entry("engine", config.engine)
    yield Entry("engine.trap_mode", config.trap_mode.value)
    integrator = config.integrator
    step = "auto" if integrator.step is None else format_float(integrator.step)
    yield Entry("integrator.step", step)
    yield Entry("integrator.t_max", format_float(integrator.t_max))
    yield Entry("integrator.stop_trace", format_float(integrator.stop_trace))
    yield Entry("integrator.snapshot_stride", str(integrator.snapshot_stride))
    yield Entry("integrator.dense", str(integrator.dense).lower())
    yield Entry("measures.t_u", format_float(config.measures.t_u))
    yield Entry("measures.k_d", format_float(config.measures.k_d))
    yield Entry("oracle.n_traj", str(config.oracle.n_traj))
    yield Entry("oracle.seed", str(config.oracle.seed))
    yield Entry("oracle.tolerance", format_float(config.oracle.tolerance))
    yield Entry("oracle.batch_size", str(config.oracle.batch_size))
    yield Entry("oracle.t_max", format_float(config.oracle.t_max))
    oracle_eps = config.oracle.epsilon_sq
    yield Entry("oracle.epsilon_sq", "none" if oracle_eps is None else format_float(oracle_eps))
    yield Entry("output.dir", config.output.dir)
    yield Entry("output.states", str(config.output.states).lower())
    yield Entry("output.trajectories", str(config.output.trajectories).lower())
    plot = config.plot
    yield Entry("plot.kind", plot.kind)
    yield Entry("plot.input", ", ".join(plot.input))
    yield Entry("plot.x", plot.x)
    yield Entry("plot.y", ", ".join(plot.y))
    yield Entry("plot.z", plot.z)
    yield Entry("plot.labels", ", ".join(plot.labels))
    yield Entry("plot.group", plot.group)
    yield Entry("plot.title", plot.title)
    yield Entry("plot.x_max", "none" if plot.x_max is None else format_float(plot.x_max))
    yield Entry("plot.output", plot.output)
    if include_sweep and config.sweep is not None:
        for i, axis in enumerate(config.sweep.axes, 1):
            yield Entry(f"sweep.axis.{i}", axis.target)
            yield Entry(f"sweep.values.{i}", _format_list(axis.values))
        for key, expression in config.sweep.derived:
            yield Entry(f"sweep.derive.{key}", expression)
        yield Entry("sweep.reduction", ", ".join(config.sweep.reduction))


def read_lines_from_file(file: typing.Union[str, pathlib.Path]) -> typing.Iterator[str]:
    with open(file, "rt", encoding="utf-8") as txt_file:
        yield from (line.rstrip("\n") for line in txt_file)


# an inline comment needs blanks on both sides of its `#`, so `run #3` stays a value
_INLINE_COMMENT = re.compile(r"\s#(?:\s|$)")


def strip_comment(raw: str) -> str:
    line = raw.strip()
    if line.startswith("#"):
        return ""
    comment = _INLINE_COMMENT.search(line)
    return line if comment is None else line[: comment.start()].rstrip()


def read_entries(lines: typing.Iterable[str]) -> typing.List[Entry]:
    entries = []
    for number, raw in enumerate(lines, 1):
        line = strip_comment(raw)
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected `key = value`", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("missing key", line=number)
        entries.append(Entry(key, value, number))
    return entries


def recipe_names() -> typing.List[str]:
    recipes = importlib.resources.files("qetransport") / "recipes"
    return sorted(
        item.name[: -len(".cfg")] for item in recipes.iterdir() if item.name.endswith(".cfg")
    )


def read_recipe(name: str) -> str:
    resource = importlib.resources.files("qetransport") / "recipes" / f"{name}.cfg"
    if not resource.is_file():
        raise ConfigError(f"no config file or recipe named `{name}`")
    return resource.read_text(encoding="utf-8")


def load_config(name_or_path: typing.Union[str, pathlib.Path]) -> RunConfig:
    """
    Parses a config file, or a bundled recipe when no such file exists.
    """
    path = pathlib.Path(name_or_path)
    if path.is_file():
        return parse_entries(read_entries(read_lines_from_file(path)))
    return parse_entries(read_entries(read_recipe(str(name_or_path)).splitlines()))


def parse_config(text: str) -> RunConfig:
    return parse_entries(read_entries(text.splitlines()))


# value parsers


def _number(entry: Entry) -> float:
    try:
        value = float(entry.value)
    except ValueError:
        raise ConfigError(f"expected a number, got `{entry.value}`", entry.key, entry.line) from None
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got `{entry.value}`", entry.key, entry.line)
    return value


def _integer(entry: Entry) -> int:
    value = _number(entry)
    if value != int(value):
        raise ConfigError(f"expected an integer, got `{entry.value}`", entry.key, entry.line)
    return int(value)


def _boolean(entry: Entry) -> bool:
    value = entry.value.lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected true or false, got `{entry.value}`", entry.key, entry.line)


def _words(entry: Entry) -> typing.Tuple[str, ...]:
    return tuple(word.strip() for word in entry.value.split(",") if word.strip())


_LINSPACE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


def _numbers(entry: Entry) -> typing.Tuple[float, ...]:
    text = entry.value.strip()
    match = _LINSPACE.match(text)
    if match:
        start, stop, count = (
            _number(Entry(entry.key, group, entry.line)) for group in match.groups()
        )
        if count < 1 or count != int(count):
            raise ConfigError("linspace needs a positive integer count", entry.key, entry.line)
        return tuple(float(x) for x in np.linspace(start, stop, int(count)))
    text = text.strip("[]")
    return tuple(_number(Entry(entry.key, word, entry.line)) for word in text.split(",") if word.strip())


def _site(entry: Entry, word: str, n_sites: int) -> int:
    try:
        site = int(word)
    except ValueError:
        raise ConfigError(f"`{word}` is not a site index", entry.key, entry.line) from None
    if not 1 <= site <= n_sites:
        raise ConfigError(f"site {site} out of range 1..{n_sites}", entry.key, entry.line)
    return site - 1


def _pair(entry: Entry, n_sites: int, off_diagonal: bool) -> typing.Tuple[int, int]:
    parts = entry.key.split(".")
    if len(parts) != 4:
        raise ConfigError("expected two site indices", entry.key, entry.line)
    n, m = _site(entry, parts[2], n_sites), _site(entry, parts[3], n_sites)
    if off_diagonal and n == m:
        raise ConfigError("diagonal entries are fixed", entry.key, entry.line)
    return n, m


def _count_sites(entries: typing.Sequence[Entry]) -> int:
    n_sites = None
    for entry in entries:
        if entry.key == "chain.omega":
            n_sites = len(_numbers(entry))
        elif entry.key == "chain.n_sites":
            n_sites = _integer(entry)
    if n_sites is None:
        raise ConfigError("`chain.omega` or `chain.n_sites` is required")
    if n_sites < 2:
        raise ConfigError(f"a chain needs at least two sites, got {n_sites}")
    return n_sites


class _Builder:
    """
    Mutable settings while the entries are applied.
    """

    def __init__(self, n_sites: int):
        self.n_sites = n_sites
        self.omega: typing.Optional[np.ndarray] = None
        self.v = np.zeros((n_sites, n_sites))
        self.kappa = 0.005
        self.c = np.eye(n_sites)
        self.delta = np.ones((n_sites, n_sites))
        self.tau_c = np.ones((n_sites, n_sites))
        self.epsilon_sq = 0.1
        self.values: typing.Dict[str, typing.Dict[str, typing.Any]] = {
            "run": {},
            "integrator": {},
            "measures": {},
            "oracle": {},
            "output": {},
            "plot": {},
        }
        self.axes: typing.Dict[int, typing.Dict[str, typing.Any]] = {}
        self.derived: typing.Dict[str, str] = {}
        self.reduction: typing.Tuple[str, ...] = MEASURE_FIELDS

    def set_symmetric(self, matrix: np.ndarray, entry: Entry, off_diagonal: bool) -> None:
        n, m = _pair(entry, self.n_sites, off_diagonal)
        matrix[n, m] = matrix[m, n] = _number(entry)

    def apply(self, entry: Entry) -> None:
        key = entry.key
        head, _, rest = key.partition(".")
        if key == "chain.omega":
            self.omega = np.array(_numbers(entry))
        elif key == "chain.n_sites":
            pass
        elif key.startswith("chain.omega."):
            if self.omega is None:
                self.omega = np.zeros(self.n_sites)
            self.omega[_site(entry, key.split(".")[2], self.n_sites)] = _number(entry)
        elif key == "chain.v":
            bonds = _numbers(entry)
            if len(bonds) not in (1, self.n_sites - 1):
                raise ConfigError(
                    f"expected 1 or {self.n_sites - 1} couplings", entry.key, entry.line
                )
            coupling = np.diag(np.broadcast_to(bonds, (self.n_sites - 1,)), 1)
            self.v = coupling + coupling.T
        elif key.startswith("chain.v."):
            self.set_symmetric(self.v, entry, off_diagonal=True)
        elif key == "chain.kappa":
            self.kappa = _number(entry)
        elif key == "noise.c":
            self.c = np.full((self.n_sites, self.n_sites), _number(entry))
            np.fill_diagonal(self.c, 1.0)
        elif key.startswith("noise.c."):
            self.set_symmetric(self.c, entry, off_diagonal=True)
        elif key == "noise.delta":
            self.delta = np.full((self.n_sites, self.n_sites), _number(entry))
        elif key.startswith("noise.delta."):
            self.set_symmetric(self.delta, entry, off_diagonal=False)
        elif key in ("noise.tau_c", "alpha"):
            self.tau_c = np.full((self.n_sites, self.n_sites), _number(entry))
        elif key.startswith("noise.tau_c."):
            self.set_symmetric(self.tau_c, entry, off_diagonal=False)
        elif key == "noise.epsilon_sq":
            self.epsilon_sq = _number(entry)
        elif key == "engine":
            if entry.value not in ENGINES:
                raise ConfigError(f"expected one of {', '.join(ENGINES)}", entry.key, entry.line)
            self.values["run"]["engine"] = entry.value
        elif key == "engine.trap_mode":
            try:
                self.values["run"]["trap_mode"] = TrapMode(entry.value)
            except ValueError:
                modes = ", ".join(mode.value for mode in TrapMode)
                raise ConfigError(f"expected one of {modes}", entry.key, entry.line) from None
        elif key == "initial_site":
            self.values["run"]["initial_site"] = _site(entry, entry.value, self.n_sites) + 1
        elif head == "integrator" and rest in ("step", "t_max", "stop_trace", "snapshot_stride", "dense"):
            self.values["integrator"][rest] = self.integrator_value(entry, rest)
        elif head == "measures" and rest in ("t_u", "k_d"):
            self.values["measures"][rest] = _number(entry)
        elif head == "oracle" and rest in ("n_traj", "seed", "batch_size"):
            self.values["oracle"][rest] = _integer(entry)
        elif head == "oracle" and rest in ("tolerance", "t_max"):
            self.values["oracle"][rest] = _number(entry)
        elif key == "oracle.epsilon_sq":
            self.values["oracle"][rest] = None if entry.value.lower() == "none" else _number(entry)
        elif head == "output" and rest == "dir":
            self.values["output"]["dir"] = entry.value
        elif head == "output" and rest in ("states", "trajectories"):
            self.values["output"][rest] = _boolean(entry)
        elif head == "plot":
            self.values["plot"][rest] = self.plot_value(entry, rest)
        elif key.startswith("sweep."):
            self.apply_sweep(entry)
        else:
            raise ConfigError("unknown key", entry.key, entry.line)

    @staticmethod
    def integrator_value(entry: Entry, name: str) -> typing.Any:
        if name == "step":
            return None if entry.value.lower() == "auto" else _number(entry)
        if name == "snapshot_stride":
            return _integer(entry)
        if name == "dense":
            return _boolean(entry)
        return _number(entry)

    @staticmethod
    def plot_value(entry: Entry, name: str) -> typing.Any:
        if name == "kind":
            if entry.value not in PLOT_KINDS:
                raise ConfigError(f"expected one of {', '.join(PLOT_KINDS)}", entry.key, entry.line)
            return entry.value
        if name in ("input", "y", "labels"):
            return _words(entry)
        if name == "x_max":
            return None if entry.value.lower() in ("", "none") else _number(entry)
        if name in ("x", "z", "group", "title", "output"):
            return entry.value
        raise ConfigError("unknown key", entry.key, entry.line)

    def apply_sweep(self, entry: Entry) -> None:
        parts = entry.key.split(".")
        if len(parts) == 3 and parts[1] in ("axis", "values"):
            try:
                index = int(parts[2])
            except ValueError:
                raise ConfigError("axis index must be 1 or 2", entry.key, entry.line) from None
            if index not in (1, 2):
                raise ConfigError("axis index must be 1 or 2", entry.key, entry.line)
            axis = self.axes.setdefault(index, {})
            if parts[1] == "axis":
                axis["target"] = entry.value
            else:
                axis["values"] = _numbers(entry)
        elif len(parts) > 2 and parts[1] == "derive":
            self.derived[".".join(parts[2:])] = entry.value
        elif entry.key == "sweep.reduction":
            fields = _words(entry)
            unknown = [name for name in fields if name not in MEASURE_FIELDS]
            if unknown:
                raise ConfigError(f"unknown measures {', '.join(unknown)}", entry.key, entry.line)
            self.reduction = fields
        else:
            raise ConfigError("unknown key", entry.key, entry.line)

    def sweep(self) -> typing.Optional[SweepSpec]:
        if not self.axes and not self.derived:
            return None
        axes = []
        for index in sorted(self.axes):
            axis = self.axes[index]
            if "target" not in axis or "values" not in axis:
                raise ConfigError(f"sweep axis {index} needs both `axis` and `values`")
            if not axis["values"]:
                raise ConfigError(f"sweep axis {index} has no values")
            axes.append(SweepAxis(axis["target"], axis["values"]))
        if sorted(self.axes) not in ([1], [1, 2]):
            raise ConfigError("sweep axes must be numbered 1 and 2")
        return SweepSpec(axes=tuple(axes), derived=tuple(self.derived.items()), reduction=self.reduction)

    def build(self) -> RunConfig:
        if self.omega is None:
            raise ConfigError("`chain.omega` is required")
        if len(self.omega) != self.n_sites:
            raise ConfigError(f"`chain.omega` has {len(self.omega)} values for {self.n_sites} sites")
        try:
            chain = ChainSpec(omega=self.omega, v=self.v, kappa=self.kappa)
            noise = NoiseSpec(c=self.c, delta=self.delta, tau_c=self.tau_c, epsilon_sq=self.epsilon_sq)
            integrator = IntegratorConfig(**self.values["integrator"])
            measures = MeasuresConfig(**self.values["measures"])
        except SpecificationError as error:
            raise ConfigError(str(error)) from error
        if measures.k_d < 0:
            raise ConfigError("measures.k_d must be non-negative")
        oracle = OracleConfig(**self.values["oracle"])
        if oracle.n_traj < 2 or oracle.batch_size < 1 or oracle.seed < 0:
            raise ConfigError("oracle needs n_traj >= 2, batch_size >= 1 and seed >= 0")
        if oracle.epsilon_sq is not None and oracle.epsilon_sq < 0:
            raise ConfigError("oracle.epsilon_sq must be non-negative")
        return RunConfig(
            chain=chain,
            noise=noise,
            integrator=integrator,
            measures=measures,
            oracle=oracle,
            output=OutputConfig(**self.values["output"]),
            sweep=self.sweep(),
            plot=PlotConfig(**self.values["plot"]),
            **self.values["run"],
        )


def parse_entries(entries: typing.Sequence[Entry]) -> RunConfig:
    builder = _Builder(_count_sites(entries))
    for entry in entries:
        builder.apply(entry)
    return builder.build()


# numeric values behind keys, for derived sweep entries


def _value_of(config: RunConfig, key: str) -> float:
    chain, noise = config.chain, config.noise
    parts = key.split(".")
    lookup = Entry(key, "", None)
    try:
        if key == "alpha":
            return float(noise.tau_c[0][0])
        if key == "chain.kappa":
            return chain.kappa
        if key == "noise.epsilon_sq":
            return noise.epsilon_sq
        if parts[:2] == ["chain", "omega"] and len(parts) == 3:
            return chain.omega[_site(lookup, parts[2], chain.n_sites)]
        matrices = {
            ("chain", "v"): chain.v,
            ("noise", "c"): noise.c,
            ("noise", "delta"): noise.delta,
            ("noise", "tau_c"): noise.tau_c,
        }
        if tuple(parts[:2]) in matrices and len(parts) == 4:
            n, m = _pair(lookup, chain.n_sites, off_diagonal=False)
            return float(matrices[tuple(parts[:2])][n][m])
        if parts[0] == "measures" and len(parts) == 2:
            return float(getattr(config.measures, parts[1]))
        if parts[0] == "integrator" and parts[1:] in (["t_max"], ["stop_trace"]):
            return float(getattr(config.integrator, parts[1]))
    except AttributeError:
        pass
    raise ConfigError("not a numeric key", key)


_OPERATORS: typing.Dict[type, typing.Callable[..., float]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_FUNCTIONS: typing.Dict[str, typing.Callable[..., float]] = {"abs": abs, "min": min, "max": max}
_KEY_TOKEN = re.compile(r"(?<![\w.])[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z0-9_]+)*")


def evaluate_expression(expression: str, lookup: typing.Callable[[str], float]) -> float:
    """
    Arithmetic over configuration keys, e.g. ``noise.c.2.3 * noise.c.1.2``.

    Supports numbers, ``+ - * / **``, parentheses and ``abs``, ``min``, ``max``.
    """
    names: typing.Dict[str, str] = {}

    def placeholder(match: typing.Match[str]) -> str:
        token = match.group(0)
        if token in _FUNCTIONS:
            return token
        return names.setdefault(token, f"_key{len(names)}")

    source = _KEY_TOKEN.sub(placeholder, expression)
    values = {name: lookup(key) for key, name in names.items()}
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError:
        raise ConfigError(f"can not parse expression `{expression}`") from None

    def evaluate(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return evaluate(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in values:
            return values[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](evaluate(node.left), evaluate(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](evaluate(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCTIONS
            and not node.keywords
        ):
            return float(_FUNCTIONS[node.func.id](*(evaluate(arg) for arg in node.args)))
        raise ConfigError(f"unsupported expression `{expression}`")

    try:
        return float(evaluate(tree))
    except ZeroDivisionError:
        raise ConfigError(f"division by zero in `{expression}`") from None
