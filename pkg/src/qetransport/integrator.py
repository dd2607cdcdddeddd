import dataclasses
import logging
import math
import typing

import numpy as np
import scipy.integrate

from .checks import SpecificationError
from .generator import MasterEquation, as_generator
from .model import ChainSpec, DensityMatrix, NoiseSpec, build_h0, diagonalize

logger = logging.getLogger(__name__)

DEFAULT_STEP = 0.01
# min eigenvalue of a snapshot below -POSITIVITY_TOLERANCE is reported
POSITIVITY_TOLERANCE = 1e-6
# remaining trace below which the tail of a run is dropped
NEGLIGIBLE_TRACE = 1e-6
# remaining trace above which no tail is extrapolated
TAIL_TRACE_LIMIT = 0.05
TAIL_R_SQUARED = 0.999
# generators with a larger condition number go through their eigenmodes
SINGULAR_CONDITION = 1e10
# eigenvalues with real part above -DECAY_FLOOR do not decay
DECAY_FLOOR = 1e-12
PERSISTENT_WEIGHT = 1e-9


class NumericalError(ArithmeticError):
    """
    Non-finite state, or a step size the generator can not resolve.
    """


class NotConvergedError(RuntimeError):
    """
    Measures requested on a run whose population has not left the chain.
    """


class TailFitError(NotConvergedError):
    pass


class TrajectoryRangeError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class IntegratorConfig:
    """
    ``step`` None picks the step in ``preflight_step``; ``propagate`` alone
    falls back to ``DEFAULT_STEP``. ``dense`` allows advancing stationary
    segments with the dense superoperator.
    """

    step: typing.Optional[float] = None
    t_max: float = 2e5
    stop_trace: float = 1e-6
    snapshot_stride: int = 10
    dense: bool = True

    def __post_init__(self) -> None:
        if self.step is not None and not self.step > 0:
            raise SpecificationError(f"step must be positive, got {self.step}")
        if not self.t_max > 0:
            raise SpecificationError(f"t_max must be positive, got {self.t_max}")
        if not 0.0 <= self.stop_trace < 1.0:
            raise SpecificationError(f"stop_trace must be in [0, 1), got {self.stop_trace}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise SpecificationError(
                f"snapshot_stride must be a positive integer, got {self.snapshot_stride}"
            )

    def with_step(self, step: float) -> "IntegratorConfig":
        return dataclasses.replace(self, step=step)


@dataclasses.dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Snapshots of a propagation.

    ``cumulative_population_integrals[k, n]`` is the trapezoidal integral of
    the population of site ``n + 1`` up to ``times[k]``, accumulated at every
    integrator step, not only at the stored snapshots.
    """

    times: np.ndarray
    states: np.ndarray
    cumulative_population_integrals: np.ndarray
    step: float
    stop_trace: float = 0.0
    terminated_by: str = "t_max"
    min_eigenvalue: float = math.nan
    # population integrals beyond t_end, known when the run ended on a stationary generator
    tail_integrals: typing.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise SpecificationError("a trajectory needs at least one time")
        if np.any(np.diff(times) <= 0):
            raise SpecificationError("trajectory times must be strictly increasing")
        if self.states.shape[0] != len(times):
            raise SpecificationError("one state per stored time is required")

    @classmethod
    def from_populations(
        cls,
        times: typing.Sequence[float],
        populations: np.ndarray,
        step: typing.Optional[float] = None,
        stop_trace: float = 0.0,
        terminated_by: str = "t_max",
    ) -> "Trajectory":
        """
        Trajectory of diagonal states, integrated on the given grid.
        """
        times = np.asarray(times, dtype=float)
        populations = np.asarray(populations, dtype=float)
        states = np.zeros(populations.shape + (populations.shape[1],), dtype=complex)
        index = np.arange(populations.shape[1])
        states[:, index, index] = populations
        integrals = scipy.integrate.cumulative_trapezoid(
            populations, times, axis=0, initial=0.0
        )
        return cls(
            times=times,
            states=states,
            cumulative_population_integrals=integrals,
            step=float(step if step is not None else times[1] - times[0]),
            stop_trace=stop_trace,
            terminated_by=terminated_by,
        )

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_sites(self) -> int:
        return int(self.states.shape[1])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("kaa->ka", self.states))

    @property
    def traces(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    def state(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.states[k])

    def check_site(self, site: int) -> None:
        if not 1 <= site <= self.n_sites:
            raise SpecificationError(f"site {site} out of range 1..{self.n_sites}")


def rk4_step(
    rhs: typing.Callable[[float, np.ndarray], np.ndarray],
    t: float,
    rho: np.ndarray,
    h: float,
) -> np.ndarray:
    """classic 4th order step"""
    k1 = rhs(t, rho)
    k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2)
    k4 = rhs(t + h, rho + h * k3)
    return rho + h * (k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6)


def rk4_propagator(superoperator: np.ndarray, h: float) -> np.ndarray:
    """
    One RK4 step of a constant linear generator as a matrix,
    ``I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24``.
    """
    scaled = h * superoperator
    term = np.eye(len(superoperator), dtype=complex)
    result = term.copy()
    for order in range(1, 5):
        term = term @ scaled / order
        result += term
    return result


def power_and_sum(one_step: np.ndarray, k: int) -> typing.Tuple[np.ndarray, np.ndarray]:
    """
    ``(P^k, P^0 + P^1 + ... + P^(k-1))`` by repeated doubling.
    """
    identity = np.eye(len(one_step), dtype=complex)
    power, partial_sum = identity, np.zeros_like(identity)
    base_power, base_sum = one_step, identity
    while k:
        if k & 1:
            partial_sum = partial_sum + power @ base_sum
            power = power @ base_power
        k >>= 1
        if k:
            base_sum = base_sum + base_power @ base_sum
            base_power = base_power @ base_power
    return power, partial_sum


class _StationaryBlocks:
    """
    Exact RK4 blocks of a constant generator: the state after ``k`` steps and
    the trapezoidal population integral over those steps, both as matrices.
    """

    def __init__(self, superoperator: np.ndarray, h: float, population_index: np.ndarray):
        self.one_step = rk4_propagator(superoperator, h)
        self.h = h
        self.population_index = population_index
        self._blocks: typing.Dict[int, typing.Tuple[np.ndarray, np.ndarray]] = {}

    def block(self, k: int) -> typing.Tuple[np.ndarray, np.ndarray]:
        if k not in self._blocks:
            power, partial_sum = power_and_sum(self.one_step, k)
            identity = np.eye(len(power))
            trapezoid = partial_sum - 0.5 * identity + 0.5 * power
            self._blocks[k] = (power, self.h * trapezoid[self.population_index, :])
        return self._blocks[k]


def stationary_tail(superoperator: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """
    ``int_0^inf rho_nn(t) dt`` per site for ``d rho / dt = L rho`` started in
    ``rho``, that is the populations of ``-L^-1 rho``.

    A site kept populated by a mode of ``L`` which does not decay gets
    ``inf``.
    """
    dim = rho.shape[0]
    vec = rho.ravel()
    population_index = np.arange(dim) * (dim + 1)
    if np.linalg.cond(superoperator) < SINGULAR_CONDITION:
        return np.real(np.linalg.solve(superoperator, -vec)[population_index])
    eigenvalues, vectors = np.linalg.eig(superoperator)
    weights = np.linalg.lstsq(vectors, vec, rcond=None)[0]
    modes = vectors[population_index, :] * weights
    decaying = eigenvalues.real < -DECAY_FLOOR
    tail = np.real(-(modes[:, decaying] / eigenvalues[decaying]).sum(axis=1))
    persistent = np.abs(modes[:, ~decaying]).sum(axis=1) > PERSISTENT_WEIGHT
    tail[persistent] = np.inf
    return tail


class _Recorder:
    def __init__(self, step: float, stop_trace: float):
        self.step = step
        self.stop_trace = stop_trace
        self.times: typing.List[float] = []
        self.states: typing.List[np.ndarray] = []
        self.integrals: typing.List[np.ndarray] = []

    def add(self, k: int, rho: np.ndarray, integral: np.ndarray) -> bool:
        """
        Stores a snapshot; True when the run should stop.
        """
        t = k * self.step
        if not np.all(np.isfinite(rho)):
            raise NumericalError(
                f"non-finite density matrix at t={t:g}: step {self.step:g} "
                "too large or generator blow-up"
            )
        self.times.append(t)
        self.states.append(rho.copy())
        self.integrals.append(integral.copy())
        return float(np.real(np.trace(rho))) < self.stop_trace


def propagate(
    rhs: typing.Union[MasterEquation, typing.Callable[[float, np.ndarray], np.ndarray]],
    rho0: typing.Union[DensityMatrix, np.ndarray],
    cfg: IntegratorConfig,
) -> Trajectory:
    """
    Integrates ``d rho / dt = rhs(t, rho)`` on the grid ``t_k = k * step``.

    Snapshots are stored every ``snapshot_stride`` steps and at the end; the
    run stops at ``t_max`` or at the first snapshot whose trace is below
    ``stop_trace``. Once the generator is stationary and small enough, the
    steps are applied in blocks with the same RK4 polynomial.
    """
    state = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    dim = state.dim
    generator = as_generator(rhs, dim)
    h = float(cfg.step if cfg.step is not None else DEFAULT_STEP)
    stride = int(cfg.snapshot_stride)
    n_total = int(math.floor(cfg.t_max / h + 1e-9))
    population_index = np.arange(dim) * (dim + 1)

    dense_from: typing.Optional[int] = None
    if cfg.dense and generator.supports_dense and math.isfinite(generator.stationary_from):
        dense_from = stride * math.ceil(generator.stationary_from / h / stride)
    logger.debug(f"propagating {generator.describe()} with step {h:g} up to t={cfg.t_max:g}")

    rho = state.elements.astype(complex)
    integral = np.zeros(dim)
    recorder = _Recorder(h, cfg.stop_trace)
    stopped = recorder.add(0, rho, integral)
    k = 0
    while not stopped and k < n_total and (dense_from is None or k < dense_from):
        for _ in range(min(stride, n_total - k)):
            new = rk4_step(generator, k * h, rho, h)
            integral += 0.5 * h * (np.real(np.diag(rho)) + np.real(np.diag(new)))
            rho = new
            k += 1
        stopped = recorder.add(k, rho, integral)

    if not stopped and k < n_total:
        logger.debug(f"stationary generator from t={k * h:g}, blocks of {stride} steps")
        blocks = _StationaryBlocks(generator.superoperator(k * h), h, population_index)
        vec = rho.ravel()
        while not stopped and k < n_total:
            n = min(stride, n_total - k)
            power, integral_rows = blocks.block(n)
            integral += np.real(integral_rows @ vec)
            vec = power @ vec
            k += n
            stopped = recorder.add(k, vec.reshape(dim, dim), integral)

    states = np.array(recorder.states)
    hermitian = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    min_eigenvalue = float(np.min(np.linalg.eigvalsh(hermitian)))
    if min_eigenvalue < -POSITIVITY_TOLERANCE:
        logger.warning(f"density matrix lost positivity: min eigenvalue {min_eigenvalue:.3g}")
    terminated_by = "stop_trace" if stopped else "t_max"
    logger.debug(f"stopped at t={recorder.times[-1]:g} ({terminated_by})")
    tail_integrals = None
    t_end = recorder.times[-1]
    if generator.supports_dense and t_end >= generator.stationary_from:
        tail_integrals = stationary_tail(generator.superoperator(t_end), recorder.states[-1])
        if not np.all(np.isfinite(tail_integrals)):
            logger.warning(
                f"part of the population never reaches the trap after t={t_end:g}"
            )
    return Trajectory(
        times=np.array(recorder.times),
        states=states,
        cumulative_population_integrals=np.array(recorder.integrals),
        step=h,
        stop_trace=cfg.stop_trace,
        terminated_by=terminated_by,
        min_eigenvalue=min_eigenvalue,
        tail_integrals=tail_integrals,
    )


def population_integral(traj: Trajectory, site: int, t_u: float) -> float:
    """
    Integral of the population of ``site`` from 0 to ``t_u``.

    Exact at stored times, linear in between.
    """
    traj.check_site(site)
    if t_u < 0:
        raise TrajectoryRangeError(f"t_u must be non-negative, got {t_u}")
    if t_u > traj.t_end * (1 + 1e-12):
        raise TrajectoryRangeError(
            f"t_u={t_u:g} is beyond the end of the run at t={traj.t_end:g}; extend t_max"
        )
    return float(np.interp(t_u, traj.times, traj.cumulative_population_integrals[:, site - 1]))


@dataclasses.dataclass(frozen=True)
class TailFit:
    """
    ``trace(t) ~ amplitude * exp(-rate * t)`` over the final decade of a run.
    """

    amplitude: float
    rate: float
    r_squared: float

    def remaining(self, t: float) -> float:
        return self.amplitude * math.exp(-self.rate * t) / self.rate


def fit_tail(traj: Trajectory) -> TailFit:
    traces = traj.traces
    trace_end = float(traces[-1])
    if trace_end >= TAIL_TRACE_LIMIT:
        raise TailFitError(
            f"trace {trace_end:.3g} at t={traj.t_end:g} is too large to extrapolate; extend t_max"
        )
    above = np.nonzero(traces > 10.0 * trace_end)[0]
    start = int(above[-1]) + 1 if len(above) else 0
    times, window = traj.times[start:], traces[start:]
    if len(window) < 3 or np.any(window <= 0):
        raise TailFitError("too few points in the final decade of the trace; extend t_max")
    log_trace = np.log(window)
    slope, intercept = np.polyfit(times, log_trace, 1)
    residual = log_trace - (slope * times + intercept)
    spread = np.sum((log_trace - log_trace.mean()) ** 2)
    r_squared = 1.0 - float(np.sum(residual**2) / spread) if spread > 0 else 0.0
    if not slope < 0 or r_squared <= TAIL_R_SQUARED:
        raise TailFitError(
            f"trace tail is not a single exponential (R^2={r_squared:.5f}); extend t_max"
        )
    return TailFit(amplitude=float(math.exp(intercept)), rate=float(-slope), r_squared=r_squared)


def tail_extrapolate(traj: Trajectory, site: int) -> float:
    """
    Estimate of the population integral of ``site`` beyond the end of the run.

    Exact for a run that ended on a stationary generator. Otherwise zero
    when the remaining trace is negligible, else the fitted exponential tail
    of the trace shared out by the site's final population.
    """
    traj.check_site(site)
    if traj.tail_integrals is not None:
        return float(traj.tail_integrals[site - 1])
    trace_end = float(traj.traces[-1])
    if trace_end < NEGLIGIBLE_TRACE:
        return 0.0
    fit = fit_tail(traj)
    share = max(float(traj.populations[-1, site - 1]), 0.0) / trace_end
    return share * fit.remaining(traj.t_end)


def tail_bound(traj: Trajectory) -> float:
    """
    Estimated integral of the whole trace beyond the end of the run.
    """
    if traj.tail_integrals is not None:
        return float(np.sum(traj.tail_integrals))
    trace_end = float(traj.traces[-1])
    if trace_end <= 0.0:
        return 0.0
    try:
        return fit_tail(traj).remaining(traj.t_end)
    except TailFitError:
        if trace_end >= TAIL_TRACE_LIMIT:
            raise
    # mean decay rate of the run so far
    rate = -math.log(trace_end) / traj.t_end
    return trace_end / rate


def preflight_step(
    chain: ChainSpec, noise: typing.Optional[NoiseSpec] = None, step: typing.Optional[float] = None
) -> float:
    """
    Largest step resolving the Bohr frequencies (``0.1 / mu_max``) and, with
    noise, the correlation times (``0.05 * tau_c``).

    Returns ``min(DEFAULT_STEP, bound)`` for ``step=None``; an explicit step
    above the bound is an error.
    """
    bound = math.inf
    eigenvalues = diagonalize(build_h0(chain)).eigenvalues
    spread = float(eigenvalues[-1] - eigenvalues[0])
    if spread > 0:
        bound = 0.1 / spread
    if noise is not None and noise.epsilon_sq > 0:
        bound = min(bound, 0.05 * float(np.min(noise.tau_c)))
    if step is None:
        return min(DEFAULT_STEP, bound)
    if step > bound * (1 + 1e-12):
        raise NumericalError(f"step {step:g} exceeds the stability bound {bound:.3g}")
    return float(step)


def self_convergence_order(
    rhs: typing.Union[MasterEquation, typing.Callable[[float, np.ndarray], np.ndarray]],
    rho0: typing.Union[DensityMatrix, np.ndarray],
    step: float,
    t_max: float,
    reference_ratio: int = 8,
) -> float:
    """
    Observed order from runs with ``step`` and ``step / 2`` against a
    reference run with ``step / reference_ratio``.
    """

    def run(divisor: int) -> np.ndarray:
        cfg = IntegratorConfig(
            step=step / divisor, t_max=t_max, stop_trace=0.0, snapshot_stride=divisor, dense=False
        )
        return propagate(rhs, rho0, cfg).states

    coarse, fine, reference = run(1), run(2), run(reference_ratio)
    n = min(len(coarse), len(fine), len(reference))
    coarse_error = np.max(np.abs(coarse[:n] - reference[:n]))
    fine_error = np.max(np.abs(fine[:n] - reference[:n]))
    return float(np.log2(coarse_error / fine_error))
