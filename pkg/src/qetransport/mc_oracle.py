import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
import scipy.linalg
import scipy.signal

from .checks import SpecificationError
from .integrator import DEFAULT_STEP, IntegratorConfig, NumericalError, Trajectory
from .model import PSD_TOLERANCE, ChainSpec, DensityMatrix, NoiseSpec, build_h0, initial_excitation
from .tcl2 import TrapMode

logger = logging.getLogger(__name__)

# noise steps drawn per trajectory at a time
NOISE_CHUNK = 4096
DEFAULT_BATCH_SIZE = 64


def psd_factor(covariance: np.ndarray) -> np.ndarray:
    """
    Lower triangular ``L`` with ``L @ L.T == covariance`` for a positive
    semidefinite, possibly singular, covariance.
    """
    eigenvalues, eigenvectors = scipy.linalg.eigh(covariance)
    if eigenvalues[0] < -PSD_TOLERANCE:
        raise SpecificationError(
            f"covariance is not positive semidefinite: eigenvalue {eigenvalues[0]:.3g}"
        )
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    (upper,) = scipy.linalg.qr(root.T, mode="r")
    return upper.T


@dataclasses.dataclass(frozen=True, eq=False)
class OuSampler:
    """
    Stationary Ornstein-Uhlenbeck process with zero-lag covariance
    ``factor @ factor.T`` and correlation time ``tau_c``.
    """

    covariance: np.ndarray
    factor: np.ndarray
    tau_c: float
    master_seed: int = 0

    @classmethod
    def from_covariance(
        cls, covariance: np.ndarray, tau_c: float, master_seed: int = 0
    ) -> "OuSampler":
        covariance = np.asarray(covariance, dtype=float)
        if not tau_c > 0:
            raise SpecificationError(f"tau_c must be positive, got {tau_c}")
        return cls(covariance, psd_factor(covariance), float(tau_c), int(master_seed))

    @classmethod
    def from_noise(cls, noise: NoiseSpec, master_seed: int = 0) -> "OuSampler":
        if not noise.has_common_tau_c:
            raise SpecificationError("the noise sampler needs one common correlation time")
        return cls.from_covariance(noise.weights, noise.tau_c[0][0], master_seed)

    @property
    def n_sites(self) -> int:
        return len(self.covariance)

    def rng(self, trajectory_seed: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.master_seed, trajectory_seed]))

    def stationary(self, rng: np.random.Generator) -> np.ndarray:
        return self.factor @ rng.standard_normal(self.n_sites)

    def advance(
        self, rng: np.random.Generator, last: np.ndarray, h: float, n_points: int
    ) -> np.ndarray:
        """
        ``n_points`` further values at spacing ``h`` after ``last``, with the
        exact update ``f' = a f + sqrt(1 - a**2) L xi``, ``a = exp(-h / tau_c)``.
        """
        decay = math.exp(-h / self.tau_c)
        spread = math.sqrt(-math.expm1(-2.0 * h / self.tau_c))
        kicks = rng.standard_normal((n_points, self.n_sites)) @ self.factor.T
        path, _ = scipy.signal.lfilter(
            [spread], [1.0, -decay], kicks, axis=0, zi=decay * np.asarray(last)[None, :]
        )
        return path


def sample_noise_path(
    sampler: OuSampler, trajectory_seed: int, h: float, t_max: float
) -> np.ndarray:
    """
    Noise values at ``t_k = k * h`` for ``k = 0 .. floor(t_max / h)``, one
    column per site.
    """
    if not h > 0:
        raise SpecificationError(f"noise step must be positive, got {h}")
    n_steps = int(math.floor(t_max / h + 1e-9))
    rng = sampler.rng(trajectory_seed)
    first = sampler.stationary(rng)
    return np.vstack([first[None, :], sampler.advance(rng, first, h, n_steps)])


@dataclasses.dataclass(frozen=True, eq=False)
class McEstimate:
    times: np.ndarray
    mean_trajectory: np.ndarray
    stderr: np.ndarray
    n_traj: int
    mean_states: np.ndarray

    def __post_init__(self) -> None:
        if self.n_traj < 2:
            raise SpecificationError(f"an estimate needs at least 2 trajectories, got {self.n_traj}")

    def as_trajectory(self, step: float) -> Trajectory:
        traj = Trajectory.from_populations(self.times, self.mean_trajectory, step=step)
        return dataclasses.replace(traj, states=self.mean_states)


@dataclasses.dataclass
class _Moments:
    count: int
    mean_states: np.ndarray
    mean_populations: np.ndarray
    m2_populations: np.ndarray

    def merge(self, other: "_Moments") -> "_Moments":
        # pairwise update of mean and sum of squared deviations
        count = self.count + other.count
        weight = other.count / count
        delta = other.mean_populations - self.mean_populations
        return _Moments(
            count=count,
            mean_states=self.mean_states + (other.mean_states - self.mean_states) * weight,
            mean_populations=self.mean_populations + delta * weight,
            m2_populations=self.m2_populations
            + other.m2_populations
            + delta**2 * self.count * other.count / count,
        )


@dataclasses.dataclass(frozen=True, eq=False)
class _BatchTask:
    """
    Propagates a batch of noise realizations side by side.
    """

    h0: np.ndarray
    kappa: float
    noise_scale: float
    sampler: OuSampler
    trap_mode: TrapMode
    rho0: np.ndarray
    step: float
    n_steps: int
    stride: int

    def derivative(self, rho: np.ndarray, f: np.ndarray) -> np.ndarray:
        out = -1j * (self.h0 @ rho - rho @ self.h0)
        out -= 1j * self.noise_scale * (f[:, :, None] - f[:, None, :]) * rho
        if self.kappa:
            last = rho.shape[1] - 1
            if self.trap_mode is TrapMode.POPULATION_ONLY:
                out[:, last, last] -= self.kappa * rho[:, last, last]
            else:
                out[:, last, :] -= 0.5 * self.kappa * rho[:, last, :]
                out[:, :, last] -= 0.5 * self.kappa * rho[:, :, last]
        return out

    def __call__(self, indices: typing.Sequence[int]) -> _Moments:
        h = self.step
        rngs = [self.sampler.rng(index) for index in indices]
        last = np.stack([self.sampler.stationary(rng) for rng in rngs])
        rho = np.repeat(self.rho0[None, :, :], len(indices), axis=0)
        snapshots = [rho.copy()]
        k = 0
        while k < self.n_steps:
            chunk = min(NOISE_CHUNK, self.n_steps - k)
            # noise on the half-step grid, starting at t_k
            ahead = np.stack(
                [self.sampler.advance(rng, f, 0.5 * h, 2 * chunk) for rng, f in zip(rngs, last)]
            )
            path = np.concatenate([last[:, None, :], ahead], axis=1)
            for s in range(chunk):
                f0, f_mid, f1 = path[:, 2 * s], path[:, 2 * s + 1], path[:, 2 * s + 2]
                k1 = self.derivative(rho, f0)
                k2 = self.derivative(rho + 0.5 * h * k1, f_mid)
                k3 = self.derivative(rho + 0.5 * h * k2, f_mid)
                k4 = self.derivative(rho + h * k3, f1)
                rho = rho + h * (k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6)
                k += 1
                if k % self.stride == 0 or k == self.n_steps:
                    if not np.all(np.isfinite(rho)):
                        raise NumericalError(f"non-finite noisy trajectory at t={k * h:g}")
                    snapshots.append(rho.copy())
            last = path[:, -1]
        states = np.stack(snapshots, axis=1)
        populations = np.real(np.einsum("bkaa->bka", states))
        mean_populations = populations.mean(axis=0)
        return _Moments(
            count=len(indices),
            mean_states=states.mean(axis=0),
            mean_populations=mean_populations,
            m2_populations=((populations - mean_populations) ** 2).sum(axis=0),
        )


def snapshot_times(step: float, n_steps: int, stride: int) -> np.ndarray:
    stored = list(range(0, n_steps + 1, stride))
    if stored[-1] != n_steps:
        stored.append(n_steps)
    return np.array(stored) * step


def mc_average(
    chain: ChainSpec,
    noise: NoiseSpec,
    n_traj: int,
    seed: int,
    cfg: IntegratorConfig,
    trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
    jobs: int = 1,
    batch_size: int = DEFAULT_BATCH_SIZE,
    rho0: typing.Optional[DensityMatrix] = None,
) -> McEstimate:
    """
    Average of ``n_traj`` stochastic Liouville trajectories with site
    energies ``omega_n + sqrt(epsilon_sq) * f_n(t)``.

    The grid follows ``cfg`` (step, ``t_max``, snapshot stride); the run is
    never cut short on the trace. Trajectory ``k`` draws its noise from a
    generator seeded by ``(seed, k)``, so batching and the number of workers
    do not change the result.
    """
    if n_traj < 2:
        raise SpecificationError(f"n_traj must be at least 2, got {n_traj}")
    if chain.n_sites != noise.n_sites:
        raise SpecificationError(f"chain has {chain.n_sites} sites, noise has {noise.n_sites}")
    sampler = OuSampler.from_noise(noise, master_seed=seed)
    if rho0 is None:
        rho0 = initial_excitation(1, chain.n_sites)
    step = float(cfg.step if cfg.step is not None else DEFAULT_STEP)
    n_steps = int(math.floor(cfg.t_max / step + 1e-9))
    task = _BatchTask(
        h0=build_h0(chain),
        kappa=chain.kappa,
        noise_scale=math.sqrt(noise.epsilon_sq),
        sampler=sampler,
        trap_mode=TrapMode(trap_mode),
        rho0=rho0.elements.astype(complex),
        step=step,
        n_steps=n_steps,
        stride=int(cfg.snapshot_stride),
    )
    batches = [range(start, min(start + batch_size, n_traj)) for start in range(0, n_traj, batch_size)]
    logger.info(f"averaging {n_traj} noisy trajectories in {len(batches)} batches, {jobs} workers")
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, batches))
    else:
        results = [task(batch) for batch in batches]

    total = results[0]
    for moments in results[1:]:
        total = total.merge(moments)
    variance = total.m2_populations / (total.count - 1)
    return McEstimate(
        times=snapshot_times(step, n_steps, task.stride),
        mean_trajectory=total.mean_populations,
        stderr=np.sqrt(variance / total.count),
        n_traj=total.count,
        mean_states=total.mean_states,
    )


@dataclasses.dataclass(frozen=True)
class ComparisonReport:
    max_deviation: typing.Tuple[float, ...]
    max_stderr: typing.Tuple[float, ...]
    worst_ratio: float
    tolerance: float
    n_traj: int
    passed: bool

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        values = dataclasses.asdict(self)
        values["max_deviation"] = list(self.max_deviation)
        values["max_stderr"] = list(self.max_stderr)
        return values


def compare_to_reference(
    estimate: McEstimate, reference: Trajectory, tolerance: float = 0.01
) -> ComparisonReport:
    """
    Pass when every population stays within ``max(3 * stderr, tolerance)`` of
    the reference over the common time range.
    """
    if reference.n_sites != estimate.mean_trajectory.shape[1]:
        raise SpecificationError("estimate and reference have different numbers of sites")
    common = estimate.times <= reference.t_end * (1 + 1e-12)
    times = estimate.times[common]
    expected = np.column_stack(
        [np.interp(times, reference.times, reference.populations[:, n]) for n in range(reference.n_sites)]
    )
    deviation = np.abs(estimate.mean_trajectory[common] - expected)
    stderr = estimate.stderr[common]
    envelope = np.maximum(3.0 * stderr, tolerance)
    return ComparisonReport(
        max_deviation=tuple(float(x) for x in deviation.max(axis=0)),
        max_stderr=tuple(float(x) for x in stderr.max(axis=0)),
        worst_ratio=float(np.max(deviation / envelope)),
        tolerance=float(tolerance),
        n_traj=estimate.n_traj,
        passed=bool(np.all(deviation <= envelope)),
    )
