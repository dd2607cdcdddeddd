import dataclasses
import math
import typing

import numpy as np

from .checks import SpecificationError
from .integrator import (
    NotConvergedError,
    Trajectory,
    population_integral,
    tail_bound,
    tail_extrapolate,
)

DEFAULT_T_U = 2000.0


@dataclasses.dataclass(frozen=True)
class YieldParams:
    """
    Uniform recombination rate ``k_d``, meant to be much smaller than the
    trap rate.
    """

    k_d: float = 0.0

    def __post_init__(self) -> None:
        if not self.k_d >= 0:
            raise SpecificationError(f"k_d must be non-negative, got {self.k_d}")


@dataclasses.dataclass(frozen=True)
class Peak:
    time: float
    value: float
    at_boundary: bool


@dataclasses.dataclass(frozen=True)
class TrappingTimes:
    tau_n: typing.Tuple[float, ...]
    avg_trapping_time: float
    avg_minus_offset: float
    tail_bound: float


@dataclasses.dataclass(frozen=True)
class TransportMeasures:
    tau_n: typing.Tuple[float, ...]
    avg_trapping_time: float
    avg_minus_offset: float
    eta: float
    t_u: float
    quantum_yield: float
    peak_time: float
    peak_value: float
    peak_at_boundary: bool
    tail_bound: float
    min_eigenvalue: float

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        values = dataclasses.asdict(self)
        values["tau_n"] = list(self.tau_n)
        return values


def average_trapping_time(traj: Trajectory, kappa: float) -> TrappingTimes:
    """
    ``tau_n`` is the population integral of site ``n`` to infinity, the run
    plus its extrapolated tail; ``<t> = sum(tau_n)``. Infinite when part of
    the population never reaches the trap.
    """
    if not kappa > 0:
        raise NotConvergedError("without a trap the population never leaves the chain")
    tau_n = tuple(
        float(traj.cumulative_population_integrals[-1, n]) + tail_extrapolate(traj, n + 1)
        for n in range(traj.n_sites)
    )
    total = math.fsum(tau_n)
    return TrappingTimes(
        tau_n=tau_n,
        avg_trapping_time=total,
        avg_minus_offset=total - 1.0 / kappa,
        tail_bound=tail_bound(traj),
    )


def eta(traj: Trajectory, t_u: float, kappa: float) -> float:
    """
    Transported ratio ``kappa * int_0^t_u rho_NN dt``.

    A run that stopped on its trace before ``t_u`` counts as complete.
    """
    if t_u > traj.t_end and traj.terminated_by == "stop_trace":
        t_u = traj.t_end
    return kappa * population_integral(traj, traj.n_sites, t_u)


def quantum_yield(avg_trapping_time: float, k_d: float) -> float:
    YieldParams(k_d=k_d)
    if k_d == 0.0:
        return 1.0
    return 1.0 / (1.0 + k_d * avg_trapping_time)


def peak(traj: Trajectory, site: int) -> Peak:
    """
    Maximum of the population of ``site``, refined by a parabola through the
    three snapshots around the largest stored value.
    """
    traj.check_site(site)
    series = traj.populations[:, site - 1]
    k = int(np.argmax(series))
    if k == 0 or k == len(series) - 1:
        return Peak(time=float(traj.times[k]), value=float(series[k]), at_boundary=True)
    offsets = traj.times[k - 1 : k + 2] - traj.times[k]
    a, b, c = np.polyfit(offsets, series[k - 1 : k + 2], 2)
    if not a < 0:
        return Peak(time=float(traj.times[k]), value=float(series[k]), at_boundary=False)
    vertex = float(np.clip(-b / (2 * a), offsets[0], offsets[-1]))
    return Peak(
        time=float(traj.times[k] + vertex),
        value=float(max(np.polyval([a, b, c], vertex), series[k])),
        at_boundary=False,
    )


def transport_measures(
    traj: Trajectory,
    kappa: float,
    t_u: float = DEFAULT_T_U,
    k_d: float = 0.0,
) -> TransportMeasures:
    times = average_trapping_time(traj, kappa)
    arrival = peak(traj, traj.n_sites)
    return TransportMeasures(
        tau_n=times.tau_n,
        avg_trapping_time=times.avg_trapping_time,
        avg_minus_offset=times.avg_minus_offset,
        eta=eta(traj, t_u, kappa),
        t_u=float(t_u),
        quantum_yield=quantum_yield(times.avg_trapping_time, k_d),
        peak_time=arrival.time,
        peak_value=arrival.value,
        peak_at_boundary=arrival.at_boundary,
        tail_bound=times.tail_bound,
        min_eigenvalue=float(traj.min_eigenvalue),
    )
