import math

import numpy as np
import pytest

from qetransport.checks import SpecificationError
from qetransport.integrator import (
    IntegratorConfig,
    NotConvergedError,
    Trajectory,
    TrajectoryRangeError,
    propagate,
)
from qetransport.measures import (
    average_trapping_time,
    eta,
    peak,
    quantum_yield,
    transport_measures,
)
from qetransport.model import ChainSpec, NoiseSpec, initial_excitation
from qetransport.tcl2 import Tcl2Generator

KAPPA = 0.005


def trapped_decay(t_end: float, terminated_by: str = "t_max") -> Trajectory:
    times = np.arange(0.0, t_end + 0.5, 1.0)
    populations = np.column_stack([np.zeros_like(times), np.exp(-KAPPA * times)])
    return Trajectory.from_populations(times, populations, terminated_by=terminated_by)


def test_average_trapping_time() -> None:
    complete = average_trapping_time(trapped_decay(4000.0), KAPPA)
    assert complete.tau_n[0] == 0.0
    assert complete.avg_trapping_time == pytest.approx(1.0 / KAPPA, rel=1e-5)
    assert complete.avg_minus_offset == pytest.approx(0.0, abs=2e-3)
    assert complete.tail_bound < 1e-3

    # the missing tail of a shorter run is extrapolated
    truncated = average_trapping_time(trapped_decay(2000.0), KAPPA)
    assert truncated.avg_trapping_time == pytest.approx(1.0 / KAPPA, rel=1e-5)
    assert truncated.tail_bound == pytest.approx(math.exp(-10.0) / KAPPA, rel=1e-2)

    with pytest.raises(NotConvergedError, match="trap"):
        average_trapping_time(trapped_decay(100.0), 0.0)


def test_eta() -> None:
    traj = trapped_decay(2000.0)
    assert eta(traj, 2000.0, KAPPA) == pytest.approx(1.0 - math.exp(-10.0), rel=1e-5)
    assert eta(traj, 0.0, KAPPA) == 0.0

    with pytest.raises(TrajectoryRangeError, match="extend t_max"):
        eta(trapped_decay(1000.0), 2000.0, KAPPA)
    # a run that drained its trace is complete
    stopped = trapped_decay(1000.0, terminated_by="stop_trace")
    assert eta(stopped, 2000.0, KAPPA) == pytest.approx(1.0 - math.exp(-5.0), rel=1e-5)


def test_quantum_yield() -> None:
    assert quantum_yield(200.0, 0.0) == 1.0
    assert quantum_yield(200.0, 1e-3) == pytest.approx(1.0 / 1.2)
    with pytest.raises(SpecificationError, match="k_d"):
        quantum_yield(200.0, -1.0)


def test_peak() -> None:
    times = np.arange(0.0, 11.0)
    bump = 0.5 - 0.01 * (times - 3.3) ** 2
    traj = Trajectory.from_populations(times, np.column_stack([1.0 - bump, bump]))
    arrival = peak(traj, 2)
    assert arrival.time == pytest.approx(3.3)
    assert arrival.value == pytest.approx(0.5)
    assert not arrival.at_boundary

    decaying = peak(trapped_decay(10.0), 2)
    assert decaying.time == 0.0
    assert decaying.value == 1.0
    assert decaying.at_boundary

    with pytest.raises(SpecificationError, match="out of range"):
        peak(traj, 0)


def test_transport_measures() -> None:
    measures = transport_measures(trapped_decay(2000.0), KAPPA, t_u=1000.0, k_d=1e-3)
    assert measures.t_u == 1000.0
    assert measures.eta == pytest.approx(1.0 - math.exp(-5.0), rel=1e-5)
    assert measures.quantum_yield == pytest.approx(1.0 / 1.2, rel=1e-5)
    assert measures.peak_at_boundary

    values = measures.to_dict()
    assert isinstance(values["tau_n"], list)
    assert set(values) >= {"avg_trapping_time", "eta", "quantum_yield", "peak_time", "tail_bound"}


def test_population_that_never_traps() -> None:
    # fully correlated homogeneous noise only shifts the whole chain, site 1 keeps a share forever
    chain = ChainSpec.nearest_neighbour((1.5, 0.5), 0.1, kappa=KAPPA)
    generator = Tcl2Generator(chain, NoiseSpec.homogeneous(2, c=1.0, tau_c=1.0))
    traj = propagate(generator, initial_excitation(1, 2), IntegratorConfig(step=0.01, t_max=100.0))

    measures = transport_measures(traj, KAPPA, t_u=100.0, k_d=1e-3)
    assert math.isinf(measures.avg_trapping_time)
    assert math.isinf(measures.avg_minus_offset)
    assert math.isinf(measures.tau_n[0])
    assert measures.quantum_yield == 0.0
    assert 0.0 < measures.eta < 1.0

    assert quantum_yield(math.inf, 0.0) == 1.0


def test_eta_grows_with_t_u() -> None:
    chain = ChainSpec.nearest_neighbour((1.5, 0.5), 0.1, kappa=KAPPA)
    generator = Tcl2Generator(chain, NoiseSpec.homogeneous(2, c=-1.0, tau_c=1.0))
    cfg = IntegratorConfig(step=0.01, t_max=300.0, stop_trace=0.0, snapshot_stride=10)
    traj = propagate(generator, initial_excitation(1, 2), cfg)

    # off the snapshot grid as well
    t_u = np.linspace(0.0, 300.0, 487)
    ratios = np.array([eta(traj, float(t), KAPPA) for t in t_u])
    assert ratios[0] == 0.0
    assert np.all(np.diff(ratios) >= -1e-15)
    assert 0.0 < ratios[-1] < 1.0

    values = [eta(trapped_decay(2000.0), t, KAPPA) for t in (10.0, 100.0, 1000.0, 2000.0)]
    assert values == sorted(values)
