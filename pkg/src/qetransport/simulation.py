import dataclasses
import logging
import typing

from .config import RunConfig
from .generator import MasterEquation
from .integrator import (
    NotConvergedError,
    Trajectory,
    preflight_step,
    propagate,
)
from .lindblad_ref import LindbladGenerator
from .measures import TransportMeasures, transport_measures
from .mc_oracle import ComparisonReport, McEstimate, compare_to_reference, mc_average
from .model import initial_excitation
from .tcl2 import Tcl2Generator

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class SimulationResult:
    config: RunConfig
    trajectory: Trajectory
    measures: typing.Optional[TransportMeasures]
    error: typing.Optional[str] = None


def build_generator(config: RunConfig) -> MasterEquation:
    if config.engine == "lindblad":
        return LindbladGenerator.white_noise_limit(config.chain, config.noise, config.trap_mode)
    return Tcl2Generator(config.chain, config.noise, config.trap_mode)


def resolve_step(config: RunConfig) -> float:
    noise = config.noise if config.engine == "tcl2" else None
    return preflight_step(config.chain, noise, config.integrator.step)


def run_simulation(config: RunConfig) -> SimulationResult:
    """
    Propagates the configured chain and evaluates the measures.

    A run whose population did not leave the chain still returns its
    trajectory, with ``measures`` None and the reason in ``error``.
    """
    generator = build_generator(config)
    step = resolve_step(config)
    logger.info(f"{generator.describe()}, step {step:g}")
    trajectory = propagate(
        generator,
        initial_excitation(config.initial_site, config.chain.n_sites),
        config.integrator.with_step(step),
    )
    logger.info(f"run ended at t={trajectory.t_end:g} ({trajectory.terminated_by})")
    try:
        measures = transport_measures(
            trajectory, config.chain.kappa, t_u=config.measures.t_u, k_d=config.measures.k_d
        )
    except NotConvergedError as error:
        logger.warning(f"no transport measures: {error}")
        return SimulationResult(config, trajectory, None, str(error))
    return SimulationResult(config, trajectory, measures)


def oracle_config(config: RunConfig) -> RunConfig:
    """
    The configuration on the oracle horizon, never stopped on the trace.
    """
    integrator = dataclasses.replace(
        config.integrator,
        step=resolve_step(config),
        t_max=config.oracle.t_max,
        stop_trace=0.0,
    )
    return dataclasses.replace(config, integrator=integrator)


def run_oracle(config: RunConfig, jobs: int = 1) -> McEstimate:
    config = oracle_config(config)
    noise = config.noise
    if config.oracle.epsilon_sq is not None:
        noise = dataclasses.replace(noise, epsilon_sq=config.oracle.epsilon_sq)
    return mc_average(
        config.chain,
        noise,
        n_traj=config.oracle.n_traj,
        seed=config.oracle.seed,
        cfg=config.integrator,
        trap_mode=config.trap_mode,
        jobs=jobs,
        batch_size=config.oracle.batch_size,
        rho0=initial_excitation(config.initial_site, config.chain.n_sites),
    )


def run_compare(
    config: RunConfig, jobs: int = 1
) -> typing.Tuple[McEstimate, Trajectory, ComparisonReport]:
    """
    Monte-Carlo average against the configured engine on the same grid.
    """
    config = oracle_config(config)
    estimate = run_oracle(config, jobs=jobs)
    reference = propagate(
        build_generator(config),
        initial_excitation(config.initial_site, config.chain.n_sites),
        config.integrator,
    )
    report = compare_to_reference(estimate, reference, tolerance=config.oracle.tolerance)
    verdict = "pass" if report.passed else "fail"
    logger.info(f"oracle comparison: {verdict} (worst deviation/envelope {report.worst_ratio:.3g})")
    return estimate, reference, report
