# todo: derive from pyproject.toml once the build moves to setuptools_scm
__version__ = "0.1.0"

from .checks import SpecificationError  # noqa: E402
from .config import ConfigError, RunConfig, load_config, parse_config  # noqa: E402
from .integrator import (  # noqa: E402
    IntegratorConfig,
    NotConvergedError,
    NumericalError,
    TailFitError,
    Trajectory,
    TrajectoryRangeError,
    propagate,
)
from .kernel import correlation, gamma_integral, phi_difference  # noqa: E402
from .lindblad_ref import (  # noqa: E402
    LindbladGenerator,
    lindblad_rhs,
    markov_coefficients,
    reduced_rate_equation,
)
from .mc_oracle import McEstimate, compare_to_reference, mc_average  # noqa: E402
from .measures import (  # noqa: E402
    TransportMeasures,
    average_trapping_time,
    eta,
    peak,
    quantum_yield,
    transport_measures,
)
from .model import (  # noqa: E402
    ChainSpec,
    DensityMatrix,
    NonRealizableCovarianceWarning,
    NoiseSpec,
    build_h0,
    diagonalize,
    initial_excitation,
    validate_covariance,
)
from .simulation import run_simulation  # noqa: E402
from .tcl2 import Tcl2Generator, TrapMode, two_site_rhs  # noqa: E402

# The command line lives in `qetransport.cli`, sweeps in `qetransport.sweep`,
# figures in `qetransport.plotting`; those are not re-exported here.

__all__ = [
    # model
    "ChainSpec",
    "DensityMatrix",
    "NoiseSpec",
    "build_h0",
    "diagonalize",
    "initial_excitation",
    "validate_covariance",
    # noise kernel
    "correlation",
    "gamma_integral",
    "phi_difference",
    # engines
    "LindbladGenerator",
    "Tcl2Generator",
    "TrapMode",
    "lindblad_rhs",
    "markov_coefficients",
    "reduced_rate_equation",
    "two_site_rhs",
    # propagation and measures
    "IntegratorConfig",
    "Trajectory",
    "TransportMeasures",
    "average_trapping_time",
    "eta",
    "peak",
    "propagate",
    "quantum_yield",
    "transport_measures",
    # oracle
    "McEstimate",
    "compare_to_reference",
    "mc_average",
    # configuration
    "RunConfig",
    "load_config",
    "parse_config",
    "run_simulation",
    # errors and warnings
    "ConfigError",
    "NonRealizableCovarianceWarning",
    "NotConvergedError",
    "NumericalError",
    "SpecificationError",
    "TailFitError",
    "TrajectoryRangeError",
    "__version__",
]
