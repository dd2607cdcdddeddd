import dataclasses
import typing

import numpy as np

from .checks import SpecificationError
from .generator import MasterEquation
from .kernel import white_noise_rates
from .model import ChainSpec, NoiseSpec, build_h0
from .tcl2 import TrapMode, commutator_superoperator, trap_superoperator, trap_term

RateLike = typing.Union[float, np.ndarray]


@dataclasses.dataclass(frozen=True)
class MarkovCoefficients:
    f1_inf: complex
    f2_inf: float
    gamma: float


def markov_coefficients(
    omega1: float,
    omega2: float,
    v12: float,
    delta: float,
    tau_c: float,
    c: float = 0.0,
) -> MarkovCoefficients:
    """
    Long-time values of the two-site coefficients for homogeneous noise, and
    the dephasing rate of their ``tau_c -> 0`` limit at fixed
    ``delta**2 * tau_c``. Everything scales with ``1 - c``.
    """
    if not -1.0 <= c <= 1.0:
        raise SpecificationError(f"c must be in [-1, 1], got {c}")
    detuning = omega1 - omega2
    mu_sq = detuning**2 + 4.0 * v12**2
    scale = 2.0 * delta**2 * (1.0 - c)
    denominator = 1.0 + mu_sq * tau_c**2
    f1 = -scale * (v12 * detuning * tau_c**3 - 1j * v12 * tau_c**2) / denominator
    f2 = scale * (tau_c + detuning**2 * tau_c**3) / denominator
    return MarkovCoefficients(f1_inf=complex(f1), f2_inf=float(f2), gamma=scale * tau_c)


def _rate_matrix(gamma: RateLike, dim: int) -> np.ndarray:
    if np.ndim(gamma) == 0:
        if not float(gamma) >= 0:
            raise SpecificationError(f"dephasing rate must be non-negative, got {gamma}")
        return float(gamma) * np.eye(dim)
    rates = np.asarray(gamma, dtype=float)
    if rates.shape != (dim, dim):
        raise SpecificationError(f"rate matrix shape {rates.shape} does not match {dim} sites")
    if not np.array_equal(rates, rates.T):
        raise SpecificationError("rate matrix must be symmetric")
    return rates


def coherence_decay(gamma: RateLike, dim: int) -> np.ndarray:
    """
    ``d[a, b]``: decay rate of ``rho_ab`` from the dephasing alone.
    """
    rates = _rate_matrix(gamma, dim)
    on_site = np.diag(rates)
    return 0.5 * (on_site[:, None] + on_site[None, :]) - rates


def lindblad_rhs(
    rho: np.ndarray,
    h0: np.ndarray,
    gamma: RateLike,
    kappa: float,
    trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
) -> np.ndarray:
    rho = np.asarray(rho)
    out = -1j * (h0 @ rho - rho @ h0)
    out -= coherence_decay(gamma, len(h0)) * rho
    out += trap_term(rho, kappa, TrapMode(trap_mode))
    return out


class LindbladGenerator(MasterEquation):
    """
    Time-independent Lindblad engine, a drop-in for ``Tcl2Generator``.
    """

    def __init__(
        self,
        chain: ChainSpec,
        gamma: RateLike,
        trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
    ):
        self.chain = chain
        self.dim = chain.n_sites
        self.h0 = build_h0(chain)
        self.gamma = _rate_matrix(gamma, self.dim)
        self.trap_mode = TrapMode(trap_mode)
        super().__init__()

    @classmethod
    def white_noise_limit(
        cls,
        chain: ChainSpec,
        noise: NoiseSpec,
        trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
    ) -> "LindbladGenerator":
        return cls(chain, white_noise_rates(noise), trap_mode)

    def describe(self) -> str:
        return f"Lindblad dephasing, {self.dim} sites, trap {self.trap_mode.value}"

    @property
    def stationary_from(self) -> float:
        return 0.0

    def derivative(self, t: float, rho: np.ndarray) -> np.ndarray:
        return lindblad_rhs(rho, self.h0, self.gamma, self.chain.kappa, self.trap_mode)

    def superoperator(self, t: float) -> np.ndarray:
        matrix = commutator_superoperator(self.h0)
        matrix += trap_superoperator(self.dim, self.chain.kappa, self.trap_mode)
        matrix -= np.diag(coherence_decay(self.gamma, self.dim).ravel())
        return matrix


def _pair_decay(
    chain: ChainSpec, gamma: RateLike, trap_mode: typing.Union[TrapMode, str]
) -> np.ndarray:
    decay = coherence_decay(gamma, chain.n_sites)
    if TrapMode(trap_mode) is TrapMode.LINDBLAD_TRAP:
        last = chain.n_sites - 1
        decay[last, :] += 0.5 * chain.kappa
        decay[:, last] += 0.5 * chain.kappa
    return decay


def stationary_coherence(
    populations: typing.Sequence[float],
    chain: ChainSpec,
    gamma: RateLike,
    trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
) -> np.ndarray:
    """
    Coherences that make each ``d rho_nm / dt`` vanish for fixed populations,
    ``rho_nm = i V_nm (p_n - p_m) / (d_nm + i (omega_n - omega_m))``,
    neglecting coherences between other pairs.
    """
    p = np.asarray(populations, dtype=float)
    omega = chain.omega_array
    detuning = omega[:, None] - omega[None, :]
    denominator = _pair_decay(chain, gamma, trap_mode) + 1j * detuning
    v = chain.v_array
    coupled = v != 0
    if np.any(coupled & (denominator == 0)):
        raise SpecificationError("resonant undamped pair has no stationary coherence")
    result = np.zeros((chain.n_sites, chain.n_sites), dtype=complex)
    numerator = 1j * v * (p[:, None] - p[None, :])
    result[coupled] = numerator[coupled] / denominator[coupled]
    result[np.diag_indices(chain.n_sites)] = p
    return result


def hopping_rates(
    chain: ChainSpec,
    gamma: RateLike,
    trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
) -> np.ndarray:
    """
    ``k_nm = 2 V_nm**2 d_nm / (d_nm**2 + (omega_n - omega_m)**2)``.
    """
    decay = _pair_decay(chain, gamma, trap_mode)
    omega = chain.omega_array
    detuning = omega[:, None] - omega[None, :]
    v = chain.v_array
    denominator = decay**2 + detuning**2
    coupled = v != 0
    if np.any(coupled & (denominator == 0)):
        raise SpecificationError("resonant undamped pair has no hopping rate")
    rates = np.zeros_like(v)
    rates[coupled] = 2.0 * v[coupled] ** 2 * decay[coupled] / denominator[coupled]
    return rates


def reduced_rate_equation(
    populations: typing.Sequence[float],
    chain: ChainSpec,
    gamma: RateLike,
    trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
) -> np.ndarray:
    """
    Population rate equation after the stationary-coherence substitution,
    ``dp_n/dt = sum_m k_nm (p_m - p_n) - kappa p_N delta_nN``.
    """
    p = np.asarray(populations, dtype=float)
    rates = hopping_rates(chain, gamma, trap_mode)
    out = rates @ p - rates.sum(axis=1) * p
    out[-1] -= chain.kappa * p[-1]
    return out


def white_noise_gamma(noise: NoiseSpec) -> float:
    """
    Uncorrelated-equivalent scalar rate of homogeneous two-site noise,
    ``epsilon_sq * (1 - c) * 2 * delta**2 * tau_c``.
    """
    if noise.n_sites != 2:
        raise SpecificationError("a scalar rate is defined for two sites only")
    return float(coherence_decay(white_noise_rates(noise), 2)[0, 1])
