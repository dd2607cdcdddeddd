import dataclasses
import enum
import logging
import math
import typing

import numpy as np

from .checks import SpecificationError
from .generator import MasterEquation
from .kernel import ASYMPTOTIC_EXPONENT, gamma_integral, phi_terms
from .model import (
    ChainSpec,
    DensityMatrix,
    NoiseSpec,
    SpectralDecomposition,
    build_h0,
    diagonalize,
    warn_if_not_realizable,
)

logger = logging.getLogger(__name__)


class TrapMode(str, enum.Enum):
    """
    ``population_only`` drains only the last population (the literal two-site
    equations); ``lindblad_trap`` also damps the coherences of the last site
    at ``kappa / 2``.
    """

    POPULATION_ONLY = "population_only"
    LINDBLAD_TRAP = "lindblad_trap"


def trap_term(rho: np.ndarray, kappa: float, mode: TrapMode) -> np.ndarray:
    out = np.zeros_like(rho, dtype=complex)
    if kappa == 0.0:
        return out
    last = rho.shape[0] - 1
    if TrapMode(mode) is TrapMode.POPULATION_ONLY:
        out[last, last] = -kappa * rho[last, last]
    else:
        # -(kappa / 2) {|N><N|, rho}
        out[last, :] -= 0.5 * kappa * rho[last, :]
        out[:, last] -= 0.5 * kappa * rho[:, last]
    return out


def trap_superoperator(dim: int, kappa: float, mode: TrapMode) -> np.ndarray:
    size = dim * dim
    last = dim - 1
    if TrapMode(mode) is TrapMode.POPULATION_ONLY:
        matrix = np.zeros((size, size), dtype=complex)
        matrix[last * dim + last, last * dim + last] = -kappa
        return matrix
    projector = np.zeros((dim, dim))
    projector[last, last] = 1.0
    identity = np.eye(dim)
    return -0.5 * kappa * (np.kron(projector, identity) + np.kron(identity, projector))


def commutator_superoperator(h: np.ndarray) -> np.ndarray:
    """
    ``-i [h, .]`` on row-major flattened matrices.
    """
    identity = np.eye(h.shape[0])
    return -1j * (np.kron(h, identity) - np.kron(identity, h.T))


class Tcl2Generator(MasterEquation):
    """
    Time-dependent generator of the second order TCL master equation with
    the dissipator

        -epsilon_sq * sum_{n,m} [A_n, [B_nm(t), rho]],
        B_nm(t) = int_0^t C_nm(s) exp(-i H0 s) A_m exp(i H0 s) ds,

    for site projectors ``A_n``; in the eigenbasis of ``H0`` every element of
    ``B_nm`` is a ``gamma_integral``.

    Immutable after construction apart from a one-entry cache of the
    dissipator operators; ``derivative`` is a pure function of ``(t, rho)``.
    """

    def __init__(
        self,
        chain: ChainSpec,
        noise: NoiseSpec,
        trap_mode: typing.Union[TrapMode, str] = TrapMode.POPULATION_ONLY,
    ):
        if chain.n_sites != noise.n_sites:
            raise SpecificationError(
                f"chain has {chain.n_sites} sites, noise has {noise.n_sites}"
            )
        self.chain = chain
        self.noise = noise
        self.trap_mode = TrapMode(trap_mode)
        self.dim = chain.n_sites
        self.h0 = build_h0(chain)
        self.spectral: SpectralDecomposition = diagonalize(self.h0)
        u = self.spectral.eigenvectors
        # projectors[m] is |m><m| in the eigenbasis of h0
        self.projectors = np.einsum("ma,mb->mab", u, u)
        self._gaps = self.spectral.gaps
        self._rate_groups = self._group_by_rate(noise)
        self._weighted_projectors = {
            rate: np.einsum("nm,mab->nab", weights, self.projectors)
            for rate, weights in self._rate_groups
        }
        self._last_operators: typing.Tuple[float, typing.Any] = (-1.0, None)
        warn_if_not_realizable(noise)
        super().__init__()

    @staticmethod
    def _group_by_rate(
        noise: NoiseSpec,
    ) -> typing.List[typing.Tuple[float, np.ndarray]]:
        # one gamma_integral matrix per distinct correlation time
        if noise.epsilon_sq == 0.0:
            return []
        weights = noise.weights
        rates = noise.rates
        groups = []
        for rate in np.unique(rates):
            masked = np.where(rates == rate, weights, 0.0)
            if np.any(masked != 0.0):
                groups.append((float(rate), masked))
        return groups

    def describe(self) -> str:
        return (
            f"TCL2 generator, {self.dim} sites, epsilon_sq={self.noise.epsilon_sq:g}, "
            f"trap {self.trap_mode.value}"
        )

    @property
    def stationary_from(self) -> float:
        if not self._rate_groups:
            return 0.0
        slowest = min(rate for rate, _ in self._rate_groups)
        return ASYMPTOTIC_EXPONENT / slowest

    def site_projector_sum(self) -> np.ndarray:
        """
        Sum of the site projectors in the eigenbasis (the identity).
        """
        return self.projectors.sum(axis=0)

    def dissipator_operators(self, t: float) -> np.ndarray:
        """
        ``Lambda_n(t) = sum_m B_nm(t)`` in the site basis, stacked over ``n``.
        """
        # RK4 evaluates the two midpoint stages at the same time
        cached_t, cached = self._last_operators
        if cached_t == t:
            return cached
        u = self.spectral.eigenvectors
        lam = np.zeros((self.dim, self.dim, self.dim), dtype=complex)
        for rate, weights in self._rate_groups:
            g = gamma_integral(rate, self._gaps, t)
            lam += self._weighted_projectors[rate] * g
        lam = u @ lam @ u.T
        self._last_operators = (t, lam)
        return lam

    def dissipator(self, t: float, rho: np.ndarray) -> np.ndarray:
        if not self._rate_groups:
            return np.zeros_like(rho, dtype=complex)
        lam = self.dissipator_operators(t)
        inner = lam @ rho - rho @ lam
        # [A_n, X_n]_ab = X_a[a, b] - X_b[a, b]
        outer = np.einsum("aab->ab", inner) - np.einsum("bab->ab", inner)
        return -self.noise.epsilon_sq * outer

    def derivative(self, t: float, rho: np.ndarray) -> np.ndarray:
        if t < 0:
            raise SpecificationError(f"generator evaluated at negative time {t}")
        if rho.shape != (self.dim, self.dim):
            raise SpecificationError(
                f"state shape {rho.shape} does not match {self.dim} sites"
            )
        out = -1j * (self.h0 @ rho - rho @ self.h0)
        out += trap_term(rho, self.chain.kappa, self.trap_mode)
        out += self.dissipator(t, rho)
        return out

    def superoperator(self, t: float) -> np.ndarray:
        if t < 0:
            raise SpecificationError(f"generator evaluated at negative time {t}")
        matrix = commutator_superoperator(self.h0)
        matrix += trap_superoperator(self.dim, self.chain.kappa, self.trap_mode)
        if not self._rate_groups:
            return matrix
        identity = np.eye(self.dim)
        dissipative = np.zeros_like(matrix)
        for n, lam in enumerate(self.dissipator_operators(t)):
            projector = np.zeros((self.dim, self.dim))
            projector[n, n] = 1.0
            # [A, [L, rho]] = A L rho - A rho L - L rho A + rho L A
            dissipative += (
                np.kron(projector @ lam, identity)
                - np.kron(projector, lam.T)
                - np.kron(lam, projector)
                + np.kron(identity, (lam @ projector).T)
            )
        return matrix - self.noise.epsilon_sq * dissipative


def apply_generator(
    gen: Tcl2Generator, t: float, rho: typing.Union[DensityMatrix, np.ndarray]
) -> np.ndarray:
    """
    Time derivative of ``rho`` under ``gen`` at time ``t``.
    """
    elements = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return gen.derivative(t, elements.astype(complex, copy=False))


@dataclasses.dataclass(frozen=True)
class TwoSiteCoefficients:
    mu: float
    f1: complex
    f2: float


def _two_site_integrals(
    omega1: float, omega2: float, v12: float, noise: NoiseSpec, t: float
) -> TwoSiteCoefficients:
    if t < 0:
        raise SpecificationError(f"coefficients evaluated at negative time {t}")
    detuning = omega1 - omega2
    mu = math.sqrt(detuning**2 + 4.0 * v12**2)
    terms = phi_terms(noise)
    if mu == 0.0:
        # no coupling and no detuning: pure dephasing at the integrated phi
        f2 = sum(term.amplitude_sq * gamma_integral(term.rate, 0.0, t).real for term in terms)
        return TwoSiteCoefficients(mu=0.0, f1=0j, f2=float(f2))
    ratio_sq = (detuning / mu) ** 2
    f1 = 0j
    f2 = 0.0
    for term in terms:
        flat = gamma_integral(term.rate, 0.0, t).real
        oscillating = complex(gamma_integral(term.rate, mu, t))
        # int e^{-rs} cos(mu s) = Re(oscillating), int e^{-rs} sin(mu s) = -Im(oscillating)
        f1 -= term.amplitude_sq * (
            v12 * detuning / mu**2 * (flat - oscillating.real)
            + 1j * (v12 / mu) * oscillating.imag
        )
        f2 += term.amplitude_sq * (ratio_sq * flat + (1.0 - ratio_sq) * oscillating.real)
    return TwoSiteCoefficients(mu=mu, f1=complex(f1), f2=float(f2))


def f1_coefficient(
    omega1: float, omega2: float, v12: float, noise: NoiseSpec, t: float
) -> complex:
    """
    ``F1(t) = -int_0^t [V (w1 - w2) / mu^2 (1 - cos mu s) - i V / mu sin mu s] phi(s) ds``
    """
    return _two_site_integrals(omega1, omega2, v12, noise, t).f1


def f2_coefficient(
    omega1: float, omega2: float, v12: float, noise: NoiseSpec, t: float
) -> float:
    """
    ``F2(t) = int_0^t [((w1 - w2) / mu)^2 + (1 - ((w1 - w2) / mu)^2) cos mu s] phi(s) ds``
    """
    return _two_site_integrals(omega1, omega2, v12, noise, t).f2


def two_site_coefficients(
    chain: ChainSpec, noise: NoiseSpec, t: float
) -> TwoSiteCoefficients:
    if chain.n_sites != 2:
        raise SpecificationError(f"two-site coefficients need 2 sites, got {chain.n_sites}")
    return _two_site_integrals(chain.omega[0], chain.omega[1], chain.v[0][1], noise, t)


def two_site_rhs(
    t: float,
    rho: typing.Union[DensityMatrix, np.ndarray],
    chain: ChainSpec,
    noise: NoiseSpec,
    literal_f1_sign: bool = False,
) -> np.ndarray:
    """
    Closed-form two-site master equation with the trap on the population
    of site 2 only.

    The general generator puts ``conj(F1)`` into the ``rho_12`` equation;
    ``literal_f1_sign`` uses ``F1`` there instead, as the equations are
    usually printed. Only the default agrees with ``Tcl2Generator``.
    """
    if chain.n_sites != 2 or noise.n_sites != 2:
        raise SpecificationError("two_site_rhs needs a two-site chain and noise")
    r = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    coefficients = two_site_coefficients(chain, noise, t)
    f1 = coefficients.f1 if literal_f1_sign else coefficients.f1.conjugate()
    f2 = coefficients.f2
    eps_sq = noise.epsilon_sq
    v = chain.v[0][1]
    detuning = chain.omega[0] - chain.omega[1]
    imbalance = r[0, 0] - r[1, 1]

    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = -1j * v * (-r[0, 1] + r[1, 0])
    out[0, 1] = -1j * (v * (-r[0, 0] + r[1, 1]) + detuning * r[0, 1]) - eps_sq * (
        f1 * imbalance + f2 * r[0, 1]
    )
    out[1, 0] = -1j * (v * (r[0, 0] - r[1, 1]) - detuning * r[1, 0]) - eps_sq * (
        f1.conjugate() * imbalance + f2 * r[1, 0]
    )
    out[1, 1] = -1j * v * (r[0, 1] - r[1, 0]) - chain.kappa * r[1, 1]
    return out
