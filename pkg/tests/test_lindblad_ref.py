import numpy as np
import pytest

from qetransport.checks import SpecificationError
from qetransport.generator import GeneratorFromFun
from qetransport.lindblad_ref import (
    LindbladGenerator,
    coherence_decay,
    hopping_rates,
    lindblad_rhs,
    markov_coefficients,
    reduced_rate_equation,
    stationary_coherence,
    white_noise_gamma,
)
from qetransport.model import ChainSpec, NoiseSpec
from qetransport.tcl2 import Tcl2Generator, TrapMode

TWO_SITES = ChainSpec.nearest_neighbour((1.5, 0.5), 0.1, kappa=0.005)
THREE_SITES = ChainSpec.nearest_neighbour((1.5, 1.2, 1.0), 0.1, kappa=0.005)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def test_markov_coefficients() -> None:
    coefficients = markov_coefficients(1.5, 0.5, 0.1, delta=1.0, tau_c=0.5, c=-1.0)
    assert coefficients.gamma == pytest.approx(2.0)
    assert coefficients.f2_inf > 0

    # short correlation times keep only the dephasing rate
    white = markov_coefficients(1.5, 0.5, 0.1, delta=100.0, tau_c=1e-6, c=0.0)
    assert white.f2_inf == pytest.approx(white.gamma, rel=1e-9)
    assert abs(white.f1_inf) < 1e-6 * white.gamma

    assert markov_coefficients(1.5, 0.5, 0.1, delta=1.0, tau_c=0.5, c=1.0).f2_inf == 0.0
    with pytest.raises(SpecificationError, match="c must be"):
        markov_coefficients(1.5, 0.5, 0.1, delta=1.0, tau_c=0.5, c=2.0)


def test_coherence_decay() -> None:
    np.testing.assert_allclose(coherence_decay(0.3, 2), [[0.0, 0.3], [0.3, 0.0]])
    # fully correlated rates leave the coherences alone
    np.testing.assert_allclose(coherence_decay(np.full((2, 2), 0.3), 2), 0.0)
    np.testing.assert_allclose(
        coherence_decay(np.array([[0.2, -0.2], [-0.2, 0.2]]), 2), [[0.0, 0.4], [0.4, 0.0]]
    )


@pytest.mark.parametrize("trap_mode", list(TrapMode))
@pytest.mark.parametrize("gamma", [0.0, 0.3, np.array([[0.2, 0.1, 0.0], [0.1, 0.3, -0.1], [0.0, -0.1, 0.1]])])
def test_superoperator_matches_derivative(trap_mode: TrapMode, gamma: object) -> None:
    generator = LindbladGenerator(THREE_SITES, gamma, trap_mode)
    assert generator.stationary_from == 0.0
    reference = GeneratorFromFun(generator.derivative, 3)
    np.testing.assert_allclose(generator.superoperator(0.0), reference.superoperator(0.0), atol=1e-14)

    rho = random_state(np.random.default_rng(5), 3)
    np.testing.assert_allclose(
        generator.derivative(1.0, rho),
        lindblad_rhs(rho, generator.h0, gamma, THREE_SITES.kappa, trap_mode),
    )


@pytest.mark.parametrize("chain", [TWO_SITES, THREE_SITES])
@pytest.mark.parametrize("c", [-0.4, 0.0, 0.8])
def test_white_noise_limit_of_tcl2(chain: ChainSpec, c: float) -> None:
    noise = NoiseSpec.homogeneous(chain.n_sites, c=c, delta=100.0, tau_c=1e-4)
    tcl2 = Tcl2Generator(chain, noise)
    lindblad = LindbladGenerator.white_noise_limit(chain, noise)
    rng = np.random.default_rng(11)
    for _ in range(5):
        rho = random_state(rng, chain.n_sites)
        np.testing.assert_allclose(tcl2.derivative(1.0, rho), lindblad.derivative(1.0, rho), atol=1e-4)


def test_white_noise_gamma() -> None:
    noise = NoiseSpec.homogeneous(2, c=-1.0, delta=100.0, tau_c=1e-4, epsilon_sq=0.1)
    assert white_noise_gamma(noise) == pytest.approx(0.4)
    with pytest.raises(SpecificationError, match="two sites"):
        white_noise_gamma(NoiseSpec.homogeneous(3))


@pytest.mark.parametrize("trap_mode", list(TrapMode))
def test_stationary_coherence(trap_mode: TrapMode) -> None:
    gamma = 0.4
    populations = [0.7, 0.3]
    rho = stationary_coherence(populations, TWO_SITES, gamma, trap_mode)
    np.testing.assert_allclose(np.diag(rho), populations)
    np.testing.assert_allclose(rho[1, 0], np.conj(rho[0, 1]))
    drho = lindblad_rhs(rho, LindbladGenerator(TWO_SITES, gamma).h0, gamma, TWO_SITES.kappa, trap_mode)
    assert abs(drho[0, 1]) < 1e-14


def test_reduced_rate_equation_reproduces_lindblad_trapping_time() -> None:
    gamma = 2.0
    generator = LindbladGenerator(TWO_SITES, gamma)

    # integral of the populations to infinity: -L^-1 applied to rho(0)
    rho0 = np.diag([1.0, 0.0]).astype(complex).ravel()
    integrated = -np.linalg.solve(generator.superoperator(0.0), rho0).reshape(2, 2)
    lindblad_time = float(np.real(np.trace(integrated)))

    rate_matrix = np.column_stack(
        [reduced_rate_equation(p, TWO_SITES, gamma) for p in np.eye(2)]
    )
    rate_time = float(np.sum(-np.linalg.solve(rate_matrix, [1.0, 0.0])))
    assert rate_time == pytest.approx(lindblad_time, rel=0.05)

    rates = hopping_rates(TWO_SITES, gamma)
    assert rates[0, 1] == pytest.approx(2 * 0.01 * 2.0 / (4.0 + 1.0))
    assert rates[0, 0] == 0.0


def test_invalid_rates() -> None:
    with pytest.raises(SpecificationError, match="non-negative"):
        LindbladGenerator(TWO_SITES, -0.1)
    with pytest.raises(SpecificationError, match="does not match"):
        LindbladGenerator(TWO_SITES, np.zeros((3, 3)))
    with pytest.raises(SpecificationError, match="symmetric"):
        LindbladGenerator(TWO_SITES, np.array([[0.0, 0.1], [0.2, 0.0]]))

    resonant = ChainSpec.nearest_neighbour((1.0, 1.0), 0.1)
    with pytest.raises(SpecificationError, match="resonant"):
        hopping_rates(resonant, 0.0)
