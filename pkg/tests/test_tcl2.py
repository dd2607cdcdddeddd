import numpy as np
import pytest
import scipy.integrate

from qetransport.checks import SpecificationError
from qetransport.generator import GeneratorFromFun
from qetransport.kernel import phi_difference
from qetransport.lindblad_ref import markov_coefficients
from qetransport.model import ChainSpec, NoiseSpec, NonRealizableCovarianceWarning, initial_excitation
from qetransport.tcl2 import (
    Tcl2Generator,
    TrapMode,
    apply_generator,
    f1_coefficient,
    f2_coefficient,
    trap_term,
    two_site_coefficients,
    two_site_rhs,
)

TWO_SITES = ChainSpec.nearest_neighbour((1.5, 0.5), 0.1, kappa=0.005)
THREE_SITES = ChainSpec.nearest_neighbour((1.5, 1.2, 1.0), 0.1, kappa=0.005)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


@pytest.mark.parametrize("c", [-1.0, 0.0, 0.6])
@pytest.mark.parametrize("alpha", [0.3, 1.0, 10.0])
def test_general_generator_matches_two_site_equations(c: float, alpha: float) -> None:
    noise = NoiseSpec.homogeneous(2, c=c, tau_c=alpha)
    generator = Tcl2Generator(TWO_SITES, noise)
    rng = np.random.default_rng(7)
    for _ in range(100):
        t = float(rng.uniform(0.0, 60.0))
        rho = random_state(rng, 2)
        np.testing.assert_allclose(
            generator.derivative(t, rho), two_site_rhs(t, rho, TWO_SITES, noise), rtol=0, atol=1e-10
        )


def test_literal_f1_sign_differs() -> None:
    noise = NoiseSpec.homogeneous(2, c=0.0)
    rho = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
    literal = two_site_rhs(3.0, rho, TWO_SITES, noise, literal_f1_sign=True)
    default = two_site_rhs(3.0, rho, TWO_SITES, noise)
    # populations agree, coherences differ through Im(F1)
    np.testing.assert_allclose(literal[0, 0], default[0, 0])
    assert abs(literal[0, 1] - default[0, 1]) > 1e-6


@pytest.mark.parametrize("c", [-1.0, 0.0])
@pytest.mark.parametrize("alpha", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("t", [0.5, 7.0, 40.0])
def test_coefficients_against_quadrature(c: float, alpha: float, t: float) -> None:
    noise = NoiseSpec.homogeneous(2, c=c, tau_c=alpha)
    w1, w2, v = 1.5, 0.5, 0.1
    detuning = w1 - w2
    mu = np.sqrt(detuning**2 + 4 * v**2)

    def phi(s: float) -> float:
        return float(phi_difference(s, noise))

    options = dict(limit=500, epsabs=1e-13, epsrel=1e-12)
    f1_real, _ = scipy.integrate.quad(
        lambda s: -v * detuning / mu**2 * (1 - np.cos(mu * s)) * phi(s), 0.0, t, **options
    )
    f1_imag, _ = scipy.integrate.quad(lambda s: v / mu * np.sin(mu * s) * phi(s), 0.0, t, **options)
    f2, _ = scipy.integrate.quad(
        lambda s: ((detuning / mu) ** 2 + (1 - (detuning / mu) ** 2) * np.cos(mu * s)) * phi(s),
        0.0,
        t,
        **options,
    )
    assert f1_coefficient(w1, w2, v, noise, t) == pytest.approx(complex(f1_real, f1_imag), abs=1e-9)
    assert f2_coefficient(w1, w2, v, noise, t) == pytest.approx(f2, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 4.0])
def test_coefficients_reach_markov_values(alpha: float) -> None:
    noise = NoiseSpec.homogeneous(2, c=-0.5, tau_c=alpha)
    coefficients = two_site_coefficients(TWO_SITES, noise, 50.0 * alpha)
    markov = markov_coefficients(1.5, 0.5, 0.1, delta=1.0, tau_c=alpha, c=-0.5)
    assert coefficients.f1 == pytest.approx(markov.f1_inf, rel=1e-5)
    assert coefficients.f2 == pytest.approx(markov.f2_inf, rel=1e-5)


def test_resonant_uncoupled_limit() -> None:
    chain = ChainSpec(omega=(1.0, 1.0), v=((0.0, 0.0), (0.0, 0.0)))
    noise = NoiseSpec.homogeneous(2, c=0.0, tau_c=2.0)
    coefficients = two_site_coefficients(chain, noise, 1e3)
    assert coefficients.mu == 0.0
    assert coefficients.f1 == 0.0
    # the integrated difference correlation, 2 (1 - c) tau_c
    assert coefficients.f2 == pytest.approx(4.0)


@pytest.mark.parametrize("trap_mode", list(TrapMode))
def test_superoperator_matches_derivative(trap_mode: TrapMode) -> None:
    noise = NoiseSpec.homogeneous(3, c=-0.3, tau_c=0.5)
    generator = Tcl2Generator(THREE_SITES, noise, trap_mode)
    reference = GeneratorFromFun(generator.derivative, 3)
    for t in (0.0, 0.7, 30.0):
        np.testing.assert_allclose(
            generator.superoperator(t), reference.superoperator(t), rtol=0, atol=1e-12
        )


def test_generator_properties() -> None:
    noise = NoiseSpec.homogeneous(3, c=0.2, tau_c=0.7)
    closed = Tcl2Generator(ChainSpec.nearest_neighbour((1.5, 1.2, 1.0), 0.1), noise)
    rng = np.random.default_rng(3)
    for t in rng.uniform(0.0, 10.0, size=10):
        rho = random_state(rng, 3)
        drho = closed.derivative(float(t), rho)
        np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)
        assert abs(np.trace(drho)) < 1e-12

    np.testing.assert_allclose(closed.site_projector_sum(), np.eye(3), atol=1e-12)
    assert closed.stationary_from == pytest.approx(50.0 * 0.7)

    # the trap only drains the trace through the last population
    trapped = Tcl2Generator(THREE_SITES, noise)
    rho = random_state(rng, 3)
    assert np.trace(trapped.derivative(1.0, rho)).real == pytest.approx(-0.005 * rho[2, 2].real)


def test_dissipator_vanishes_at_start() -> None:
    generator = Tcl2Generator(THREE_SITES, NoiseSpec.homogeneous(3, c=-0.4, tau_c=0.3))
    rho = random_state(np.random.default_rng(5), 3)
    np.testing.assert_array_equal(generator.dissipator(0.0, rho), np.zeros((3, 3)))
    coherent = -1j * (generator.h0 @ rho - rho @ generator.h0)
    expected = coherent + trap_term(rho, 0.005, TrapMode.POPULATION_ONLY)
    np.testing.assert_array_equal(generator.derivative(0.0, rho), expected)


@pytest.mark.parametrize("c", [0.25, 0.4])
def test_dissipator_is_linear_in_the_correlation(c: float) -> None:
    def generator(correlation: float) -> Tcl2Generator:
        return Tcl2Generator(THREE_SITES, NoiseSpec.homogeneous(3, c=correlation, tau_c=0.7))

    plus, minus, uncorrelated = generator(c), generator(-c), generator(0.0)
    rho = random_state(np.random.default_rng(11), 3)
    for t in (0.1, 1.3, 60.0):
        average = 0.5 * (plus.dissipator(t, rho) + minus.dissipator(t, rho))
        np.testing.assert_allclose(average, uncorrelated.dissipator(t, rho), rtol=0, atol=1e-14)
        average = 0.5 * (plus.superoperator(t) + minus.superoperator(t))
        np.testing.assert_allclose(average, uncorrelated.superoperator(t), rtol=0, atol=1e-13)


def test_no_noise_is_coherent() -> None:
    noise = NoiseSpec.homogeneous(2, epsilon_sq=0.0)
    generator = Tcl2Generator(TWO_SITES, noise)
    assert generator.stationary_from == 0.0
    rho = initial_excitation(1, 2).elements
    coherent = -1j * (generator.h0 @ rho - rho @ generator.h0)
    expected = coherent + trap_term(rho, 0.005, TrapMode.POPULATION_ONLY)
    np.testing.assert_allclose(apply_generator(generator, 5.0, rho), expected)


def test_trap_modes() -> None:
    rho = np.full((2, 2), 0.5, dtype=complex)
    population_only = trap_term(rho, 0.1, TrapMode.POPULATION_ONLY)
    np.testing.assert_allclose(population_only, [[0.0, 0.0], [0.0, -0.05]])
    lindblad = trap_term(rho, 0.1, "lindblad_trap")
    np.testing.assert_allclose(lindblad, [[0.0, -0.025], [-0.025, -0.05]])


def test_invalid_use() -> None:
    noise = NoiseSpec.homogeneous(2)
    generator = Tcl2Generator(TWO_SITES, noise)
    with pytest.raises(SpecificationError, match="negative time"):
        generator.derivative(-1.0, np.eye(2) / 2)
    with pytest.raises(SpecificationError, match="shape"):
        generator.derivative(0.0, np.eye(3) / 3)
    with pytest.raises(SpecificationError, match="sites"):
        Tcl2Generator(THREE_SITES, noise)
    with pytest.raises(SpecificationError, match="two"):
        two_site_rhs(0.0, np.eye(3) / 3, THREE_SITES, NoiseSpec.homogeneous(3))
    with pytest.raises(ValueError):
        Tcl2Generator(TWO_SITES, noise, trap_mode="no_trap")


def test_non_realizable_covariance_warns() -> None:
    with pytest.warns(NonRealizableCovarianceWarning):
        Tcl2Generator(THREE_SITES, NoiseSpec.homogeneous(3, c=-1.0))
