import numpy as np
import pytest

from qetransport.checks import SpecificationError
from qetransport.model import (
    ChainSpec,
    DensityMatrix,
    NonRealizableCovarianceWarning,
    NoiseSpec,
    build_h0,
    diagonalize,
    initial_excitation,
    validate_covariance,
    warn_if_not_realizable,
)


def test_chain_spec() -> None:
    chain = ChainSpec.nearest_neighbour((1.5, 1.2, 1.0), 0.1, kappa=0.005)
    assert chain.n_sites == 3
    assert chain.v == ((0.0, 0.1, 0.0), (0.1, 0.0, 0.1), (0.0, 0.1, 0.0))
    # value semantics
    assert chain == ChainSpec.nearest_neighbour([1.5, 1.2, 1.0], [0.1, 0.1], kappa=0.005)
    assert hash(chain) == hash(ChainSpec.nearest_neighbour((1.5, 1.2, 1.0), 0.1, kappa=0.005))

    with pytest.raises(SpecificationError, match="symmetric"):
        ChainSpec(omega=(1.0, 0.0), v=((0.0, 0.1), (0.2, 0.0)))
    with pytest.raises(SpecificationError, match="shape"):
        ChainSpec(omega=(1.0, 0.0, 0.0), v=((0.0, 0.1), (0.1, 0.0)))
    with pytest.raises(SpecificationError, match="kappa"):
        ChainSpec(omega=(1.0, 0.0), v=((0.0, 0.1), (0.1, 0.0)), kappa=-1.0)
    with pytest.raises(SpecificationError):
        ChainSpec(omega=(1.0,), v=((0.0,),))


def test_noise_spec() -> None:
    noise = NoiseSpec.homogeneous(2, c=-1.0, delta=2.0, tau_c=0.5)
    np.testing.assert_array_equal(noise.weights, [[4.0, -4.0], [-4.0, 4.0]])
    np.testing.assert_array_equal(noise.rates, [[2.0, 2.0], [2.0, 2.0]])
    assert noise.has_common_tau_c
    assert noise.with_tau_c(3.0).tau_c == ((3.0, 3.0), (3.0, 3.0))

    with pytest.raises(SpecificationError, match="c"):
        NoiseSpec.homogeneous(2, c=1.5)
    with pytest.raises(SpecificationError, match="tau_c"):
        NoiseSpec.homogeneous(2, tau_c=0.0)
    with pytest.raises(SpecificationError, match="delta"):
        NoiseSpec.homogeneous(2, delta=-1.0)
    with pytest.raises(SpecificationError, match="diagonal"):
        NoiseSpec(c=np.full((2, 2), 0.5), delta=np.ones((2, 2)), tau_c=np.ones((2, 2)))


def test_build_h0_and_diagonalize() -> None:
    chain = ChainSpec.nearest_neighbour((1.5, 0.5), 0.1)
    h0 = build_h0(chain)
    np.testing.assert_array_equal(h0, [[1.5, 0.1], [0.1, 0.5]])

    spectral = diagonalize(h0)
    assert spectral.reconstruction_error(h0) < 1e-13
    assert spectral.orthonormality_error() < 1e-13
    mu = np.sqrt(1.0 + 4 * 0.01)
    np.testing.assert_allclose(np.diff(spectral.eigenvalues), [mu])
    np.testing.assert_allclose(spectral.gaps, -spectral.gaps.T)


def test_density_matrix() -> None:
    rho = initial_excitation(2, 3)
    np.testing.assert_array_equal(rho.populations, [0.0, 1.0, 0.0])
    assert rho.trace == 1.0
    assert rho.hermiticity_error() == 0.0
    assert rho.min_eigenvalue() == pytest.approx(0.0)

    with pytest.raises(ValueError):
        rho.elements[0, 0] = 1.0
    with pytest.raises(SpecificationError, match="out of range"):
        initial_excitation(4, 3)
    with pytest.raises(SpecificationError, match="square"):
        DensityMatrix(np.zeros((2, 3)))
    with pytest.raises(SpecificationError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(SpecificationError, match="trace"):
        DensityMatrix(np.diag([1.0, 0.5]))
    with pytest.raises(SpecificationError, match="trace"):
        DensityMatrix(np.diag([0.5, -0.75]))

    # everything trapped
    assert DensityMatrix(np.zeros((2, 2))).trace == 0.0
    coherent = DensityMatrix(np.array([[0.5, 0.5j], [-0.5j, 0.5]]))
    assert coherent.hermiticity_error() == 0.0


def test_validate_covariance() -> None:
    ferro = NoiseSpec.homogeneous(3, c=1.0)
    report = validate_covariance(ferro)
    assert report.checked and report.is_realizable
    np.testing.assert_allclose(report.eigenvalues, [0.0, 0.0, 3.0], atol=1e-12)

    # pairwise anti-correlation of three sites is not a covariance
    frustrated = NoiseSpec.homogeneous(3, c=-1.0)
    report = validate_covariance(frustrated)
    assert report.checked and not report.is_realizable
    np.testing.assert_allclose(report.eigenvalues, [-1.0, 2.0, 2.0], atol=1e-12)
    with pytest.warns(NonRealizableCovarianceWarning, match="not positive semidefinite"):
        warn_if_not_realizable(frustrated)

    mixed = NoiseSpec(
        c=np.eye(2), delta=np.ones((2, 2)), tau_c=np.array([[1.0, 2.0], [2.0, 1.0]])
    )
    report = validate_covariance(mixed)
    assert not report.checked
    assert report.is_realizable is None


def test_anti_ferromagnetic_covariance() -> None:
    # neighbours anti-correlated, next neighbours correlated: rank one
    anti_ferro = NoiseSpec.homogeneous(3, c=[[1, -1, 1], [-1, 1, -1], [1, -1, 1]])
    report = validate_covariance(anti_ferro)
    assert report.is_realizable
    np.testing.assert_allclose(report.eigenvalues, [0.0, 0.0, 3.0], atol=1e-12)


@pytest.mark.parametrize("order", [(0, 1, 2, 3), (2, 0, 3, 1), (3, 2, 1, 0)])
@pytest.mark.parametrize("flip", [1.0, -1.0])
def test_covariance_report_ignores_site_order(order: tuple, flip: float) -> None:
    c = np.array(
        [
            [1.0, 0.3, -0.2, 0.5],
            [0.3, 1.0, 0.1, -0.4],
            [-0.2, 0.1, 1.0, 0.6],
            [0.5, -0.4, 0.6, 1.0],
        ]
    )
    c[~np.eye(4, dtype=bool)] *= flip
    amplitude = np.array([1.0, 0.5, 2.0, 1.5])
    delta = np.sqrt(np.outer(amplitude, amplitude))
    tau_c = np.full((4, 4), 0.3)
    index = np.ix_(order, order)

    reference = validate_covariance(NoiseSpec(c=c, delta=delta, tau_c=tau_c))
    permuted = validate_covariance(NoiseSpec(c=c[index], delta=delta[index], tau_c=tau_c))
    assert permuted.is_realizable == reference.is_realizable
    np.testing.assert_allclose(permuted.eigenvalues, reference.eigenvalues, atol=1e-12)
