# all quantities are dimensionless: energies and rates in units of the
# fluctuation strength Delta, times in units of 1/Delta, hbar = 1

import dataclasses
import logging
import typing
import warnings

import numpy as np
import scipy.linalg

from . import predefined_checks
from .checks import SpecificationError

logger = logging.getLogger(__name__)

Vector = typing.Tuple[float, ...]
Matrix = typing.Tuple[typing.Tuple[float, ...], ...]

# eigenvalues of the covariance above this are treated as non-negative
PSD_TOLERANCE = 1e-10


class NonRealizableCovarianceWarning(UserWarning):
    """
    The spatial covariance c * delta**2 is not positive semidefinite.
    """


def _as_vector(values: typing.Any) -> Vector:
    try:
        array = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as error:
        raise SpecificationError(f"not a real vector: {values!r}") from error
    if array.ndim != 1:
        raise SpecificationError(f"expected a vector, got shape {array.shape}")
    return tuple(float(x) for x in array)


def _as_matrix(values: typing.Any) -> Matrix:
    try:
        array = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as error:
        raise SpecificationError(f"not a real matrix: {values!r}") from error
    if array.ndim != 2:
        raise SpecificationError(f"expected a matrix, got shape {array.shape}")
    return tuple(tuple(float(x) for x in row) for row in array)


def _fill_matrix(n_sites: int, diagonal: float, off_diagonal: float) -> np.ndarray:
    matrix = np.full((n_sites, n_sites), float(off_diagonal))
    np.fill_diagonal(matrix, float(diagonal))
    return matrix


@dataclasses.dataclass(frozen=True)
class ChainSpec:
    """
    Site frequencies ``omega``, symmetric couplings ``v`` (zero diagonal) and
    the trap rate ``kappa`` acting on the last site.

    Stored as tuples, so specifications are hashable and compare by value.
    """

    omega: Vector
    v: Matrix
    kappa: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", _as_vector(self.omega))
        object.__setattr__(self, "v", _as_matrix(self.v))
        object.__setattr__(self, "kappa", float(self.kappa))
        predefined_checks.is_valid_chain.enforce(self)

    @property
    def n_sites(self) -> int:
        return len(self.omega)

    @property
    def omega_array(self) -> np.ndarray:
        return np.array(self.omega)

    @property
    def v_array(self) -> np.ndarray:
        return np.array(self.v)

    @classmethod
    def nearest_neighbour(
        cls,
        omega: typing.Sequence[float],
        v: typing.Union[float, typing.Sequence[float]],
        kappa: float = 0.0,
    ) -> "ChainSpec":
        """
        Linear chain with coupling ``v`` between neighbours.

        ``v`` is either one value for every bond or one value per bond.
        """
        n_sites = len(omega)
        bonds = np.broadcast_to(np.asarray(v, dtype=float), (n_sites - 1,))
        coupling = np.diag(bonds, 1)
        return cls(omega=tuple(omega), v=coupling + coupling.T, kappa=kappa)


@dataclasses.dataclass(frozen=True)
class NoiseSpec:
    """
    Spatio-temporal correlation of the site frequency fluctuations,
    ``<f_n(0) f_m(t)> = c[n][m] * delta[n][m]**2 * exp(-|t| / tau_c[n][m])``,
    and the expansion weight ``epsilon_sq`` of the second order generator.
    """

    c: Matrix
    delta: Matrix
    tau_c: Matrix
    epsilon_sq: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _as_matrix(self.c))
        object.__setattr__(self, "delta", _as_matrix(self.delta))
        object.__setattr__(self, "tau_c", _as_matrix(self.tau_c))
        object.__setattr__(self, "epsilon_sq", float(self.epsilon_sq))
        predefined_checks.is_valid_noise.enforce(self)

    @property
    def n_sites(self) -> int:
        return len(self.c)

    @property
    def weights(self) -> np.ndarray:
        """
        Signed zero-lag covariances ``c * delta**2``.
        """
        return np.array(self.c) * np.array(self.delta) ** 2

    @property
    def rates(self) -> np.ndarray:
        return 1.0 / np.array(self.tau_c)

    @property
    def has_common_tau_c(self) -> bool:
        tau_c = np.array(self.tau_c)
        return bool(np.all(tau_c == tau_c[0, 0]))

    @classmethod
    def homogeneous(
        cls,
        n_sites: int,
        c: typing.Union[float, typing.Any] = 0.0,
        delta: float = 1.0,
        tau_c: float = 1.0,
        epsilon_sq: float = 0.1,
    ) -> "NoiseSpec":
        """
        Equal amplitude and correlation time for every pair of sites.

        ``c`` is either the common off-diagonal correlation or a full matrix.
        """
        if np.ndim(c) == 0:
            c_matrix = _fill_matrix(n_sites, 1.0, float(c))
        else:
            c_matrix = np.asarray(c, dtype=float)
        return cls(
            c=c_matrix,
            delta=np.full((n_sites, n_sites), float(delta)),
            tau_c=np.full((n_sites, n_sites), float(tau_c)),
            epsilon_sq=epsilon_sq,
        )

    def with_tau_c(self, tau_c: float) -> "NoiseSpec":
        return dataclasses.replace(
            self, tau_c=np.full((self.n_sites, self.n_sites), float(tau_c))
        )


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    State of the single-excitation manifold, Hermitian with trace in [0, 1].

    The trace drops below one while population leaves through the trap.
    """

    elements: np.ndarray

    def __post_init__(self) -> None:
        elements = np.array(self.elements, dtype=complex)
        if elements.ndim != 2 or elements.shape[0] != elements.shape[1]:
            raise SpecificationError(
                f"density matrix must be square, got shape {elements.shape}"
            )
        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        predefined_checks.is_physical_state.enforce(self)

    @property
    def dim(self) -> int:
        return int(self.elements.shape[0])

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.elements)))

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.elements)).copy()

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def min_eigenvalue(self) -> float:
        hermitian_part = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(hermitian_part)[0])


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    ``h0 = eigenvectors @ diag(eigenvalues) @ eigenvectors.T``
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        """
        Matrix of Bohr frequencies ``eigenvalues[a] - eigenvalues[b]``.
        """
        return self.eigenvalues[:, None] - self.eigenvalues[None, :]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T

    def reconstruction_error(self, h0: np.ndarray) -> float:
        return float(np.max(np.abs(h0 - self.reconstruct())))

    def orthonormality_error(self) -> float:
        u = self.eigenvectors
        return float(np.max(np.abs(u.T @ u - np.eye(len(u)))))


@dataclasses.dataclass(frozen=True)
class CovarianceReport:
    """
    Result of ``validate_covariance``.

    ``checked`` is False when the pairs do not share one correlation time;
    a stationary Gaussian process is then not defined by one covariance
    matrix and ``is_realizable`` is None.
    """

    checked: bool
    is_realizable: typing.Optional[bool]
    eigenvalues: Vector

    def describe(self) -> str:
        if not self.checked:
            return "covariance not checked (correlation times differ between pairs)"
        smallest = min(self.eigenvalues)
        if self.is_realizable:
            return f"covariance is positive semidefinite (min eigenvalue {smallest:.3g})"
        return f"covariance is not positive semidefinite (min eigenvalue {smallest:.3g})"


def build_h0(spec: ChainSpec) -> np.ndarray:
    """
    System Hamiltonian: ``omega`` on the diagonal, couplings off the diagonal.
    """
    v = spec.v_array
    if v.shape != (spec.n_sites, spec.n_sites):
        raise SpecificationError(
            f"coupling matrix shape {v.shape} does not match {spec.n_sites} sites"
        )
    upper = np.triu(v, 1)
    h0 = upper + upper.T
    h0[np.diag_indices(spec.n_sites)] = spec.omega_array
    return h0


def diagonalize(h0: np.ndarray) -> SpectralDecomposition:
    eigenvalues, eigenvectors = scipy.linalg.eigh(h0)
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def initial_excitation(site: int, dim: int) -> DensityMatrix:
    """
    Pure state with the excitation on ``site`` (1-based).
    """
    if not 1 <= site <= dim:
        raise SpecificationError(f"site {site} out of range 1..{dim}")
    elements = np.zeros((dim, dim), dtype=complex)
    elements[site - 1, site - 1] = 1.0
    return DensityMatrix(elements)


def validate_covariance(noise: NoiseSpec) -> CovarianceReport:
    """
    Eigenvalues of ``c * delta**2``; realizable as a Gaussian process when
    none is below ``-PSD_TOLERANCE``.
    """
    if not noise.has_common_tau_c:
        return CovarianceReport(checked=False, is_realizable=None, eigenvalues=())
    eigenvalues = scipy.linalg.eigvalsh(noise.weights)
    return CovarianceReport(
        checked=True,
        is_realizable=bool(np.all(eigenvalues >= -PSD_TOLERANCE)),
        eigenvalues=tuple(float(x) for x in eigenvalues),
    )


def warn_if_not_realizable(noise: NoiseSpec) -> CovarianceReport:
    report = validate_covariance(noise)
    if report.checked and not report.is_realizable:
        logger.warning(report.describe())
        warnings.warn(report.describe(), NonRealizableCovarianceWarning)
    return report
