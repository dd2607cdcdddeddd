import dataclasses
import typing

import numpy as np
import scipy.integrate

from .checks import SpecificationError
from .model import NoiseSpec

ArrayLike = typing.Union[float, np.ndarray]

# beyond rate * t > 50 the transient exp(-rate * t) < 2e-22 is dropped
ASYMPTOTIC_EXPONENT = 50.0


@dataclasses.dataclass(frozen=True)
class KernelParams:
    """
    ``amplitude_sq * exp(-rate * |t|)``; the amplitude carries the sign of c.
    """

    amplitude_sq: float
    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise SpecificationError(f"kernel rate must be positive, got {self.rate}")

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return self.amplitude_sq * np.exp(-self.rate * np.abs(t))


def _check_sites(n: int, m: int, noise: NoiseSpec) -> None:
    for site in (n, m):
        if not 1 <= site <= noise.n_sites:
            raise SpecificationError(f"site {site} out of range 1..{noise.n_sites}")


def kernel_params(n: int, m: int, noise: NoiseSpec) -> KernelParams:
    """
    Kernel of the pair of (1-based) sites ``n``, ``m``.
    """
    _check_sites(n, m, noise)
    return KernelParams(
        amplitude_sq=float(noise.weights[n - 1, m - 1]),
        rate=float(noise.rates[n - 1, m - 1]),
    )


def correlation(n: int, m: int, t: ArrayLike, noise: NoiseSpec) -> ArrayLike:
    """
    ``<f_n(0) f_m(t)>``, symmetric in the sites and even in ``t``.
    """
    return kernel_params(n, m, noise)(t)


def phi_terms(noise: NoiseSpec) -> typing.List[KernelParams]:
    """
    Exponentials summing up to the correlation of ``f_1 - f_2``.
    """
    if noise.n_sites != 2:
        raise SpecificationError(
            f"the difference correlation needs two sites, got {noise.n_sites}"
        )
    weights = noise.weights
    rates = noise.rates
    terms: typing.Dict[float, float] = {}
    for (n, m), sign in (((0, 0), 1.0), ((1, 1), 1.0), ((0, 1), -1.0), ((1, 0), -1.0)):
        rate = float(rates[n, m])
        terms[rate] = terms.get(rate, 0.0) + sign * float(weights[n, m])
    return [KernelParams(amplitude_sq=w, rate=r) for r, w in terms.items()]


def phi_difference(t: ArrayLike, noise: NoiseSpec) -> ArrayLike:
    """
    ``<(f_1(0) - f_2(0)) (f_1(-t) - f_2(-t))> = C11 + C22 - C12 - C21``
    """
    return sum(term(t) for term in phi_terms(noise))


def gamma_integral(rate: ArrayLike, gap: ArrayLike, t: ArrayLike) -> np.ndarray:
    """
    Closed form of the integral of ``exp(-rate * s) * exp(-1j * gap * s)``
    for ``s`` from 0 to ``t``, i.e. ``(1 - exp(-(rate + 1j gap) t)) / (rate + 1j gap)``.

    Broadcasts over all arguments.
    """
    rate = np.asarray(rate, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(rate <= 0):
        raise SpecificationError("kernel rate must be positive")
    if np.any(t < 0):
        raise SpecificationError("integration time must be non-negative")
    z = rate + 1j * np.asarray(gap, dtype=float)
    transient = -np.expm1(-z * t) / z
    return np.where(rate * t > ASYMPTOTIC_EXPONENT, 1.0 / z, transient)


def quadrature_gamma_integral(rate: float, gap: float, t: float) -> complex:
    """
    Adaptive quadrature of the ``gamma_integral`` integrand (reference only).
    """
    options = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    real, _ = scipy.integrate.quad(
        lambda s: np.exp(-rate * s), 0.0, t, weight="cos", wvar=gap, **options
    )
    imag, _ = scipy.integrate.quad(
        lambda s: np.exp(-rate * s), 0.0, t, weight="sin", wvar=gap, **options
    )
    return complex(real, -imag)


def white_noise_rates(noise: NoiseSpec) -> np.ndarray:
    """
    Dephasing rate matrix of the ``tau_c -> 0`` limit at fixed
    ``delta**2 * tau_c``: ``2 * epsilon_sq * c * delta**2 * tau_c``.
    """
    return 2.0 * noise.epsilon_sq * noise.weights * np.array(noise.tau_c)
