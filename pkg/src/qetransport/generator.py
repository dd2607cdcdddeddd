import abc
import math
import typing

import numpy as np

# dense superoperators are only built up to this many density matrix elements
DENSE_LIMIT = 64


class MasterEquation(abc.ABC):
    """
    Abstract base class of a linear, possibly time-dependent, master equation
    ``d rho / dt = L(t) rho`` on ``dim x dim`` density matrices.
    """

    dim: int

    def describe(self) -> str:
        """
        Describes the equation of motion.
        """
        return type(self).__name__

    def __repr__(self) -> str:
        return f"<MasterEquation: {self.describe()}>"

    @abc.abstractmethod
    def derivative(self, t: float, rho: np.ndarray) -> np.ndarray:
        """
        Time derivative of ``rho`` at time ``t``.
        """
        ...

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        return self.derivative(t, rho)

    @property
    def stationary_from(self) -> float:
        """
        Time after which ``L(t)`` no longer changes; infinite if unknown.
        """
        return math.inf

    @property
    def supports_dense(self) -> bool:
        return self.dim * self.dim <= DENSE_LIMIT

    def superoperator(self, t: float) -> np.ndarray:
        """
        Matrix of ``L(t)`` acting on row-major flattened density matrices.

        Built column by column from ``derivative``; subclasses with a cheaper
        closed form override this.
        """
        size = self.dim * self.dim
        matrix = np.empty((size, size), dtype=complex)
        basis = np.zeros(size, dtype=complex)
        for k in range(size):
            basis[k] = 1.0
            matrix[:, k] = self.derivative(t, basis.reshape(self.dim, self.dim)).ravel()
            basis[k] = 0.0
        return matrix


class GeneratorFromFun(MasterEquation):
    """
    Create a master equation from a right-hand side callback ``rhs(t, rho)``.
    """

    def __init__(
        self,
        rhs: typing.Callable[[float, np.ndarray], np.ndarray],
        dim: int,
        description: typing.Optional[str] = None,
    ):
        assert callable(rhs)
        self.rhs = rhs
        self.dim = int(dim)
        if description is None:
            self.description = f"Right-hand side `{getattr(rhs, '__name__', rhs)}`"
        else:
            self.description = description
        super().__init__()

    def describe(self) -> str:
        return self.description

    def derivative(self, t: float, rho: np.ndarray) -> np.ndarray:
        return np.asarray(self.rhs(t, rho), dtype=complex)


def as_generator(rhs: typing.Any, dim: int) -> MasterEquation:
    """
    Converts its input into a MasterEquation.
    """
    if isinstance(rhs, MasterEquation):
        if rhs.dim != dim:
            raise ValueError(f"generator acts on dim {rhs.dim}, state has dim {dim}")
        return rhs
    if callable(rhs):
        return GeneratorFromFun(rhs, dim)
    raise ValueError(f"can not convert {type(rhs)} to a master equation")
