import typing

import numpy as np

from .checks import Check

# all checks here read one named attribute of the value under test


class FieldCheck(Check):
    """
    Base of checks reading the array stored in attribute ``field``.
    """

    def __init__(self, field: str):
        self.field = field
        super().__init__()

    def array(self, value: typing.Any) -> np.ndarray:
        return np.asarray(getattr(value, self.field))


class HasShape(FieldCheck):
    """
    Matches if the array has the shape derived from the value.

    ``shape`` maps the value to the expected shape, e.g.
    ``lambda spec: (spec.n_sites, spec.n_sites)``.
    ``shape_description`` is used for ``describe``.
    """

    def __init__(
        self,
        field: str,
        shape: typing.Callable[[typing.Any], typing.Tuple[int, ...]],
        shape_description: str,
    ):
        self.shape = shape
        self.shape_description = shape_description
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        return self.array(value).shape == tuple(self.shape(value))

    def describe(self) -> str:
        return f"`{self.field}` has shape {self.shape_description}"


class IsFinite(FieldCheck):
    def test(self, value: typing.Any) -> bool:
        return bool(np.all(np.isfinite(self.array(value))))

    def describe(self) -> str:
        return f"`{self.field}` is finite"


class IsSymmetric(FieldCheck):
    """
    Matches a square matrix equal to its transpose within ``atol``.

    ``atol = 0`` requires exact (bitwise) symmetry.
    """

    def __init__(self, field: str, atol: float = 0.0):
        self.atol = float(atol)
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        matrix = self.array(value)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            return False
        return bool(np.max(np.abs(matrix - matrix.T), initial=0.0) <= self.atol)

    def describe(self) -> str:
        return f"`{self.field}` is symmetric"


class IsHermitian(FieldCheck):
    def __init__(self, field: str, atol: float = 1e-12):
        self.atol = float(atol)
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        matrix = self.array(value)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            return False
        deviation = np.max(np.abs(matrix - matrix.conj().T), initial=0.0)
        return bool(deviation <= self.atol)

    def describe(self) -> str:
        return f"`{self.field}` is Hermitian to {self.atol:g}"


class HasDiagonal(FieldCheck):
    """
    Matches if every diagonal entry equals ``diagonal`` exactly.
    """

    def __init__(self, field: str, diagonal: float):
        self.diagonal = diagonal
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        return bool(np.all(np.diag(self.array(value)) == self.diagonal))

    def describe(self) -> str:
        return f"`{self.field}` has diagonal {self.diagonal:g}"


class EntriesWithin(FieldCheck):
    """
    Matches if all entries lie in the interval from ``low`` to ``high``.

    ``strict_low`` excludes the lower bound (e.g. strictly positive entries).
    ``None`` leaves the corresponding side unbounded.
    """

    def __init__(
        self,
        field: str,
        low: typing.Optional[float] = None,
        high: typing.Optional[float] = None,
        strict_low: bool = False,
    ):
        self.low = low
        self.high = high
        self.strict_low = bool(strict_low)
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        entries = self.array(value)
        if self.low is not None:
            below = entries <= self.low if self.strict_low else entries < self.low
            if np.any(below):
                return False
        if self.high is not None and np.any(entries > self.high):
            return False
        return True

    def describe(self) -> str:
        if self.low is not None and self.high is not None:
            bracket = "(" if self.strict_low else "["
            return f"`{self.field}` entries in {bracket}{self.low:g}, {self.high:g}]"
        if self.low is not None:
            relation = ">" if self.strict_low else ">="
            return f"`{self.field}` entries {relation} {self.low:g}"
        if self.high is not None:
            return f"`{self.field}` entries <= {self.high:g}"
        return f"`{self.field}` entries are unbounded"


class TraceWithin(FieldCheck):
    """
    Matches a square matrix whose real trace lies in [``low``, ``high``]
    and whose trace has no imaginary part beyond ``atol``.
    """

    def __init__(self, field: str, low: float, high: float, atol: float = 1e-12):
        self.low = low
        self.high = high
        self.atol = atol
        super().__init__(field)

    def test(self, value: typing.Any) -> bool:
        trace = np.trace(self.array(value))
        return bool(
            abs(np.imag(trace)) <= self.atol and self.low <= np.real(trace) <= self.high
        )

    def describe(self) -> str:
        return f"trace of `{self.field}` in [{self.low:g}, {self.high:g}]"
