import typing

from .checks import AllChecks, CheckFromTestFun
from .matrix_checks import (
    EntriesWithin,
    HasDiagonal,
    HasShape,
    IsFinite,
    IsHermitian,
    IsSymmetric,
    TraceWithin,
)

# checks behind the invariants of the model types


def _square(value: object) -> tuple:
    n_sites = getattr(value, "n_sites")
    return (n_sites, n_sites)


def site_matrices(*fields: str) -> AllChecks:
    return AllChecks(*(HasShape(field, _square, "(n_sites, n_sites)") for field in fields))


def symmetric_within(
    field: str, low: float, high: typing.Optional[float] = None, strict_low: bool = False
) -> AllChecks:
    return IsSymmetric(field) & EntriesWithin(field, low=low, high=high, strict_low=strict_low)


has_two_sites = CheckFromTestFun(
    lambda spec: spec.n_sites >= 2, "has at least two sites"
)

# symmetry of the coupling matrix is bitwise, build_h0 relies on it
is_valid_chain = (
    has_two_sites
    & HasShape("omega", lambda spec: (spec.n_sites,), "(n_sites,)")
    & site_matrices("v")
    & IsFinite("omega")
    & IsFinite("v")
    & IsSymmetric("v")
    & HasDiagonal("v", 0.0)
    & EntriesWithin("kappa", low=0.0)
)

is_valid_noise = (
    has_two_sites
    & site_matrices("c", "delta", "tau_c")
    & IsSymmetric("c")
    & HasDiagonal("c", 1.0)
    & EntriesWithin("c", low=-1.0, high=1.0)
    & symmetric_within("delta", low=0.0, strict_low=True)
    & symmetric_within("tau_c", low=0.0, strict_low=True)
    & EntriesWithin("epsilon_sq", low=0.0)
)

# hermitian with a trace in [0, 1], checked on every DensityMatrix
is_physical_state = (
    HasShape("elements", lambda state: (state.dim, state.dim), "(dim, dim)")
    & IsFinite("elements")
    & IsHermitian("elements", atol=1e-12)
    & TraceWithin("elements", 0.0, 1.0 + 1e-9)
)
