import abc
import typing


class SpecificationError(ValueError):
    """
    Raised when a chain, noise or state specification violates its invariants.
    """


class Check(abc.ABC):
    """
    Abstract base class of a validity check.

    A check tests whether a specification value (a chain, a noise
    specification, a density matrix...) meets one invariant.
    """

    def describe(self) -> str:
        """
        Describes the invariant being checked.
        """
        return type(self).__name__

    def __repr__(self) -> str:
        return f"<Check: {self.describe().capitalize()}>"

    @abc.abstractmethod
    def test(self, value: typing.Any) -> bool:
        """
        Tests whether the invariant holds for ``value``.
        """
        ...

    def test_with_reason(self, value: typing.Any) -> typing.Tuple[bool, str]:
        """
        Returns the result of the check and the reason for the result.

        The reason is the description if the check passes, otherwise the
        negated description.
        """
        if self.test(value):
            return True, self.describe()
        return False, f"not ({self.describe()})"

    def enforce(
        self,
        value: typing.Any,
        error: typing.Type[Exception] = SpecificationError,
    ) -> None:
        """
        Raise ``error`` with the failing reason unless the check passes.
        """
        success, reason = self.test_with_reason(value)
        if not success:
            raise error(f"{type(value).__name__}: {reason}")

    def __and__(self, other: "Check") -> "AllChecks":
        if isinstance(other, AllChecks):
            return AllChecks(self, *other.checks)
        return AllChecks(self, other)


class AllChecks(Check):
    """
    Passes when all checks pass; ``&`` builds one flat ``AllChecks``.

    Evaluation stops at the first failing check, so later checks may
    rely on earlier ones (e.g. symmetry is only tested on a square matrix).
    """

    def __init__(self, *checks: Check):
        self.checks = checks
        super().__init__()

    def describe(self) -> str:
        return " and ".join(c.describe() for c in self.checks)

    def test(self, value: typing.Any) -> bool:
        return all(c.test(value) for c in self.checks)

    def test_with_reason(self, value: typing.Any) -> typing.Tuple[bool, str]:
        for c in self.checks:
            c_met, reason = c.test_with_reason(value)
            if not c_met:
                return False, reason
        return True, self.describe()

    def __and__(self, other: Check) -> "AllChecks":
        if isinstance(other, AllChecks):
            return AllChecks(*self.checks, *other.checks)
        return AllChecks(*self.checks, other)


class CheckFromTestFun(Check):
    """
    Create a check by providing a predicate and optional description.
    """

    def __init__(
        self,
        testfun: typing.Callable[[typing.Any], bool],
        description: typing.Optional[str] = None,
    ):
        assert callable(testfun)
        self.testfun = testfun
        if description is None:
            self.description = f"Test Function `{testfun.__name__}`"
        else:
            self.description = description
        super().__init__()

    def describe(self) -> str:
        return self.description

    def test(self, value: typing.Any) -> bool:
        return bool(self.testfun(value))
