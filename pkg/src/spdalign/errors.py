"""Exception hierarchy shared across the package.

Each family maps to a CLI exit code: contract errors exit 2, data errors
exit 3 and numerical errors exit 4.
"""


class SpdAlignError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ContractError(SpdAlignError, ValueError):
    """A caller violated a precondition (shapes, ranges, missing inputs)."""

    exit_code = 2


class DataError(SpdAlignError, ValueError):
    """Malformed or unresolvable input data."""

    exit_code = 3


class NumericalError(SpdAlignError, ArithmeticError):
    """A numerical routine failed or its input was unusable."""

    exit_code = 4


class NotPositiveDefiniteError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    def __init__(self, cond, limit):
        self.cond = cond
        self.limit = limit
        super().__init__(
            f"matrix condition number {cond:.3e} exceeds {limit:.1e}; "
            "regularize the input (e.g. spdalign.spd.regularize) before solving"
        )


class DisconnectedGraphError(NumericalError):
    pass


class DegenerateSpectrumError(NumericalError):
    pass
