"""Exception types shared across the package."""


class ContextMismatchError(ValueError):
    """Operands live over different alphabets or different degree cuts."""


class NotLieElementError(ValueError):
    """A tensor series that was expected to be a Lie element is not one."""


class FormatError(ValueError):
    """Malformed or mistyped serialized data (a usage error, exit code 2)."""


class MathInconsistencyError(RuntimeError):
    """An exactly-posed linear problem turned out inconsistent.

    This is the "red alert" failure mode: it signals either corrupted input
    or a genuine obstruction at the current truncation, never a usage error.
    """

    def __init__(self, message, weight=None):
        super().__init__(message)
        self.weight = weight
