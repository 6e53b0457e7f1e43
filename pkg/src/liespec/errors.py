"""Exception hierarchy; each class maps to one CLI exit code."""


class LiespecError(Exception):
    exit_code = 1


class InputError(LiespecError, ValueError):
    """Malformed or inconsistent input (dimension mismatch, non-SPD Gram, bad file)."""

    exit_code = 2


class DomainError(InputError):
    """Input outside the domain where an operation is defined."""


class ResourceError(LiespecError, RuntimeError):
    """A computation would exceed its budget, or a cutoff cannot certify a result."""

    exit_code = 3

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class HypothesisError(LiespecError):
    """The group does not satisfy the hypothesis an operation relies on."""

    exit_code = 4
