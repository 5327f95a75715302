"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An operation was called with inputs outside its contract."""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds the configured size caps."""


class VerificationError(RuntimeError):
    """An internal consistency check failed after a computation."""
