"""Shared exception types."""


class UsageError(ValueError):
    """Caller violated a precondition (mismatched truncations, bad index, bad input)."""


class CheckFailure(RuntimeError):
    """A verification sweep found a counterexample; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InternalError(RuntimeError):
    """An invariant the library itself guarantees was violated (always a bug)."""
