"""Shared exception types with CLI exit-code semantics."""


class CheckFailedError(AssertionError):
    """A mathematical consistency check did not hold (CLI exit 1)."""


class InvalidInputError(ValueError):
    """Malformed or out-of-contract input (CLI exit 2)."""


class SizeGuardError(RuntimeError):
    """A combinatorial size guard was exceeded (CLI exit 3)."""
