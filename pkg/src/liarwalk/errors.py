class ResourceLimitError(RuntimeError):
    """A configured cap (window width, solver nodes, leaves) was exceeded."""


class InvariantViolation(AssertionError):
    """An internal consistency check failed. Never expected on valid input."""
