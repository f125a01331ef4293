"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed input or a violated data contract (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure inside a solver or estimator (CLI exit code 3)."""
