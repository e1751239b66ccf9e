class NumericalToleranceError(RuntimeError):
    """A solver left its accuracy envelope (norm growth, drift, oracle mismatch)."""
