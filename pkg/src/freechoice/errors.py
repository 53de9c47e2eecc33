"""Exception types shared across the package."""


class UnknownVariableError(KeyError):
    """A variable or node name is not present."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown variable"


class DegenerateEventError(ValueError):
    """Conditioning on an event of probability zero."""


class CapacityError(ValueError):
    """A size limit (variable count, dimension, enumeration cap) was exceeded."""


class ShapeError(ValueError):
    """A behavior or distribution has the wrong shape for the requested functional."""


class EliminationAborted(RuntimeError):
    """Fourier-Motzkin elimination exceeded its inequality ceiling or time budget."""

    def __init__(self, message, progress=None):
        super().__init__(message)
        self.progress = progress or {}
