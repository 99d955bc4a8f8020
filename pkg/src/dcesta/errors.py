"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Invalid basis dimension or mismatched operand dimensions."""


class InvalidParameterError(ValueError):
    """A physical parameter is outside its allowed range."""


class TruncationError(ValueError):
    """The truncated basis is too small for the requested object."""


class ProtocolError(ValueError):
    """Invalid frequency protocol, or a time outside the protocol window."""


class StepSizeError(RuntimeError):
    """Time stepping failed its norm or convergence contract."""


class LeakageError(RuntimeError):
    """Population reached the top levels of the truncated basis."""


class LeakageWarning(RuntimeWarning):
    pass


class IntegratorAccuracyError(RuntimeError):
    """An ODE trajectory violated a conserved quantity."""


class QuadratureError(RuntimeError):
    pass
