"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """Invalid argument (mismatched base points, empty sets, bad ranges)."""


class UnsupportedError(ValueError):
    """Operation not available for this spacetime family or time function."""


class NumericalError(RuntimeError):
    """A numerical step failed (singular metric, non-convergent solve)."""


class DomainEscapeError(RuntimeError):
    """A geodesic left the chart domain before parameter 1.

    Carries the fraction of the parameter interval completed before the
    escape and the last in-domain coordinates.
    """

    def __init__(self, message, exit_fraction, last_coords=None):
        super().__init__(message)
        self.exit_fraction = float(exit_fraction)
        self.last_coords = last_coords


class CurveValidationError(ValueError):
    """A curve failed structural or causal validation."""


class DegenerateConfigurationError(ValueError):
    """Apex construction hit a vanishing denominator or zero offset."""


class OutOfNeighborhoodError(ValueError):
    """Requested chart point lies outside the certified neighborhood."""


class PreconditionError(ValueError):
    """A numerically checked precondition failed."""


class NotTemporalOnSample(RuntimeError):
    """The sampled anti-Lipschitz constant came out nonpositive.

    The offending minimum is stored in ``value``.
    """

    def __init__(self, value):
        super().__init__(f"sampled anti-Lipschitz constant is nonpositive: {value}")
        self.value = float(value)


class ConfigError(ValueError):
    """Experiment config failed to parse or validate."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
