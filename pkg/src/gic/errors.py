"""Exception hierarchy shared by the library and the command line front end."""


class GICError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(GICError, ValueError):
    """Channel parameters violate their domain.

    ``violations`` is a list of ``(field, value, reason)`` triples.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(f"{f}={v!r}: {r}" for f, v, r in self.violations)
        super().__init__(text or "invalid parameters")


class RegimeError(GICError, ValueError):
    """A corner formula was asked for outside the regime where it applies."""


class DegenerateChannelError(GICError, ValueError):
    pass


class DistributionError(GICError, ValueError):
    """Malformed or unsupported distribution description."""


class DiscreteDistributionError(DistributionError):
    """The distribution has atoms, so it has no differential entropy."""


class SupportError(GICError, ValueError):
    pass


class QuadratureError(GICError, ArithmeticError):
    """Grid refinement did not reach the requested accuracy."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            message = f"{message} ({', '.join(f'{k}={v!r}' for k, v in diagnostics.items())})"
        super().__init__(message)


class DegenerateSamplesError(GICError, ValueError):
    pass


class GridRefinementError(GICError, ArithmeticError):
    """A transport table cannot resolve the target density."""


class MapRangeError(GICError, ValueError):
    """A point lies outside the tabulated range of a transport map."""


class MapConstructionError(GICError, RuntimeError):
    """A built map violates its own invariants (non-positive Jacobian diagonal)."""
