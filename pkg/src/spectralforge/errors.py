"""Exception hierarchy for spectralforge.

All domain errors derive from :class:`SpectralForgeError` so callers (and the
CLI) can distinguish validation failures from genuine bugs, which raise
:class:`InternalError`.
"""


class SpectralForgeError(Exception):
    """Base class for all domain-level errors."""


class ValidationError(SpectralForgeError):
    """A domain object violates one of its structural invariants."""


class DegenerateRangeError(SpectralForgeError):
    """Spectral range is zero, so target ratios are undefined."""


class DimensionMismatchError(SpectralForgeError):
    """Operands have incompatible dimensions."""


class NotUnitaryError(SpectralForgeError):
    """A matrix expected to be unitary is not, beyond tolerance."""


class NoDirectionError(SpectralForgeError):
    """The constraint nullspace admits no direction with nonzero range."""


class InfeasibleError(SpectralForgeError):
    """A linear program has no feasible point."""


class UnboundedError(SpectralForgeError):
    """A linear program is unbounded along an improving direction."""


class IndexOutOfRangeError(SpectralForgeError, IndexError):
    """A split/index argument lies outside its admissible range."""


class MatchingFailedError(SpectralForgeError):
    """No perfect matching exists on the positive support of a weight matrix."""


class NoFeasibleChainError(SpectralForgeError):
    """No sampled swap chain admits the requested target ratios."""


class SingularSupportError(SpectralForgeError):
    """The first-moment operator has weight outside the averaged state's support."""


class ParseError(SpectralForgeError):
    """An input file could not be parsed."""


class TooFewLevelsError(SpectralForgeError):
    """A level table contains fewer than two usable rows."""


class UnknownFigureError(SpectralForgeError):
    """Requested study identifier is not one of the bundled pipelines."""


class InternalError(Exception):
    """An internal invariant was breached; indicates a bug, never user error."""
