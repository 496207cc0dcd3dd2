"""Exception types shared across the package.

Each class names one failure mode of one operation; nothing here carries
state beyond the message.
"""


class ReprogramLabError(Exception):
    """Base class for all package-specific errors."""


class GramNotPositiveDefinite(ReprogramLabError):
    """A Cholesky pivot fell below the positive-definiteness floor.

    Signals a (numerically) rank-deficient Gram matrix, i.e. linearly
    dependent rows in the system being solved.
    """


class ConvergenceFailure(ReprogramLabError):
    """An iterative solver exhausted its iteration budget."""


class DimensionMismatch(ReprogramLabError):
    """An input vector's length does not match the expected dimension."""


class TieEncountered(ReprogramLabError):
    """A sign that should be nonzero almost surely came out as (near) zero.

    Raised instead of silently assigning a side, so that degenerate inputs
    surface in tests rather than skewing statistics.
    """


class WidthExceedsDimension(ReprogramLabError):
    """Program construction requires network width <= input dimension."""


class ChannelMismatch(ReprogramLabError):
    """Two images that must share a channel count do not."""


class GenerationExhausted(ReprogramLabError):
    """A rejection-sampling generator ran out of retries."""


class LivenessExhausted(ReprogramLabError):
    """Initialisation retries ran out before the live condition held."""


class NonFiniteLoss(ReprogramLabError):
    """Training produced a non-finite loss (step size too large)."""


class Infeasible(ReprogramLabError):
    """The margin problem has no feasible point (dual unbounded)."""


class HypothesisViolated(ReprogramLabError):
    """A closed-form bound was requested outside its stated hypothesis."""


class ExponentConditionViolated(ReprogramLabError):
    """Growth-rate exponents fail the strict inequalities they must satisfy."""


class ConfigError(ReprogramLabError):
    """A run configuration is malformed; the message names the offending key."""
