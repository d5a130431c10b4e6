"""Exception hierarchy.

Three failure classes are kept apart because the CLI maps them to distinct
exit codes: bad user input (ConfigError), mathematically meaningful failure
of an algorithm at the requested truncation (MathFailure and subclasses),
and violations of internal invariants that can only mean a bug
(InvariantViolation).
"""


class SlopekitError(Exception):
    pass


class ConfigError(SlopekitError):
    """Invalid user-supplied configuration or arguments."""


class MathFailure(SlopekitError):
    """The requested computation is not possible at the given truncation.

    Not a bug: the caller can retry with more precision, more moments,
    a smaller disk, or a different slope bound.
    """


class PrecisionExhausted(MathFailure):
    """Working precision ran out before the result could be certified."""


class NoSlopeVertex(MathFailure):
    """The Newton polygon has no vertex separating slopes <= h from > h."""


class DiskTooLarge(MathFailure):
    """A family Newton polygon is not constant across the weight disk."""


class CriticalSlope(MathFailure):
    """A lifting was requested at or above the critical slope bound."""


class PointOutsideDisk(MathFailure):
    """A weight specialization point does not lie in the weight disk."""


class UnsupportedLevel(MathFailure):
    """The symbol presentation is not available at this level."""


class InvariantViolation(SlopekitError):
    """An internal consistency check failed; this signals a bug."""
