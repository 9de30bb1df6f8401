"""Exceptions shared across the library.

Every error that a caller can act on gets its own class; plain ValueError
is reserved for malformed arguments (wrong types, bad invariants at
construction time).
"""


class RankOneError(Exception):
    """Base class for library errors."""


class DepthExceeded(RankOneError):
    """A stage beyond the prefix of a cycle-less spec was requested."""


class CardinalityBudgetExceeded(RankOneError):
    """A materialized sumset would exceed the configured element budget."""

    def __init__(self, needed, budget):
        super().__init__(f"sumset of {needed} elements exceeds budget {budget}")
        self.needed = needed
        self.budget = budget


class OutOfRange(RankOneError):
    """An index or set argument lies outside its documented domain."""


class NotIndependent(RankOneError):
    """0-1 polynomial product produced a coefficient >= 2 (sumset overlap)."""

    def __init__(self, degree):
        super().__init__(f"coefficient >= 2 at degree {degree}")
        self.degree = degree


class NotCommensurate(RankOneError):
    """No alignment shift makes the two height sequences eventually equal."""


class PreconditionRigid(RankOneError):
    """Operation requires a non-rigid transformation."""


class NotAdapted(RankOneError):
    """Operation requires an adapted spec (no spacers over the last column)."""


class NotPositive(RankOneError):
    """Operation requires all C-sets inside the non-negative integers."""


class DegenerateDrop(RankOneError):
    """Expansive transform would leave fewer than two columns in a stage."""


class NotTelescoped(RankOneError):
    """Expansive transform needs unbounded cut counts; telescope first."""


class StandardnessUnverified(RankOneError):
    """The (1-3) inclusion check failed at the requested depth."""
