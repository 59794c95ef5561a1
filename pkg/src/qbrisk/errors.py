"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for every error raised by qbrisk."""


class InvalidInput(ToolkitError):
    """Malformed input: wrong shape, non-finite entries, dimension mismatch."""


class NotPSD(ToolkitError):
    """Matrix expected to be positive semidefinite has an eigenvalue below tolerance."""


class DegeneratePrior(ToolkitError):
    """Prior density is identically zero on the requested quadrature box."""


class SingularAveragedState(ToolkitError):
    """Averaged state (or dressed block state) is singular where an inverse is required."""


class IllConditionedLDEquation(ToolkitError):
    """A denominator in the eigenbasis solve of the LD-type operator equation is too small."""


class UnsupportedWeight(ToolkitError):
    """Bound requires a constant weight matrix but a varying one was supplied."""


class SolverError(ToolkitError):
    """SDP backend failed or returned a non-optimal status."""


class ProblemTooLarge(ToolkitError):
    """Assembled SDP exceeds the documented desk-scale size limits."""


class DegenerateWeight(ToolkitError):
    """Posterior-averaged weight matrix is singular for some outcome."""


class NotClassical(ToolkitError):
    """Model states do not commute pairwise; no common eigenbasis exists."""


class InternalInconsistency(ToolkitError):
    """Two independent evaluations of the same quantity disagree beyond tolerance."""
