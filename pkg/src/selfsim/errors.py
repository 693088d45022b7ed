"""Exception hierarchy.

Every error raised deliberately by the library derives from
:class:`SelfSimError` so callers (the CLI in particular) can map failures
onto exit codes without catching unrelated exceptions.
"""


class SelfSimError(Exception):
    """Base class for all library errors."""


class DomainError(SelfSimError, ValueError):
    """State outside the physical domain (e.g. negative density)."""


class OutOfBallError(SelfSimError):
    """A state left the phase-space ball, or an inversion failed to converge."""


class HyperbolicityError(SelfSimError):
    """Spectrum is complex or incompatible with the expected multiplicities."""


class ClassificationError(SelfSimError):
    """A characteristic field is neither GNL nor LD on the sampled ball."""


class ContourError(SelfSimError):
    """An eigenvalue lies (almost) on the resolvent contour."""


class ConvexityError(SelfSimError):
    """The reduced entropy is not definite where it must be."""


class LocusError(SelfSimError):
    """Newton iteration for a Hugoniot point diverged."""


class FrameError(SelfSimError):
    """Eigenframe continuation failed (basis flip or collapse)."""


class SolverError(SelfSimError):
    """Newton iteration on wave strengths did not converge."""


class CompositionError(SelfSimError):
    """Requested waves cannot be composed into an admissible fan."""


class StructureError(CompositionError):
    """Composition violates a structural rule (consecutive simple waves)."""


class ConfigurationError(SelfSimError, ValueError):
    """Invalid run configuration or parameter choice."""


class ProfileFormatError(SelfSimError, ValueError):
    """Malformed profile CSV."""
