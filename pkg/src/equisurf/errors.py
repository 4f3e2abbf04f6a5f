"""Exception hierarchy shared by all subpackages.

The CLI maps these onto exit codes, so new errors should subclass one of
the four families below rather than ``Exception`` directly.
"""


class EquisurfError(Exception):
    """Base class for every error raised by :mod:`equisurf`."""


class ValidationError(EquisurfError, ValueError):
    """An input value violates a documented invariant."""


class PrimeError(ValidationError):
    """``p`` is not an odd prime (``p = 2`` is rejected on purpose)."""


class InfeasibleTypeError(ValidationError):
    """Riemann-Hurwitz has no non-negative integer solution."""


class NotRepresentableError(EquisurfError):
    """The requested rotation angle cannot realize the fixed-point data."""


class MeshStructureError(EquisurfError):
    """A triangle list is not a valid surface mesh."""


class NonOrientableError(MeshStructureError):
    """Triangle windings cannot be made coherent."""


class LinkingError(EquisurfError):
    """A loop is too close to the axis or sampled too coarsely."""


class ConstructionError(EquisurfError):
    """A geometric assembly step failed its own post-conditions."""


class LiftError(ConstructionError):
    """Covering data on an annotated mesh is inconsistent."""


class EquivarianceError(EquisurfError):
    """A vertex permutation does not realize the rotation."""
