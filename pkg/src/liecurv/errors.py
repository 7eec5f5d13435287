"""Exception hierarchy.

Every domain failure derives from ``LieCurvError`` so the CLI can render it
with the name of the check that raised it.
"""


class LieCurvError(Exception):
    pass


class Degenerate(LieCurvError, ValueError):
    """A bilinear form (or its restriction) has a (near) null direction."""


class DegenerateSubspace(Degenerate):
    pass


class DegeneratePlane(Degenerate):
    pass


class DegenerateTangent(Degenerate):
    pass


class DegenerateNormal(Degenerate):
    pass


class LinearlyDependent(LieCurvError, ValueError):
    pass


class NotSelfAdjoint(LieCurvError, ValueError):
    pass


class NotUnit(LieCurvError, ValueError):
    pass


class NotUnitNormal(NotUnit):
    pass


class NotBiInvariant(LieCurvError, ValueError):
    """Structure constants violate the Jacobi identity or the form is not ad-invariant."""


class OffAlgebra(LieCurvError):
    """A finite-difference derivative left the span of the Lie algebra basis."""


class OrientationFlip(LieCurvError):
    pass


class InconsistentGaussTerm(LieCurvError, ValueError):
    pass


class HypothesisFailed(LieCurvError):
    pass


class NotDiagonalizable(LieCurvError):
    pass


class NotUmbilic(HypothesisFailed):
    pass


class SchemaError(LieCurvError, ValueError):
    pass
