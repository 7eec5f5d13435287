"""Geometry of Lie groups with bi-invariant semi-Riemannian metrics.

Connection, curvature, Jacobi and shape operators of submanifold germs,
plus executable checks of the curvature-adaptedness results for groups
with closed normal bundle.
"""

__version__ = "0.1.0"

from liecurv.errors import LieCurvError
from liecurv.tolerances import Tolerances, override, tols

__all__ = ["LieCurvError", "Tolerances", "override", "tols", "__version__"]
