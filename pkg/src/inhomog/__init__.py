"""Box-counting dimensions of inhomogeneous self-similar sets and orbital sets."""

from .boxdim import (
    CoverCount,
    DimensionFit,
    fit_dimension,
    mesh_count,
    similarity_dimension,
    sweep,
)
from .errors import (
    BudgetExceededError,
    DomainError,
    InhomogError,
    InsufficientDataError,
    InvalidWordError,
    UnsupportedGeometryError,
)
from .estimators import BoxCountingDimension
from .ifs_core import (
    CondensationSet,
    DiagonalAffineMap,
    Point,
    Rect,
    Segment,
    SimilarityMap,
    load_system,
    parse_system,
)

__version__ = "0.1.0"

__all__ = [
    "BoxCountingDimension",
    "BudgetExceededError",
    "CondensationSet",
    "CoverCount",
    "DiagonalAffineMap",
    "DimensionFit",
    "DomainError",
    "InhomogError",
    "InsufficientDataError",
    "InvalidWordError",
    "Point",
    "Rect",
    "Segment",
    "SimilarityMap",
    "UnsupportedGeometryError",
    "fit_dimension",
    "load_system",
    "mesh_count",
    "parse_system",
    "similarity_dimension",
    "sweep",
]
