"""Rotation-equivariant embedded surfaces built from cyclic branched covers."""

from .errors import (
    ConstructionError,
    EquisurfError,
    EquivarianceError,
    InfeasibleTypeError,
    LiftError,
    LinkingError,
    MeshStructureError,
    NonOrientableError,
    NotRepresentableError,
    PrimeError,
    ValidationError,
)
from .topology import (
    AutomorphismType,
    QuotientData,
    RotationIndex,
    are_equivalent,
    enumerate_types,
    is_representable,
    lift_data_of,
    normalize,
    quotient_data_of,
    validate_quotient,
)

__version__ = "0.1.0"
