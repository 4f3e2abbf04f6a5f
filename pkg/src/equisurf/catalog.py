"""Built-in examples: two bordered surfaces with an order-7 automorphism, and
the closed index sets that no rotation can realize.

The bordered Klein quartic keeps the fixed point of index 1 and loses
discs around the points of index 2 and 4.  The bordered Wiman surface
``w^2 = z^7 - 1`` keeps two fixed points of index 1 and loses a disc
around the point at infinity, index 5; its boundary is a (2,7) torus
knot, which is recorded here but not checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .topology import (
    AutomorphismType,
    QuotientData,
    lift_data_of,
    quotient_data_of,
    rotation_numerators,
)

__all__ = ["CatalogEntry", "catalog_entries", "get_entry", "entry_names"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    p: int
    fixed: tuple
    representable: bool
    type: Optional[AutomorphismType] = None
    quotient: Optional[QuotientData] = None
    q: Optional[int] = None
    expected: Optional[dict] = None

    def rotations(self) -> frozenset:
        """Admissible rotation numerators for the fixed-point indices."""
        return rotation_numerators(self.p, self.fixed)

    def to_dict(self) -> dict:
        d = {"name": self.name, "description": self.description, "p": self.p,
             "fixed": list(self.fixed), "representable": self.representable,
             "rotations": sorted(self.rotations())}
        if self.type is not None:
            d["type"] = self.type.to_dict()
            d["quotient"] = self.quotient.to_dict()
            d["q"] = self.q
            d["expected"] = dict(self.expected)
        return d


def _bordered(name, description, T, Q, q):
    if quotient_data_of(T, q) != Q or lift_data_of(Q, q) != T:
        raise AssertionError(f"catalog entry {name} is inconsistent")
    expected = {"euler_characteristic": T.euler_characteristic, "genus": T.genus,
                "boundary_count": T.k, "fixed_count": T.r,
                "fixed": list(T.fixed), "boundary": list(T.boundary)}
    return CatalogEntry(name, description, T.p, T.fixed, True, T, Q, q, expected)


def catalog_entries() -> list:
    klein_T = AutomorphismType(7, 3, (1,), (2, 4), 0)
    wiman_T = AutomorphismType(7, 3, (1, 1), (5,), 0)
    return [
        _bordered(
            "klein_quartic_bordered",
            "Klein quartic x^3y + y^3z + z^3x = 0 with small invariant discs removed around "
            "the fixed points of index 2 and 4; order-7 automorphism with index 1 at the "
            "remaining fixed point.",
            klein_T, QuotientData(7, 0, (1,), (2, 4), 0), 1,
        ),
        _bordered(
            "wiman_bordered",
            "Wiman curve w^2 = z^7 - 1 with an invariant disc removed around the point at "
            "infinity (index 5); the two finite fixed points have index 1. The boundary is "
            "a (2,7) torus knot.",
            wiman_T, QuotientData(7, 0, (1, 1), (5,), 0), 1,
        ),
        CatalogEntry(
            "klein_quartic_closed_indices",
            "Fixed-point indices {1, 2, 4} of the order-7 automorphism of the closed Klein "
            "quartic; no rotation angle is compatible with all three.",
            7, (1, 2, 4), False,
        ),
        CatalogEntry(
            "wiman_closed_indices",
            "Fixed-point indices {1, 1, 5} of the order-7 automorphism of the closed Wiman "
            "curve; no rotation angle is compatible with all three.",
            7, (1, 1, 5), False,
        ),
    ]


def entry_names() -> list:
    return [e.name for e in catalog_entries()]


def get_entry(name: str) -> CatalogEntry:
    for e in catalog_entries():
        if e.name == name:
            return e
    raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(entry_names())}")
