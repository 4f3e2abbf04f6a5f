"""Topological types of prime-order automorphisms of bordered surfaces.

A type is recorded by the rotation indices of the fixed points, the
rotation indices of the invariant boundary circles and the number of
boundary circles permuted freely.  Indices are residues ``n`` in
``1..p-1`` standing for the angle ``2*pi*n/p``; a bordered Klein surface
carries no preferred orientation, so a type and its global negation
(every ``n`` replaced by ``p - n``) describe the same automorphism.

The quotient side is :class:`QuotientData`: the orbit surface genus, the
monodromy residues of the conic points and of the boundary components.
Fixed indices and conic residues use the same numbers, as do invariant
boundary indices and boundary residues, so the long relation of the
orbifold group reads ``sum(conic) + sum(boundary) == 0 (mod p)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import (
    InfeasibleTypeError,
    NotRepresentableError,
    PrimeError,
    ValidationError,
)

__all__ = [
    "RotationIndex",
    "AutomorphismType",
    "QuotientData",
    "QuotientReport",
    "is_odd_prime",
    "check_prime",
    "negate",
    "normalize",
    "are_equivalent",
    "is_representable",
    "rotation_numerators",
    "complex_double_genus",
    "quotient_data_of",
    "lift_data_of",
    "validate_quotient",
    "enumerate_types",
]


def is_odd_prime(p) -> bool:
    if not isinstance(p, int) or isinstance(p, bool) or p < 3:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def check_prime(p) -> int:
    if p == 2:
        raise PrimeError("p = 2 is not supported; only odd primes are")
    if not is_odd_prime(p):
        raise PrimeError(f"p must be an odd prime, got {p!r}")
    return p


def _check_residues(values, p, what):
    out = []
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"{what}: residue {v!r} is not an integer")
        if not 1 <= v <= p - 1:
            raise ValidationError(f"{what}: residue {v} outside 1..{p - 1}")
        out.append(v)
    return tuple(out)


def _check_count(value, what, minimum=0):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ValidationError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


@dataclass(frozen=True, order=True)
class RotationIndex:
    """The angle ``2*pi*numerator/prime`` of a local rotation."""

    numerator: int
    prime: int

    def __post_init__(self):
        check_prime(self.prime)
        _check_residues([self.numerator], self.prime, "rotation index")

    def negate(self) -> "RotationIndex":
        return RotationIndex(self.prime - self.numerator, self.prime)

    @property
    def angle(self) -> float:
        return 2.0 * math.pi * self.numerator / self.prime


@dataclass(frozen=True)
class AutomorphismType:
    """Topological type of ``(S, f)`` with ``f`` of odd prime order ``p``.

    ``fixed`` and ``boundary`` are multisets and are stored sorted.
    ``free_orbits`` counts orbits of ``p`` boundary circles cycled by ``f``.
    """

    p: int
    genus: int
    fixed: tuple = ()
    boundary: tuple = ()
    free_orbits: int = 0

    def __post_init__(self):
        check_prime(self.p)
        _check_count(self.genus, "genus")
        _check_count(self.free_orbits, "free_orbits")
        fixed = tuple(sorted(_check_residues(self.fixed, self.p, "fixed")))
        boundary = tuple(sorted(_check_residues(self.boundary, self.p, "boundary")))
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "boundary", boundary)
        if self.k < 1:
            raise ValidationError("surface must have at least one boundary component")
        if complex_double_genus(self.genus, self.k) <= 1:
            raise ValidationError(
                f"complex double genus {complex_double_genus(self.genus, self.k)} <= 1"
            )

    @property
    def r(self) -> int:
        return len(self.fixed)

    @property
    def t(self) -> int:
        return len(self.boundary)

    @property
    def k(self) -> int:
        return self.t + self.p * self.free_orbits

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.k

    def fixed_indices(self) -> list[RotationIndex]:
        return [RotationIndex(n, self.p) for n in self.fixed]

    def boundary_indices(self) -> list[RotationIndex]:
        return [RotationIndex(n, self.p) for n in self.boundary]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "genus": self.genus,
            "fixed": list(self.fixed),
            "boundary": list(self.boundary),
            "free_orbits": self.free_orbits,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AutomorphismType":
        try:
            return cls(
                p=data["p"],
                genus=data["genus"],
                fixed=tuple(data.get("fixed", ())),
                boundary=tuple(data.get("boundary", ())),
                free_orbits=data.get("free_orbits", 0),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed automorphism type: {exc}") from exc


@dataclass(frozen=True)
class QuotientData:
    """Orbit surface of the action together with its monodromy.

    Only range checks happen on construction; the structural rules are
    reported by :func:`validate_quotient` so that bad data can be
    inspected.  ``boundary`` keeps its order: the construction builds an
    annulus for every entry but the last one.
    """

    p: int
    quotient_genus: int
    conic: tuple = ()
    boundary: tuple = ()
    trivial_boundaries: int = 0

    def __post_init__(self):
        check_prime(self.p)
        _check_count(self.quotient_genus, "quotient_genus")
        _check_count(self.trivial_boundaries, "trivial_boundaries")
        conic = tuple(sorted(_check_residues(self.conic, self.p, "conic")))
        object.__setattr__(self, "conic", conic)
        object.__setattr__(
            self, "boundary", _check_residues(self.boundary, self.p, "boundary")
        )

    @property
    def r(self) -> int:
        return len(self.conic)

    @property
    def t(self) -> int:
        return len(self.boundary)

    @property
    def l(self) -> int:  # noqa: E743
        return self.trivial_boundaries

    @property
    def euler_characteristic(self) -> int:
        """Euler characteristic of the orbit surface (cone points ignored)."""
        return 2 - 2 * self.quotient_genus - self.t - self.l

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "quotient_genus": self.quotient_genus,
            "conic": list(self.conic),
            "boundary": list(self.boundary),
            "trivial_boundaries": self.trivial_boundaries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuotientData":
        try:
            return cls(
                p=data["p"],
                quotient_genus=data["quotient_genus"],
                conic=tuple(data.get("conic", ())),
                boundary=tuple(data.get("boundary", ())),
                trivial_boundaries=data.get("trivial_boundaries", 0),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed quotient data: {exc}") from exc


@dataclass(frozen=True)
class QuotientReport:
    ok: bool
    rule: str | None = None
    message: str = ""
    checked: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "rule": self.rule, "message": self.message}


def negate(T: AutomorphismType) -> AutomorphismType:
    p = T.p
    return AutomorphismType(
        p=p,
        genus=T.genus,
        fixed=tuple(p - n for n in T.fixed),
        boundary=tuple(p - n for n in T.boundary),
        free_orbits=T.free_orbits,
    )


def _order_key(T: AutomorphismType):
    return (T.fixed, T.boundary)


def normalize(T: AutomorphismType) -> AutomorphismType:
    """Canonical representative of ``{T, negate(T)}``.

    The smaller of the two under lexicographic comparison of
    ``(sorted fixed, sorted boundary)`` is returned.
    """
    N = negate(T)
    return T if _order_key(T) <= _order_key(N) else N


def are_equivalent(T1: AutomorphismType, T2: AutomorphismType) -> bool:
    if (T1.p, T1.genus, T1.t, T1.free_orbits) != (T2.p, T2.genus, T2.t, T2.free_orbits):
        return False
    return normalize(T1) == normalize(T2)


def is_representable(T: AutomorphismType) -> frozenset:
    """All ``q`` in ``(0, p/2)`` such that every fixed index is ``q`` or ``p - q``.

    Boundary indices impose nothing; an empty result means no rotation
    realizes ``T``.
    """
    return rotation_numerators(T.p, T.fixed)


def rotation_numerators(p: int, fixed) -> frozenset:
    """The representability criterion on a bare list of fixed-point indices.

    Useful for closed surfaces, which :class:`AutomorphismType` does not model.
    """
    check_prime(p)
    fixed = [n % p for n in fixed]
    return frozenset(
        q for q in range(1, (p - 1) // 2 + 1) if all(n in (q, p - q) for n in fixed)
    )


def complex_double_genus(genus: int, k: int) -> int:
    if k < 1:
        raise ValidationError("a bordered surface needs k >= 1")
    return 2 * genus + k - 1


def validate_quotient(Q: QuotientData) -> QuotientReport:
    """Check the rules a monodromy must satisfy; the first failure is named."""
    checked = []
    rules = (
        ("residue_sum", (sum(Q.conic) + sum(Q.boundary)) % Q.p == 0,
         f"sum of residues {sum(Q.conic) + sum(Q.boundary)} is not 0 mod {Q.p}"),
        ("surjective", Q.r + Q.t >= 1,
         "no conic point and no invariant boundary: r + t = 0"),
        ("bordered", Q.t + Q.l >= 1, "orbit surface has no boundary: t + l = 0"),
    )
    for name, ok, message in rules:
        checked.append(name)
        if not ok:
            return QuotientReport(False, name, message, tuple(checked))
    return QuotientReport(True, None, "", tuple(checked))


def _check_rotation_numerator(p, q):
    if not isinstance(q, int) or not 0 < q < p / 2:
        raise NotRepresentableError(f"rotation numerator must satisfy 0 < q < p/2, got {q!r}")


def quotient_data_of(T: AutomorphismType, q: int) -> QuotientData:
    """Orbit surface and monodromy of a type realized by the rotation ``2*pi*q/p``."""
    _check_rotation_numerator(T.p, q)
    if q not in is_representable(T):
        raise NotRepresentableError(
            f"fixed indices {list(T.fixed)} are not all +-{q} mod {T.p}"
        )
    p, r, t, l = T.p, T.r, T.t, T.free_orbits
    chi_down, rem = divmod(T.euler_characteristic + r * (p - 1), p)
    if rem:
        raise InfeasibleTypeError("Riemann-Hurwitz: chi(S) + r(p-1) not divisible by p")
    twice_genus = 2 - t - l - chi_down
    if twice_genus < 0 or twice_genus % 2:
        raise InfeasibleTypeError(
            f"Riemann-Hurwitz gives non-integral or negative orbit genus {twice_genus / 2}"
        )
    Q = QuotientData(p, twice_genus // 2, T.fixed, T.boundary, l)
    report = validate_quotient(Q)
    if not report.ok:
        raise ValidationError(f"{report.rule}: {report.message}")
    return Q


def lift_data_of(Q: QuotientData, q: int) -> AutomorphismType:
    """Type of the cyclic branched cover determined by ``Q`` and the rotation ``2*pi*q/p``."""
    report = validate_quotient(Q)
    if not report.ok:
        raise ValidationError(f"{report.rule}: {report.message}")
    p = Q.p
    _check_rotation_numerator(p, q)
    bad = [n for n in Q.conic if n not in (q, p - q)]
    if bad:
        raise NotRepresentableError(
            f"conic residues {bad} cannot come from a rotation by 2*pi*{q}/{p}"
        )
    chi_up = p * Q.euler_characteristic - Q.r * (p - 1)
    k = Q.t + p * Q.l
    twice_genus = 2 - k - chi_up
    if twice_genus < 0 or twice_genus % 2:
        raise InfeasibleTypeError(f"lifted genus {twice_genus / 2} is not a non-negative integer")
    return AutomorphismType(p, twice_genus // 2, Q.conic, Q.boundary, Q.l)


def enumerate_types(p: int, genus: int, k: int) -> list[AutomorphismType]:
    """Every normalized type on a genus-``genus`` surface with ``k`` boundary circles.

    A type is kept when its residues satisfy the long relation and the
    Riemann-Hurwitz formula produces an orbit surface; representability
    by a rotation is *not* required.
    """
    check_prime(p)
    if genus < 0 or k < 1 or complex_double_genus(genus, k) <= 1:
        return []
    chi_up = 2 - 2 * genus - k
    found = set()
    for l in range(k // p + 1):
        t = k - p * l
        g_q = 0
        while True:
            chi_down = 2 - 2 * g_q - t - l
            numer = p * chi_down - chi_up
            if numer < 0:
                break
            g_q += 1
            if numer % (p - 1):
                continue
            r = numer // (p - 1)
            if r + t == 0:
                continue
            residues = range(1, p)
            for fixed in itertools.combinations_with_replacement(residues, r):
                sf = sum(fixed)
                for bnd in itertools.combinations_with_replacement(residues, t):
                    if (sf + sum(bnd)) % p:
                        continue
                    found.add(normalize(AutomorphismType(p, genus, fixed, bnd, l)))
    return sorted(found, key=lambda T: (T.free_orbits, T.fixed, T.boundary))
