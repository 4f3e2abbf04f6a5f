"""Read the realized automorphism type off an equivariant mesh.

Everything here is combinatorial except the coordinate residual of the
rotation: fixed-point indices come from the orientation of link circles,
boundary indices from the axis linking number of invariant loops, and
orbit structure from the vertex permutation.

Index convention
----------------
For a fixed vertex whose link circle (oriented as the boundary of its
star) links the axis ``sigma = +-1`` times, the rotation by ``2*pi*q/p``
acts near it as ``z -> exp(2*pi*i*q*sigma/p) z`` in the surface's own
complex coordinate, so the index is ``q*sigma mod p``.

An invariant boundary loop is capped off by a disc on the opposite side
of the surface, so the cap's centre sees the loop with the reversed
orientation: the index is ``-q*Lk(loop) mod p`` with ``loop`` oriented
by the surface.  The raw cyclic shift ``e`` of ``rho`` along the loop
(measured in units of ``n/p`` vertices, against the surface orientation)
is reported too; it satisfies ``index * e = q^2 mod p``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import meshkit as mk
from .construction import EquivariantMesh
from .errors import EquivarianceError, MeshStructureError
from .topology import AutomorphismType, RotationIndex, normalize

__all__ = [
    "EQUIV_TOL",
    "VerificationReport",
    "check_equivariance",
    "fixed_point_indices",
    "boundary_orbit_structure",
    "boundary_shifts",
    "realized_type",
    "verify_against",
]

EQUIV_TOL = 1e-9


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def add(self, name, expected, observed, ok=None):
        if ok is None:
            ok = expected == observed
        self.checks.append({"name": name, "expected": expected, "observed": observed,
                            "pass": bool(ok)})

    def failures(self) -> list:
        return [c["name"] for c in self.checks if not c["pass"]]

    def to_dict(self) -> dict:
        return {"overall": self.overall, "checks": list(self.checks), "details": dict(self.details)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def _rotation(p):
    c, s = math.cos(2 * math.pi / p), math.sin(2 * math.pi / p)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def check_equivariance(E: EquivariantMesh) -> float:
    """Max relative error of ``R(2*pi/p) v`` against ``v``'s assigned image.

    Raises :class:`EquivarianceError` if the permutation is not a
    bijection of order ``p`` or does not carry oriented triangles to
    oriented triangles.
    """
    V, T = E.mesh.vertices, E.mesh.triangles
    perm = np.asarray(E.vertex_permutation, dtype=np.int64)
    n = len(V)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise EquivarianceError("vertex permutation is not a bijection")
    power = np.arange(n)
    for _ in range(E.p):
        power = perm[power]
    if not np.array_equal(power, np.arange(n)):
        raise EquivarianceError(f"vertex permutation does not have order dividing {E.p}")

    def canon(tris):
        k = np.argmin(tris, axis=1)
        rows = np.arange(len(tris))
        return np.stack([tris[rows, k], tris[rows, (k + 1) % 3], tris[rows, (k + 2) % 3]], axis=1)

    a = canon(T)
    b = canon(perm[T])
    ka = np.unique(a, axis=0)
    kb = np.unique(b, axis=0)
    if len(ka) != len(kb) or not np.array_equal(ka, kb):
        raise EquivarianceError("permutation does not map oriented triangles onto themselves")

    image = V @ _rotation(E.p).T
    err = np.linalg.norm(image - V[perm], axis=1)
    scale = max(1.0, float(np.abs(V).max())) if n else 1.0
    return float(err.max() / scale) if n else 0.0


def _fixed_vertices(E):
    perm = np.asarray(E.vertex_permutation)
    return np.nonzero(perm == np.arange(len(perm)))[0]


def _link_sign(E, v):
    T = E.mesh.triangles
    star = T[(T == v).any(axis=1)]
    if len(star) == 0:
        raise MeshStructureError(f"fixed vertex {v} has no incident triangles")
    nxt = {}
    for tri in star:
        i = list(tri).index(v)
        a, b = int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])
        if a in nxt:
            raise MeshStructureError(f"fixed vertex {v} is not a manifold point")
        nxt[a] = b
    start = min(nxt)
    loop, cur = [start], nxt[start]
    while cur != start:
        if cur not in nxt or len(loop) > len(nxt):
            raise MeshStructureError(f"fixed vertex {v} lies on the boundary or is singular")
        loop.append(cur)
        cur = nxt[cur]
    if len(loop) != len(nxt):
        raise MeshStructureError(f"link of fixed vertex {v} is disconnected")
    sigma = mk.winding_number(E.mesh.vertices[loop])
    if sigma not in (1, -1):
        raise MeshStructureError(f"link circle of vertex {v} links the axis {sigma} times")
    return sigma


def fixed_point_indices(E: EquivariantMesh) -> list:
    """Index numerators ``q*sigma mod p`` of the fixed vertices, sorted."""
    out = []
    V = E.mesh.vertices
    for v in _fixed_vertices(E):
        if math.hypot(V[v, 0], V[v, 1]) > mk.AXIS_TOL:
            raise MeshStructureError(f"fixed vertex {v} is off the axis")
        out.append(RotationIndex(E.q * _link_sign(E, v) % E.p, E.p))
    return sorted(out, key=lambda x: x.numerator)


def _loop_orbits(E, loops):
    rho = E.rho()
    owner = {}
    for i, lp in enumerate(loops):
        for v in lp:
            owner[v] = i
    image = []
    for lp in loops:
        targets = {owner.get(int(rho[v]), -1) for v in lp}
        if len(targets) != 1 or -1 in targets:
            raise EquivarianceError("rotation does not map boundary loops to boundary loops")
        image.append(targets.pop())
    seen, orbits = set(), []
    for i in range(len(loops)):
        if i in seen:
            continue
        orb, j = [], i
        while j not in orb:
            orb.append(j)
            j = image[j]
        if j != i:
            raise EquivarianceError("loop permutation is not a bijection")
        seen.update(orb)
        orbits.append(orb)
    return orbits


def boundary_orbit_structure(E: EquivariantMesh):
    """``(invariant boundary indices, free orbit count)`` for the action of ``rho``."""
    loops = mk.boundary_loops(E.mesh)
    indices, free = [], 0
    for orb in _loop_orbits(E, loops):
        if len(orb) == E.p:
            free += 1
        elif len(orb) == 1:
            lk = mk.linking_number_with_axis(loops[orb[0]], E.mesh)
            beta = (-E.q * lk) % E.p
            if beta == 0:
                raise EquivarianceError("invariant loop with linking number divisible by p")
            indices.append(RotationIndex(beta, E.p))
        else:
            raise EquivarianceError(f"boundary orbit of size {len(orb)}")
    return sorted(indices, key=lambda x: x.numerator), free


def boundary_shifts(E: EquivariantMesh) -> list:
    """Raw shift ``e`` of ``rho`` along each invariant loop, read against its orientation."""
    loops = mk.boundary_loops(E.mesh)
    rho = E.rho()
    out = []
    for orb in _loop_orbits(E, loops):
        if len(orb) != 1:
            continue
        lp = loops[orb[0]][::-1]
        n = len(lp)
        if n % E.p:
            raise EquivarianceError("invariant loop length not divisible by p")
        pos = {v: i for i, v in enumerate(lp)}
        d = (pos[int(rho[lp[0]])] - 0) % n
        out.append(d // (n // E.p) % E.p)
    return sorted(out)


def realized_type(E: EquivariantMesh) -> AutomorphismType:
    fixed = [x.numerator for x in fixed_point_indices(E)]
    boundary, free = boundary_orbit_structure(E)
    return AutomorphismType(E.p, mk.genus(E.mesh), tuple(fixed),
                            tuple(x.numerator for x in boundary), free)


def verify_against(E: EquivariantMesh, target: AutomorphismType,
                   check_embedding=True, equiv_tol=EQUIV_TOL) -> VerificationReport:
    """Compare the realized type of ``E`` with ``target`` after normalization.

    Never raises for a mathematical mismatch; structural failures become
    failing report entries.
    """
    rep = VerificationReport()
    M = E.mesh
    tn = normalize(target)
    rep.add("connectivity", 1, mk.connected_components(M))
    rep.add("orientability", True, mk.is_coherently_oriented(M))
    rep.add("euler_characteristic", tn.euler_characteristic, mk.euler_characteristic(M))
    loops = mk.boundary_loops(M)
    twice = 2 - len(loops) - mk.euler_characteristic(M)
    rep.add("genus", tn.genus, twice // 2 if twice >= 0 and twice % 2 == 0 else twice / 2)
    rep.add("boundary_count", tn.k, len(loops))
    rep.add("fixed_point_count", tn.r, int(len(_fixed_vertices(E))))

    observed = None
    try:
        fixed = [x.numerator for x in fixed_point_indices(E)]
        boundary, free = boundary_orbit_structure(E)
        boundary = [x.numerator for x in boundary]
        observed = _normal_parts(E.p, fixed, boundary)
        rep.details = {"raw_fixed": fixed, "raw_boundary": boundary,
                       "boundary_shifts": boundary_shifts(E), "q": E.q}
    except (MeshStructureError, EquivarianceError, mk.LinkingError) as exc:
        fixed = boundary = free = f"error: {exc}"
    if observed is None:
        rep.add("fixed_indices", list(tn.fixed), fixed, False)
        rep.add("boundary_indices", list(tn.boundary), boundary, False)
        rep.add("free_orbits", tn.free_orbits, free, False)
    else:
        rep.add("fixed_indices", list(tn.fixed), observed[0])
        rep.add("boundary_indices", list(tn.boundary), observed[1])
        rep.add("free_orbits", tn.free_orbits, free)

    try:
        res = check_equivariance(E)
        rep.add("equivariance_residual", f"< {equiv_tol:g}", res, res < equiv_tol)
    except EquivarianceError as exc:
        rep.add("equivariance_residual", f"< {equiv_tol:g}", f"error: {exc}", False)
    if check_embedding:
        hits = mk.self_intersects(M)
        rep.add("embeddedness", 0, len(hits))
    return rep


def _normal_parts(p, fixed, boundary):
    """Normal form of raw index lists, matching :func:`normalize` on types."""
    a = (sorted(fixed), sorted(boundary))
    b = (sorted((p - x) % p for x in fixed), sorted((p - x) % p for x in boundary))
    return list(min(a, b))
