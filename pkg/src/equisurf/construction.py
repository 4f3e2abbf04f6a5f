"""Fundamental surface in the quotient and its cyclic branched lift.

The quotient of R^3 by a rotation of order ``p`` about ``Oz`` is again
R^3, with quotient map ``(r, theta, z) -> (r, p*theta, z)``.  A surface
``M`` that meets the axis transversally in ``r`` points lifts to a
rotation-invariant surface; the lift of a loop in ``M`` closes up after
as many sheets as its axis linking number dictates.

Pieces of ``M`` are laid out so that clearances are large compared with
band widths:

* disc ``i`` is the unit disc at height ``z = i``, the only piece that
  touches the axis;
* annulus ``m`` is a spiral band around the circle ``r = 2`` in the slab
  ``-m-1 < z < -m``;
* the genus block is a voxel slab below every annulus;
* bands run in their own meridional half-planes ("slots") near
  ``theta = pi``, two angular steps apart.

Edge crossings with the half-plane ``theta = 0`` are computed from
vertex angles; every edge spans less than a quarter turn, which makes
the count unambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import meshkit as mk
from .errors import ConstructionError, LiftError, NotRepresentableError, ValidationError
from .topology import QuotientData, check_prime, validate_quotient

__all__ = [
    "Port",
    "AnnotatedMesh",
    "EquivariantMesh",
    "annotate",
    "combine",
    "make_disc",
    "make_annulus",
    "make_genus_block",
    "attach_handle",
    "annulus_linking",
    "assemble_fundamental",
    "branched_lift",
    "build",
]

TWO_PI = 2.0 * math.pi

ANNULUS_RADIUS = 2.0
ANNULUS_A_IN = 0.15
ANNULUS_A_OUT = 0.4
DISC_LANE = 1.5
OUTER_LANE = 3.2
BLOCK_CELL = 0.3
LEAD = 0.12
FILLET = 0.15
STEP = 0.1
MIN_ANNULUS_EDGES = 48


class Port(NamedTuple):
    """A boundary edge ``a -> b`` (as its triangle traverses it) to glue a band to."""

    a: int
    b: int
    exit: tuple


def _cyl(r, theta, z):
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=-1)


def _e_r(theta):
    return np.array([math.cos(theta), math.sin(theta), 0.0])


def _e_theta(theta):
    return np.array([-math.sin(theta), math.cos(theta), 0.0])


@dataclass
class AnnotatedMesh:
    """A mesh in the quotient space with the data its lift needs.

    ``edge_crossing[i]`` is the signed number of crossings of the
    half-plane ``theta = 0`` along ``edges[i, 0] -> edges[i, 1]``;
    it is 0 for edges touching the axis, which never enter the lift.
    """

    mesh: mk.TriangleMesh
    vertex_angle: np.ndarray
    on_axis: np.ndarray
    edges: np.ndarray
    edge_crossing: np.ndarray
    piece_tags: tuple
    metadata: dict = field(default_factory=dict)

    def crossing(self, u, v) -> int:
        key = (min(u, v), max(u, v))
        i = int(np.searchsorted(self._edge_keys(), key[0] * self.mesh.n_vertices + key[1]))
        c = int(self.edge_crossing[i])
        return c if u < v else -c

    def _edge_keys(self):
        return self.edges[:, 0] * self.mesh.n_vertices + self.edges[:, 1]

    def path_crossing(self, loop) -> int:
        loop = list(loop)
        return sum(self.crossing(a, b) for a, b in zip(loop, loop[1:] + loop[:1]))

    def check(self):
        """Raise :class:`LiftError` unless every annotation invariant holds."""
        T = self.mesh.triangles
        on = self.on_axis[T]
        if np.any(on.sum(axis=1) > 1):
            raise LiftError("a triangle has two corners on the axis")
        full = ~on.any(axis=1)
        if full.any():
            total = sum(
                self._directed_crossings(T[full, k], T[full, (k + 1) % 3]) for k in range(3)
            )
            if np.any(total != 0):
                bad = int(np.nonzero(full)[0][np.argmax(total != 0)])
                raise LiftError(f"crossings around triangle {bad} do not cancel")

    def _directed_crossings(self, u, v):
        n = self.mesh.n_vertices
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        idx = np.searchsorted(self._edge_keys(), lo * n + hi)
        c = self.edge_crossing[idx]
        return np.where(u < v, c, -c)


def annotate(mesh: mk.TriangleMesh, tags, axis_vertices=(), metadata=None) -> AnnotatedMesh:
    """Compute angles and crossings; only ``axis_vertices`` may sit on the axis."""
    V = mesh.vertices
    x, y = V[:, 0], V[:, 1]
    on_axis = np.hypot(x, y) <= mk.AXIS_TOL
    if set(np.nonzero(on_axis)[0].tolist()) != set(axis_vertices):
        raise ConstructionError("vertices on the axis other than the disc centres")
    theta = np.mod(np.arctan2(y, x), TWO_PI)
    theta[on_axis] = 0.0
    edges = mesh.edge_table()[0]
    crossing = np.zeros(len(edges), dtype=np.int64)
    off = ~on_axis[edges].any(axis=1)
    u, v = edges[off, 0], edges[off, 1]
    delta = np.arctan2(x[u] * y[v] - y[u] * x[v], x[u] * x[v] + y[u] * y[v])
    if np.any(np.abs(delta) >= math.pi / 2):
        raise ConstructionError("an edge subtends a quarter turn or more about the axis")
    raw = (theta[u] + delta - theta[v]) / TWO_PI
    c = np.rint(raw)
    if np.any(np.abs(raw - c) > 1e-6):
        raise ConstructionError("inconsistent vertex angles")
    crossing[off] = c.astype(np.int64)
    A = AnnotatedMesh(mesh, theta, on_axis, edges, crossing, tuple(tags), dict(metadata or {}))
    A.check()
    return A


def combine(pieces) -> tuple:
    """Concatenate annotated pieces; returns ``(vertices, triangles, tags, axis, offsets)``."""
    verts, tris, tags, axis, offsets = [], [], [], [], []
    base = 0
    for P in pieces:
        offsets.append(base)
        verts.append(P.mesh.vertices)
        tris.append(P.mesh.triangles + base)
        tags.extend(P.piece_tags)
        axis.extend((np.nonzero(P.on_axis)[0] + base).tolist())
        base += P.mesh.n_vertices
    V = np.concatenate(verts) if verts else np.zeros((0, 3))
    T = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=np.int64)
    return V, T, tags, axis, offsets


def _directed(T, a, b):
    """Return ``(a, b)`` ordered as the unique triangle containing the edge traverses it."""
    for tri in T:
        tri = list(tri)
        if a in tri and b in tri:
            i = tri.index(a)
            return (a, b) if tri[(i + 1) % 3] == b else (b, a)
    raise ConstructionError(f"no triangle contains the edge ({a}, {b})")


# -- primitives --------------------------------------------------------------


def make_disc(i, sign, resolution=32) -> AnnotatedMesh:
    """Flat unit disc at height ``i`` fanned around its centre.

    The boundary, oriented by the surface, links the axis ``sign`` times.
    Rim vertex ``k`` sits at angle ``2*pi*(k + 1/2)/N``, so the rim edge
    ``k -> k+1`` is centred on the angle ``2*pi*(k+1)/N``.
    """
    N = resolution
    if N < 8:
        raise ValidationError("disc resolution must be at least 8")
    if sign not in (1, -1):
        raise ValidationError("disc sign must be +1 or -1")
    ang = TWO_PI * (np.arange(N) + 0.5) / N
    V = np.concatenate([[[0.0, 0.0, float(i)]], _cyl(np.ones(N), ang, np.full(N, float(i)))])
    k = np.arange(N)
    T = np.stack([np.zeros(N, dtype=np.int64), 1 + k, 1 + (k + 1) % N], axis=1)
    if sign < 0:
        T = T[:, ::-1]
    mesh = mk.TriangleMesh(V, T)
    return annotate(mesh, [f"disc {i}"] * N, axis_vertices=[0],
                    metadata={"sign": sign, "height": i, "resolution": N})


def _disc_port(mesh_T, offset, resolution, angle, height, sign):
    N = resolution
    j = int(round(angle / (TWO_PI / N)))
    k = (j - 1) % N
    a, b = offset + 1 + k, offset + 1 + (k + 1) % N
    a, b = _directed(mesh_T, a, b)
    return Port(a, b, tuple(_e_r(angle)))


def make_annulus(m, w, resolution, theta0=0.0, rows=2) -> AnnotatedMesh:
    """Spiral annulus whose core winds ``w`` times longitudinally and once meridionally.

    Rings ``a = const`` trace ``u -> ((R + a cos 2pi u) e_r(theta0 + 2pi w u),
    z_m + a sin 2pi u)`` with ``z_m = -m - 1/2``.  The inner ring is
    ``C^-`` and is oriented along ``-u`` (linking ``-w``); the outer ring
    ``C^+`` runs along ``+u`` (linking ``+w``).
    """
    N = resolution
    if w < 1:
        raise ValidationError("annulus linking representative must be >= 1")
    if N < 8 * w:
        raise ConstructionError(f"annulus resolution {N} too low for linking number {w}")
    z_m = -m - 0.5
    u = (np.arange(N) + 0.5) / N
    phi = TWO_PI * u
    theta = theta0 + TWO_PI * w * u
    rings = []
    for j in range(rows + 1):
        a = ANNULUS_A_IN + (ANNULUS_A_OUT - ANNULUS_A_IN) * j / rows
        rings.append(_cyl(ANNULUS_RADIUS + a * np.cos(phi), theta, z_m + a * np.sin(phi)))
    V = np.concatenate(rings)
    tris = []
    k = np.arange(N)
    k1 = (k + 1) % N
    for j in range(rows):
        v00, v01 = j * N + k, j * N + k1
        v10, v11 = (j + 1) * N + k, (j + 1) * N + k1
        tris.append(np.stack([v00, v11, v01], axis=1))
        tris.append(np.stack([v00, v10, v11], axis=1))
    T = np.concatenate(tris)
    mesh = mk.TriangleMesh(V, T)
    return annotate(mesh, [f"annulus {m}"] * len(T),
                    metadata={"w": w, "slab": m, "theta0": theta0, "resolution": N,
                              "rows": rows, "inner": list(range(N)),
                              "outer": list(range(rows * N, (rows + 1) * N))})


def _annulus_port(mesh_T, offset, meta, angle):
    N, w, rows = meta["resolution"], meta["w"], meta["rows"]
    step = TWO_PI * w / N
    j = int(round((angle - meta["theta0"]) / step))
    a = offset + rows * N + (j - 1) % N
    b = offset + rows * N + j % N
    a, b = _directed(mesh_T, a, b)
    phi = TWO_PI * j / N
    theta = meta["theta0"] + TWO_PI * w * j / N
    exit = math.cos(phi) * _e_r(theta) + np.array([0.0, 0.0, math.sin(phi)])
    return Port(a, b, tuple(exit))


def make_genus_block(g_q, holes, resolution=None, origin=(-3.2, 0.0, -2.5),
                     direction=math.pi) -> AnnotatedMesh:
    """Boundary of a voxel slab with ``g_q`` through-holes, minus ``holes + 1`` faces.

    The slab is 3 cells wide and lies below ``origin``, extending
    outward along ``e_r(direction)``.  The first removed face is the
    attachment square; the top edge of its cell's front wall is centred
    on ``origin``.  ``resolution`` is accepted for interface symmetry.
    """
    if g_q < 0 or holes < 0:
        raise ValidationError("genus block needs g_q >= 0 and holes >= 0")
    L = max(2 * g_q + 1, holes + 1)
    if L % 2 == 0:
        L += 1
    removed = {(2 * k + 1, 1) for k in range(g_q)}
    present = {(x, y) for x in range(L) for y in range(3)} - removed

    faces = []
    for (x, y) in sorted(present):
        cell = np.array([x, y, 0])
        for axis in range(3):
            for s in (1, -1):
                nb = cell.copy()
                nb[axis] += s
                if axis < 2 and (int(nb[0]), int(nb[1])) in present and axis != 2:
                    continue
                b, c = (axis + 1) % 3, (axis + 2) % 3
                base = cell.copy()
                if s > 0:
                    base[axis] += 1
                eb, ec = np.eye(3, dtype=int)[b], np.eye(3, dtype=int)[c]
                quad = [base, base + eb, base + eb + ec, base + ec]
                if s < 0:
                    quad = quad[::-1]
                faces.append(((x, y, axis, s), [tuple(q) for q in quad]))
    drop = [(0, 1, 2, 1)]
    drop += [(xx, yy, 2, 1) for xx in range(2, L, 2) for yy in (0, 2)][:holes]
    faces = [(key, q) for key, q in faces if key not in drop]

    lattice = sorted({pt for _, q in faces for pt in q})
    index = {pt: i for i, pt in enumerate(lattice)}
    e1, e2 = _e_r(direction), _e_theta(direction)
    o = np.asarray(origin, dtype=float)
    P = np.array(lattice, dtype=float)
    V = (o + np.outer(P[:, 0] * BLOCK_CELL, e1) + np.outer((P[:, 1] - 1.5) * BLOCK_CELL, e2)
         + np.outer((P[:, 2] - 1.0) * BLOCK_CELL, [0.0, 0.0, 1.0]))
    T = []
    for _, q in faces:
        i0, i1, i2, i3 = (index[pt] for pt in q)
        T.append((i0, i1, i2))
        T.append((i0, i2, i3))
    mesh = mk.TriangleMesh(V, np.array(T, dtype=np.int64))
    port_edge = (index[(0, 1, 1)], index[(0, 2, 1)])
    return annotate(mesh, ["F"] * len(T),
                    metadata={"genus": g_q, "holes": holes, "port_edge": port_edge})


def _block_port(mesh_T, offset, meta):
    a, b = (offset + i for i in meta["port_edge"])
    a, b = _directed(mesh_T, a, b)
    return Port(a, b, (0.0, 0.0, 1.0))


# -- bands -------------------------------------------------------------------


def _fillet_path(points):
    """Round interior corners with quadratic arcs and resample.

    Returns the sampled path and, per original segment, the arc-length
    interval of its straight part.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    cleaned = [pts[0]]
    for p in pts[1:]:
        if np.linalg.norm(p - cleaned[-1]) > 1e-9:
            cleaned.append(p)
    pts = cleaned
    n = len(pts)
    cut = [0.0] * n
    for k in range(1, n - 1):
        d_in, d_out = pts[k] - pts[k - 1], pts[k + 1] - pts[k]
        l_in, l_out = np.linalg.norm(d_in), np.linalg.norm(d_out)
        cosang = float(np.dot(d_in, d_out) / (l_in * l_out))
        if cosang > 1 - 1e-9:
            continue
        cut[k] = min(FILLET, 0.4 * l_in, 0.4 * l_out)
    out = [pts[0]]
    straight = []
    s = 0.0

    def push(p):
        nonlocal s
        s += float(np.linalg.norm(p - out[-1]))
        out.append(p)

    for k in range(n - 1):
        a, b = pts[k], pts[k + 1]
        d = (b - a) / np.linalg.norm(b - a)
        start = a + d * cut[k]
        end = b - d * cut[k + 1]
        if cut[k] > 0:
            corner = a
            q0 = out[-1]
            for j in range(1, 5):
                tt = j / 4
                push((1 - tt) ** 2 * q0 + 2 * tt * (1 - tt) * corner + tt ** 2 * start)
        s0 = s
        seg = float(np.linalg.norm(end - start))
        m = max(1, int(math.ceil(seg / STEP)))
        for j in range(1, m + 1):
            push(start + (end - start) * j / m)
        straight.append((s0, s))
    return np.array(out), straight


def _rotate(v, axis, angle):
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1 - c)


def _ribbon(V, port0, port1, waypoints):
    A0, B0 = V[port0.a], V[port0.b]
    A1, B1 = V[port1.a], V[port1.b]
    m0, m1 = (A0 + B0) / 2, (A1 + B1) / 2
    pts = [m0, m0 + LEAD * np.asarray(port0.exit), *map(np.asarray, waypoints),
           m1 + LEAD * np.asarray(port1.exit), m1]
    core, straight = _fillet_path(pts)
    n = len(core)
    if n < 3:
        raise ConstructionError("band path too short")
    tang = np.gradient(core, axis=0)
    tang /= np.linalg.norm(tang, axis=1)[:, None]
    seglen = np.linalg.norm(np.diff(core, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seglen)])

    w = np.zeros_like(core)
    w0 = B0 - A0
    w[0] = w0 / np.linalg.norm(w0)
    for k in range(1, n):
        v = w[k - 1] - np.dot(w[k - 1], tang[k]) * tang[k]
        w[k] = v / np.linalg.norm(v)
    target = A1 - B1
    target = target - np.dot(target, tang[-1]) * tang[-1]
    target /= np.linalg.norm(target)
    alpha = math.atan2(float(np.dot(tang[-1], np.cross(w[-1], target))), float(np.dot(w[-1], target)))

    lo, hi = max(straight, key=lambda ab: ab[1] - ab[0])
    pad = 0.15 * (hi - lo)
    lo, hi = lo + pad, hi - pad
    x = np.clip((s - lo) / max(hi - lo, 1e-12), 0.0, 1.0)
    frac = x * x * (3 - 2 * x)
    for k in range(n):
        w[k] = _rotate(w[k], tang[k], alpha * frac[k])

    h0, h1 = np.linalg.norm(B0 - A0), np.linalg.norm(B1 - A1)
    h = h0 + (h1 - h0) * s / s[-1]
    left = core + 0.5 * h[:, None] * w
    right = core - 0.5 * h[:, None] * w
    return left[1:-1], right[1:-1], {"twist": alpha, "length": float(s[-1])}


def attach_handle(A: AnnotatedMesh, port0: Port, port1: Port, waypoints, tag="handle",
                  flip=False) -> AnnotatedMesh:
    """Glue a band from ``port0`` to ``port1`` along the given route.

    The band's framing at each end matches the surface orientation there;
    the minimal twist that reconciles the two ends is spread over the
    middle of the longest straight run.  ``flip=True`` glues the far end
    with the wrong framing, which must be rejected.
    """
    V0, T0 = A.mesh.vertices, A.mesh.triangles
    left, right, info = _ribbon(V0, port0, port1, waypoints)
    n_in = len(left)
    base = len(V0)
    L = [port0.b] + list(range(base, base + n_in)) + [port1.a]
    R = [port0.a] + list(range(base + n_in, base + 2 * n_in)) + [port1.b]
    if flip:
        L[-1], R[-1] = R[-1], L[-1]
    tris = []
    for k in range(len(L) - 1):
        tris.append((L[k], R[k], R[k + 1]))
        tris.append((L[k], R[k + 1], L[k + 1]))
    V = np.concatenate([V0, left, right])
    T = np.concatenate([T0, np.array(tris, dtype=np.int64)])
    try:
        mesh = mk.TriangleMesh(V, T)
    except mk.MeshStructureError as exc:
        raise ConstructionError(f"band {tag!r} produced an invalid mesh: {exc}") from exc
    if not mk.is_coherently_oriented(mesh):
        raise ConstructionError(f"band {tag!r} is glued against the surface orientation")
    meta = dict(A.metadata)
    meta.setdefault("bands", []).append({"tag": tag, **info})
    axis = np.nonzero(A.on_axis)[0].tolist()
    return annotate(mesh, list(A.piece_tags) + [tag] * len(tris), axis, meta)


# -- assembly ----------------------------------------------------------------


def annulus_linking(beta, p, q, dictionary="inverse") -> int:
    """Linking representative in ``1..p-1`` for a target boundary residue.

    ``"inverse"`` (``w = q^-1 beta``) is the dictionary that reproduces
    ``beta``; ``"direct"`` (``w = beta``) is kept for the comparison test.
    """
    if dictionary == "inverse":
        return beta * pow(q, -1, p) % p
    if dictionary == "direct":
        return beta % p
    raise ValueError(f"unknown dictionary {dictionary!r}")


def _slot_angle(s, nb, N):
    return math.pi + (2 * s - nb + 1) * TWO_PI / N


def assemble_fundamental(Q: QuotientData, q: int, resolution=32,
                         dictionary="inverse", check_embedding=True) -> AnnotatedMesh:
    """Build the surface ``M`` in the quotient whose lift realizes ``Q``.

    Discs carry the conic points (sign +1 for residue ``q``, -1 for
    ``p - q``), annuli carry the first ``t - 1`` boundary residues, the
    outer boundary of the disc/annulus chain carries the last one (or a
    trivial boundary when ``t = 0``), and the genus block carries
    ``g_q`` and the remaining trivial boundaries.
    """
    report = validate_quotient(Q)
    if not report.ok:
        raise ValidationError(f"{report.rule}: {report.message}")
    p = check_prime(Q.p)
    if not (isinstance(q, int) and 0 < q < p / 2):
        raise NotRepresentableError(f"rotation numerator must satisfy 0 < q < p/2, got {q!r}")
    if any(c not in (q, p - q) for c in Q.conic):
        raise NotRepresentableError(f"conic residues {list(Q.conic)} are not all +-{q}")
    if resolution < 8:
        raise ValidationError("resolution must be at least 8")

    r, t, l, g_q = Q.r, Q.t, Q.l, Q.quotient_genus
    signs = [1 if c == q else -1 for c in Q.conic]
    holes = l if t >= 1 else l - 1
    has_block = g_q > 0 or holes > 0
    n_ann = max(t - 1, 0)
    ws = [annulus_linking(beta, p, q, dictionary) for beta in Q.boundary[:n_ann]]

    # slots in chain order: b_1..b_{r-1}, h, h_1..h_{t-2}, Y
    bands = [("b", i) for i in range(1, r)]
    if r >= 1 and t >= 2:
        bands.append(("h", 0))
    bands += [("hm", m) for m in range(1, t - 1)]
    if has_block:
        bands.append(("Y", 0))
    nb = len(bands)
    N = resolution + (resolution % 2)
    N = max(N, 4 * nb + 4)
    slot = {b: _slot_angle(s, nb, N) for s, b in enumerate(bands)}

    ann_slots = {m: [] for m in range(1, n_ann + 1)}
    if ("h", 0) in slot:
        ann_slots[1].append(slot[("h", 0)])
    for m in range(1, t - 1):
        ann_slots[m].append(slot[("hm", m)])
        ann_slots[m + 1].append(slot[("hm", m)])
    if has_block and n_ann:
        ann_slots[n_ann].append(slot[("Y", 0)])

    fac = max(1, math.ceil(MIN_ANNULUS_EDGES / N))
    pieces = [make_disc(i, signs[i - 1], N) for i in range(1, r + 1)]
    for m in range(1, n_ann + 1):
        angles = ann_slots[m]
        theta0 = sum(angles) / len(angles) if angles else math.pi
        pieces.append(make_annulus(m, ws[m - 1], ws[m - 1] * N * fac, theta0))
    z_top = -max(t, 1) - 0.5
    if has_block:
        th = slot[("Y", 0)]
        pieces.append(make_genus_block(g_q, holes, origin=tuple(_cyl(OUTER_LANE, th, z_top)),
                                       direction=th))

    V, T, tags, axis, offsets = combine(pieces)
    meta = {"p": p, "q": q, "signs": signs, "linking": ws, "resolution": N,
            "dictionary": dictionary, "bands": []}
    A = annotate(mk.TriangleMesh(V, T), tags, axis, meta)

    def disc_port(i, angle):
        return _disc_port(A.mesh.triangles, offsets[i - 1], N, angle, i, signs[i - 1])

    def ann_port(m, angle):
        P = pieces[r + m - 1]
        return _annulus_port(A.mesh.triangles, offsets[r + m - 1], P.metadata, angle)

    def hz(m):
        return -m - 0.5

    plan = []
    for kind, i in bands:
        th = slot[(kind, i)]
        if kind == "b":
            plan.append((f"b{i}", lambda th=th, i=i: disc_port(i, th),
                         lambda th=th, i=i: disc_port(i + 1, th),
                         [(DISC_LANE, th, i), (DISC_LANE, th, i + 1)]))
        elif kind == "h":
            plan.append(("h", lambda th=th: disc_port(1, th), lambda th=th: ann_port(1, th),
                         [(OUTER_LANE, th, 1), (OUTER_LANE, th, hz(1))]))
        elif kind == "hm":
            plan.append((f"h{i}", lambda th=th, i=i: ann_port(i, th),
                         lambda th=th, i=i: ann_port(i + 1, th),
                         [(OUTER_LANE, th, hz(i)), (OUTER_LANE, th, hz(i + 1))]))
        else:
            z_src = hz(n_ann) if n_ann else 1.0
            src = (lambda th=th: ann_port(n_ann, th)) if n_ann else (lambda th=th: disc_port(1, th))
            plan.append(("Y", src,
                         lambda: _block_port(A.mesh.triangles, offsets[-1], pieces[-1].metadata),
                         [(OUTER_LANE, th, z_src)]))

    for tag, get0, get1, route in plan:
        p0, p1 = get0(), get1()
        wp = [tuple(_cyl(rr, th, zz)) for rr, th, zz in route]
        A = attach_handle(A, p0, p1, wp, tag=tag)

    _check_fundamental(A, Q, check_embedding)
    return A


def _check_fundamental(A, Q, check_embedding):
    M = A.mesh
    expected_chi = Q.euler_characteristic
    loops = mk.boundary_loops(M)
    problems = []
    if mk.connected_components(M) != 1:
        problems.append("not connected")
    if not mk.is_coherently_oriented(M):
        problems.append("not coherently oriented")
    if mk.euler_characteristic(M) != expected_chi:
        problems.append(f"chi {mk.euler_characteristic(M)} != {expected_chi}")
    if len(loops) != Q.t + Q.l:
        problems.append(f"{len(loops)} boundary loops, expected {Q.t + Q.l}")
    total = sum(mk.linking_number_with_axis(lp, M) for lp in loops)
    if total != sum(A.metadata["signs"]):
        problems.append(f"boundary linking sum {total} != signed disc count")
    if check_embedding and mk.self_intersects(M):
        problems.append("self-intersecting")
    if problems:
        raise ConstructionError("fundamental surface: " + "; ".join(problems))


# -- lift --------------------------------------------------------------------


@dataclass
class EquivariantMesh:
    """A mesh invariant under the rotation by ``2*pi/p`` about ``Oz``.

    ``vertex_permutation[v]`` is the image of vertex ``v`` under that
    rotation; the automorphism of interest is its ``q``-th power.
    """

    mesh: mk.TriangleMesh
    p: int
    q: int
    vertex_permutation: np.ndarray
    sheet_of_vertex: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rho(self) -> np.ndarray:
        """Vertex permutation of the rotation by ``2*pi*q/p``."""
        perm = np.arange(self.mesh.n_vertices)
        for _ in range(self.q):
            perm = self.vertex_permutation[perm]
        return perm

    def symmetry_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "perm": self.vertex_permutation.tolist()}


def branched_lift(M: AnnotatedMesh, p: int, q: int) -> EquivariantMesh:
    """Preimage of ``M`` under ``(r, theta, z) -> (r, p*theta, z)``.

    Off-axis vertex ``v`` lifts to sheets ``s = 0..p-1`` at angle
    ``(theta_v + 2*pi*s)/p``.  A triangle lifts by anchoring its first
    off-axis corner on sheet ``s`` and moving along its edges by their
    crossing counts.
    """
    check_prime(p)
    if math.gcd(q, p) != 1:
        raise LiftError("rotation numerator must be prime to p")
    M.check()
    V, T = M.mesh.vertices, M.mesh.triangles
    n = len(V)
    on = M.on_axis
    counts = np.where(on, 1, p)
    base = np.cumsum(counts) - counts
    total = int(counts.sum())
    rad = np.hypot(V[:, 0], V[:, 1])

    coords = np.zeros((total, 3))
    perm = np.zeros(total, dtype=np.int64)
    sheet = np.full(total, -1, dtype=np.int64)
    off_v = np.nonzero(~on)[0]
    for s in range(p):
        idx = base[off_v] + s
        ang = (M.vertex_angle[off_v] + TWO_PI * s) / p
        coords[idx, 0] = rad[off_v] * np.cos(ang)
        coords[idx, 1] = rad[off_v] * np.sin(ang)
        coords[idx, 2] = V[off_v, 2]
        perm[idx] = base[off_v] + (s + 1) % p
        sheet[idx] = s
    on_v = np.nonzero(on)[0]
    coords[base[on_v]] = V[on_v]
    perm[base[on_v]] = base[on_v]

    corner_on = on[T]
    anchor = np.argmax(~corner_on, axis=1)
    rows = np.arange(len(T))
    anchor_v = T[rows, anchor]
    offs = np.zeros_like(T)
    for k in range(3):
        mask = (~corner_on[:, k]) & (anchor != k)
        if mask.any():
            offs[mask, k] = M._directed_crossings(anchor_v[mask], T[mask, k])
    up = []
    for s in range(p):
        tri = np.where(corner_on, base[T], base[T] + np.mod(s + offs, p))
        up.append(tri)
    lifted = np.stack(up, axis=1).reshape(-1, 3)
    try:
        mesh = mk.TriangleMesh(coords, lifted)
    except mk.MeshStructureError as exc:
        raise LiftError(f"lifted mesh is invalid: {exc}") from exc
    meta = dict(M.metadata)
    meta["downstairs_vertices"] = n
    return EquivariantMesh(mesh, p, q, perm, sheet, meta)


def build(Q: QuotientData, q: int, resolution=32, check_embedding=True) -> EquivariantMesh:
    """Assemble the fundamental surface for ``Q`` and lift it."""
    M = assemble_fundamental(Q, q, resolution, check_embedding=check_embedding)
    E = branched_lift(M, Q.p, q)
    E.metadata["fundamental"] = {
        "chi": mk.euler_characteristic(M.mesh),
        "loops": len(mk.boundary_loops(M.mesh)),
        "vertices": M.mesh.n_vertices,
        "triangles": M.mesh.n_triangles,
    }
    return E
