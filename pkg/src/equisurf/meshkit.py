"""Indexed triangle meshes and the analyses the construction is checked with.

All topology is read off edge incidence: an undirected edge used by one
triangle is a boundary edge, by two an interior edge, by more a defect.
A triangle ``(a, b, c)`` traverses its edges ``a->b``, ``b->c``, ``c->a``;
boundary loops follow that direction, so the incident triangle lies to
the left of every loop edge.
"""

from __future__ import annotations

import io
import json
import math
from collections import deque

import numpy as np
from scipy.spatial import cKDTree

from .errors import LinkingError, MeshStructureError, NonOrientableError

WELD_TOL = 1e-9
AXIS_TOL = 1e-6
GEOM_TOL = 1e-9
FORMAT_VERSION = "equisurf-mesh 1"

__all__ = [
    "TriangleMesh",
    "euler_characteristic",
    "boundary_loops",
    "orient",
    "is_coherently_oriented",
    "connected_components",
    "component_labels",
    "genus",
    "winding_number",
    "linking_number_with_axis",
    "self_intersects",
    "export_mesh",
    "import_mesh",
]


class TriangleMesh:
    """Vertices in R^3 and oriented vertex-index triples.

    Parameters
    ----------
    vertices : array_like, shape (n, 3)
    triangles : array_like of int, shape (m, 3)
    validate : bool
        Check the surface invariants (index range, no degenerate or
        repeated triangle, edge multiplicity <= 2, welded vertices).
    """

    __slots__ = ("vertices", "triangles", "_edges")

    def __init__(self, vertices, triangles, validate=True):
        v = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        v.setflags(write=False)
        t.setflags(write=False)
        self.vertices = v
        self.triangles = t
        self._edges = None
        if validate:
            self.validate()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def validate(self):
        n, t = self.n_vertices, self.triangles
        if len(t):
            if t.min() < 0 or t.max() >= n:
                raise MeshStructureError("triangle index out of range")
            if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
                raise MeshStructureError("degenerate triangle with a repeated vertex")
            keys = np.sort(t, axis=1)
            if len(np.unique(keys, axis=0)) != len(keys):
                raise MeshStructureError("duplicate triangle")
        self.edge_table()
        if n > 1:
            close = cKDTree(self.vertices).query_pairs(WELD_TOL)
            if close:
                a, b = min(close)
                raise MeshStructureError(f"vertices {a} and {b} closer than the weld tolerance")

    def edge_table(self):
        """Unique undirected edges ``(E, 2)`` with their incidence counts.

        Also returns, for each of the ``3m`` directed triangle edges, the
        row of its undirected edge.
        """
        if self._edges is None:
            t = self.triangles
            directed = np.stack([t, np.roll(t, -1, axis=1)], axis=2).reshape(-1, 2)
            und = np.sort(directed, axis=1)
            if len(und):
                edges, inverse, counts = np.unique(
                    und, axis=0, return_inverse=True, return_counts=True
                )
                inverse = inverse.reshape(-1)
            else:
                edges = np.zeros((0, 2), dtype=np.int64)
                inverse = np.zeros(0, dtype=np.int64)
                counts = np.zeros(0, dtype=np.int64)
            if np.any(counts > 2):
                e = edges[np.argmax(counts > 2)]
                raise MeshStructureError(f"edge {tuple(e)} is shared by more than two triangles")
            self._edges = (edges, counts, directed, inverse)
        return self._edges

    def flipped(self, mask=None) -> "TriangleMesh":
        t = np.array(self.triangles)
        if mask is None:
            mask = np.ones(len(t), dtype=bool)
        t[mask] = t[mask][:, ::-1]
        return TriangleMesh(self.vertices, t, validate=False)

    def __repr__(self):
        return f"TriangleMesh(V={self.n_vertices}, F={self.n_triangles})"


def euler_characteristic(M: TriangleMesh) -> int:
    edges, _, _, _ = M.edge_table()
    return M.n_vertices - len(edges) + M.n_triangles


def boundary_loops(M: TriangleMesh) -> list[tuple]:
    """Closed boundary polylines, each a tuple of vertex indices.

    Loops are traversed with the incident triangle on the left, start at
    their smallest vertex and are listed by that vertex.
    """
    edges, counts, directed, inverse = M.edge_table()
    on_boundary = counts[inverse] == 1
    succ = {}
    for a, b in directed[on_boundary].tolist():
        if a in succ:
            raise MeshStructureError(f"boundary branches at vertex {a}")
        succ[a] = b
    loops = []
    seen = set()
    for start in sorted(succ):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        v = succ[start]
        while v != start:
            if v in seen or v not in succ:
                raise MeshStructureError(f"boundary does not close up at vertex {v}")
            loop.append(v)
            seen.add(v)
            v = succ[v]
        loops.append(tuple(loop))
    return loops


def _triangle_adjacency(M: TriangleMesh):
    """Yield ``(t1, t2, same_direction)`` for every interior edge."""
    edges, counts, directed, inverse = M.edge_table()
    owners = {}
    for k, e in enumerate(inverse.tolist()):
        if counts[e] == 2:
            owners.setdefault(e, []).append(k)
    out = []
    for e in sorted(owners):
        k1, k2 = owners[e]
        same = bool(directed[k1][0] == directed[k2][0])
        out.append((k1 // 3, k2 // 3, same))
    return out


def component_labels(M: TriangleMesh) -> np.ndarray:
    m = M.n_triangles
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t1, t2, _ in _triangle_adjacency(M):
        r1, r2 = find(t1), find(t2)
        if r1 != r2:
            parent[max(r1, r2)] = min(r1, r2)
    roots = [find(a) for a in range(m)]
    relabel = {}
    return np.array([relabel.setdefault(r, len(relabel)) for r in roots], dtype=np.int64)


def connected_components(M: TriangleMesh) -> int:
    labels = component_labels(M)
    return int(labels.max()) + 1 if len(labels) else 0


def is_coherently_oriented(M: TriangleMesh) -> bool:
    return not any(same for _, _, same in _triangle_adjacency(M))


def orient(M: TriangleMesh) -> TriangleMesh:
    """Make triangle windings coherent by breadth-first propagation.

    Each component keeps the winding of its lowest-index triangle.

    Raises
    ------
    NonOrientableError
        If some component is non-orientable.
    """
    m = M.n_triangles
    nbrs = [[] for _ in range(m)]
    for t1, t2, same in _triangle_adjacency(M):
        nbrs[t1].append((t2, same))
        nbrs[t2].append((t1, same))
    flip = np.full(m, -1, dtype=np.int8)
    for seed in range(m):
        if flip[seed] >= 0:
            continue
        flip[seed] = 0
        queue = deque([seed])
        while queue:
            a = queue.popleft()
            for b, same in nbrs[a]:
                want = flip[a] ^ int(same)
                if flip[b] < 0:
                    flip[b] = want
                    queue.append(b)
                elif flip[b] != want:
                    raise NonOrientableError(
                        f"surface is non-orientable (conflict between triangles {a} and {b})"
                    )
    return M.flipped(flip.astype(bool)) if flip.any() else M


def genus(M: TriangleMesh) -> int:
    """Genus of a connected orientable bordered or closed surface."""
    twice = 2 - len(boundary_loops(M)) - euler_characteristic(M)
    if twice < 0 or twice % 2:
        raise MeshStructureError(f"chi and boundary count give genus {twice / 2}")
    return twice // 2


def winding_number(points, check=True) -> int:
    """Winding number of a closed polyline's xy-projection about the origin."""
    pts = np.asarray(points, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    if check:
        rad = np.hypot(x, y)
        if np.any(rad <= AXIS_TOL):
            raise LinkingError("loop vertex within the axis tolerance")
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        dx, dy = x2 - x, y2 - y
        ll = dx * dx + dy * dy
        s = np.clip(-(x * dx + y * dy) / np.where(ll > 0, ll, 1.0), 0.0, 1.0)
        if np.any(np.hypot(x + s * dx, y + s * dy) <= AXIS_TOL):
            raise LinkingError("loop edge passes within the axis tolerance")
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    total = np.arctan2(x * y2 - y * x2, x * x2 + y * y2).sum() / (2 * math.pi)
    n = int(round(total))
    if abs(total - n) >= 0.25:
        raise LinkingError(f"winding sum {total:.3f} is not close to an integer")
    return n


def linking_number_with_axis(loop, M: TriangleMesh) -> int:
    """Linking number of a closed vertex loop with the oriented z-axis."""
    return winding_number(M.vertices[list(loop)])


# -- self intersection -------------------------------------------------------


def _candidate_pairs(V, T):
    tri = V[T]
    lo, hi = tri.min(axis=1), tri.max(axis=1)
    ext = (hi - lo).max(axis=1)
    cell = max(float(np.median(ext)), 1e-6)
    ilo = np.floor(lo / cell).astype(np.int64)
    ihi = np.floor(hi / cell).astype(np.int64)
    span = ihi - ilo + 1
    counts = span.prod(axis=1)
    owner = np.repeat(np.arange(len(T)), counts)
    local = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    sx, sy = span[owner, 0], span[owner, 1]
    cx = ilo[owner, 0] + local % sx
    cy = ilo[owner, 1] + (local // sx) % sy
    cz = ilo[owner, 2] + local // (sx * sy)
    base = np.array([cx.min(), cy.min(), cz.min()]) if len(cx) else np.zeros(3, np.int64)
    cx, cy, cz = cx - base[0], cy - base[1], cz - base[2]
    dims = np.array([cx.max() + 1, cy.max() + 1, cz.max() + 1]) if len(cx) else np.ones(3)
    key = (cx * dims[1] + cy) * dims[2] + cz
    order = np.lexsort((owner, key))
    key, owner = key[order], owner[order]
    pairs = []
    d = 1
    while d < len(key):
        same = key[d:] == key[:-d]
        if not same.any():
            break
        pairs.append(np.stack([owner[:-d][same], owner[d:][same]], axis=1))
        d += 1
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    P = np.sort(np.concatenate(pairs), axis=1)
    a, b = P[:, 0], P[:, 1]
    keep = (a != b) & np.all((lo[a] <= hi[b] + GEOM_TOL) & (lo[b] <= hi[a] + GEOM_TOL), axis=1)
    m = np.int64(len(T))
    flat = np.unique(a[keep] * m + b[keep])
    P = np.stack([flat // m, flat % m], axis=1)
    Ta, Tb = T[P[:, 0]], T[P[:, 1]]
    shared = (Ta[:, :, None] == Tb[:, None, :]).any(axis=(1, 2))
    return P[~shared]


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


def _seg2d_hits(P, Q, A, B, eps):
    """Closed 2D segments ``PQ`` and ``AB`` meet (vectorized)."""

    def side(u, v, w):
        d = v - u
        ln = np.hypot(d[:, 0], d[:, 1])
        ln = np.where(ln > 0, ln, 1.0)
        return (d[:, 0] * (w[:, 1] - u[:, 1]) - d[:, 1] * (w[:, 0] - u[:, 0])) / ln

    o1, o2 = side(P, Q, A), side(P, Q, B)
    o3, o4 = side(A, B, P), side(A, B, Q)
    straddle = (
        (np.minimum(o1, o2) <= eps) & (np.maximum(o1, o2) >= -eps)
        & (np.minimum(o3, o4) <= eps) & (np.maximum(o3, o4) >= -eps)
    )
    # Nearly parallel segments make the straddle signs meaningless; decide
    # those by overlap of their projections onto one segment instead.
    near = 1e3 * eps
    collinear = ((np.abs(o1) <= near) & (np.abs(o2) <= near)) | (
        (np.abs(o3) <= near) & (np.abs(o4) <= near)
    )
    d = Q - P
    dd = _dot(d, d)
    dd = np.where(dd > 0, dd, 1.0)
    sa, sb = _dot(A - P, d) / dd, _dot(B - P, d) / dd
    tol = eps / np.sqrt(dd)
    overlap = (np.maximum(sa, sb) >= -tol) & (np.minimum(sa, sb) <= 1 + tol)
    return np.where(collinear, overlap, straddle)


def _point_in_tri2d(X, A, B, C, eps):
    def side(u, v, w):
        d = v - u
        ln = np.hypot(d[:, 0], d[:, 1])
        return (d[:, 0] * (w[:, 1] - u[:, 1]) - d[:, 1] * (w[:, 0] - u[:, 0])) / ln

    s1, s2, s3 = side(A, B, X), side(B, C, X), side(C, A, X)
    pos = (s1 >= -eps) & (s2 >= -eps) & (s3 >= -eps)
    neg = (s1 <= eps) & (s2 <= eps) & (s3 <= eps)
    return pos | neg


def _segment_hits_triangle(P, Q, A, B, C, eps=GEOM_TOL):
    n = np.cross(B - A, C - A)
    n /= np.linalg.norm(n, axis=1)[:, None]
    dP, dQ = _dot(P - A, n), _dot(Q - A, n)
    coplanar = (np.abs(dP) <= eps) & (np.abs(dQ) <= eps)
    apart = ((dP > eps) & (dQ > eps)) | ((dP < -eps) & (dQ < -eps))
    hit = np.zeros(len(P), dtype=bool)

    cross = ~coplanar & ~apart
    if cross.any():
        i = np.nonzero(cross)[0]
        denom = dP[i] - dQ[i]
        s = np.clip(dP[i] / np.where(denom != 0, denom, 1.0), 0.0, 1.0)
        X = P[i] + (Q[i] - P[i]) * s[:, None]
        inside = np.ones(len(i), dtype=bool)
        for U, W in ((A, B), (B, C), (C, A)):
            E = W[i] - U[i]
            side = _dot(np.cross(E, X - U[i]), n[i]) / np.linalg.norm(E, axis=1)
            inside &= side >= -eps
        hit[i] = inside

    if coplanar.any():
        i = np.nonzero(coplanar)[0]
        axis = np.argmax(np.abs(n[i]), axis=1)
        keep = np.array([[1, 2], [0, 2], [0, 1]])[axis]

        def proj(X):
            return np.take_along_axis(X[i], keep, axis=1)

        p2, q2, a2, b2, c2 = proj(P), proj(Q), proj(A), proj(B), proj(C)
        h = _point_in_tri2d(p2, a2, b2, c2, eps) | _point_in_tri2d(q2, a2, b2, c2, eps)
        for u, w in ((a2, b2), (b2, c2), (c2, a2)):
            h |= _seg2d_hits(p2, q2, u, w, eps)
        hit[i] = h
    return hit


def triangles_intersect(V, T, pairs, eps=GEOM_TOL) -> np.ndarray:
    """Closed-triangle intersection test for each row of ``pairs``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        return np.zeros(0, dtype=bool)
    ta, tb = V[T[pairs[:, 0]]], V[T[pairs[:, 1]]]
    hit = np.zeros(len(pairs), dtype=bool)
    for s, o in ((ta, tb), (tb, ta)):
        for k in range(3):
            todo = ~hit
            if not todo.any():
                return hit
            P, Q = s[todo, k], s[todo, (k + 1) % 3]
            hit[todo] = _segment_hits_triangle(P, Q, o[todo, 0], o[todo, 1], o[todo, 2], eps)
    return hit


def self_intersects(M: TriangleMesh, eps=GEOM_TOL) -> list[tuple]:
    """Pairs of vertex-disjoint triangles whose closed point sets meet.

    A uniform grid prunes candidates; every surviving pair is decided by
    the per-pair segment-triangle test.  Sorted list of ``(i, j)``, i < j.
    """
    if M.n_triangles < 2:
        return []
    pairs = _candidate_pairs(M.vertices, M.triangles)
    hit = triangles_intersect(M.vertices, M.triangles, pairs, eps)
    return [tuple(p) for p in pairs[hit].tolist()]


# -- serialization -----------------------------------------------------------


def export_mesh(M: TriangleMesh, loops=(), fmt="obj") -> bytes:
    """Serialize to OBJ text (with ``l`` loop records), binary PLY or JSON."""
    fmt = fmt.lower()
    if fmt == "obj":
        out = io.StringIO()
        out.write(f"# {FORMAT_VERSION}\n")
        for x, y, z in M.vertices.tolist():
            out.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b, c in (M.triangles + 1).tolist():
            out.write(f"f {a} {b} {c}\n")
        for loop in loops:
            idx = [i + 1 for i in loop]
            out.write("l " + " ".join(map(str, idx + idx[:1])) + "\n")
        return out.getvalue().encode("utf-8")
    if fmt == "ply":
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            f"comment {FORMAT_VERSION}\n"
            f"element vertex {M.n_vertices}\n"
            "property double x\nproperty double y\nproperty double z\n"
            f"element face {M.n_triangles}\n"
            "property list uchar int vertex_indices\nend_header\n"
        ).encode("ascii")
        body = M.vertices.astype("<f8").tobytes()
        faces = np.zeros(M.n_triangles, dtype=[("n", "u1"), ("v", "<i4", (3,))])
        faces["n"] = 3
        faces["v"] = M.triangles
        return header + body + faces.tobytes()
    if fmt == "json":
        doc = {"format": FORMAT_VERSION, "vertices": M.vertices.tolist(),
               "triangles": M.triangles.tolist(), "boundary_loops": [list(lp) for lp in loops]}
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")
    raise ValueError(f"unsupported mesh format {fmt!r}")


def import_mesh(data: bytes, fmt="obj") -> TriangleMesh:
    fmt = fmt.lower()
    if fmt == "obj":
        verts, tris = [], []
        for line in data.decode("utf-8").splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(s) for s in parts[1:4]])
            elif parts[0] == "f":
                tris.append([int(s.split("/")[0]) - 1 for s in parts[1:4]])
        return TriangleMesh(np.array(verts).reshape(-1, 3), np.array(tris).reshape(-1, 3))
    if fmt == "ply":
        end = data.index(b"end_header\n") + len(b"end_header\n")
        nv = nf = 0
        for line in data[:end].decode("ascii").splitlines():
            parts = line.split()
            if parts[:2] == ["element", "vertex"]:
                nv = int(parts[2])
            elif parts[:2] == ["element", "face"]:
                nf = int(parts[2])
        v = np.frombuffer(data, dtype="<f8", count=3 * nv, offset=end).reshape(nv, 3)
        faces = np.frombuffer(
            data, dtype=[("n", "u1"), ("v", "<i4", (3,))], count=nf, offset=end + 24 * nv
        )
        if nf and np.any(faces["n"] != 3):
            raise MeshStructureError("PLY face is not a triangle")
        return TriangleMesh(v, faces["v"].astype(np.int64))
    if fmt == "json":
        doc = json.loads(data.decode("utf-8"))
        return TriangleMesh(np.array(doc["vertices"], dtype=float).reshape(-1, 3),
                            np.array(doc["triangles"], dtype=np.int64).reshape(-1, 3))
    raise ValueError(f"unsupported mesh format {fmt!r}")

