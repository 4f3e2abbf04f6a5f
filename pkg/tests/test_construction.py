import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from equisurf import construction as C
from equisurf import meshkit as mk
from equisurf.errors import ConstructionError, LiftError, NotRepresentableError, ValidationError
from equisurf.topology import QuotientData
from equisurf.verification import boundary_orbit_structure, verify_against
from equisurf.topology import lift_data_of


def loop_links(mesh):
    return sorted(mk.linking_number_with_axis(lp, mesh) for lp in mk.boundary_loops(mesh))


# -- primitives --------------------------------------------------------------


def test_disc_examples():
    D = C.make_disc(1, +1, 8)
    assert (D.mesh.n_vertices, D.mesh.n_triangles) == (9, 8)
    assert mk.euler_characteristic(D.mesh) == 1
    assert loop_links(D.mesh) == [1]
    assert loop_links(C.make_disc(2, -1, 8).mesh) == [-1]
    for N in (8, 12, 40):
        (loop,) = mk.boundary_loops(C.make_disc(3, 1, N).mesh)
        assert len(loop) == N
    assert np.nonzero(D.on_axis)[0].tolist() == [0]


@pytest.mark.parametrize("w", [1, 2, 3])
def test_annulus(w):
    A = C.make_annulus(1, w, 16 * w)
    M = A.mesh
    assert mk.euler_characteristic(M) == 0
    assert len(mk.boundary_loops(M)) == 2
    assert mk.is_coherently_oriented(M)
    assert mk.self_intersects(M) == []
    assert not A.on_axis.any()
    # inner ring runs against the spiral, outer ring with it
    assert loop_links(M) == [-w, w]
    inner = set(A.metadata["inner"])
    for lp in mk.boundary_loops(M):
        lk = mk.linking_number_with_axis(lp, M)
        assert (lk == -w) == (lp[0] in inner)
    z = M.vertices[:, 2]
    assert z.min() > -2 and z.max() < -1


def test_annulus_resolution_guard():
    with pytest.raises(ConstructionError):
        C.make_annulus(1, 3, 20)


@pytest.mark.parametrize("g,holes,chi,loops", [(0, 0, 1, 1), (1, 0, -1, 1), (2, 1, -4, 2),
                                                (0, 3, -2, 4)])
def test_genus_block(g, holes, chi, loops):
    F = C.make_genus_block(g, holes)
    M = F.mesh
    assert mk.euler_characteristic(M) == chi
    assert len(mk.boundary_loops(M)) == loops
    assert mk.genus(M) == g
    assert mk.is_coherently_oriented(M)
    assert set(loop_links(M)) == {0}
    assert not F.on_axis.any()


def two_discs(sign2):
    pieces = [C.make_disc(1, 1, 16), C.make_disc(2, sign2, 16)]
    V, T, tags, axis, offsets = C.combine(pieces)
    A = C.annotate(mk.TriangleMesh(V, T), tags, axis)
    th = math.pi
    p0 = C._disc_port(A.mesh.triangles, offsets[0], 16, th, 1, 1)
    p1 = C._disc_port(A.mesh.triangles, offsets[1], 16, th, 2, sign2)
    route = [tuple(C._cyl(1.5, th, 1.0)), tuple(C._cyl(1.5, th, 2.0))]
    return A, p0, p1, route


@pytest.mark.parametrize("sign2", [1, -1])
def test_handle_between_discs(sign2):
    A, p0, p1, route = two_discs(sign2)
    H = C.attach_handle(A, p0, p1, route)
    M = H.mesh
    assert mk.euler_characteristic(M) == 1
    assert len(mk.boundary_loops(M)) == 1
    assert mk.is_coherently_oriented(M)
    assert mk.self_intersects(M) == []
    assert loop_links(M) == [1 + sign2]
    twist = H.metadata["bands"][0]["twist"]
    # the C-shaped route turns the band over, so opposite signs need no twist
    assert abs(abs(twist) - (math.pi if sign2 == 1 else 0)) < 1e-6


@pytest.mark.parametrize("sign2", [1, -1])
def test_handle_with_wrong_framing_is_rejected(sign2):
    A, p0, p1, route = two_discs(sign2)
    with pytest.raises(ConstructionError):
        C.attach_handle(A, p0, p1, route, flip=True)


# -- assembly ----------------------------------------------------------------


@pytest.mark.parametrize("Q,q,chi,loops", [
    (QuotientData(7, 0, (1,), (2, 4), 0), 1, 0, 2),
    (QuotientData(7, 0, (1, 1), (5,), 0), 1, 1, 1),
    (QuotientData(3, 1, (1, 2), (), 1), 1, -1, 1),
    (QuotientData(3, 0, (), (1, 2), 1), 1, -1, 3),
    (QuotientData(5, 1, (2, 3), (), 1), 2, -1, 1),
])
def test_assemble_examples(Q, q, chi, loops):
    M = C.assemble_fundamental(Q, q, 16)
    assert mk.euler_characteristic(M.mesh) == chi
    assert len(mk.boundary_loops(M.mesh)) == loops
    assert mk.connected_components(M.mesh) == 1
    assert int(M.on_axis.sum()) == Q.r
    total = sum(mk.linking_number_with_axis(lp, M.mesh) for lp in mk.boundary_loops(M.mesh))
    assert total == sum(M.metadata["signs"])


def test_assemble_errors():
    with pytest.raises(NotRepresentableError):
        C.assemble_fundamental(QuotientData(7, 0, (2,), (5,), 0), 1)
    with pytest.raises(ValidationError):
        C.assemble_fundamental(QuotientData(7, 0, (1,), (5,), 0), 1)
    with pytest.raises(NotRepresentableError):
        C.assemble_fundamental(QuotientData(7, 0, (4,), (3,), 0), 4)


def test_crossing_sums_equal_linking_on_boundary_loops():
    M = C.assemble_fundamental(QuotientData(7, 1, (1, 6, 6), (3, 5), 1), 1, 16)
    for lp in mk.boundary_loops(M.mesh):
        assert M.path_crossing(lp) == mk.linking_number_with_axis(lp, M.mesh)


def test_build_is_deterministic():
    Q = QuotientData(5, 1, (2, 3), (1, 4), 1)
    a, b = C.build(Q, 2, 16), C.build(Q, 2, 16)
    assert mk.export_mesh(a.mesh, fmt="ply") == mk.export_mesh(b.mesh, fmt="ply")
    assert np.array_equal(a.vertex_permutation, b.vertex_permutation)


# -- lift --------------------------------------------------------------------


def test_lift_of_disc():
    E = C.branched_lift(C.make_disc(1, 1, 8), 3, 1)
    M = E.mesh
    assert M.n_triangles == 24
    assert mk.euler_characteristic(M) == 1
    fixed = np.nonzero(E.vertex_permutation == np.arange(M.n_vertices))[0]
    assert len(fixed) == 1 and np.allclose(M.vertices[fixed[0]], [0, 0, 1])


def test_lift_of_round_annulus():
    E = C.branched_lift(C.make_annulus(1, 1, 48), 3, 1)
    M = E.mesh
    assert mk.euler_characteristic(M) == 0
    assert mk.connected_components(M) == 1
    assert loop_links(M) == [-1, 1]
    assert not np.any(E.vertex_permutation == np.arange(M.n_vertices))


def test_lift_rejects_inconsistent_crossings():
    A = C.make_annulus(1, 1, 16)
    bad = A.edge_crossing.copy()
    bad[0] += 1
    A.edge_crossing = bad
    with pytest.raises(LiftError):
        C.branched_lift(A, 5, 1)


def test_permutation_has_order_p():
    E = C.build(QuotientData(7, 0, (1,), (2, 4), 0), 1, 16)
    perm = np.arange(E.mesh.n_vertices)
    for k in range(1, 8):
        perm = E.vertex_permutation[perm]
        assert np.array_equal(perm, np.arange(len(perm))) == (k == 7)


quotients = st.builds(
    lambda p, q, g_q, signs, bnd, l: (p, q, g_q, signs, bnd, l),
    st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(0, 1),
    st.lists(st.booleans(), max_size=3), st.lists(st.integers(1, 6), max_size=2),
    st.integers(0, 1),
)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(quotients)
def test_riemann_hurwitz_and_loop_count(data):
    p, q, g_q, signs, bnd, l = data
    q = (q - 1) % ((p - 1) // 2) + 1
    conic = tuple(q if s else p - q for s in signs)
    bnd = [b % p or 1 for b in bnd]
    if len(bnd) > 0:
        bnd[-1] = (-(sum(conic) + sum(bnd[:-1]))) % p or None
        if bnd[-1] is None:
            return
    elif sum(conic) % p:
        return
    Q = QuotientData(p, g_q, conic, tuple(bnd), l)
    if Q.r + Q.t < 1 or Q.t + Q.l < 1:
        return
    M = C.assemble_fundamental(Q, q, 8, check_embedding=False)
    E = C.branched_lift(M, p, q)
    chi_m = mk.euler_characteristic(M.mesh)
    assert mk.euler_characteristic(E.mesh) == p * chi_m - Q.r * (p - 1)
    assert len(mk.boundary_loops(E.mesh)) == Q.t + p * Q.l


# -- monodromy dictionary ----------------------------------------------------


def _annulus_index(Q, q, dictionary):
    M = C.assemble_fundamental(Q, q, 16, dictionary=dictionary)
    E = C.branched_lift(M, Q.p, q)
    w = M.metadata["linking"][0]
    realized, _ = boundary_orbit_structure(E)
    return w, sorted(x.numerator for x in realized)


@pytest.mark.parametrize("Q,q", [
    (QuotientData(3, 0, (1,), (1, 1), 0), 1),
    (QuotientData(5, 0, (2,), (2, 1), 0), 2),
    (QuotientData(7, 0, (3,), (2, 2), 0), 3),
    (QuotientData(7, 0, (2,), (1, 4), 0), 2),
])
def test_dictionary_experiment(Q, q):
    """Only ``w = q^-1 beta`` reproduces the requested boundary residues.

    The targets are chosen so that ``w = beta`` cannot accidentally land on
    the same multiset once the leftover boundary compensates.
    """
    target = sorted(Q.boundary)
    w_inv, got_inv = _annulus_index(Q, q, "inverse")
    w_dir, got_dir = _annulus_index(Q, q, "direct")
    assert w_inv == Q.boundary[0] * pow(q, -1, Q.p) % Q.p
    assert got_inv == target
    if q == 1:
        assert got_dir == target and w_dir == w_inv
    else:
        assert got_dir != target
    E = C.build(Q, q, 16)
    assert verify_against(E, lift_data_of(Q, q)).overall
