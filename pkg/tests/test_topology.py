import pytest
from hypothesis import given, settings, strategies as st

from families import brute_force_types

from equisurf.errors import (
    InfeasibleTypeError,
    NotRepresentableError,
    PrimeError,
    ValidationError,
)
from equisurf.topology import (
    AutomorphismType,
    QuotientData,
    RotationIndex,
    are_equivalent,
    complex_double_genus,
    enumerate_types,
    is_representable,
    lift_data_of,
    negate,
    normalize,
    quotient_data_of,
    rotation_numerators,
    validate_quotient,
)

KLEIN = AutomorphismType(7, 3, (1,), (2, 4), 0)
WIMAN = AutomorphismType(7, 3, (1, 1), (5,), 0)


def test_rotation_index_negation_is_involution():
    x = RotationIndex(3, 7)
    assert x.negate() == RotationIndex(4, 7)
    assert x.negate().negate() == x


@pytest.mark.parametrize("n,p", [(0, 7), (7, 7), (-1, 5), (1, 9)])
def test_rotation_index_rejects_bad_values(n, p):
    with pytest.raises(ValidationError):
        RotationIndex(n, p)


def test_p_equal_two_is_a_distinct_error():
    with pytest.raises(PrimeError):
        AutomorphismType(2, 1, (1,), (1,), 0)


def test_type_invariants():
    with pytest.raises(ValidationError):
        AutomorphismType(7, 3, (1,), (), 0)  # closed surface
    with pytest.raises(ValidationError):
        AutomorphismType(3, 0, (1, 2), (), 0)  # k = 0
    with pytest.raises(ValidationError):
        AutomorphismType(5, 0, (), (1,), 0)  # disc, complex double genus 0
    assert KLEIN.k == 2 and KLEIN.euler_characteristic == -6
    assert WIMAN.k == 1 and WIMAN.euler_characteristic == -5


def test_json_round_trip():
    assert AutomorphismType.from_dict(KLEIN.to_dict()) == KLEIN
    Q = QuotientData(7, 0, (1,), (4, 2), 0)
    assert QuotientData.from_dict(Q.to_dict()) == Q
    assert Q.boundary == (4, 2)  # order is kept
    with pytest.raises(ValidationError):
        AutomorphismType.from_dict({"p": 7})


def test_normalize_examples():
    T = AutomorphismType(7, 3, (1, 1, 5), (1,), 0)
    assert normalize(T).fixed == (1, 1, 5)
    T2 = AutomorphismType(7, 2, (2,), (1, 4), 0)
    assert normalize(T2) == normalize(negate(T2))
    a = AutomorphismType(3, 1, (1,), (2,), 0)
    b = AutomorphismType(3, 1, (2,), (1,), 0)
    assert normalize(a) == normalize(b)


def test_equivalence_examples():
    assert are_equivalent(KLEIN, AutomorphismType(7, 3, (6,), (5, 3), 0))
    assert are_equivalent(KLEIN, KLEIN)
    assert not are_equivalent(KLEIN, AutomorphismType(7, 3, (1,), (2, 3), 0))
    assert not are_equivalent(KLEIN, WIMAN)


def test_representability_examples():
    assert rotation_numerators(7, (1, 2, 4)) == frozenset()
    assert rotation_numerators(7, (1, 1, 5)) == frozenset()
    assert is_representable(KLEIN) == {1}
    assert is_representable(WIMAN) == {1}
    assert is_representable(AutomorphismType(5, 1, (), (1, 4), 0)) == {1, 2}


def test_complex_double_genus():
    assert complex_double_genus(3, 2) == 7  # 2*3 + 2 - 1
    assert complex_double_genus(0, 1) == 0
    assert complex_double_genus(3, 1) == 6
    with pytest.raises(ValidationError):
        complex_double_genus(1, 0)


def test_quotient_examples():
    Q = quotient_data_of(KLEIN, 1)
    assert Q == QuotientData(7, 0, (1,), (2, 4), 0)
    assert 7 * Q.euler_characteristic - 1 * 6 == -6
    Q = quotient_data_of(WIMAN, 1)
    assert Q == QuotientData(7, 0, (1, 1), (5,), 0)
    with pytest.raises(NotRepresentableError):
        quotient_data_of(KLEIN, 2)
    with pytest.raises(NotRepresentableError):
        quotient_data_of(KLEIN, 4)


def test_quotient_rejects_free_action():
    T = AutomorphismType(3, 1, (), (), 1)
    with pytest.raises(ValidationError):
        quotient_data_of(T, 1)


def test_quotient_riemann_hurwitz_infeasible():
    # chi = -3 and r = 1: -3 + 6 = 3 is not divisible by 7
    T = AutomorphismType(7, 1, (1,), (6,), 0)
    with pytest.raises(InfeasibleTypeError):
        quotient_data_of(T, 1)


def test_lift_examples():
    assert lift_data_of(QuotientData(7, 0, (1,), (2, 4), 0), 1) == KLEIN
    assert lift_data_of(QuotientData(7, 0, (1, 1), (5,), 0), 1) == WIMAN
    T = lift_data_of(QuotientData(3, 0, (1, 2), (), 1), 1)
    assert (T.genus, T.k, T.euler_characteristic) == (0, 3, -1)
    with pytest.raises(NotRepresentableError):
        lift_data_of(QuotientData(7, 0, (2,), (5,), 0), 1)


def test_validate_examples():
    assert validate_quotient(QuotientData(7, 0, (1,), (2, 4), 0)).ok
    rep = validate_quotient(QuotientData(7, 0, (1, 1), (4,), 0))
    assert (rep.ok, rep.rule) == (False, "residue_sum")
    rep = validate_quotient(QuotientData(5, 0, (), (), 2))
    assert rep.rule == "surjective"
    rep = validate_quotient(QuotientData(5, 0, (1, 4), (), 0))
    assert rep.rule == "bordered"


def test_enumerate_examples():
    assert normalize(KLEIN) in enumerate_types(7, 3, 2)
    assert all(T.free_orbits == 0 and T.t == 1 for T in enumerate_types(3, 0, 1))
    assert enumerate_types(5, 0, 1) == []  # disc


@pytest.mark.parametrize(
    "p,genus,k", [(5, 0, 2), (5, 0, 3), (3, 1, 3), (7, 3, 2), (5, 1, 5), (3, 2, 1)]
)
def test_enumerate_matchesbrute_force_types(p, genus, k):
    got = {(T.fixed, T.boundary, T.free_orbits) for T in enumerate_types(p, genus, k)}
    assert got == brute_force_types(p, genus, k)


def test_enumerate_is_normalized_and_sorted():
    types = enumerate_types(5, 1, 3)
    assert types == sorted(set(types), key=lambda T: (T.free_orbits, T.fixed, T.boundary))
    assert all(normalize(T) == T for T in types)


# -- properties --------------------------------------------------------------

primes = st.sampled_from([3, 5, 7, 11])


@st.composite
def types(draw):
    p = draw(primes)
    fixed = draw(st.lists(st.integers(1, p - 1), max_size=4))
    bnd = draw(st.lists(st.integers(1, p - 1), max_size=3))
    l = draw(st.integers(0, 1))
    genus = draw(st.integers(0, 3))
    if len(bnd) + p * l < 1 or 2 * genus + len(bnd) + p * l - 1 <= 1:
        l = 1
    return AutomorphismType(p, genus, tuple(fixed), tuple(bnd), l)


@given(types())
def test_normalize_idempotent_and_sign_blind(T):
    assert normalize(normalize(T)) == normalize(T)
    assert normalize(negate(T)) == normalize(T)
    assert negate(negate(T)) == T


@given(types(), types())
def test_equivalence_is_symmetric_and_negation_invariant(a, b):
    assert are_equivalent(a, b) == are_equivalent(b, a)
    assert are_equivalent(a, b) == are_equivalent(negate(a), b)
    assert are_equivalent(a, a)


@given(types())
def test_representability_sign_symmetric(T):
    assert is_representable(T) == is_representable(negate(T))


@settings(max_examples=200)
@given(primes, st.integers(0, 2), st.data())
def test_lift_chi_and_k(p, g_q, data):
    q = data.draw(st.integers(1, (p - 1) // 2))
    conic = data.draw(st.lists(st.sampled_from([q, p - q]), max_size=4))
    bnd = data.draw(st.lists(st.integers(1, p - 1), max_size=3))
    l = data.draw(st.integers(0, 2))
    Q = QuotientData(p, g_q, tuple(conic), tuple(bnd), l)
    if not validate_quotient(Q).ok:
        return
    try:
        T = lift_data_of(Q, q)
    except ValidationError:
        return  # disc or annulus upstairs
    assert T.k == Q.t + p * Q.l
    assert T.euler_characteristic == p * Q.euler_characteristic - Q.r * (p - 1)
    assert quotient_data_of(T, q) == QuotientData(p, g_q, Q.conic, tuple(sorted(bnd)), l)
