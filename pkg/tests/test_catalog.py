import pytest

from equisurf.catalog import catalog_entries, entry_names, get_entry
from equisurf.construction import build
from equisurf.topology import is_representable, lift_data_of, quotient_data_of
from equisurf.verification import verify_against


def test_names():
    assert entry_names() == ["klein_quartic_bordered", "wiman_bordered",
                             "klein_quartic_closed_indices", "wiman_closed_indices"]
    with pytest.raises(KeyError):
        get_entry("nope")


def test_expected_data():
    k = get_entry("klein_quartic_bordered")
    assert (k.p, k.q, k.type.genus, k.type.k) == (7, 1, 3, 2)
    assert k.expected["euler_characteristic"] == -6
    w = get_entry("wiman_bordered")
    assert (w.type.fixed, w.type.boundary) == ((1, 1), (5,))
    assert w.expected["euler_characteristic"] == 2 - 2 * 3 - 1


@pytest.mark.parametrize("name", ["klein_quartic_closed_indices", "wiman_closed_indices"])
def test_closed_index_sets_are_not_representable(name):
    e = get_entry(name)
    assert not e.representable
    assert e.rotations() == frozenset()
    assert e.type is None and e.quotient is None and e.q is None


@pytest.mark.parametrize("e", [e for e in catalog_entries() if e.representable],
                         ids=lambda e: e.name)
def test_representable_entries_round_trip_and_verify(e):
    assert quotient_data_of(e.type, e.q) == e.quotient
    assert lift_data_of(e.quotient, e.q) == e.type
    assert e.q in is_representable(e.type)
    rep = verify_against(build(e.quotient, e.q, 32), e.type)
    assert rep.overall, rep.failures()


def test_to_dict_is_json_ready():
    import json
    doc = json.loads(json.dumps([e.to_dict() for e in catalog_entries()]))
    assert doc[0]["expected"]["boundary"] == [2, 4]
    assert doc[2]["rotations"] == []
