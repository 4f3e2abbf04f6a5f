import json

import pytest

from equisurf.cli import main

KLEIN_T = '{"p":7,"genus":3,"fixed":[1],"boundary":[2,4],"free_orbits":0}'
KLEIN_NEG = '{"p":7,"genus":3,"fixed":[6],"boundary":[3,5],"free_orbits":0}'
KLEIN_Q = '{"p":7,"quotient_genus":0,"conic":[1],"boundary":[2,4],"trivial_boundaries":0}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_check(capsys):
    assert run(capsys, "check", '{"p":7,"fixed":[1,2,4]}') == (
        3, {"p": 7, "fixed": [1, 2, 4], "representable": False, "q": []})
    code, doc = run(capsys, "check", KLEIN_T)
    assert code == 0 and doc["q"] == [1]
    code, doc = run(capsys, "check", "--catalog", "wiman_closed_indices")
    assert code == 3


def test_quotient_and_lift(capsys):
    code, doc = run(capsys, "quotient", KLEIN_T)
    assert code == 0 and doc["quotient"] == json.loads(KLEIN_Q)
    code, doc = run(capsys, "lift", KLEIN_Q, "--q", "1")
    assert code == 0 and doc["type"] == json.loads(KLEIN_T)
    code, _ = run(capsys, "quotient", KLEIN_T, "--q", "2")
    assert code == 3


def test_equivalent(capsys):
    assert run(capsys, "equivalent", KLEIN_T, KLEIN_NEG)[0] == 0
    other = '{"p":7,"genus":3,"fixed":[1],"boundary":[2,3],"free_orbits":1}'
    assert run(capsys, "equivalent", KLEIN_T, other)[0] == 3


def test_enumerate(capsys):
    code, doc = run(capsys, "enumerate", "--p", "7", "--genus", "3", "--k", "2")
    assert code == 0
    assert {"p": 7, "genus": 3, "fixed": [1], "boundary": [2, 4], "free_orbits": 0,
            "rotations": [1]} in doc


def test_error_codes(capsys, tmp_path):
    assert run(capsys, "lift", str(tmp_path / "missing.json"))[0] == 1
    assert run(capsys, "lift", "{not json")[0] == 1
    assert run(capsys, "check", '{"p":9,"fixed":[1]}')[0] == 2
    bad_sum = '{"p":7,"quotient_genus":0,"conic":[1],"boundary":[2],"trivial_boundaries":0}'
    assert run(capsys, "lift", bad_sum)[0] == 2
    assert run(capsys, "build", "--catalog", "klein_quartic_bordered", "--resolution", "4",
               "-o", str(tmp_path / "x.obj"))[0] == 2


@pytest.mark.parametrize("fmt", ["obj", "ply", "json"])
def test_build_and_verify(capsys, tmp_path, fmt):
    out = tmp_path / f"klein.{fmt}"
    code, doc = run(capsys, "build", "--catalog", "klein_quartic_bordered", "-o", str(out),
                    "--format", fmt)
    assert code == 0 and doc["overall"]
    report = json.loads((tmp_path / "klein.report.json").read_text())
    assert report["overall"]
    chi = [c for c in report["checks"] if c["name"] == "euler_characteristic"][0]
    assert chi["observed"] == -6
    sym = json.loads((tmp_path / "klein.sym.json").read_text())
    assert sym["p"] == 7 and sym["q"] == 1 and len(sym["perm"]) == doc["vertices"]
    code, rep = run(capsys, "verify", str(out), "--catalog", "klein_quartic_bordered")
    assert code == 0 and rep["overall"]
    code, rep = run(capsys, "verify", str(out), "--catalog", "wiman_bordered")
    assert code == 4 and not rep["overall"]


def test_build_from_quotient_json(capsys, tmp_path):
    src = tmp_path / "q.json"
    src.write_text('{"p":5,"quotient_genus":1,"conic":[2,3],"boundary":[1,4],'
                   '"trivial_boundaries":1}')
    code, doc = run(capsys, "build", str(src), "-o", str(tmp_path / "s.obj"),
                    "--resolution", "16")
    assert code == 0 and doc["overall"]


def test_catalog_listing_and_build(capsys, tmp_path):
    code, doc = run(capsys, "catalog")
    assert code == 0 and len(doc) == 4
    code, doc = run(capsys, "catalog", "wiman_bordered")
    assert doc["expected"]["euler_characteristic"] == -5
    code, doc = run(capsys, "catalog", "wiman_bordered", "-o", str(tmp_path / "w.ply"),
                    "--format", "ply")
    assert code == 0 and (tmp_path / "w.ply").exists()
    assert run(capsys, "catalog", "klein_quartic_closed_indices", "-o",
               str(tmp_path / "k.obj"))[0] == 3
    assert not (tmp_path / "k.obj").exists()


def test_build_is_byte_identical(capsys, tmp_path):
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        run(capsys, "build", "--catalog", "wiman_bordered", "-o", str(tmp_path / d / "w.obj"))
    for name in ("w.obj", "w.sym.json", "w.report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
