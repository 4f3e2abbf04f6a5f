"""Command-line interface: ``equisurf <subcommand> ...``.

Exit codes: 0 success, 1 I/O or parse error, 2 validation error,
3 negative verdict (not representable, not equivalent), 4 construction
or verification failure.

JSON inputs are given either as a file path or inline (any argument
starting with ``{``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog as cat
from . import meshkit as mk
from .construction import EquivariantMesh, build
from .errors import (
    ConstructionError,
    EquivarianceError,
    MeshStructureError,
    NotRepresentableError,
    ValidationError,
)
from .topology import (
    AutomorphismType,
    QuotientData,
    are_equivalent,
    enumerate_types,
    is_representable,
    lift_data_of,
    quotient_data_of,
    rotation_numerators,
)
from .verification import EQUIV_TOL, verify_against

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NEGATIVE, EXIT_FAILED = 0, 1, 2, 3, 4


class _InputError(Exception):
    pass


def _load_json(arg):
    if arg is None:
        raise _InputError("missing JSON input")
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            text = Path(arg).read_text(encoding="utf-8")
        except OSError as exc:
            raise _InputError(f"cannot read {arg}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _InputError(f"invalid JSON in {arg[:40]!r}: {exc}") from exc


def _parse(factory, data):
    try:
        return factory(data)
    except (KeyError, TypeError) as exc:
        raise _InputError(f"malformed record: {exc}") from exc


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _default_q(T):
    qs = sorted(is_representable(T))
    if not qs:
        raise NotRepresentableError(f"fixed indices {list(T.fixed)} admit no rotation")
    return qs[0]


# -- subcommands -------------------------------------------------------------


def cmd_check(args):
    if args.catalog:
        e = cat.get_entry(args.catalog)
        p, fixed = e.p, e.fixed
    else:
        data = _load_json(args.input)
        p, fixed = data["p"], data.get("fixed", [])
        if "genus" in data:
            _parse(AutomorphismType.from_dict, data)
    qs = sorted(rotation_numerators(p, fixed))
    _emit({"p": p, "fixed": list(fixed), "representable": bool(qs), "q": qs})
    return EXIT_OK if qs else EXIT_NEGATIVE


def cmd_quotient(args):
    T = _parse(AutomorphismType.from_dict, _load_json(args.input))
    q = args.q if args.q is not None else _default_q(T)
    _emit({"q": q, "quotient": quotient_data_of(T, q).to_dict()})
    return EXIT_OK


def cmd_lift(args):
    Q = _parse(QuotientData.from_dict, _load_json(args.input))
    q = args.q if args.q is not None else _first_q(Q)
    _emit({"q": q, "type": lift_data_of(Q, q).to_dict()})
    return EXIT_OK


def _first_q(Q):
    for q in range(1, (Q.p - 1) // 2 + 1):
        if all(c in (q, Q.p - q) for c in Q.conic):
            return q
    raise NotRepresentableError(f"conic residues {list(Q.conic)} admit no rotation")


def cmd_equivalent(args):
    T1 = _parse(AutomorphismType.from_dict, _load_json(args.first))
    T2 = _parse(AutomorphismType.from_dict, _load_json(args.second))
    ok = are_equivalent(T1, T2)
    _emit({"equivalent": ok})
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_enumerate(args):
    types = enumerate_types(args.p, args.genus, args.k)
    _emit([dict(T.to_dict(), rotations=sorted(is_representable(T))) for T in types])
    return EXIT_OK


def _sidecars(out: Path):
    stem = out.with_suffix("")
    return stem.with_name(stem.name + ".sym.json"), stem.with_name(stem.name + ".report.json")


def _build_and_write(Q, q, target, args):
    if args.resolution < 8:
        raise ValidationError("resolution must be at least 8")
    E = build(Q, q, args.resolution)
    report = verify_against(E, target, equiv_tol=args.equiv_tol)
    out = Path(args.output) if args.output else Path(f"surface.{args.format}")
    sym, rep = _sidecars(out)
    try:
        rep.write_text(report.to_json(), encoding="utf-8")
        if report.overall:
            loops = mk.boundary_loops(E.mesh)
            out.write_bytes(mk.export_mesh(E.mesh, loops, args.format))
            sym.write_text(json.dumps(E.symmetry_dict(), separators=(",", ":")) + "\n",
                           encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot write outputs: {exc}") from exc
    summary = {"overall": report.overall, "mesh": str(out) if report.overall else None,
               "report": str(rep), "vertices": E.mesh.n_vertices,
               "triangles": E.mesh.n_triangles}
    if report.overall:
        summary["symmetry"] = str(sym)
    else:
        summary["failed"] = report.failures()
    _emit(summary)
    return EXIT_OK if report.overall else EXIT_FAILED


def cmd_build(args):
    if args.catalog:
        e = cat.get_entry(args.catalog)
        if not e.representable:
            _emit({"representable": False, "name": e.name})
            return EXIT_NEGATIVE
        return _build_and_write(e.quotient, e.q, e.type, args)
    Q = _parse(QuotientData.from_dict, _load_json(args.input))
    q = args.q if args.q is not None else _first_q(Q)
    return _build_and_write(Q, q, lift_data_of(Q, q), args)


def cmd_verify(args):
    mesh_path = Path(args.mesh)
    fmt = args.format or mesh_path.suffix.lstrip(".").lower()
    sym_path = Path(args.sym) if args.sym else _sidecars(mesh_path)[0]
    try:
        M = mk.import_mesh(mesh_path.read_bytes(), fmt)
        sym = json.loads(sym_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise _InputError(f"cannot load mesh or symmetry sidecar: {exc}") from exc
    if args.catalog:
        target = cat.get_entry(args.catalog).type
        if target is None:
            raise ValidationError(f"catalog entry {args.catalog} has no bordered type")
    else:
        target = _parse(AutomorphismType.from_dict, _load_json(args.input))
    perm = np.asarray(sym["perm"], dtype=np.int64)
    E = EquivariantMesh(M, int(sym["p"]), int(sym["q"]), perm, np.full(len(perm), -1))
    report = verify_against(E, target, equiv_tol=args.equiv_tol)
    _emit(report.to_dict(), args.output)
    return EXIT_OK if report.overall else EXIT_FAILED


def cmd_catalog(args):
    if not args.name:
        _emit([e.to_dict() for e in cat.catalog_entries()])
        return EXIT_OK
    e = cat.get_entry(args.name)
    if args.output is None:
        _emit(e.to_dict())
        return EXIT_OK
    if not e.representable:
        _emit({"representable": False, "name": e.name})
        return EXIT_NEGATIVE
    return _build_and_write(e.quotient, e.q, e.type, args)


# -- wiring ------------------------------------------------------------------


def _add_build_options(sp, output_required=False):
    sp.add_argument("-o", "--output", required=output_required, help="mesh output path")
    sp.add_argument("--format", choices=("obj", "ply", "json"), default="obj")
    sp.add_argument("--resolution", type=int, default=32, help="angular resolution N_base")
    sp.add_argument("--equiv-tol", type=float, default=EQUIV_TOL)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equisurf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check", help="which rotation angles can realize a type")
    sp.add_argument("input", nargs="?", help="type JSON (or just {\"p\", \"fixed\"})")
    sp.add_argument("--catalog")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("quotient", help="orbit data of a type")
    sp.add_argument("input")
    sp.add_argument("--q", type=int)
    sp.set_defaults(func=cmd_quotient)

    sp = sub.add_parser("lift", help="type determined by orbit data")
    sp.add_argument("input")
    sp.add_argument("--q", type=int)
    sp.set_defaults(func=cmd_lift)

    sp = sub.add_parser("equivalent", help="are two types topologically equivalent")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.set_defaults(func=cmd_equivalent)

    sp = sub.add_parser("enumerate", help="list all types for (p, genus, k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("build", help="construct, verify and export an equivariant surface")
    sp.add_argument("input", nargs="?", help="quotient JSON")
    sp.add_argument("--catalog")
    sp.add_argument("--q", type=int)
    _add_build_options(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("verify", help="verify a mesh and its .sym.json against a type")
    sp.add_argument("mesh")
    sp.add_argument("input", nargs="?", help="target type JSON")
    sp.add_argument("--catalog")
    sp.add_argument("--sym")
    sp.add_argument("--format", choices=("obj", "ply", "json"))
    sp.add_argument("-o", "--output", help="write the report here instead of stdout")
    sp.add_argument("--equiv-tol", type=float, default=EQUIV_TOL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("catalog", help="list entries, dump one, or build it with -o")
    sp.add_argument("name", nargs="?")
    _add_build_options(sp)
    sp.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NotRepresentableError as exc:
        print(f"not representable: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, MeshStructureError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConstructionError, EquivarianceError) as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
