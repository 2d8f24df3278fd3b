"""Command-line front end.

Every command prints a JSON report on stdout and a one-line summary on
stderr.  Exit codes: 0 pass, 1 input error, 2 verification failure.

Inputs are file paths or built-in names.  Built-in names may carry
parameters separated by colons, e.g. ``vec_g:Z2``, ``vec_g:Z2:cocycle=omega``
or ``ty:Z2:q=i:tau=+``; the first bare parameter is the group.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from importlib import metadata
from pathlib import Path
from typing import Any

from . import catalog
from .skeletal_core import CategoryData, SchemaError, VerificationReport, load_category, verify_category

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

_POSITIONAL = {"vec_g": "group", "ty": "H"}


class InputError(Exception):
    """Unresolvable or malformed input; maps to exit code 1."""


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _digest(doc: Any) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, default=str).encode()).hexdigest()[:16]


def parse_builtin(text: str) -> tuple[str, dict]:
    """``"ty:Z2:q=i:tau=+"`` -> ``("ty", {"H": "Z2", "q": "i", "tau": "+"})``."""
    name, *parts = text.split(":")
    params: dict[str, str] = {}
    for p in parts:
        if "=" in p:
            k, v = p.split("=", 1)
            params[k] = v
        elif name in _POSITIONAL and _POSITIONAL[name] not in params:
            params[_POSITIONAL[name]] = p
        else:
            raise InputError(f"unexpected parameter {p!r} for {name}")
    return name, params


def resolve_document(text: str) -> tuple[dict, str]:
    """Load a JSON document from a path, or produce the document of a built-in."""
    p = Path(text)
    if p.suffix == ".json" or p.exists():
        try:
            doc = json.loads(p.read_text())
        except FileNotFoundError:
            raise InputError(f"no such file: {text}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{text}: invalid JSON ({exc})") from None
        return doc, str(p)
    name, params = parse_builtin(text)
    try:
        return catalog.builtin_document(name, params), f"builtin:{text}"
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc).strip("'\"")) from None


def _category(text: str, tolerance: float | None) -> tuple[CategoryData, dict]:
    doc, src = resolve_document(text)
    if doc.get("format") != "fuscat/1":
        raise InputError(f"{text} is not a category document")
    try:
        cat = load_category(doc)
    except (SchemaError, KeyError, ValueError) as exc:
        raise InputError(f"{text}: {exc}") from None
    if tolerance is not None:
        cat = cat.copy(tolerance=tolerance)
    return cat, {"source": src, "digest": _digest(doc)}


def _crossed(text: str):
    doc, src = resolve_document(text)
    if doc.get("format") != "crossed/1":
        raise InputError(f"{text} is not a crossed category document")
    try:
        return catalog.load_crossed(doc), {"source": src, "digest": _digest(doc)}
    except (SchemaError, KeyError, ValueError) as exc:
        raise InputError(f"{text}: {exc}") from None


def _triangulation(text: str):
    from .statesum import load_triangulation
    doc, src = resolve_document(text)
    try:
        return load_triangulation(doc), {"source": src, "digest": _digest(doc)}
    except (SchemaError, KeyError, ValueError) as exc:
        raise InputError(f"{text}: {exc}") from None


def _datum(text: str):
    from .orbifold import datum_from_dict
    doc, src = resolve_document(text)
    try:
        return datum_from_dict(doc), {"source": src, "digest": _digest(doc)}
    except (SchemaError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{text}: {exc}") from None


def _cplx(z: complex) -> list[float]:
    return [float(complex(z).real), float(complex(z).imag)]


def _write(path: str | None, doc: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(doc, indent=1) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args) -> tuple[dict, bool]:
    doc, _ = resolve_document(args.source)
    fmt = doc.get("format")
    if fmt == "fuscat/1":
        cat, info = _category(args.source, args.tolerance)
        reports = verify_category(cat)
    elif fmt == "crossed/1":
        data, info = _crossed(args.source)
        if args.tolerance is not None:
            data.underlying = data.underlying.copy(tolerance=args.tolerance)
        reports = [catalog.validate_crossed(data)]
    elif fmt == "tri3/1":
        t, info = _triangulation(args.source)
        rep = VerificationReport(f"triangulation:{t.name or args.source}")
        rep.add("euler_characteristic", abs(t.euler_characteristic), 0.5,
                detail=f"V={t.num_vertices} E={t.num_edges} F={t.num_faces} T={t.tetrahedra}")
        reports = [rep]
    else:
        raise InputError(f"{args.source}: unknown document format {fmt!r}")
    ok = all(r.passed for r in reports)
    return {"inputs": [info], "reports": [r.to_dict() for r in reports]}, ok


def cmd_tv(args) -> tuple[dict, bool]:
    from .statesum import orbifold_state_sum_details, tv_state_sum
    cat, ci = _category(args.category, args.tolerance)
    t, ti = _triangulation(args.triangulation)
    res = tv_state_sum(cat, t, jobs=args.jobs)
    out: dict = {"inputs": [ci, ti], "tv": _cplx(res.value), "admissible_colourings": res.admissible}
    ok = True
    if args.both_paths:
        from .orbifold import from_spherical_category
        _, datum = from_spherical_category(cat)
        orb = orbifold_state_sum_details(datum, t, jobs=args.jobs)
        diff = abs(res.value - orb.value)
        tol = args.tolerance if args.tolerance is not None else 10 * cat.tolerance
        out.update(orbifold=_cplx(orb.value), difference=diff, tolerance=tol)
        ok = diff < tol
    return out, ok


def _build(args):
    from .orbifold import from_commutative_frobenius, from_crossed_extension, from_spherical_category
    if args.from_spherical:
        cat, info = _category(args.from_spherical, args.tolerance)
        return from_spherical_category(cat)[1], info
    if args.from_commutative:
        from .frobenius import group_algebra
        cat, info = _category(args.from_commutative, args.tolerance)
        labels = [s for s in args.algebra.split(",") if s]
        try:
            alg = group_algebra(cat, [cat.index(s) for s in labels])
        except KeyError as exc:
            raise InputError(f"unknown label {exc}") from None
        return from_commutative_frobenius(alg), info
    data, info = _crossed(args.from_crossed)
    try:
        given = dict(kv.split("=", 1) for kv in args.m or [])
    except ValueError:
        raise InputError("--m expects G=LABEL") from None
    # degrees not given default to their lowest simple
    choice = {}
    for x, lab in enumerate(data.underlying.labels):
        choice.setdefault(data.grading[x], lab)
    choice.update(given)
    return from_crossed_extension(data, choice), info


def cmd_orbifold_build(args) -> tuple[dict, bool]:
    from .orbifold import datum_to_dict
    datum, info = _build(args)
    doc = datum_to_dict(datum)
    _write(args.output, doc)
    return {"inputs": [info], "datum": datum.name, "output": args.output,
            "digest": _digest(doc)}, True


def _check(datum, args) -> tuple[dict, bool]:
    from .orbifold import PrecheckError, verify_orbifold_datum
    try:
        rep = verify_orbifold_datum(datum, jobs=args.jobs, tolerance=args.tolerance)
    except PrecheckError as exc:
        return {"error": str(exc), "prechecks": exc.report.to_dict()}, False
    out = rep.to_dict()
    out["failing"] = [c.name for c in rep.checks if not c.passed]
    return out, rep.passed


def cmd_orbifold_check(args) -> tuple[dict, bool]:
    datum, info = _datum(args.datum)
    out, ok = _check(datum, args)
    return {"inputs": [info], "report": out}, ok


def _bimodule(datum, args):
    from .frobenius import column_bimodule, regular_module
    if args.blocks:
        ns = [int(x) for x in args.blocks.split(",")]
        return column_bimodule(datum.A, ns)[0]
    return regular_module(datum.A)


def cmd_orbifold_transport(args) -> tuple[dict, bool]:
    from .orbifold import datum_to_dict, morita_transport, psi_ratio_residuals
    datum, info = _datum(args.datum)
    X = _bimodule(datum, args)
    tr = morita_transport(datum, X, full=True)
    out: dict = {"inputs": [info], "witnesses": tr.witnesses.to_dict()}
    ok = tr.witnesses.passed
    if datum.cat.is_vect:
        ratios = psi_ratio_residuals(datum, X, tr.datum)
        out["psi_ratio"] = [{k: (_cplx(v) if isinstance(v, complex) else v) for k, v in r.items()}
                            for r in ratios]
    rep, good = _check(tr.datum, args)
    out["report"] = rep
    doc = datum_to_dict(tr.datum)
    _write(args.output, doc)
    out["output"] = args.output
    return out, ok and good


def cmd_orbifold_iso_check(args) -> tuple[dict, bool]:
    from .frobenius import module_dual
    from .orbifold import check_T_compatible_iso, morita_transport, round_trip_iso
    from .treecalc import Morphism
    d1, i1 = _datum(args.datum)
    if args.against:
        d2, i2 = _datum(args.against)
        if not args.rho:
            raise InputError("--against needs --rho with the candidate morphism")
        rho = Morphism.from_dict(d1.cat, json.loads(Path(args.rho).read_text()))
        inputs = [i1, i2]
    else:
        X = _bimodule(d1, args)
        there = morita_transport(d1, X, full=True)
        back = morita_transport(there.datum, module_dual(X), full=True)
        d2, rho = back.datum, round_trip_iso(d1, X, there, back)
        inputs = [i1]
    rep = check_T_compatible_iso(d1, d2, rho)
    return {"inputs": inputs, "report": rep.to_dict()}, rep.passed


def cmd_catalog_list(args) -> tuple[dict, bool]:
    return {"catalog_dir": str(catalog.catalog_dir()), "available": catalog.available()}, True


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the tolerance stored with the input")
    common.add_argument("--jobs", type=int, default=1, help="worker count")
    common.add_argument("--report", default=None, help="also write the JSON report to this path")

    p = argparse.ArgumentParser(prog="tqft-orbifold",
                                description="Fusion category verification and state sums.")
    p.add_argument("--version", action="version", version=_version())
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="run all applicable verifiers")
    v.add_argument("source")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("tv", parents=[common], help="Turaev-Viro invariant")
    t.add_argument("category")
    t.add_argument("triangulation")
    t.add_argument("--both-paths", action="store_true",
                   help="also evaluate the orbifold state sum and compare")
    t.set_defaults(func=cmd_tv)

    o = sub.add_parser("orbifold", help="build, check and transport orbifold data")
    osub = o.add_subparsers(dest="action", required=True)
    b = osub.add_parser("build", parents=[common])
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--from-spherical", metavar="CATEGORY")
    src.add_argument("--from-commutative", metavar="CATEGORY")
    src.add_argument("--from-crossed", metavar="CROSSED")
    b.add_argument("--algebra", default="", help="comma-separated labels of a group algebra")
    b.add_argument("--m", action="append", metavar="G=LABEL",
                   help="simple object of degree G; repeatable, write --m=-1=X for negative names")
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=cmd_orbifold_build)

    c = osub.add_parser("check", parents=[common])
    c.add_argument("datum")
    c.set_defaults(func=cmd_orbifold_check)

    for name, func in (("transport", cmd_orbifold_transport), ("iso-check", cmd_orbifold_iso_check)):
        q = osub.add_parser(name, parents=[common])
        q.add_argument("datum")
        q.add_argument("--blocks", default=None,
                       help="block sizes n_i of the column bimodule (vector-space data); "
                            "default is the regular bimodule")
        if name == "transport":
            q.add_argument("-o", "--output", default=None)
        else:
            q.add_argument("--against", default=None, help="second datum file")
            q.add_argument("--rho", default=None, help="candidate T-isomorphism (morphism JSON)")
        q.set_defaults(func=func)

    k = sub.add_parser("catalog", help="shipped data")
    ksub = k.add_subparsers(dest="action", required=True)
    kl = ksub.add_parser("list", parents=[common])
    kl.set_defaults(func=cmd_catalog_list)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        body, ok = args.func(args)
        code = EXIT_OK if ok else EXIT_FAIL
    except InputError as exc:
        body, ok, code = {"error": str(exc)}, False, EXIT_INPUT
    except (OSError, SchemaError) as exc:
        body, ok, code = {"error": str(exc)}, False, EXIT_INPUT
    except ValueError as exc:
        # constructor prechecks (non-Frobenius algebra, bad Morita witnesses, ...)
        body, ok, code = {"error": str(exc)}, False, EXIT_FAIL
    report = {"command": ["tqft-orbifold", *argv], "tool": "tqft_orbifold", "version": _version(),
              "passed": ok, "exit_code": code, "seconds": round(time.perf_counter() - t0, 4)}
    report.update(body)
    text = json.dumps(report, indent=1, default=str)
    print(text)
    if getattr(args, "report", None):
        Path(args.report).write_text(text + "\n")
    verdict = {EXIT_OK: "PASS", EXIT_FAIL: "FAIL", EXIT_INPUT: "INPUT ERROR"}[code]
    label = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    print(f"{label}: {verdict}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
