"""Command-line front end: load and validate models, run each computation,
and emit deterministic JSON reports (schema ``eqih-report/1``).

Exit codes: 0 all checks pass, 1 a verified structural property failed
(engine bug or theorem violation), 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fixtures
from .classify import ModelIso, consequence_check, f_related, is_optimal
from .equivariant import (
    build_equivariant,
    default_window,
    eq1_cohomology,
    equivariant_gysin_les,
    truncation_stable,
)
from .errors import EqihError, InputError, PropertyViolation
from .homalg import check_exact, is_exact
from .localize import cone_formula_check, localize, localized_gysin
from .model import (
    Perversity,
    load_model,
    model_to_dict,
    save_model,
    validate,
)
from .perverse import (
    cogysin_cohomology,
    cogysin_les,
    euler_map,
    gysin_cohomology,
    gysin_les,
    omega_cohomology,
)
from .ratla import rat_str
from .spectral import (
    d3_check,
    fixed_point_preconditions,
    pages,
    skjelbred,
)

SCHEMA = "eqih-report/1"


# ---------------------------------------------------------------------------
# serialization helpers


def _mat_json(mat):
    return [[rat_str(x) for x in row] for row in mat.entries]


def _les_json(seq):
    return {
        "nodes": [{"label": lab, "dim": dim}
                  for lab, dim in zip(seq.labels, seq.dims)],
        "maps": [_mat_json(m) for m in seq.maps],
        "exact": is_exact(seq),
    }


def _perversity(arg: str, m) -> Perversity:
    arg = (arg or "").strip()
    values = {}
    if arg:
        for piece in arg.split(","):
            if "=" not in piece:
                raise InputError(
                    "perversity entries must look like stratum=int: %r" % piece)
            key, _, val = piece.partition("=")
            try:
                values[key.strip()] = int(val)
            except ValueError:
                raise InputError("perversity value %r is not an integer" % val)
    p = Perversity(values)
    m.check_perversity(p)
    return p


def _load(path):
    if path == "-":
        return load_model(sys.stdin)
    return load_model(path)


def _emit(report, human=False, stream=None):
    stream = stream or sys.stdout
    if human:
        _emit_human(report, stream)
    else:
        json.dump(report, stream, indent=2)
        stream.write("\n")


def _emit_human(node, stream, indent=0):
    pad = "  " * indent
    if isinstance(node, dict):
        for key, val in node.items():
            if isinstance(val, (dict, list)) and val:
                stream.write("%s%s:\n" % (pad, key))
                _emit_human(val, stream, indent + 1)
            else:
                stream.write("%s%s: %s\n" % (pad, key, json.dumps(val)))
    elif isinstance(node, list):
        for val in node:
            if isinstance(val, (dict, list)):
                _emit_human(val, stream, indent)
                stream.write("\n" if indent == 0 else "")
            else:
                stream.write("%s- %s\n" % (pad, json.dumps(val)))
    else:
        stream.write("%s%s\n" % (pad, json.dumps(node)))


def _report(command, model=None, **body):
    head = {"schema": SCHEMA, "command": command}
    if model is not None:
        head["model"] = model.name
    head.update(body)
    return head


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args):
    m = _load(args.file)
    checks = validate(m, strict=args.strict)
    passed = all(c["passed"] for c in checks)
    report = _report("validate", m, strict=args.strict, checks=checks,
                     passed=passed)
    return report, 0 if passed else 2


def _cmd_cohomology(args):
    m = _load(args.file)
    p = _perversity(args.perversity, m)
    report = _report(
        "cohomology", m, perversity=p.label(),
        base_dims=list(omega_cohomology(m, p).dims()),
        total_dims=list(eq1_cohomology(m, p).dims()),
    )
    return report, 0


def _cmd_gysin(args):
    m = _load(args.file)
    p = _perversity(args.perversity, m)
    eub = euler_map(m, p)
    top = m.ambient.top_degree
    gles = gysin_les(m, p)
    kles = cogysin_les(m, p)
    report = _report(
        "gysin", m, perversity=p.label(),
        gysin_dims=list(gysin_cohomology(m, p).dims()),
        cogysin_dims=list(cogysin_cohomology(m, p).dims()),
        euler_maps={str(k): _mat_json(eub.mat(k)) for k in range(top + 1)},
        gysin_les=_les_json(gles),
        cogysin_les=_les_json(kles),
    )
    ok = report["gysin_les"]["exact"] and report["cogysin_les"]["exact"]
    return report, 0 if ok else 1


def _cmd_equivariant(args):
    m = _load(args.file)
    p = _perversity(args.perversity, m)
    n_u = args.nu if args.nu is not None else default_window(m)
    eq = build_equivariant(m, p, n_u)
    seq, les_report = equivariant_gysin_les(m, p, n_u)
    report = _report(
        "equivariant", m, perversity=p.label(), window=n_u,
        dims=list(eq.dims()),
        u_ranks=list(eq.u_ranks()),
        les=_les_json(seq),
        les_checks=les_report,
    )
    ok = les_report["exact"] and les_report["decomposition_verified"]
    return report, 0 if ok else 1


def _cmd_spectral(args):
    m = _load(args.file)
    p = _perversity(args.perversity, m)
    pgs, limit = pages(m, p, r_max=args.pages)
    body = {
        "pages": [{
            "r": pg.r,
            "cells": {"%d,%d" % c: d for c, d in sorted(pg.cells.items())},
            "differentials": {"%d,%d" % c: _mat_json(mat)
                              for c, mat in sorted(pg.differentials.items())
                              if not mat.is_zero()},
        } for pg in pgs],
        "limit": {"%d,%d" % c: d for c, d in sorted(limit.items())},
    }
    if args.d3_check:
        body["d3"] = d3_check(m, p)
    report = _report("spectral", m, perversity=p.label(), **body)
    return report, 0


def _cmd_skjelbred(args):
    m = _load(args.file)
    seq = skjelbred(m)
    report = _report(
        "skjelbred", m,
        preconditions=fixed_point_preconditions(m),
        sequence=_les_json(seq),
        checks=check_exact(seq),
    )
    return report, 0 if report["sequence"]["exact"] else 1


def _cmd_localize(args):
    m = _load(args.file)
    p = _perversity(args.perversity, m)
    il = localize(m, p)
    body = {
        "ranks": {"even": il.even_rank, "odd": il.odd_rank},
        "gysin": localized_gysin(m, p),
    }
    if args.cone_check:
        body["cone"] = cone_formula_check(m, p)
    report = _report("localize", m, perversity=p.label(), **body)
    ok = body["gysin"]["exact"] and (not args.cone_check
                                     or body["cone"]["match"])
    return report, 0 if ok else 1


def _load_iso(path):
    if path == "-":
        data = json.load(sys.stdin)
    else:
        with open(path) as fh:
            data = json.load(fh)
    if not isinstance(data, dict):
        raise InputError("iso document must be a JSON object")
    from .ratla import Matrix
    mats = {}
    for key, rows in (data.get("mats") or {}).items():
        mats[int(key)] = Matrix.from_rows(rows)
    return ModelIso(mats, dict(data.get("strata") or {}))


def _cmd_compare(args):
    m1 = _load(args.file1)
    m2 = _load(args.file2)
    iso = _load_iso(args.iso)
    optimal = is_optimal(iso, m1, m2)
    body = {"models": [m1.name, m2.name], "optimal": optimal}
    if optimal:
        related, gamma = f_related(iso, m1, m2)
        body["related"] = related
        if related:
            body["witness"] = [rat_str(x) for x in gamma]
            body["consequences"] = consequence_check(iso, m1, m2)
    report = _report("compare", **body)
    return report, 0


def _cmd_fixture(args):
    m = fixtures.make(args.name, seed=args.seed, size=args.size)
    if args.output:
        save_model(m, args.output)
        report = _report("fixture", m, written=args.output)
        return report, 0
    _emit(model_to_dict(m), human=False)
    return None, 0


def _cmd_selftest(args):
    models = [fixtures.make(n) for n in ("hopf", "rot", "cone2", "noperv")]
    models += [fixtures.random_model(seed) for seed in range(args.seeds)]
    counters = {
        "models": len(models),
        "validations": 0,
        "oracle_agreements": 0,
        "exact_sequences": 0,
        "spectral_suites": 0,
        "d3_checks": 0,
        "localizations": 0,
        "truncation_stable": 0,
    }
    for m in models:
        checks = validate(m, strict=True)
        if not all(c["passed"] for c in checks):
            raise PropertyViolation("fixture %r fails validation" % m.name)
        counters["validations"] += 1
        fp_ok = all(c["passed"] for c in fixed_point_preconditions(m))
        if fp_ok:
            seq = skjelbred(m)
            if not is_exact(seq):
                raise PropertyViolation("inexact fixed-point sequence")
            counters["exact_sequences"] += 1
        for p in m.perversity_set:
            eq = build_equivariant(m, p)
            oracle = fixtures.oracle_cohomology(m, p, eq.n_u)
            if eq.dims() != oracle["dims"] or eq.u_ranks() != oracle["u_ranks"]:
                raise PropertyViolation(
                    "oracle disagreement on %r at %s" % (m.name, p.label()))
            counters["oracle_agreements"] += 1
            for seq in (gysin_les(m, p), cogysin_les(m, p),
                        equivariant_gysin_les(m, p)[0]):
                if not is_exact(seq):
                    raise PropertyViolation(
                        "inexact sequence on %r at %s" % (m.name, p.label()))
                counters["exact_sequences"] += 1
            pages(m, p)
            counters["spectral_suites"] += 1
            rep = d3_check(m, p)
            if not rep["all_equal"]:
                raise PropertyViolation("third-differential mismatch")
            counters["d3_checks"] += 1
            localized_gysin(m, p)
            counters["localizations"] += 1
            if not truncation_stable(m, p):
                raise PropertyViolation("truncation instability")
            counters["truncation_stable"] += 1
    report = {"schema": SCHEMA, "command": "selftest", "seeds": args.seeds,
              "checks": counters, "passed": True}
    return report, 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="eqih",
        description="Exact computations for circle actions on stratified "
                    "models: perverse, equivariant, and localized "
                    "intersection cohomology.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, model_arg=True, perv=False):
        sp = sub.add_parser(name, help=help_text)
        if model_arg:
            sp.add_argument("file", help="model file (JSON), or - for stdin")
        if perv:
            sp.add_argument("-p", "--perversity", default="",
                            help="comma-separated stratum=int assignments")
        sp.add_argument("--human", action="store_true",
                        help="pretty text output instead of JSON")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("validate", _cmd_validate, "check the model axioms")
    sp.add_argument("--strict", action="store_true")

    add("cohomology", _cmd_cohomology,
        "perverse cohomology of the orbit space and the total model",
        perv=True)
    add("gysin", _cmd_gysin,
        "Gysin/co-Gysin terms, Euler maps, and both long exact sequences",
        perv=True)

    sp = add("equivariant", _cmd_equivariant,
             "truncated equivariant cohomology and its Gysin sequence",
             perv=True)
    sp.add_argument("--nu", type=int, default=None,
                    help="truncation degree override")

    sp = add("spectral", _cmd_spectral,
             "spectral sequence pages of the u-power filtration", perv=True)
    sp.add_argument("--pages", type=int, default=None,
                    help="highest page to report")
    sp.add_argument("--d3-check", action="store_true",
                    help="verify the closed form of the third differential")

    add("skjelbred", _cmd_skjelbred,
        "fixed-point long exact sequence at the zero perversity")

    sp = add("localize", _cmd_localize,
             "ranks of the localized module and the localized Gysin check",
             perv=True)
    sp.add_argument("--cone-check", action="store_true",
                    help="compare with the cone formula (needs cone metadata)")

    sp = sub.add_parser("compare",
                        help="compare two models through an isomorphism file")
    sp.add_argument("file1")
    sp.add_argument("file2")
    sp.add_argument("--iso", required=True,
                    help="JSON with per-degree matrices and a stratum map")
    sp.add_argument("--human", action="store_true")
    sp.set_defaults(fn=_cmd_compare)

    sp = sub.add_parser("fixture", help="emit a named fixture model")
    sp.add_argument("name", help="hopf, rot, cone2, noperv, or random")
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--size", type=int, default=2)
    sp.add_argument("--human", action="store_true")
    sp.set_defaults(fn=_cmd_fixture)

    sp = sub.add_parser("selftest", help="run the full invariant suite")
    sp.add_argument("--seeds", type=int, default=10,
                    help="number of seeded random models")
    sp.add_argument("--human", action="store_true")
    sp.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.fn(args)
    except PropertyViolation as e:
        _emit({"schema": SCHEMA, "error": type(e).__name__,
               "detail": str(e)}, stream=sys.stderr)
        return 1
    except (EqihError, OSError, json.JSONDecodeError) as e:
        _emit({"schema": SCHEMA, "error": type(e).__name__,
               "detail": str(e)}, stream=sys.stderr)
        return 2
    if report is not None:
        _emit(report, human=args.human)
    return code


if __name__ == "__main__":
    sys.exit(main())
