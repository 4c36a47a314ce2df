"""Command-line front end: ``dgtower <command> FILE [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .cells import CellError, bounded_big_model, rlp_batch
from .complexes import ComplexError
from .dgcat import (
    CategoryError,
    DgCategory,
    is_connective,
    is_fibration,
    is_positively_graded,
    is_quasi_equivalence,
    validate,
)
from .exactlin import Field
from .manifest import ManifestError, parse_file
from .obstruct import LiftingProblem, ObstructionError, iter_stage_functors, obstruction_class, rigidify
from .postnikov import TowerError, reconstruct, small_tower, validate_tower
from .sqzero import BimoduleError, gamma, phi_from_boundary, verify_fiber_sequence

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_INPUT = 2


class InputError(ValueError):
    pass


def _fmt_comb(F: Field, labels, v) -> str:
    terms = [f"{F.format(c)}*{labels[k]}" for k, c in enumerate(v) if c]
    return " + ".join(terms) if terms else "0"


def _homology_dims(A: DgCategory, x: str, y: str, degrees) -> dict:
    H = A.hom(x, y).homology()
    return {str(i): H.dim(i) for i in degrees}


# ----------------------------------------------------------------------
# commands


def cmd_check(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    problems = validate(A)
    pos = is_positively_graded(A)
    report = {
        "category": A.name,
        "field": A.field.descriptor,
        "objects": list(A.objects),
        "total_dimension": A.total_dim(),
        "valid": not problems,
        "positively_graded": pos,
        "connective": is_connective(A),
        "problems": problems,
    }
    summary = "valid" if not problems else "invalid"
    if pos:
        summary += ", positively graded"
    report["summary"] = summary
    return report, EXIT_OK if not problems else EXIT_FAILS


def cmd_homology(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    F = A.field
    homs = {}
    for x, y in A.pairs():
        C = A.hom(x, y)
        if C.is_zero():
            continue
        H = C.homology()
        entry = {}
        for i in C.degrees():
            if H.dim(i):
                entry[str(i)] = [_fmt_comb(F, C.labels(i), H.rep(i, k)) for k in range(H.dim(i))]
        homs[f"{x},{y}"] = {"dims": {str(i): H.dim(i) for i in C.degrees() if H.dim(i)}, "classes": entry}
    return {"category": A.name, "homology": homs}, EXIT_OK


def cmd_tower(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    T = small_tower(A, args.max)
    rep = validate_tower(T)
    stages = []
    for n, S in enumerate(T.stages):
        st = dict(rep["stages"][n])
        st["homology"] = {f"{x},{y}": _homology_dims(S, x, y, range(0, T.cap + 1)) for x, y in A.pairs()
                          if not A.hom(x, y).is_zero()}
        stages.append(st)
    report = {"category": A.name, "cap": T.cap, "stages": stages,
              "transitions": [{k: v for k, v in t.items()} for t in rep["transitions"]]}
    ok = rep["ok"]
    if A.max_degree() <= T.cap:
        _, rr = reconstruct(T)
        report["reconstruction"] = {"isomorphism": rr["isomorphism"], "problems": rr["problems"]}
        ok = ok and rr["isomorphism"]
    else:
        report["reconstruction"] = {"skipped": f"homs reach degree {A.max_degree()} above the cap"}
    report["ok"] = ok
    return report, EXIT_OK if ok else EXIT_FAILS


def cmd_bigmodel(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    n, D = args.n, args.cap
    M = bounded_big_model(A, n, D)
    F = A.field
    sweeps = []
    for m, ext in M.sweeps:
        cells = []
        for c in ext.cells:
            C = ext.base.hom(c.source, c.target)
            cells.append({"label": c.label, "degree": c.generator_degree, "source": c.source, "target": c.target,
                          "kills": _fmt_comb(F, C.labels(m), c.cycle)})
        sweeps.append({"degree": m, "cells": cells})
    P = M.category
    window = {}
    ok = True
    for x, y in A.pairs():
        HP = P.hom(x, y).homology()
        HA = A.hom(x, y).homology()
        good = all(HP.dim(i) == HA.dim(i) for i in range(n + 1)) and all(HP.dim(i) == 0 for i in range(n + 1, D))
        ok = ok and good
        window[f"{x},{y}"] = {"homology": {str(i): HP.dim(i) for i in range(0, D)}, "ok": good}
    fib, fib_rep = is_fibration(M.comparison)
    qe, _ = is_quasi_equivalence(M.comparison, range(0, D))
    rlp = {str(m): rlp_batch(M.comparison, m)[0] for m in range(n + 2, D - 1)}
    ok = ok and fib is True and qe is True and all(rlp.values())
    report = {"category": A.name, "n": n, "cap": D, "cells": M.cell_count(), "sweeps": sweeps,
              "window": window, "comparison_fibration": fib, "comparison_quasi_equivalence": qe,
              "lifting_property": rlp, "ok": ok}
    return report, EXIT_OK if ok else EXIT_FAILS


def cmd_kinvariant(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    n, D = args.n, args.cap
    kd = gamma(A, n, D)
    F = A.field
    homs = {}
    agree = True
    for x, y in A.pairs():
        P = kd.model.category.hom(x, y)
        H = A.hom(x, y).homology()
        if not P.dim(n + 2) or not H.dim(n + 1):
            continue
        phi = kd.phi(x, y)
        other = phi_from_boundary(A, kd.model, x, y)
        agree = agree and phi == other
        classes = [f"H{n + 1}({x},{y})#{k}" for k in range(H.dim(n + 1))]
        homs[f"{x},{y}"] = {P.labels(n + 2)[j]: _fmt_comb(F, classes, phi.column(j)) for j in range(P.dim(n + 2))}
    report = {"category": A.name, "n": n, "cap": D, "bimodule_dims": {
        f"{x},{y}": A.hom(x, y).homology().dim(n + 1) for x, y in A.pairs() if A.hom(x, y).homology().dim(n + 1)},
        "gamma_on_degree_n_plus_2": homs, "routes_agree": agree}
    return report, EXIT_OK if agree else EXIT_FAILS


def cmd_fiberseq(args, man) -> tuple[dict, int]:
    A = man.category(args.category)
    rep = verify_fiber_sequence(A, args.n, args.cap)
    report = {"category": A.name, **{k: v for k, v in rep.items()}}
    return report, EXIT_OK if rep["ok"] else EXIT_FAILS


def cmd_obstruct(args, man) -> tuple[dict, int]:
    P = man.problem(args.problem)
    n = args.n
    if n < 0 or n >= P.cap:
        raise InputError(f"stage {n} is outside 0..{P.cap - 1}")
    Fn = None
    reached = 0
    for k, G in iter_stage_functors(P, n, seed=args.seed):
        reached, Fn = k, G
    report = {"problem": P.source.name, "stage": n}
    if reached < n:
        oc = obstruction_class(P, reached, Fn, seed=args.seed)
        report.update({"verdict": "does not vanish", "blocked_at_stage": reached,
                       "derivation": oc.values_by_label()})
        return report, EXIT_FAILS
    oc = obstruction_class(P, n, Fn, seed=args.seed)
    report["verdict"] = oc.verdict
    report["derivation"] = oc.values_by_label()
    F = P.source.field
    if oc.vanishes:
        report["witness"] = {lab: [F.format(c) for c in v] for lab, v in oc.witness.H.items()}
        return report, EXIT_OK
    report["certificate"] = [F.format(c) for c in (oc.witness.certificate or [])]
    return report, EXIT_FAILS


def cmd_rigidify(args, man) -> tuple[dict, int]:
    P = man.problem(args.problem)
    if args.cap is not None and args.cap != P.cap:
        P = LiftingProblem.build(P.target, P.source, P.F0.obj_map, P.F0.images, cap=args.cap)
    res = rigidify(P, seed=args.seed)
    F = P.source.field
    report = {"problem": P.source.name, "cap": P.cap, "status": res.status, "log": res.log}
    if res.lifted:
        G = res.functor
        report["lift"] = {g.label: _fmt_comb(F, G.hom_of(g).labels(g.degree), G.images[g.label])
                          for g in P.source.generators}
        return report, EXIT_OK
    if res.failure is not None:
        report["failing_stage"] = res.failure.stage
        report["derivation"] = res.failure.values_by_label()
    return report, EXIT_FAILS


COMMANDS = {
    "check": cmd_check,
    "homology": cmd_homology,
    "tower": cmd_tower,
    "bigmodel": cmd_bigmodel,
    "kinvariant": cmd_kinvariant,
    "fiberseq": cmd_fiberseq,
    "obstruct": cmd_obstruct,
    "rigidify": cmd_rigidify,
}


# ----------------------------------------------------------------------
# rendering


def _plain(value) -> object:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return str(value)


def render_text(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar_text(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar_text(v)}")
    else:
        lines.append(f"{pad}{_scalar_text(value)}")
    return lines


def _scalar_text(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v == {} or v == []:
        return "none"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgtower", description="Postnikov towers and obstructions for finite dg categories.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_category=True):
        sp.add_argument("file", help="manifest (JSON lines)")
        sp.add_argument("--json", action="store_true", help="print the report as JSON")
        if needs_category:
            sp.add_argument("--category", default=None, help="category name (default: first in file)")

    common(sub.add_parser("check", help="validate a category and report its predicates"))
    common(sub.add_parser("homology", help="homology of every hom complex"))
    sp = sub.add_parser("tower", help="small tower, its conditions and its limit")
    common(sp)
    sp.add_argument("--max", type=int, default=None, help="top stage (default: top degree)")
    for name, helptext in [("bigmodel", "bounded cell model of stage n"),
                           ("kinvariant", "k-invariant functor into the square-zero extension"),
                           ("fiberseq", "compare stage n+1 with the pullback along the k-invariant")]:
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("-n", type=int, required=True, help="stage")
        sp.add_argument("--cap", type=int, required=True, help="degree cap")
    sp = sub.add_parser("obstruct", help="obstruction class of the canonical stage-n lift")
    common(sp, needs_category=False)
    sp.add_argument("-n", type=int, required=True, help="stage")
    sp.add_argument("--problem", default=None, help="problem name (default: first in file)")
    sp.add_argument("--seed", type=int, default=None, help="seed for the choice of lifts")
    sp = sub.add_parser("rigidify", help="lift through the whole tower")
    common(sp, needs_category=False)
    sp.add_argument("--problem", default=None, help="problem name (default: first in file)")
    sp.add_argument("--cap", type=int, default=None, help="top stage (default: top degree of the target)")
    sp.add_argument("--seed", type=int, default=None, help="seed for the choice of lifts")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        man = parse_file(args.file, check=args.command != "check")
        report, code = COMMANDS[args.command](args, man)
    except OSError as e:
        print(f"dgtower: cannot read {args.file}: {e.strerror}", file=sys.stderr)
        return EXIT_INPUT
    except (ManifestError, InputError, CategoryError, ComplexError, CellError, BimoduleError, TowerError,
            ObstructionError) as e:
        print(f"dgtower: {e}", file=sys.stderr)
        return EXIT_INPUT
    report = _plain(report)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(render_text(report)))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
