"""Named small instances: algebras, categories and lifting problems used by fixtures and tests."""

from __future__ import annotations

from .dgcat import DgCategory, category_from_labels
from .exactlin import Field
from .obstruct import Generator, LiftingProblem, SemiFreeCategory, SemiFreeFunctor


def _power(k: int) -> str:
    return "1" if k == 0 else f"t^{k}"


def truncated_polynomial(F: Field, r: int, e: int = 1, name: str | None = None) -> DgCategory:
    """``k[t]/(t^r)`` with ``|t| = e`` and zero differential, on one object ``o``."""
    if r < 1 or e < 0:
        raise ValueError("need r >= 1 and e >= 0")
    basis: dict = {}
    for k in range(r):
        basis.setdefault(k * e, []).append(_power(k))
    prods = {}
    for a in range(r):
        for b in range(r - a):
            # graded commutativity is not needed: the algebra is generated by one element
            prods[(_power(a), _power(b))] = {_power(a + b): 1}
    return category_from_labels(F, ["o"], {("o", "o"): basis}, {}, prods, {"o": {"1": 1}},
                                name or f"k[t]/t^{r}")


def doubled(A: DgCategory, name: str | None = None) -> DgCategory:
    """Two objects ``1, 2`` with every hom a copy of the single endomorphism complex of ``A``."""
    if len(A.objects) != 1:
        raise ValueError("doubling needs a one-object category")
    o = A.objects[0]
    C = A.hom(o, o)
    objs = ["1", "2"]
    basis = {}
    for x in objs:
        for y in objs:
            basis[(x, y)] = {i: [f"{lab}[{x}{y}]" for lab in C.labels(i)] for i in C.degrees()}
    differential = {}
    for x in objs:
        for y in objs:
            for i in C.degrees():
                if not C.dim(i - 1):
                    continue
                d = C.d(i)
                for k, lab in enumerate(C.labels(i)):
                    col = {f"{C.labels(i - 1)[r]}[{x}{y}]": d.rows[r][k] for r in range(d.nrows) if d.rows[r][k]}
                    if col:
                        differential[f"{lab}[{x}{y}]"] = col
    prods = {}
    for x in objs:
        for y in objs:
            for z in objs:
                for p in C.degrees():
                    for q in C.degrees():
                        for gi, gl in enumerate(C.labels(p)):
                            for fi, fl in enumerate(C.labels(q)):
                                res = A.compose_basis(o, o, o, p, gi, q, fi)
                                if res:
                                    prods[(f"{gl}[{y}{z}]", f"{fl}[{x}{y}]")] = {
                                        f"{C.labels(p + q)[k]}[{x}{z}]": c for k, c in res.items()}
    ident = {x: {f"{lab}[{x}{x}]": c for lab, c in zip(C.labels(0), A.ident[o]) if c} for x in objs}
    return category_from_labels(A.field, objs, basis, differential, prods, ident, name or f"double({A.name})")


def massey_category(F: Field) -> DgCategory:
    """A chain ``0 -> 1 -> 2 -> 3`` whose two null-homotopic composites give a nonzero triple product."""
    basis = {
        ("0", "1"): {0: ["a0"]},
        ("1", "2"): {0: ["a1"]},
        ("2", "3"): {0: ["a2"]},
        ("0", "2"): {0: ["a1a0"], 1: ["y02"]},
        ("1", "3"): {0: ["a2a1"], 1: ["y13"]},
        ("0", "3"): {0: ["a2a1a0"], 1: ["a2y02", "y13a0"]},
    }
    for x in "0123":
        basis[(x, x)] = {0: [f"id{x}"]}
    differential = {
        "y02": {"a1a0": 1},
        "y13": {"a2a1": 1},
        "a2y02": {"a2a1a0": 1},
        "y13a0": {"a2a1a0": 1},
    }
    prods = {
        ("a1", "a0"): {"a1a0": 1},
        ("a2", "a1"): {"a2a1": 1},
        ("a2", "a1a0"): {"a2a1a0": 1},
        ("a2a1", "a0"): {"a2a1a0": 1},
        ("a2", "y02"): {"a2y02": 1},
        ("y13", "a0"): {"y13a0": 1},
    }
    for (x, y), degs in list(basis.items()):
        for labs in degs.values():
            for lab in labs:
                prods[(f"id{y}", lab)] = {lab: 1}
                prods[(lab, f"id{x}")] = {lab: 1}
    ident = {x: {f"id{x}": 1} for x in "0123"}
    return category_from_labels(F, list("0123"), basis, differential, prods, ident, "massey")


def massey_source(F: Field) -> SemiFreeCategory:
    gens = [
        Generator("f1", "b0", "b1", 0),
        Generator("f2", "b1", "b2", 0),
        Generator("f3", "b2", "b3", 0),
        Generator("u12", "b0", "b2", 1),
        Generator("u23", "b1", "b3", 1),
        Generator("g", "b0", "b3", 2),
    ]
    d = {
        "u12": {("f2", "f1"): 1},
        "u23": {("f3", "f2"): 1},
        "g": {("f3", "u12"): 1, ("u23", "f1"): -1},
    }
    return SemiFreeCategory(F, ["b0", "b1", "b2", "b3"], gens, d, name="massey source")


def massey_problem(F: Field | None = None) -> LiftingProblem:
    """A functor to H0 that does not lift: the attaching data forces the triple product."""
    F = F or Field.prime(2)
    A = massey_category(F)
    B = massey_source(F)
    obj = {f"b{i}": str(i) for i in range(4)}
    return LiftingProblem.build(A, B, obj, {"f1": [1], "f2": [1], "f3": [1]})


def massey_liftable_problem(F: Field | None = None) -> LiftingProblem:
    """The same data with the top cell removed; this one lifts."""
    F = F or Field.prime(2)
    A = massey_category(F)
    full = massey_source(F)
    B = SemiFreeCategory(F, full.objects, full.generators[:5], {k: v for k, v in full.d.items() if k != "g"},
                         name="massey source without top cell")
    obj = {f"b{i}": str(i) for i in range(4)}
    return LiftingProblem.build(A, B, obj, {"f1": [1], "f2": [1], "f3": [1]})


def power_source(F: Field, e: int, j: int) -> SemiFreeCategory:
    """``g'`` in degree ``e`` with ``d = 0`` and ``g`` in degree ``j e + 1`` with ``d g = g'^j``."""
    gens = [Generator("gp", "b", "b", e), Generator("g", "b", "b", j * e + 1)]
    return SemiFreeCategory(F, ["b"], gens, {"g": {("gp",) * j: 1}}, name=f"power source({e},{j})")


def power_instance(F: Field, e: int, j: int, r: int | None = None, double: bool = False):
    """A stage ``n = j e - 1`` at which ``g' -> t`` cannot be lifted since ``t^j`` survives.

    Returns ``(problem, n, Fn)``.
    """
    if j < 2 and e < 1:
        raise ValueError("need j >= 2")
    r = r if r is not None else j + 2
    A = truncated_polynomial(F, r, e)
    obj = "o"
    if double:
        A = doubled(A)
        obj = "1"
    B = power_source(F, e, j)
    P = LiftingProblem.build(A, B, {"b": obj}, {})
    n = j * e - 1
    S = P.stage(n)
    label = "t^1" if not double else "t^1[11]"
    _, _, _, v = S.basis_vector(label)
    Fn = SemiFreeFunctor(B, S, {"b": obj}, {"gp": v})
    return P, n, Fn


def hand_nonvanishing_instances(F: Field | None = None) -> list:
    """Stage-level instances whose obstruction does not vanish, as ``(name, problem, n, Fn)``."""
    F = F or Field.prime(2)
    out = []
    for e, j in [(1, 2), (1, 3), (1, 4), (1, 5), (2, 2)]:
        P, n, Fn = power_instance(F, e, j)
        out.append((f"power e={e} j={j}", P, n, Fn))
    P, n, Fn = power_instance(F, 1, 2, double=True)
    out.append(("doubled power e=1 j=2", P, n, Fn))
    P = massey_problem(F)
    out.append(("massey", P, 0, P.F0))
    return out


def invertible_h0_category(F: Field) -> DgCategory:
    """Objects ``x, y`` with ``f, g`` inverse up to the homotopies ``u, v``.

    ``g f = p`` and ``f g = q`` are idempotents with ``d u = p - id`` and
    ``d v = q - id``; products involving ``u`` or ``v`` vanish.
    """
    basis = {
        ("x", "x"): {0: ["idx", "p"], 1: ["u"]},
        ("y", "y"): {0: ["idy", "q"], 1: ["v"]},
        ("x", "y"): {0: ["f"]},
        ("y", "x"): {0: ["g"]},
    }
    differential = {"u": {"p": 1, "idx": -1}, "v": {"q": 1, "idy": -1}}
    prods = {
        ("g", "f"): {"p": 1},
        ("f", "g"): {"q": 1},
        ("p", "p"): {"p": 1},
        ("q", "q"): {"q": 1},
        ("f", "p"): {"f": 1},
        ("q", "f"): {"f": 1},
        ("g", "q"): {"g": 1},
        ("p", "g"): {"g": 1},
    }
    for (a, b), degs in basis.items():
        for labs in degs.values():
            for lab in labs:
                prods[(f"id{b}", lab)] = {lab: 1}
                prods[(lab, f"id{a}")] = {lab: 1}
    return category_from_labels(F, ["x", "y"], basis, differential, prods, {"x": {"idx": 1}, "y": {"idy": 1}},
                                "homotopy equivalent pair")
