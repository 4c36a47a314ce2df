"""Small Postnikov tower by intelligent truncation, its validation and its limit."""

from __future__ import annotations

from dataclasses import dataclass

from .complexes import ChainMap, inverse_limit, is_quasi_iso
from .dgcat import (
    CategoryError,
    DgCategory,
    DgFunctor,
    build_category,
    functor_equal,
    is_fibration,
    is_positively_graded,
    truncate_category,
    validate,
    validate_functor,
)
from .exactlin import Matrix, is_injective, is_surjective, solve


class TowerError(ValueError):
    pass


@dataclass
class Tower:
    base: DgCategory
    stages: list[DgCategory]
    sections: list[DgFunctor]
    transitions: list[DgFunctor]  # transitions[n]: stages[n+1] -> stages[n]
    cap: int


def _transition(upper: DgCategory, lower: DgCategory, lower_section: DgFunctor) -> DgFunctor:
    # the upper stage agrees with the base in degrees <= n, so the lower section
    # matrices restricted to those degrees are the transition
    maps = {}
    for x, y in upper.pairs():
        S, T = upper.hom(x, y), lower.hom(x, y)
        sec = lower_section.maps[(x, y)]
        maps[(x, y)] = ChainMap(S, T, {i: sec.at(i) for i in T.degrees() if S.dim(i)}, check=False)
    return DgFunctor(upper, lower, {x: x for x in upper.objects}, maps, name="transition")


def small_tower(A: DgCategory, N: int | None = None) -> Tower:
    """Stages ``0..N`` obtained by truncating every hom complex."""
    if not is_positively_graded(A):
        raise TowerError("small_tower needs a positively graded category; apply connective_cover first")
    if N is None:
        N = max(A.max_degree(), 0)
    if N < 0:
        raise TowerError("tower cap must be non-negative")
    stages, sections = [], []
    for n in range(N + 1):
        S, P = truncate_category(A, n, name=f"P{n}({A.name})")
        stages.append(S)
        sections.append(P)
    transitions = [_transition(stages[n + 1], stages[n], sections[n]) for n in range(N)]
    return Tower(A, stages, sections, transitions, N)


def validate_tower(T: Tower, check_fibrations: bool = True) -> dict:
    """Per-stage verdicts for the homology, H0 and vanishing conditions."""
    A = T.base
    report = {"cap": T.cap, "stages": [], "transitions": []}
    ok = True
    for n, (S, P) in enumerate(zip(T.stages, T.sections)):
        entry = {"stage": n, "valid": not validate(S), "section_valid": not validate_functor(P)}
        a1 = True
        b = True
        for x, y in A.pairs():
            f = P.maps[(x, y)]
            good, _ = is_quasi_iso(f, range(0, n + 1))
            dims_match = all(S.hom(x, y).homology().dim(i) == A.hom(x, y).homology().dim(i) for i in range(n + 1))
            a1 = a1 and good and dims_match
            b = b and all(S.hom(x, y).homology().dim(i) == 0 for i in S.hom(x, y).degrees() if i > n)
        entry["A1"] = a1
        # H0 equivalence: identity on objects and bijective on H0 of every hom
        h0_ok = P.is_identity_on_objects() and all(
            is_injective(P.maps[k].induced(0)) and is_surjective(P.maps[k].induced(0)) for k in A.pairs())
        entry["A2"] = h0_ok
        entry["B"] = b
        ok = ok and all(entry[k] for k in ("valid", "section_valid", "A1", "A2", "B"))
        report["stages"].append(entry)
    for n, t in enumerate(T.transitions):
        entry = {"transition": n, "valid": not validate_functor(t),
                 "commutes": functor_equal(T.sections[n + 1].then(t), T.sections[n])}
        if check_fibrations:
            verdict, fib = is_fibration(t)
            entry["fibration"] = verdict
            entry["F2_route"] = fib.get("F2_route")
            good = verdict is True
        else:
            good = True
        ok = ok and entry["valid"] and entry["commutes"] and good
        report["transitions"].append(entry)
    report["ok"] = ok
    return report


def reconstruct(T: Tower) -> tuple[DgCategory, dict]:
    """Degreewise inverse limit of the stages and its comparison with the base."""
    A = T.base
    if A.max_degree() > T.cap:
        raise TowerError(f"homs are supported up to degree {A.max_degree()} but the tower stops at {T.cap}")
    F = A.field
    homs, projs = {}, {}
    for x, y in A.pairs():
        L, pr = inverse_limit([S.hom(x, y) for S in T.stages], [t.maps[(x, y)] for t in T.transitions])
        homs[(x, y)], projs[(x, y)] = L, pr

    def stacked(x, y, i):
        L = homs[(x, y)]
        blocks = [pr.at(i) for pr, S in zip(projs[(x, y)], T.stages) if S.hom(x, y).dim(i)]
        rows = sum(b.nrows for b in blocks)
        return Matrix.vstack(F, L.dim(i), blocks) if blocks else Matrix.zeros(F, rows, L.dim(i))

    def coords(x, y, i, parts):
        # parts: one vector per stage, in stage order
        flat = [c for S, v in zip(T.stages, parts) if S.hom(x, y).dim(i) for c in v]
        sol = solve(stacked(x, y, i), flat)
        if sol is None:
            raise CategoryError("inverse limit is not closed under composition")
        return sol

    def product(x, y, z, p, gi, q, fi):
        parts = []
        for S, pyz, pxy in zip(T.stages, projs[(y, z)], projs[(x, y)]):
            out = S.hom(x, z).dim(p + q)
            if out == 0 or S.hom(y, z).dim(p) == 0 or S.hom(x, y).dim(q) == 0:
                parts.append([F.zero] * out)
                continue
            parts.append(S.compose(x, y, z, p, pyz.at(p).column(gi), q, pxy.at(q).column(fi)))
        return coords(x, z, p + q, parts)

    ident = {x: coords(x, x, 0, [S.ident[x] for S in T.stages]) if homs[(x, x)].dim(0) else [] for x in A.objects}
    L = build_category(F, A.objects, homs, product, ident, name=f"lim({A.name})")
    maps = {}
    bijective = True
    for x, y in A.pairs():
        C = A.hom(x, y)
        mats = {}
        for i in sorted(set(C.degrees()) | set(homs[(x, y)].degrees())):
            if C.dim(i) != homs[(x, y)].dim(i):
                bijective = False
            if not C.dim(i) or not homs[(x, y)].dim(i):
                continue
            cols = []
            for k in range(C.dim(i)):
                e = [F.zero] * C.dim(i)
                e[k] = F.one
                cols.append(coords(x, y, i, [P.apply(x, y, i, e) for P in T.sections]))
            m = Matrix.from_columns(F, cols, homs[(x, y)].dim(i))
            bijective = bijective and is_injective(m) and is_surjective(m)
            mats[i] = m
        maps[(x, y)] = ChainMap(C, homs[(x, y)], mats, check=False)
    comparison = DgFunctor(A, L, {x: x for x in A.objects}, maps, name="limit comparison")
    problems = validate(L) + validate_functor(comparison)
    report = {"bijective": bijective, "problems": problems, "isomorphism": bijective and not problems,
              "comparison": comparison}
    return L, report
