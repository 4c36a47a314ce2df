"""Seeded generators for random positively graded dg categories and lifting problems."""

from __future__ import annotations

import random
from typing import Iterator

from .catalog import doubled, truncated_polynomial
from .cells import CellSpec, attach_cells
from .complexes import Complex
from .dgcat import DgCategory, build_category, category_from_labels
from .exactlin import Field, Matrix, kernel_basis, vec_axpy
from .obstruct import Generator, LiftingProblem, ObstructionError, SemiFreeCategory, SemiFreeFunctor

SUPPORT = 5
MAX_DIM = 2
MAX_OBJECTS = 3
SUITE_FIELDS = ("GF(2)", "GF(5)", "Q")


def _random_vector(F: Field, rng: random.Random, basis: list, dim: int) -> list:
    v = [F.zero] * dim
    for b in basis:
        vec_axpy(F, v, F.random(rng), b)
    return v


def random_complex(F: Field, rng: random.Random, prefix: str, lo: int = 0, hi: int = SUPPORT,
                   max_dim: int = MAX_DIM, density: float = 0.6) -> Complex:
    """Random complex in degrees ``lo..hi``; each ``d`` lands in the kernel of the next."""
    labels = {}
    for i in range(lo, hi + 1):
        if rng.random() < density:
            k = rng.randint(1, max_dim)
            labels[i] = [f"{prefix}_{i}_{j}" for j in range(k)]
    d = {}
    for i in sorted(labels):
        if i - 1 not in labels:
            continue
        rows = len(labels[i - 1])
        prev = d.get(i - 1)
        K = kernel_basis(prev) if prev is not None else [[F.one if r == c else F.zero for r in range(rows)]
                                                         for c in range(rows)]
        cols = [_random_vector(F, rng, K, rows) if rng.random() < 0.7 else [F.zero] * rows
                for _ in labels[i]]
        d[i] = Matrix.from_columns(F, cols, rows)
    return Complex(F, labels, d)


def _leibniz_products(F: Field, rng: random.Random, G: Complex, H: Complex, T: Complex) -> dict:
    """A random bilinear chain map ``G x H -> T`` as structure constants."""
    unknowns = {}
    for p in G.degrees():
        for q in H.degrees():
            for gi in range(G.dim(p)):
                for fi in range(H.dim(q)):
                    for k in range(T.dim(p + q)):
                        unknowns[(p, gi, q, fi, k)] = len(unknowns)
    if not unknowns:
        return {}
    rows = []
    minus = F.neg(F.one)
    for p in G.degrees():
        for q in H.degrees():
            if T.dim(p + q - 1) == 0:
                continue
            for gi in range(G.dim(p)):
                for fi in range(H.dim(q)):
                    for r in range(T.dim(p + q - 1)):
                        row: dict = {}

                        def add(key, c):
                            if key in unknowns and c:
                                j = unknowns[key]
                                row[j] = F.add(row.get(j, F.zero), c)

                        if T.dim(p + q):
                            dT = T.d(p + q)
                            for k in range(T.dim(p + q)):
                                add((p, gi, q, fi, k), dT.rows[r][k])
                        if G.dim(p - 1):
                            dG = G.d(p)
                            for a in range(G.dim(p - 1)):
                                add((p - 1, a, q, fi, r), F.mul(minus, dG.rows[a][gi]))
                        if H.dim(q - 1):
                            dH = H.d(q)
                            s = minus if p % 2 == 0 else F.one
                            for b in range(H.dim(q - 1)):
                                add((p, gi, q - 1, b, r), F.mul(s, dH.rows[b][fi]))
                        if row:
                            dense = [F.zero] * len(unknowns)
                            for j, c in row.items():
                                dense[j] = c
                            rows.append(dense)
    if rows:
        K = kernel_basis(Matrix(F, len(rows), len(unknowns), rows))
    else:
        K = [[F.one if a == b else F.zero for a in range(len(unknowns))] for b in range(len(unknowns))]
    sol = _random_vector(F, rng, K, len(unknowns))
    return {key: sol[j] for key, j in unknowns.items() if sol[j]}


def random_directed_category(F: Field, rng: random.Random, n_objects: int | None = None,
                             name: str = "directed") -> DgCategory:
    """Objects ``0 < 1 < ...``; scalar endomorphisms, random homs upward, random Leibniz composition."""
    k = n_objects or rng.randint(2, MAX_OBJECTS)
    objs = [str(i) for i in range(k)]
    homs = {}
    for i in range(k):
        for j in range(k):
            if i == j:
                homs[(objs[i], objs[j])] = Complex(F, {0: [f"id{i}"]})
            elif i < j:
                homs[(objs[i], objs[j])] = random_complex(F, rng, f"e{i}{j}")
            else:
                homs[(objs[i], objs[j])] = Complex.zero(F)
    # with at most three objects no associativity constraint involves two random tables
    tables = {}
    for i in range(k):
        for j in range(i + 1, k):
            for m in range(j + 1, k):
                x, y, z = objs[i], objs[j], objs[m]
                tables[(x, y, z)] = _leibniz_products(F, rng, homs[(y, z)], homs[(x, y)], homs[(x, z)])

    def product(x, y, z, p, gi, q, fi):
        T = homs[(x, z)]
        out = [F.zero] * T.dim(p + q)
        if x == y:
            out[gi] = F.one
            return out
        if y == z:
            out[fi] = F.one
            return out
        for kk in range(T.dim(p + q)):
            out[kk] = tables[(x, y, z)].get((p, gi, q, fi, kk), F.zero)
        return out

    ident = {x: [F.one] for x in objs}
    return build_category(F, objs, homs, product, ident, name=name)


def _identity_category(F: Field, objs: list) -> DgCategory:
    basis = {(x, x): {0: [f"id{x}"]} for x in objs}
    prods = {(f"id{x}", f"id{x}"): {f"id{x}": 1} for x in objs}
    return category_from_labels(F, objs, basis, {}, prods, {x: {f"id{x}": 1} for x in objs}, "units")


def _cycles(C: Complex, m: int) -> list:
    F = C.field
    n = C.dim(m)
    if not n:
        return []
    if C.dim(m - 1):
        return kernel_basis(C.d(m))
    return [[F.one if a == b else F.zero for a in range(n)] for b in range(n)]


def _within_bounds(A: DgCategory, max_dim: int = MAX_DIM, support: int = SUPPORT) -> bool:
    for x, y in A.pairs():
        C = A.hom(x, y)
        for i in C.degrees():
            if i < 0 or i > support or C.dim(i) > max_dim:
                return False
    return True


def random_cell_category(F: Field, rng: random.Random, n_objects: int | None = None, rounds: int | None = None,
                         tries: int = 40, name: str = "cellular") -> DgCategory:
    """Attach a few random cells to a discrete category, rejecting anything over the size bounds."""
    k = n_objects or rng.randint(1, 2)
    objs = ["o"] if k == 1 else [f"o{i}" for i in range(k)]
    for _ in range(tries):
        A = _identity_category(F, objs)
        ok = True
        for r in range(rounds or rng.randint(1, 3)):
            s, t = rng.choice(objs), rng.choice(objs)
            m = rng.randint(0, 3)
            C = A.hom(s, t)
            Z = _cycles(C, m)
            cyc = _random_vector(F, rng, Z, C.dim(m)) if Z and rng.random() < 0.7 else [F.zero] * C.dim(m)
            ext = attach_cells(A, [CellSpec(m, s, t, tuple(cyc), f"c{r}")], SUPPORT, name=name)
            A = ext.result
            if not _within_bounds(A):
                ok = False
                break
        if ok and A.max_degree() >= 1:
            return A
    e = rng.randint(1, 2)
    return truncated_polynomial(F, rng.randint(2, SUPPORT // e + 1), e)


def random_category(F: Field, rng: random.Random, family: str | None = None) -> tuple[str, DgCategory]:
    family = family or rng.choice(["directed", "directed", "cellular", "cellular", "doubled", "polynomial"])
    if family == "directed":
        return family, random_directed_category(F, rng)
    if family == "cellular":
        return family, random_cell_category(F, rng)
    if family == "doubled":
        return family, doubled(random_cell_category(F, rng, n_objects=1))
    if family == "polynomial":
        e = rng.randint(1, 2)
        r = rng.randint(2, SUPPORT // e + 1)
        return family, truncated_polynomial(F, r, e)
    raise ValueError(f"unknown family {family}")


def random_suite(count: int, seed: int = 0, fields=SUITE_FIELDS, families=None) -> Iterator[tuple[str, DgCategory]]:
    """Deterministic stream of ``(name, category)`` cycling through the fields."""
    rng = random.Random(seed)
    for i in range(count):
        F = Field.from_descriptor(fields[i % len(fields)])
        fam = families[i % len(families)] if families else None
        family, A = random_category(F, rng, fam)
        yield f"{family}#{i}/{F.descriptor}", A


# ----------------------------------------------------------------------
# lifting problems


def _random_source(F: Field, rng: random.Random, A: DgCategory):
    """A semi-free source with at most two generators and an object map into ``A``."""
    top = max(A.max_degree(), 1)
    x, y = rng.choice(A.objects), rng.choice(A.objects)
    pattern = rng.choice(["single", "pair", "cone", "power", "power", "idempotent"])
    if pattern == "single":
        k = rng.randint(0, top + 1)
        gens = [Generator("g1", "s", "t", k)]
        return SemiFreeCategory(F, ["s", "t"], gens, {}, name=pattern), {"s": x, "t": y}
    if pattern == "pair":
        a, b = rng.randint(0, top), rng.randint(0, top + 1)
        gens = [Generator("g1", "s", "t", a), Generator("g2", "s", "t", b)]
        return SemiFreeCategory(F, ["s", "t"], gens, {}, name=pattern), {"s": x, "t": y}
    if pattern == "cone":
        a = rng.randint(0, top)
        gens = [Generator("g1", "s", "t", a), Generator("g2", "s", "t", a + 1)]
        return SemiFreeCategory(F, ["s", "t"], gens, {"g2": {("g1",): 1}}, name=pattern), {"s": x, "t": y}
    if pattern == "power":
        e = rng.randint(1, max(1, top // 2))
        j = rng.randint(1, max(1, top // e))
        gens = [Generator("g1", "b", "b", e), Generator("g2", "b", "b", j * e + 1)]
        return SemiFreeCategory(F, ["b"], gens, {"g2": {("g1",) * j: 1}}, name=pattern), {"b": x}
    gens = [Generator("g1", "b", "b", 0), Generator("g2", "b", "b", 1)]
    d = {"g2": {("g1", "g1"): 1, ("g1",): -1}}
    return SemiFreeCategory(F, ["b"], gens, d, name=pattern), {"b": x}


def _random_functor(F: Field, rng: random.Random, B: SemiFreeCategory, target: DgCategory, obj_map,
                    tries: int = 30) -> SemiFreeFunctor | None:
    for _ in range(tries):
        images = {}
        for g in B.generators:
            dim = target.hom(obj_map[g.source], obj_map[g.target]).dim(g.degree)
            images[g.label] = [F.random(rng) if rng.random() < 0.7 else F.zero for _ in range(dim)]
        Fn = SemiFreeFunctor(B, target, obj_map, images)
        if not Fn.problems():
            return Fn
    return None


def random_lifting_problem(F: Field, rng: random.Random, A: DgCategory | None = None, tries: int = 30):
    """A problem ``B -> H0(A)`` with a random functor ``F0``, or ``None`` after ``tries`` rejections."""
    for _ in range(tries):
        if A is None:
            _, A0 = random_category(F, rng)
        else:
            A0 = A
        B, obj = _random_source(F, rng, A0)
        try:
            P = LiftingProblem.build(A0, B, obj, {})
        except ObstructionError:
            continue
        F0 = _random_functor(F, rng, B, P.stage(0), obj)
        if F0 is None:
            continue
        return LiftingProblem(P.target, B, F0, P.tower, P.cover_inclusion)
    return None


def random_stage_instance(F: Field, rng: random.Random, tries: int = 30):
    """``(problem, n, Fn)`` with ``Fn`` a random functor into stage ``n``."""
    for _ in range(tries):
        P = random_lifting_problem(F, rng)
        if P is None or P.cap < 1:
            continue
        # the top generator can only obstruct at the stage two below its degree
        aim = P.source.max_generator_degree - 2
        n = aim if 0 <= aim < P.cap and rng.random() < 0.7 else rng.randint(0, P.cap - 1)
        Fn = _random_functor(F, rng, P.source, P.stage(n), P.F0.obj_map)
        if Fn is not None:
            return P, n, Fn
    return None
