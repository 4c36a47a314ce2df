"""Bimodules, square-zero extensions, derivations and the k-invariant functor."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .cells import BoundedBigModel, bounded_big_model, extend_functor, transport_through_sweeps
from .complexes import ChainMap, Complex, direct_sum, is_quasi_iso, restrict_map, window
from .dgcat import (
    DgCategory,
    DgFunctor,
    build_category,
    is_positively_graded,
    truncate_category,
)
from .exactlin import Field, Matrix, kernel_basis, solve, solve_many, vec_axpy


class BimoduleError(ValueError):
    pass


def _unit(F: Field, n: int, i: int) -> list:
    v = [F.zero] * n
    v[i] = F.one
    return v


def _sign(F: Field, deg: int):
    return F.one if deg % 2 == 0 else F.neg(F.one)


def _fill(objects, outer: Mapping, inner: Mapping, target: Mapping, fn) -> dict:
    """Structure tables for a bilinear map ``outer(y,z) x inner(x,y) -> target(x,z)``."""
    tables = {}
    for x, y, z in itertools.product(objects, repeat=3):
        O, I, T = outer[(y, z)], inner[(x, y)], target[(x, z)]
        tabs = {}
        for p in O.degrees():
            for q in I.degrees():
                if T.dim(p + q) == 0:
                    continue
                tab = {}
                for i in range(O.dim(p)):
                    row = {}
                    for j in range(I.dim(q)):
                        v = fn(x, y, z, p, i, q, j)
                        res = {k: c for k, c in enumerate(v) if c}
                        if res:
                            row[j] = res
                    if row:
                        tab[i] = row
                if tab:
                    tabs[(p, q)] = tab
        if tabs:
            tables[(x, y, z)] = tabs
    return tables


def _apply_table(F: Field, tab: Mapping, u: Sequence, v: Sequence, n: int) -> list:
    out = [F.zero] * n
    if not tab or n == 0:
        return out
    vnz = [(j, b) for j, b in enumerate(v) if b]
    for i, a in enumerate(u):
        if not a:
            continue
        row = tab.get(i)
        if not row:
            continue
        for j, b in vnz:
            res = row.get(j)
            if res:
                c = F.mul(a, b)
                for k, w in res.items():
                    out[k] = F.add(out[k], F.mul(c, w))
    return out


class Bimodule:
    """``M(x, y)`` with actions ``A(y,z) x M(x,y) -> M(x,z)`` and ``M(y,z) x A(x,y) -> M(x,z)``."""

    def __init__(self, over: DgCategory, M: Mapping[tuple, Complex], left: Mapping, right: Mapping, name: str = ""):
        self.over = over
        self.field = over.field
        zero = Complex.zero(over.field)
        self.M = {(x, y): M.get((x, y), zero) for x, y in over.pairs()}
        self.left = dict(left)
        self.right = dict(right)
        self.name = name

    def hom(self, x: str, y: str) -> Complex:
        return self.M[(x, y)]

    def act_left(self, x, y, z, p, a, q, m) -> list:
        """``a . m`` with ``a`` in ``A(y,z)_p`` and ``m`` in ``M(x,y)_q``."""
        tab = self.left.get((x, y, z), {}).get((p, q), {})
        return _apply_table(self.field, tab, a, m, self.M[(x, z)].dim(p + q))

    def act_right(self, x, y, z, p, m, q, a) -> list:
        """``m . a`` with ``m`` in ``M(y,z)_p`` and ``a`` in ``A(x,y)_q``."""
        tab = self.right.get((x, y, z), {}).get((p, q), {})
        return _apply_table(self.field, tab, m, a, self.M[(x, z)].dim(p + q))

    def is_zero(self) -> bool:
        return all(C.is_zero() for C in self.M.values())


def zero_bimodule(A: DgCategory) -> Bimodule:
    return Bimodule(A, {}, {}, {}, name="0")


def validate_bimodule(Mb: Bimodule) -> list[str]:
    A = Mb.over
    F = A.field
    problems = []
    objs = A.objects
    for x, y, z in itertools.product(objs, repeat=3):
        Ayz, Mxy, Myz, Axy = A.hom(y, z), Mb.hom(x, y), Mb.hom(y, z), A.hom(x, y)
        Mxz = Mb.hom(x, z)
        for p in Ayz.degrees():
            for q in Mxy.degrees():
                if Mxz.dim(p + q - 1) == 0:
                    continue
                for i in range(Ayz.dim(p)):
                    a = _unit(F, Ayz.dim(p), i)
                    for j in range(Mxy.dim(q)):
                        m = _unit(F, Mxy.dim(q), j)
                        am = Mb.act_left(x, y, z, p, a, q, m)
                        lhs = Mxz.apply_d(p + q, am)
                        rhs = [F.zero] * Mxz.dim(p + q - 1)
                        if Ayz.dim(p - 1):
                            vec_axpy(F, rhs, F.one, Mb.act_left(x, y, z, p - 1, Ayz.apply_d(p, a), q, m))
                        if Mxy.dim(q - 1):
                            vec_axpy(F, rhs, _sign(F, p), Mb.act_left(x, y, z, p, a, q - 1, Mxy.apply_d(q, m)))
                        if lhs != rhs:
                            problems.append(f"left action is not a chain map at ({Ayz.labels(p)[i]}, {Mxy.labels(q)[j]})")
        for p in Myz.degrees():
            for q in Axy.degrees():
                if Mxz.dim(p + q - 1) == 0:
                    continue
                for i in range(Myz.dim(p)):
                    m = _unit(F, Myz.dim(p), i)
                    for j in range(Axy.dim(q)):
                        a = _unit(F, Axy.dim(q), j)
                        ma = Mb.act_right(x, y, z, p, m, q, a)
                        lhs = Mxz.apply_d(p + q, ma)
                        rhs = [F.zero] * Mxz.dim(p + q - 1)
                        if Myz.dim(p - 1):
                            vec_axpy(F, rhs, F.one, Mb.act_right(x, y, z, p - 1, Myz.apply_d(p, m), q, a))
                        if Axy.dim(q - 1):
                            vec_axpy(F, rhs, _sign(F, p), Mb.act_right(x, y, z, p, m, q - 1, Axy.apply_d(q, a)))
                        if lhs != rhs:
                            problems.append(f"right action is not a chain map at ({Myz.labels(p)[i]}, {Axy.labels(q)[j]})")
    # units
    for x, y in A.pairs():
        C = Mb.hom(x, y)
        for q in C.degrees():
            for j in range(C.dim(q)):
                m = _unit(F, C.dim(q), j)
                if Mb.act_left(x, y, y, 0, A.ident[y], q, m) != m:
                    problems.append(f"identity of {y} does not act trivially on {C.labels(q)[j]}")
                if Mb.act_right(x, x, y, q, m, 0, A.ident[x]) != m:
                    problems.append(f"identity of {x} does not act trivially on {C.labels(q)[j]}")
    # associativity of mixed triples
    for w, x, y, z in itertools.product(objs, repeat=4):
        for r in A.hom(y, z).degrees():
            for p in A.hom(x, y).degrees():
                for q in Mb.hom(w, x).degrees():
                    if Mb.hom(w, z).dim(r + p + q) == 0:
                        continue
                    for i in range(A.hom(y, z).dim(r)):
                        a = _unit(F, A.hom(y, z).dim(r), i)
                        for j in range(A.hom(x, y).dim(p)):
                            b = _unit(F, A.hom(x, y).dim(p), j)
                            ab = A.compose(x, y, z, r, a, p, b)
                            for k in range(Mb.hom(w, x).dim(q)):
                                m = _unit(F, Mb.hom(w, x).dim(q), k)
                                lhs = Mb.act_left(w, x, z, r + p, ab, q, m)
                                rhs = Mb.act_left(w, y, z, r, a, p + q, Mb.act_left(w, x, y, p, b, q, m))
                                if lhs != rhs:
                                    problems.append("left action is not associative")
        for r in A.hom(y, z).degrees():
            for p in Mb.hom(x, y).degrees():
                for q in A.hom(w, x).degrees():
                    if Mb.hom(w, z).dim(r + p + q) == 0:
                        continue
                    for i in range(A.hom(y, z).dim(r)):
                        a = _unit(F, A.hom(y, z).dim(r), i)
                        for j in range(Mb.hom(x, y).dim(p)):
                            m = _unit(F, Mb.hom(x, y).dim(p), j)
                            for k in range(A.hom(w, x).dim(q)):
                                b = _unit(F, A.hom(w, x).dim(q), k)
                                lhs = Mb.act_right(w, x, z, r + p, Mb.act_left(x, y, z, r, a, p, m), q, b)
                                rhs = Mb.act_left(w, y, z, r, a, p + q, Mb.act_right(w, x, y, p, m, q, b))
                                if lhs != rhs:
                                    problems.append("left and right actions do not commute")
        for r in Mb.hom(y, z).degrees():
            for p in A.hom(x, y).degrees():
                for q in A.hom(w, x).degrees():
                    if Mb.hom(w, z).dim(r + p + q) == 0:
                        continue
                    for i in range(Mb.hom(y, z).dim(r)):
                        m = _unit(F, Mb.hom(y, z).dim(r), i)
                        for j in range(A.hom(x, y).dim(p)):
                            a = _unit(F, A.hom(x, y).dim(p), j)
                            for k in range(A.hom(w, x).dim(q)):
                                b = _unit(F, A.hom(w, x).dim(q), k)
                                lhs = Mb.act_right(w, x, z, r + p, Mb.act_right(x, y, z, r, m, p, a), q, b)
                                rhs = Mb.act_right(w, y, z, r, m, p + q, A.compose(w, x, y, p, a, q, b))
                                if lhs != rhs:
                                    problems.append("right action is not associative")
    return sorted(set(problems), key=problems.index)


def restrict_bimodule(Mb: Bimodule, G: DgFunctor) -> Bimodule:
    """``G*(M)``: the bimodule over ``G.source`` with ``b . m = G(b) . m``."""
    B = G.source
    F = B.field
    M = {(x, y): Mb.hom(G(x), G(y)) for x, y in B.pairs()}

    def left(x, y, z, p, i, q, j):
        a = G.apply(y, z, p, _unit(F, B.hom(y, z).dim(p), i))
        return Mb.act_left(G(x), G(y), G(z), p, a, q, _unit(F, M[(x, y)].dim(q), j))

    def right(x, y, z, p, i, q, j):
        a = G.apply(x, y, q, _unit(F, B.hom(x, y).dim(q), j))
        return Mb.act_right(G(x), G(y), G(z), p, _unit(F, M[(y, z)].dim(p), i), q, a)

    homsB = {k: B.hom(*k) for k in B.pairs()}
    return Bimodule(B, M, _fill(B.objects, homsB, M, M, left), _fill(B.objects, M, homsB, M, right),
                    name=f"restricted({Mb.name})")


# ----------------------------------------------------------------------
# square-zero extensions


@dataclass
class SquareZeroExtension:
    base: DgCategory
    bimodule: Bimodule
    total: DgCategory
    inclusion: DgFunctor
    projection: DgFunctor

    def split(self, x: str, y: str, i: int, v: Sequence) -> tuple[list, list]:
        n = self.base.hom(x, y).dim(i)
        return list(v[:n]), list(v[n:])

    def join(self, x: str, y: str, i: int, a: Sequence | None, m: Sequence | None) -> list:
        F = self.base.field
        a = list(a) if a is not None else [F.zero] * self.base.hom(x, y).dim(i)
        m = list(m) if m is not None else [F.zero] * self.bimodule.hom(x, y).dim(i)
        return a + m


def square_zero(A: DgCategory, Mb: Bimodule, check: bool = True) -> SquareZeroExtension:
    if Mb.over is not A:
        raise BimoduleError("bimodule lives over a different category")
    if check:
        bad = validate_bimodule(Mb)
        if bad:
            raise BimoduleError(f"invalid bimodule: {bad[0]}")
    F = A.field
    homs = {(x, y): direct_sum(A.hom(x, y), Mb.hom(x, y)) for x, y in A.pairs()}

    def product(x, y, z, p, gi, q, fi):
        na_g = A.hom(y, z).dim(p)
        na_f = A.hom(x, y).dim(q)
        na_t = A.hom(x, z).dim(p + q)
        nm_t = Mb.hom(x, z).dim(p + q)
        if gi < na_g and fi < na_f:
            a = A.compose(x, y, z, p, _unit(F, na_g, gi), q, _unit(F, na_f, fi))
            return a + [F.zero] * nm_t
        if gi < na_g:
            m = Mb.act_left(x, y, z, p, _unit(F, na_g, gi), q, _unit(F, Mb.hom(x, y).dim(q), fi - na_f))
            return [F.zero] * na_t + m
        if fi < na_f:
            m = Mb.act_right(x, y, z, p, _unit(F, Mb.hom(y, z).dim(p), gi - na_g), q, _unit(F, na_f, fi))
            return [F.zero] * na_t + m
        return [F.zero] * (na_t + nm_t)

    ident = {x: list(A.ident[x]) + [F.zero] * Mb.hom(x, x).dim(0) for x in A.objects}
    T = build_category(F, A.objects, homs, product, ident, name=f"{A.name}x{Mb.name}", lazy=True)
    incl = {}
    proj = {}
    for x, y in A.pairs():
        C, Cm, S = A.hom(x, y), Mb.hom(x, y), homs[(x, y)]
        im, pm = {}, {}
        for i in S.degrees():
            a, m = C.dim(i), Cm.dim(i)
            if a:
                I = Matrix.zeros(F, a + m, a)
                P = Matrix.zeros(F, a, a + m)
                for k in range(a):
                    I.rows[k][k] = F.one
                    P.rows[k][k] = F.one
                im[i], pm[i] = I, P
        incl[(x, y)] = ChainMap(C, S, im, check=False)
        proj[(x, y)] = ChainMap(S, C, pm, check=False)
    ids = {x: x for x in A.objects}
    return SquareZeroExtension(A, Mb, T, DgFunctor(A, T, ids, incl), DgFunctor(T, A, ids, proj))


# ----------------------------------------------------------------------
# derivations


class Derivation:
    """Degree-0 maps ``D(x,y): source(x,y) -> M(x,y)`` with the Leibniz rule."""

    def __init__(self, source: DgCategory, bimodule: Bimodule, comps: Mapping[tuple, Mapping[int, Matrix]]):
        if bimodule.over is not source:
            raise BimoduleError("derivation bimodule must live over the source")
        self.source = source
        self.bimodule = bimodule
        self.comps = {k: dict(v) for k, v in comps.items()}

    def apply(self, x: str, y: str, i: int, v: Sequence) -> list:
        m = self.comps.get((x, y), {}).get(i)
        if m is None:
            return [self.source.field.zero] * self.bimodule.hom(x, y).dim(i)
        return m.apply(v)

    def is_zero(self) -> bool:
        return all(m.is_zero() for c in self.comps.values() for m in c.values())


def check_derivation(Dv: Derivation) -> list[str]:
    B = Dv.source
    Mb = Dv.bimodule
    F = B.field
    problems = []
    for x, y in B.pairs():
        C, Cm = B.hom(x, y), Mb.hom(x, y)
        for i in C.degrees():
            for k in range(C.dim(i)):
                e = _unit(F, C.dim(i), k)
                lhs = Dv.apply(x, y, i - 1, C.apply_d(i, e)) if C.dim(i - 1) else [F.zero] * Cm.dim(i - 1)
                rhs = Cm.apply_d(i, Dv.apply(x, y, i, e)) if Cm.dim(i) else [F.zero] * Cm.dim(i - 1)
                if lhs != rhs:
                    problems.append(f"derivation does not commute with d at {C.labels(i)[k]}")
    for x, y, z in itertools.product(B.objects, repeat=3):
        Cyz, Cxy = B.hom(y, z), B.hom(x, y)
        for p in Cyz.degrees():
            for q in Cxy.degrees():
                if Mb.hom(x, z).dim(p + q) == 0:
                    continue
                for gi in range(Cyz.dim(p)):
                    g = _unit(F, Cyz.dim(p), gi)
                    Dg = Dv.apply(y, z, p, g)
                    for fi in range(Cxy.dim(q)):
                        f = _unit(F, Cxy.dim(q), fi)
                        lhs = Dv.apply(x, z, p + q, B.compose(x, y, z, p, g, q, f))
                        rhs = Mb.act_left(x, y, z, p, g, q, Dv.apply(x, y, q, f))
                        vec_axpy(F, rhs, F.one, Mb.act_right(x, y, z, p, Dg, q, f))
                        if lhs != rhs:
                            problems.append(f"Leibniz fails for ({Cyz.labels(p)[gi]}, {Cxy.labels(q)[fi]})")
    return problems


def derivation_from_section(sq: SquareZeroExtension, G: DgFunctor) -> tuple[DgFunctor, Derivation]:
    """Split ``G: B -> A x M`` into ``F = proj o G`` and its bimodule part."""
    Fbase = G.then(sq.projection)
    R = restrict_bimodule(sq.bimodule, Fbase)
    comps = {}
    for x, y in G.source.pairs():
        a = sq.base.hom(G(x), G(y))
        mats = {}
        for i in G.source.hom(x, y).degrees():
            m = G.maps[(x, y)].at(i)
            if R.hom(x, y).dim(i):
                mats[i] = m.select_rows(list(range(a.dim(i), m.nrows)))
        comps[(x, y)] = mats
    return Fbase, Derivation(G.source, R, comps)


def section_from_derivation(sq: SquareZeroExtension, Fbase: DgFunctor, Dv: Derivation) -> DgFunctor:
    """Inverse of ``derivation_from_section``."""
    B = Fbase.source
    F = B.field
    maps = {}
    for x, y in B.pairs():
        S = sq.total.hom(Fbase(x), Fbase(y))
        mats = {}
        for i in B.hom(x, y).degrees():
            if S.dim(i) == 0:
                continue
            top = Fbase.maps[(x, y)].at(i)
            bot = Dv.comps.get((x, y), {}).get(i) or Matrix.zeros(F, sq.bimodule.hom(Fbase(x), Fbase(y)).dim(i),
                                                                   B.hom(x, y).dim(i))
            mats[i] = Matrix.vstack(F, B.hom(x, y).dim(i), [top, bot])
        maps[(x, y)] = ChainMap(B.hom(x, y), S, mats, check=False)
    return DgFunctor(B, sq.total, dict(Fbase.obj_map), maps)


# ----------------------------------------------------------------------
# homology bimodule and the k-invariant


def hn_label(n: int, x: str, y: str, k: int) -> str:
    return f"H{n + 1}({x},{y})#{k}"


def hn_bimodule(A: DgCategory, n: int, small: DgCategory | None = None) -> Bimodule:
    """``H_{n+1}(A)`` placed in degree ``n+2`` as a bimodule over the stage-``n`` truncation."""
    if not is_positively_graded(A):
        raise BimoduleError("hn_bimodule needs a positively graded category")
    if small is None:
        small, _ = truncate_category(A, n)
    F = A.field
    M = {}
    for x, y in A.pairs():
        h = A.hom(x, y).homology().dim(n + 1)
        M[(x, y)] = Complex(F, {n + 2: [hn_label(n, x, y, k) for k in range(h)]})

    def small_to_A(x, y, i):
        # degree-0 basis elements of the truncation are basis elements of A
        lab = small.hom(x, y).labels(0)[i]
        return A.hom(x, y).index(0, lab)

    def left(x, y, z, p, i, q, j):
        out = M[(x, z)].dim(p + q)
        if p != 0 or out == 0:
            return [F.zero] * out
        a = _unit(F, A.hom(y, z).dim(0), small_to_A(y, z, i))
        rep = A.hom(x, y).homology().rep(n + 1, j)
        return A.hom(x, z).homology().classify(n + 1, A.compose(x, y, z, 0, a, n + 1, rep))

    def right(x, y, z, p, i, q, j):
        out = M[(x, z)].dim(p + q)
        if q != 0 or out == 0:
            return [F.zero] * out
        a = _unit(F, A.hom(x, y).dim(0), small_to_A(x, y, j))
        rep = A.hom(y, z).homology().rep(n + 1, i)
        return A.hom(x, z).homology().classify(n + 1, A.compose(x, y, z, n + 1, rep, 0, a))

    homsS = {k: small.hom(*k) for k in small.pairs()}
    return Bimodule(small, M, _fill(A.objects, homsS, M, M, left), _fill(A.objects, M, homsS, M, right),
                    name=f"H{n + 1}[{n + 2}]")


@dataclass
class KInvariantData:
    n: int
    cap: int
    model: BoundedBigModel
    extension: SquareZeroExtension
    gamma: DgFunctor
    derivation: Derivation = None

    def phi(self, x: str, y: str) -> Matrix:
        """The bimodule part of ``gamma`` on ``hom(x,y)`` in degree ``n+2``."""
        i = self.n + 2
        m = self.gamma.maps[(x, y)].at(i)
        a = self.extension.base.hom(x, y).dim(i)
        return m.select_rows(list(range(a, m.nrows)))


def gamma(A: DgCategory, n: int, D: int, model: BoundedBigModel | None = None) -> KInvariantData:
    """The functor from the stage-``n`` Big model into the square-zero extension by ``H_{n+1}``."""
    if D < n + 2:
        raise BimoduleError(f"cap {D} too small: need at least n+2 = {n + 2}")
    if model is None:
        model = bounded_big_model(A, n, D)
    if model.n != n or model.cap != D:
        raise BimoduleError("model was built for a different stage or cap")
    small, proj = model.small, model.small_projection
    if small is None:
        small, proj = truncate_category(A, n)
    Mb = hn_bimodule(A, n, small)
    sq = square_zero(small, Mb, check=False)
    G0 = proj.then(sq.inclusion)
    images = {}
    for m, ext in model.sweeps:
        if m != n + 1:
            continue
        for k, c in enumerate(ext.cells):
            cls = A.hom(c.source, c.target).homology().classify(n + 1, list(c.cycle))
            images[k] = sq.join(c.source, c.target, n + 2, None, cls)
    G = transport_through_sweeps(model, G0, {n + 1: images})
    data = KInvariantData(n, D, model, sq, G)
    data.derivation = derivation_from_section(sq, G)[1]
    return data


def phi_from_boundary(A: DgCategory, model: BoundedBigModel, x: str, y: str) -> Matrix:
    """Second route to the bimodule part: the class of ``d(u)`` in ``H_{n+1}(A)``."""
    n = model.n
    P = model.category.hom(x, y)
    H = A.hom(x, y).homology()
    F = A.field
    cols = []
    for k in range(P.dim(n + 2)):
        du = P.apply_d(n + 2, _unit(F, P.dim(n + 2), k))
        cols.append(H.classify(n + 1, du) if H.dim(n + 1) else [])
    return Matrix.from_columns(F, cols, H.dim(n + 1))


# ----------------------------------------------------------------------
# pullbacks and the fiber sequence


def pullback_complexes(f: ChainMap, g: ChainMap, prefix: str = "w") -> tuple[Complex, ChainMap, ChainMap]:
    """Degreewise pullback of ``f: P -> T`` and ``g: Q -> T``."""
    P, Q, T = f.source, g.source, f.target
    F = P.field
    labels, bases = {}, {}
    for i in sorted(set(P.degrees()) | set(Q.degrees())):
        a, b = P.dim(i), Q.dim(i)
        if T.dim(i):
            M = Matrix.hstack(F, T.dim(i), [f.at(i), g.at(i).scale(F.neg(F.one))])
            K = kernel_basis(M)
        else:
            K = [_unit(F, a + b, k) for k in range(a + b)]
        if K:
            bases[i] = K
            labels[i] = [f"{prefix}{i}_{k}" for k in range(len(K))]
    d = {}
    for i, K in bases.items():
        if i - 1 not in bases:
            continue
        a, b = P.dim(i), Q.dim(i)
        imgs = []
        for v in K:
            dp = P.apply_d(i, v[:a]) if P.dim(i - 1) else []
            dq = Q.apply_d(i, v[a:]) if Q.dim(i - 1) else []
            imgs.append(dp + dq)
        Kt = Matrix.from_columns(F, bases[i - 1], P.dim(i - 1) + Q.dim(i - 1))
        cols = solve_many(Kt, imgs)
        if any(c is None for c in cols):
            raise BimoduleError("pullback is not closed under d")
        d[i] = Matrix.from_columns(F, cols, len(bases[i - 1]))
    W = Complex(F, labels, d)
    p1, p2 = {}, {}
    for i, K in bases.items():
        a = P.dim(i)
        if a:
            p1[i] = Matrix.from_columns(F, [v[:a] for v in K], a)
        if Q.dim(i):
            p2[i] = Matrix.from_columns(F, [v[a:] for v in K], Q.dim(i))
    return W, ChainMap(W, P, p1, check=False), ChainMap(W, Q, p2, check=False)


def pullback_category(Fa: DgFunctor, Gb: DgFunctor) -> tuple[DgCategory, DgFunctor, DgFunctor]:
    """Strict pullback of identity-on-objects functors ``A -> C <- B``."""
    A, B = Fa.source, Gb.source
    if not (Fa.is_identity_on_objects() and Gb.is_identity_on_objects()) or A.objects != B.objects:
        raise BimoduleError("pullbacks are only formed along identity-on-objects functors")
    F = A.field
    homs, p1s, p2s = {}, {}, {}
    for x, y in A.pairs():
        W, p1, p2 = pullback_complexes(Fa.maps[(x, y)], Gb.maps[(x, y)], prefix=f"W({x},{y})")
        homs[(x, y)], p1s[(x, y)], p2s[(x, y)] = W, p1, p2

    def coords(x, y, i, a, b):
        K = Matrix.vstack(F, homs[(x, y)].dim(i), [p1s[(x, y)].at(i), p2s[(x, y)].at(i)])
        sol = solve(K, list(a) + list(b))
        if sol is None:
            raise BimoduleError("pullback is not closed under composition")
        return sol

    def product(x, y, z, p, gi, q, fi):
        g1 = p1s[(y, z)].at(p).column(gi) if A.hom(y, z).dim(p) else []
        g2 = p2s[(y, z)].at(p).column(gi) if B.hom(y, z).dim(p) else []
        f1 = p1s[(x, y)].at(q).column(fi) if A.hom(x, y).dim(q) else []
        f2 = p2s[(x, y)].at(q).column(fi) if B.hom(x, y).dim(q) else []
        a = A.compose(x, y, z, p, g1, q, f1) if g1 and f1 else [F.zero] * A.hom(x, z).dim(p + q)
        b = B.compose(x, y, z, p, g2, q, f2) if g2 and f2 else [F.zero] * B.hom(x, z).dim(p + q)
        return coords(x, z, p + q, a, b)

    ident = {x: coords(x, x, 0, A.ident[x], B.ident[x]) if homs[(x, x)].dim(0) else [] for x in A.objects}
    W = build_category(F, A.objects, homs, product, ident, name="pullback", lazy=True)
    ids = {x: x for x in A.objects}
    return W, DgFunctor(W, A, ids, p1s), DgFunctor(W, B, ids, p2s)


def connecting_functor(lower: BoundedBigModel, upper: BoundedBigModel, max_degree: int) -> DgFunctor:
    """The functor from the stage-``n+1`` model to the stage-``n`` model over ``A``.

    Generators are sent to bounding chains of the images of their attaching
    cycles, which exist because the lower model is acyclic in the window.
    """
    Pn = lower.category
    G = lower.section
    F = Pn.field
    for m, ext in upper.sweeps:
        images = {}
        for k, c in enumerate(ext.cells):
            if c.degree + 1 > max_degree:
                continue
            alpha = G.apply(c.source, c.target, c.degree, list(c.cycle))
            C = Pn.hom(c.source, c.target)
            sol = solve(C.d(c.degree + 1), alpha) if C.dim(c.degree) else [F.zero] * C.dim(c.degree + 1)
            if sol is None:
                raise BimoduleError(f"attaching cycle of {c.label} does not bound in the lower model")
            images[k] = sol
        G = extend_functor(ext, G, images, max_degree=max_degree)
    return G


def verify_fiber_sequence(A: DgCategory, n: int, D: int, lower: BoundedBigModel | None = None,
                          upper: BoundedBigModel | None = None) -> dict:
    """Compare the stage-``n+1`` model with the pullback of ``gamma`` along the inclusion."""
    if D < n + 3:
        raise BimoduleError(f"cap {D} too small: need at least n+3 = {n + 3}")
    lower = lower or bounded_big_model(A, n, D)
    upper = upper or bounded_big_model(A, n + 1, D, with_comparison=False)
    kd = gamma(A, n, D, lower)
    sq = kd.extension
    rho = connecting_functor(lower, upper, D - 1)
    Mn = lower.comparison
    report = {"n": n, "cap": D, "window": [0, D - 2], "homs": {}}
    ok = True
    for x, y in A.pairs():
        W, p1, p2 = pullback_complexes(kd.gamma.maps[(x, y)], sq.inclusion.maps[(x, y)], prefix=f"W({x},{y})")
        Pup = upper.category.hom(x, y)
        entry: dict = {}
        # degree n+2 of the pullback is the kernel of the surjection onto H_{n+1}
        h = A.hom(x, y).homology().dim(n + 1)
        entry["kernel_identification"] = W.dim(n + 2) == lower.category.hom(x, y).dim(n + 2) - h
        # theta lands in the pullback
        mats = {}
        lands = True
        for i in range(0, D):
            if Pup.dim(i) == 0 or W.dim(i) == 0:
                if Pup.dim(i) and W.dim(i) == 0:
                    cols = [rho.apply(x, y, i, _unit(A.field, Pup.dim(i), k)) for k in range(Pup.dim(i))]
                    if any(any(c) for c in cols):
                        lands = False
                continue
            K = Matrix.vstack(A.field, W.dim(i), [p1.at(i), p2.at(i)])
            rhs = []
            for k in range(Pup.dim(i)):
                pv = rho.apply(x, y, i, _unit(A.field, Pup.dim(i), k))
                qv = Mn.apply(x, y, i, pv)
                rhs.append(pv + qv)
            cols = solve_many(K, rhs)
            if any(c is None for c in cols):
                lands = False
                break
            mats[i] = Matrix.from_columns(A.field, cols, W.dim(i))
        entry["theta_lands_in_pullback"] = lands
        if not lands:
            ok = False
            report["homs"][f"{x},{y}"] = entry
            continue
        Pw, Ww = window(Pup, 0, D - 1), window(W, 0, D - 1)
        theta = ChainMap(Pw, Ww, mats, check=False)
        entry["theta_chain_map"] = not theta.commutation_failures()
        qi, per = is_quasi_iso(restrict_map(theta, Pw, Ww), range(0, D - 1))
        entry["theta_quasi_iso"] = qi
        entry["homology_upper"] = {i: Pup.homology().dim(i) for i in range(0, D - 1)}
        entry["homology_pullback"] = {i: W.homology().dim(i) for i in range(0, D - 1)}
        vanish = all(W.homology().dim(j) == 0 for j in range(n + 2, D - 1))
        entry["pullback_vanishing"] = vanish
        ok = ok and entry["kernel_identification"] and entry["theta_chain_map"] and qi and vanish
        report["homs"][f"{x},{y}"] = entry
    report["ok"] = ok
    return report
