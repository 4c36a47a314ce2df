"""Cell attachment and the degree-bounded Big Postnikov model.

Attaching a cell ``h`` of degree ``m+1`` along a degree-``m`` cycle ``z`` in
``hom(a, b)`` freely adjoins a morphism with ``d(h) = z``. Homs of the result
are spanned by words ``f_l * h * ... * h * f_0`` alternating basis elements of
the base category and generators. Words are materialized up to degree
``cap + 1`` and the result is the intelligent truncation at ``cap``, which is a
genuine dg category.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from .complexes import ChainMap, Complex, truncate_leq
from .dgcat import (
    DgCategory,
    DgFunctor,
    build_category,
    category_from_labels,
    is_positively_graded,
    truncate_category,
)
from .exactlin import Field, Matrix, kernel_basis, solve, span_contains


class CellError(ValueError):
    pass


# ----------------------------------------------------------------------
# the two-object cell categories


def cell_category(kind: str, m: int, field: Field | None = None) -> DgCategory:
    """``C(m)``: one generator of degree ``m`` from 1 to 2.

    ``D(m)``: the cone on the identity, generators in degrees ``m-1`` and ``m``
    from 3 to 4 with ``d = 1``.
    """
    field = field or Field.rationals()
    if kind == "C":
        if m < 0:
            raise CellError("C(m) needs m >= 0")
        return category_from_labels(
            field, ["1", "2"],
            {("1", "1"): {0: ["id1"]}, ("2", "2"): {0: ["id2"]}, ("1", "2"): {m: [f"s{m}"]}},
            {},
            _unit_products({"1": "id1", "2": "id2"}, {f"s{m}": ("1", "2")}),
            {"1": {"id1": 1}, "2": {"id2": 1}}, name=f"C({m})")
    if kind == "D":
        if m < 1:
            raise CellError("D(m) needs m >= 1")
        lo, hi = f"s{m - 1}", f"h{m}"
        return category_from_labels(
            field, ["3", "4"],
            {("3", "3"): {0: ["id3"]}, ("4", "4"): {0: ["id4"]}, ("3", "4"): {m - 1: [lo], m: [hi]}},
            {hi: {lo: 1}},
            _unit_products({"3": "id3", "4": "id4"}, {lo: ("3", "4"), hi: ("3", "4")}),
            {"3": {"id3": 1}, "4": {"id4": 1}}, name=f"D({m})")
    raise CellError(f"unknown cell category kind {kind!r}")


def _unit_products(ids: Mapping[str, str], others: Mapping[str, tuple]) -> dict:
    prods = {}
    for x, i in ids.items():
        prods[(i, i)] = {i: 1}
    for l, (x, y) in others.items():
        prods[(ids[y], l)] = {l: 1}
        prods[(l, ids[x])] = {l: 1}
    return prods


def cell_inclusion(m: int, field: Field | None = None) -> DgFunctor:
    """The functor ``C(m) -> D(m+1)`` sending the generator to the lower cone cell."""
    C = cell_category("C", m, field)
    D = cell_category("D", m + 1, field)
    F = C.field
    one = Matrix.identity(F, 1)
    maps = {("1", "1"): {0: one}, ("2", "2"): {0: one}, ("1", "2"): {m: one}}
    obj = {"1": "3", "2": "4"}
    return DgFunctor(C, D, obj, {k: ChainMap(C.hom(*k), D.hom(obj[k[0]], obj[k[1]]), v) for k, v in maps.items()})


# ----------------------------------------------------------------------
# cell attachment


@dataclass(frozen=True)
class CellSpec:
    degree: int
    source: str
    target: str
    cycle: tuple
    label: str

    @property
    def generator_degree(self) -> int:
        return self.degree + 1


WordKey = tuple  # (gens, factors); factors[j] = (degree, index), factors[0] rightmost


@dataclass
class CellExtension:
    base: DgCategory
    cells: list
    cap: int
    words: dict  # (x, y) -> degree -> list of WordKey, degrees <= cap + 1
    index: dict  # (x, y) -> WordKey -> (degree, position)
    raw: dict  # (x, y) -> Complex up to degree cap + 1
    trunc: dict  # (x, y) -> ChainMap raw -> result
    result: DgCategory
    inclusion: DgFunctor = None
    complement: dict = dc_field(default_factory=dict)  # (x, y) -> positions kept in degree cap

    def word_of(self, x: str, y: str, degree: int, i: int) -> WordKey:
        """Raw word behind basis element ``i`` of ``result.hom(x,y)`` in ``degree``."""
        if degree == self.cap:
            return self.words[(x, y)][degree][self.complement[(x, y)][i]]
        return self.words[(x, y)][degree][i]

    def word_length(self, w: WordKey) -> int:
        return len(w[0])

    def factor_objects(self, x: str, y: str, w: WordKey) -> list[tuple[str, str]]:
        gens, factors = w
        out = []
        for j in range(len(factors)):
            src = x if j == 0 else self.cells[gens[j - 1]].target
            tgt = y if j == len(gens) else self.cells[gens[j]].source
            out.append((src, tgt))
        return out


def _wrap(label: str) -> str:
    return f"[{label}]" if "*" in label else label


def attach_cells(B: DgCategory, cells: Sequence[CellSpec], D: int, name: str | None = None) -> CellExtension:
    if not is_positively_graded(B):
        raise CellError("cell attachment needs a positively graded base")
    Fld = B.field
    cells = list(cells)
    for c in cells:
        if c.degree < 0:
            raise CellError(f"cell {c.label} has negative degree")
        if c.source not in B.objects or c.target not in B.objects:
            raise CellError(f"cell {c.label} has unknown endpoints")
        C = B.hom(c.source, c.target)
        if len(c.cycle) != C.dim(c.degree):
            raise CellError(f"cycle of {c.label} has the wrong length")
        if C.dim(c.degree - 1) and any(C.apply_d(c.degree, list(c.cycle))):
            raise CellError(f"attaching element of {c.label} is not a cycle")
        if D < c.degree + 1:
            raise CellError(f"cap {D} too small for a cell of degree {c.degree}")
    top = D + 1
    objs = B.objects
    words: dict = {}
    index: dict = {}
    for x in objs:
        for y in objs:
            by_deg: dict = {}
            _enumerate_words(B, cells, x, y, top, by_deg)
            for e in by_deg:
                by_deg[e].sort(key=lambda w: (len(w[0]), w[0], w[1]))
            words[(x, y)] = dict(sorted(by_deg.items()))
            index[(x, y)] = {w: (e, i) for e, ws in by_deg.items() for i, w in enumerate(ws)}

    def label_of(x, y, w):
        gens, factors = w
        pairs = _factor_pairs(cells, x, y, gens)
        parts = []
        for j in range(len(factors) - 1, -1, -1):
            s, t = pairs[j]
            e, k = factors[j]
            parts.append(_wrap(B.hom(s, t).labels(e)[k]))
            if j > 0:
                parts.append(cells[gens[j - 1]].label)
        return "*".join(parts)

    raw = {}
    for (x, y), by_deg in words.items():
        labels = {e: [label_of(x, y, w) for w in ws] for e, ws in by_deg.items()}
        dmats = {}
        for e, ws in by_deg.items():
            if e == 0 or not by_deg.get(e - 1):
                continue
            m = Matrix.zeros(Fld, len(by_deg[e - 1]), len(ws))
            nonzero = False
            for i, w in enumerate(ws):
                for key, c in _word_differential(B, cells, x, y, w).items():
                    e2, r = index[(x, y)][key]
                    m.rows[r][i] = Fld.add(m.rows[r][i], c)
                    nonzero = True
            if nonzero:
                dmats[e] = m
        raw[(x, y)] = Complex(Fld, labels, dmats, check=True)

    homs = {}
    trunc = {}
    complement = {}
    for key, C in raw.items():
        T, pr = truncate_leq(C, D)
        homs[key] = T
        trunc[key] = pr
        complement[key] = [C.index(D, l) for l in T.labels(D)]

    ext = CellExtension(B, cells, D, words, index, raw, trunc, None, None, complement)

    def product(x, y, z, p, gi, q, fi):
        w2 = ext.word_of(y, z, p, gi)
        w1 = ext.word_of(x, y, q, fi)
        out = [Fld.zero] * raw[(x, z)].dim(p + q)
        for key, c in _word_compose(B, cells, x, y, z, w2, w1).items():
            e, r = index[(x, z)][key]
            out[r] = Fld.add(out[r], c)
        return trunc[(x, z)].apply(p + q, out)

    ident = {}
    for x in objs:
        v = [Fld.zero] * homs[(x, x)].dim(0)
        for k, c in enumerate(B.ident[x]):
            if c:
                e, r = index[(x, x)][((), ((0, k),))]
                v[r] = Fld.add(v[r], c)
        ident[x] = v
    res = build_category(Fld, objs, homs, product, ident, name=name or f"{B.name}+cells", max_degree=D, lazy=True)
    ext.result = res
    incl = {}
    for x in objs:
        for y in objs:
            Cb = B.hom(x, y)
            mats = {}
            for e in Cb.degrees():
                if e > D:
                    continue
                cols = []
                for k in range(Cb.dim(e)):
                    v = [Fld.zero] * raw[(x, y)].dim(e)
                    v[index[(x, y)][((), ((e, k),))][1]] = Fld.one
                    cols.append(trunc[(x, y)].apply(e, v))
                if homs[(x, y)].dim(e):
                    mats[e] = Matrix.from_columns(Fld, cols, homs[(x, y)].dim(e))
            incl[(x, y)] = ChainMap(Cb, homs[(x, y)], mats, check=False)
    ext.inclusion = DgFunctor(B, res, {x: x for x in objs}, incl)
    return ext


def _factor_pairs(cells, x, y, gens):
    out = []
    for j in range(len(gens) + 1):
        src = x if j == 0 else cells[gens[j - 1]].target
        tgt = y if j == len(gens) else cells[gens[j]].source
        out.append((src, tgt))
    return out


def _enumerate_words(B, cells, x, y, top, out):
    def rec(cur, gens, factors, deg):
        C = B.hom(cur, y)
        for e in C.degrees():
            if deg + e > top:
                break
            for i in range(C.dim(e)):
                out.setdefault(deg + e, []).append((gens, factors + ((e, i),)))
        for k, c in enumerate(cells):
            hd = c.degree + 1
            C = B.hom(cur, c.source)
            for e in C.degrees():
                if deg + e + hd > top:
                    break
                for i in range(C.dim(e)):
                    rec(c.target, gens + (k,), factors + ((e, i),), deg + e + hd)

    rec(x, (), (), 0)


def _unit(F, n, i):
    v = [F.zero] * n
    v[i] = F.one
    return v


def _word_differential(B, cells, x, y, w) -> dict:
    F = B.field
    gens, factors = w
    l = len(gens)
    pairs = _factor_pairs(cells, x, y, gens)
    out: dict = {}

    def add(key, c):
        v = F.add(out.get(key, F.zero), c)
        if v:
            out[key] = v
        else:
            out.pop(key, None)

    prefix = 0
    for j in range(l, -1, -1):
        # factor j
        e, k = factors[j]
        s, t = pairs[j]
        C = B.hom(s, t)
        if C.has_d(e):
            sign = F.one if prefix % 2 == 0 else F.neg(F.one)
            col = C.d(e).column(k)
            for r, c in enumerate(col):
                if c:
                    nf = factors[:j] + ((e - 1, r),) + factors[j + 1:]
                    add((gens, nf), F.mul(sign, c))
        prefix += e
        if j == 0:
            break
        # generator between factor j-1 (right) and factor j (left)
        cell = cells[gens[j - 1]]
        sign = F.one if prefix % 2 == 0 else F.neg(F.one)
        e_r, k_r = factors[j - 1]
        s_r, _ = pairs[j - 1]
        zf = B.compose(s_r, cell.source, cell.target, cell.degree, list(cell.cycle), e_r,
                       _unit(F, B.hom(s_r, cell.source).dim(e_r), k_r))
        if any(zf):
            merged = B.compose(s_r, cell.target, t, e, _unit(F, C.dim(e), k), cell.degree + e_r, zf)
            md = e + cell.degree + e_r
            ng = gens[:j - 1] + gens[j:]
            for r, c in enumerate(merged):
                if c:
                    nf = factors[:j - 1] + ((md, r),) + factors[j + 1:]
                    add((ng, nf), F.mul(sign, c))
        prefix += cell.degree + 1
    return out


def _word_compose(B, cells, x, y, z, w2, w1) -> dict:
    """``w2 o w1`` for words ``w1: x -> y`` and ``w2: y -> z``."""
    F = B.field
    g1, f1 = w1
    g2, f2 = w2
    s = x if not g1 else cells[g1[-1]].target
    t = z if not g2 else cells[g2[0]].source
    e1, k1 = f1[-1]
    e2, k2 = f2[0]
    merged = B.compose(s, y, t, e2, _unit(F, B.hom(y, t).dim(e2), k2), e1, _unit(F, B.hom(s, y).dim(e1), k1))
    out = {}
    gens = g1 + g2
    for r, c in enumerate(merged):
        if c:
            out[(gens, f1[:-1] + ((e1 + e2, r),) + f2[1:])] = c
    return out


def word_length_filtration_ok(ext: CellExtension) -> bool:
    """Check that words of length at most ``j`` span a subcomplex for every ``j``."""
    for (x, y), C in ext.raw.items():
        ws = ext.words[(x, y)]
        for e in C.degrees():
            if not C.has_d(e):
                continue
            m = C.d(e)
            for i, w in enumerate(ws[e]):
                lw = len(w[0])
                for r in range(m.nrows):
                    if m.rows[r][i] and len(ws[e - 1][r][0]) > lw:
                        return False
    return True


# ----------------------------------------------------------------------
# extending functors over cell attachments


def extend_functor(ext: CellExtension, G: DgFunctor, gen_images: Mapping[int, Sequence],
                   max_degree: int | None = None, target: DgCategory | None = None) -> DgFunctor:
    """Extend ``G: base -> E`` to ``ext.result`` by sending generator ``k`` to ``gen_images[k]``.

    Missing generators go to zero. Images are computed up to ``max_degree``
    (default: the cap); at the cap the extension must kill the boundaries
    coming from degree ``cap + 1`` words, which is checked.
    """
    E = target or G.target
    F = E.field
    B = ext.base
    cells = ext.cells
    D = ext.cap
    top = D if max_degree is None else min(max_degree, D)
    obj = G.obj_map
    cache: dict = {}

    def gen_image(k):
        c = cells[k]
        v = gen_images.get(k)
        n = E.hom(obj[c.source], obj[c.target]).dim(c.degree + 1)
        if v is None:
            return [F.zero] * n
        if len(v) != n:
            raise CellError(f"image of generator {c.label} has the wrong length")
        return list(v)

    def image(x, y, w):
        key = (x, y, w)
        hit = cache.get(key)
        if hit is not None:
            return hit
        gens, factors = w
        total = sum(f[0] for f in factors) + sum(cells[g].degree + 1 for g in gens)
        pairs = _factor_pairs(cells, x, y, gens)
        s0, t0 = pairs[0]
        e0, k0 = factors[0]
        cur = G.apply(s0, t0, e0, _unit(B.field, B.hom(s0, t0).dim(e0), k0))
        deg = e0
        for j in range(1, len(factors)):
            c = cells[gens[j - 1]]
            hv = gen_image(gens[j - 1])
            if not any(cur) or not any(hv):
                cur = None
                break
            cur = E.compose(obj[x], obj[c.source], obj[c.target], c.degree + 1, hv, deg, cur)
            deg += c.degree + 1
            s, t = pairs[j]
            e, k = factors[j]
            fv = G.apply(s, t, e, _unit(B.field, B.hom(s, t).dim(e), k))
            if not any(cur) or not any(fv):
                cur = None
                break
            cur = E.compose(obj[x], obj[s], obj[t], e, fv, deg, cur)
            deg += e
        n = E.hom(obj[x], obj[y]).dim(total)
        if cur is None or len(cur) != n:
            cur = [F.zero] * n
        cache[key] = cur
        return cur

    maps = {}
    R = ext.result
    for x in R.objects:
        for y in R.objects:
            H = R.hom(x, y)
            T = E.hom(obj[x], obj[y])
            mats = {}
            for e in H.degrees():
                if e > top or T.dim(e) == 0:
                    continue
                cols = [image(x, y, ext.word_of(x, y, e, i)) for i in range(H.dim(e))]
                mats[e] = Matrix.from_columns(F, cols, T.dim(e))
            if top >= D and T.dim(D):
                # the quotient at the cap must be respected
                rawC = ext.raw[(x, y)]
                if rawC.dim(D + 1) and rawC.has_d(D + 1):
                    full = Matrix.from_columns(F, [image(x, y, w) for w in ext.words[(x, y)][D]], T.dim(D))
                    if not (full @ rawC.d(D + 1)).is_zero():
                        raise CellError("extension does not descend to the truncation at the cap")
            maps[(x, y)] = ChainMap(H, T, mats, check=False)
    return DgFunctor(R, E, dict(obj), maps)


# ----------------------------------------------------------------------
# the bounded Big model


@dataclass
class BoundedBigModel:
    base: DgCategory
    n: int
    cap: int
    sweeps: list  # list of (m, CellExtension)
    category: DgCategory
    section: DgFunctor
    comparison: DgFunctor = None  # M_n into the small stage
    small: DgCategory = None  # truncation of the base at n
    small_projection: DgFunctor = None

    @property
    def presentation(self) -> list[tuple[int, list[CellSpec]]]:
        return [(m, ext.cells) for m, ext in self.sweeps]

    def cell_count(self) -> int:
        return sum(len(ext.cells) for _, ext in self.sweeps)


def _killing_cells(P: DgCategory, m: int, prefix: str) -> list[CellSpec]:
    """Minimal greedy choice of degree-``m`` cells killing ``H_m`` of every hom."""
    F = P.field
    objs = P.objects
    killed = {}
    hdata = {}
    for x in objs:
        for y in objs:
            C = P.hom(x, y)
            H = C.homology()
            hdata[(x, y)] = H
            killed[(x, y)] = list(H.at(m).boundaries) if H.dim(m) else []
    cells = []
    for x in objs:
        for y in objs:
            H = hdata[(x, y)]
            if H.dim(m) == 0:
                continue
            for rep in H.at(m).reps:
                if span_contains(F, killed[(x, y)], rep):
                    continue
                label = f"{prefix}{len(cells)}"
                cells.append(CellSpec(m, x, y, tuple(rep), label))
                # g o z o f for degree-0 basis g, f kills classes in other pairs
                for s in objs:
                    Cs = P.hom(s, x)
                    for fi in range(Cs.dim(0)):
                        zf = P.compose(s, x, y, m, rep, 0, _unit(F, Cs.dim(0), fi))
                        if not any(zf):
                            continue
                        for t in objs:
                            Ct = P.hom(y, t)
                            if hdata[(s, t)].dim(m) == 0:
                                continue
                            for gi in range(Ct.dim(0)):
                                v = P.compose(s, y, t, 0, _unit(F, Ct.dim(0), gi), m, zf)
                                if any(v):
                                    killed[(s, t)].append(v)
    return cells


def bounded_big_model(A: DgCategory, n: int, D: int, with_comparison: bool = True) -> BoundedBigModel:
    """Kill homology in degrees ``n+1 .. D-1`` by sweeping cell attachments upward."""
    if not is_positively_graded(A):
        raise CellError("bounded Big model needs a positively graded category")
    if n < 0:
        raise CellError("stage must be nonnegative")
    if D < n + 2:
        raise CellError(f"cap {D} must be at least n+2 = {n + 2}")
    if A.max_degree() > D:
        raise CellError(f"homs exceed the cap {D}")
    current = A
    section = DgFunctor.identity(A)
    sweeps = []
    for m in range(n + 1, D):
        cells = _killing_cells(current, m, f"c{m}_")
        if not cells:
            continue
        ext = attach_cells(current, cells, D, name=f"P{n}<={D}")
        sweeps.append((m, ext))
        section = section.then(ext.inclusion)
        current = ext.result
    model = BoundedBigModel(A, n, D, sweeps, current, section)
    if with_comparison:
        small, proj = truncate_category(A, n)
        model.small = small
        model.small_projection = proj
        model.comparison = transport_through_sweeps(model, proj, {})
    return model


def transport_through_sweeps(model: BoundedBigModel, G0: DgFunctor, gen_images_by_sweep: Mapping[int, Mapping],
                             max_degree: int | None = None) -> DgFunctor:
    """Extend ``G0: A -> E`` over every sweep; ``gen_images_by_sweep[m]`` gives images of that sweep's cells."""
    G = G0
    for m, ext in model.sweeps:
        G = extend_functor(ext, G, gen_images_by_sweep.get(m, {}), max_degree=max_degree)
    return G


# ----------------------------------------------------------------------
# lifting against S(m)


def rlp_solve(Fn: DgFunctor, x: str, y: str, m: int, alpha: Sequence, beta: Sequence) -> list | None:
    """Lift a square from ``S(m) -> D(m+1)``.

    ``alpha`` is a degree-``m`` cycle of ``source.hom(x,y)`` and ``beta`` an
    element of ``target.hom(Fx,Fy)`` in degree ``m+1`` with
    ``d(beta) = F(alpha)``. Returns ``c`` with ``d(c) = alpha`` and
    ``F(c) = beta``, or ``None`` when no lift exists.
    """
    A = Fn.source
    F = A.field
    C = A.hom(x, y)
    T = Fn.target.hom(Fn(x), Fn(y))
    n = C.dim(m + 1)
    rows_d = C.d(m + 1) if C.dim(m) else Matrix.zeros(F, 0, n)
    rows_f = Fn.maps[(x, y)].at(m + 1) if T.dim(m + 1) else Matrix.zeros(F, 0, n)
    M = Matrix.vstack(F, n, [rows_d, rows_f])
    rhs = list(alpha) + list(beta)
    if M.nrows == 0:
        return [F.zero] * n
    if n == 0:
        return [] if not any(rhs) else None
    return solve(M, rhs)


def rlp_batch(Fn: DgFunctor, m: int) -> tuple[bool, list]:
    """Check the lifting property against ``S(m)`` on a basis of all squares."""
    A = Fn.source
    F = A.field
    failures = []
    for x, y in A.pairs():
        C = A.hom(x, y)
        T = Fn.target.hom(Fn(x), Fn(y))
        a, b = C.dim(m), T.dim(m + 1)
        if a == 0 and b == 0:
            continue
        # squares: (alpha, beta) with d(alpha) = 0 and d(beta) = F(alpha)
        rows = []
        dA = C.d(m) if C.dim(m - 1) else None
        for r in range(C.dim(m - 1)):
            rows.append(list(dA.rows[r]) + [F.zero] * b)
        dT = T.d(m + 1) if T.dim(m) and T.dim(m + 1) else None
        Fm = Fn.maps[(x, y)].at(m)
        for r in range(T.dim(m)):
            left = [F.neg(v) for v in Fm.rows[r]] if a else []
            right = list(dT.rows[r]) if dT is not None else [F.zero] * b
            rows.append(left + right)
        if rows:
            squares = kernel_basis(Matrix(F, len(rows), a + b, rows))
        else:
            squares = [_unit(F, a + b, i) for i in range(a + b)]
        for sq in squares:
            c = rlp_solve(Fn, x, y, m, sq[:a], sq[a:])
            if c is None:
                failures.append((x, y, sq))
    return not failures, failures
