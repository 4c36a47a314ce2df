"""Finite dg categories and dg functors.

Homs are ``Complex`` objects. Composition is stored as structure constants:
``comp[(x, y, z)][(p, q)][gi][fi] = {k: c}`` means that composing the basis
element ``gi`` of ``hom(y, z)`` in degree ``p`` after the basis element ``fi``
of ``hom(x, y)`` in degree ``q`` gives ``sum c * e_k`` in ``hom(x, z)`` in degree
``p + q``. Missing entries are zero.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping, Sequence

from .complexes import ChainMap, Complex, is_quasi_iso, truncate_geq0, truncate_leq
from .exactlin import Field, Matrix, is_surjective, kernel_basis, rank, solve, vec_axpy


class CategoryError(ValueError):
    pass


Table = dict  # (p, q) -> gi -> fi -> {k: c}


class DgCategory:
    """A finite dg category.

    Composition tables may be given eagerly (``comp``) or computed on demand
    block by block from ``product(x, y, z, p, gi, q, fi)``.
    """

    def __init__(self, field: Field, objects: Sequence[str], homs: Mapping[tuple, Complex],
                 comp: Mapping[tuple, Table] | None, ident: Mapping[str, Sequence], name: str = "",
                 product: Callable | None = None, max_degree: int | None = None):
        self.field = field
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise CategoryError("duplicate object names")
        self.homs = {}
        zero = Complex.zero(field)
        for x in self.objects:
            for y in self.objects:
                self.homs[(x, y)] = homs.get((x, y), zero)
        self._comp = {k: dict(v) for k, v in (comp or {}).items()}
        self._product = product
        self._max_degree = max_degree
        self._done: set = set()
        self.ident = {x: list(ident[x]) for x in self.objects}
        for x in self.objects:
            if len(self.ident[x]) != self.homs[(x, x)].dim(0):
                raise CategoryError(f"identity of {x} has the wrong length")
        self.name = name
        self._locator = None

    @property
    def comp(self) -> dict:
        """All composition tables (computing lazy blocks if needed)."""
        if self._product is not None:
            for x, y, z in itertools.product(self.objects, repeat=3):
                for p in self.homs[(y, z)].degrees():
                    for q in self.homs[(x, y)].degrees():
                        self.table(x, y, z, p, q)
        return self._comp

    def _block(self, x, y, z, p, q) -> dict:
        Hyz, Hxy, Hxz = self.homs[(y, z)], self.homs[(x, y)], self.homs[(x, z)]
        if Hxz.dim(p + q) == 0 or (self._max_degree is not None and p + q > self._max_degree):
            return {}
        tab = {}
        product = self._product
        for gi in range(Hyz.dim(p)):
            row = {}
            for fi in range(Hxy.dim(q)):
                v = product(x, y, z, p, gi, q, fi)
                res = {k: c for k, c in enumerate(v) if c}
                if res:
                    row[fi] = res
            if row:
                tab[gi] = row
        return tab

    # -- access ------------------------------------------------------
    def hom(self, x: str, y: str) -> Complex:
        return self.homs[(x, y)]

    def identity(self, x: str) -> list:
        return list(self.ident[x])

    def table(self, x: str, y: str, z: str, p: int, q: int) -> dict:
        if self._product is not None:
            key = (x, y, z, p, q)
            if key not in self._done:
                self._done.add(key)
                tab = self._block(x, y, z, p, q)
                if tab:
                    self._comp.setdefault((x, y, z), {})[(p, q)] = tab
        t = self._comp.get((x, y, z))
        if not t:
            return {}
        return t.get((p, q), {})

    def compose(self, x: str, y: str, z: str, p: int, g: Sequence, q: int, f: Sequence) -> list:
        """``g o f`` with ``g`` in ``hom(y,z)_p`` and ``f`` in ``hom(x,y)_q``."""
        target = self.homs[(x, z)]
        n = target.dim(p + q)
        F = self.field
        if n == 0:
            return []
        out = [0] * n
        tab = self.table(x, y, z, p, q)
        if tab:
            fnz = [(j, b) for j, b in enumerate(f) if b]
            for i, a in enumerate(g):
                if not a:
                    continue
                row = tab.get(i)
                if not row:
                    continue
                for j, b in fnz:
                    res = row.get(j)
                    if res:
                        c = a * b
                        for k, v in res.items():
                            out[k] += c * v
        if F.p:
            return [v % F.p for v in out]
        return [F(v) for v in out]

    def compose_basis(self, x, y, z, p, gi, q, fi) -> dict:
        tab = self.table(x, y, z, p, q)
        row = tab.get(gi)
        if not row:
            return {}
        return row.get(fi, {})

    def locate(self, label: str) -> tuple[str, str, int, int]:
        if self._locator is None:
            loc = {}
            for (x, y), C in self.homs.items():
                for i in C.degrees():
                    for k, l in enumerate(C.labels(i)):
                        if l in loc:
                            raise CategoryError(f"basis label {l!r} is not unique")
                        loc[l] = (x, y, i, k)
            self._locator = loc
        try:
            return self._locator[label]
        except KeyError:
            raise CategoryError(f"unknown basis label {label!r}") from None

    def basis_vector(self, label: str) -> tuple[str, str, int, list]:
        x, y, i, k = self.locate(label)
        v = [self.field.zero] * self.homs[(x, y)].dim(i)
        v[k] = self.field.one
        return x, y, i, v

    def pairs(self) -> Iterable[tuple[str, str]]:
        return itertools.product(self.objects, self.objects)

    def max_degree(self) -> int:
        his = [C.hi for C in self.homs.values() if not C.is_zero()]
        return max(his) if his else 0

    def min_degree(self) -> int:
        los = [C.lo for C in self.homs.values() if not C.is_zero()]
        return min(los) if los else 0

    def total_dim(self) -> int:
        return sum(C.total_dim() for C in self.homs.values())

    def __repr__(self):
        return f"DgCategory({self.name or '?'}; {self.field.descriptor}; objects={list(self.objects)}; dim={self.total_dim()})"


def build_category(field: Field, objects: Sequence[str], homs: Mapping[tuple, Complex],
                   product: Callable, ident: Mapping[str, Sequence], name: str = "",
                   max_degree: int | None = None, lazy: bool = False) -> DgCategory:
    """Category whose composition is ``product(x, y, z, p, gi, q, fi)``.

    ``product`` returns a vector (list) in ``hom(x,z)_{p+q}``; it is only
    called when that chain group is nonzero. With ``lazy`` the tables are
    filled on first use.
    """
    A = DgCategory(field, objects, homs, None, ident, name, product=product, max_degree=max_degree)
    if not lazy:
        A.comp
    return A


def category_from_labels(field: Field, objects: Sequence[str], basis: Mapping[tuple, Mapping[int, Sequence[str]]],
                         differential: Mapping[str, Mapping[str, object]],
                         products: Mapping[tuple[str, str], Mapping[str, object]],
                         identities: Mapping[str, Mapping[str, object]], name: str = "") -> DgCategory:
    """Build a category from label-level data.

    ``basis[(x, y)][degree]`` lists labels; ``differential[label]`` and
    ``products[(g, f)]`` are linear combinations ``{label: scalar}``;
    ``identities[x]`` is a combination in ``hom(x, x)`` degree 0.
    """
    loc = {}
    for (x, y), by_deg in basis.items():
        for i, ls in by_deg.items():
            for k, l in enumerate(ls):
                if l in loc:
                    raise CategoryError(f"basis label {l!r} is not unique")
                loc[l] = (x, y, i, k)

    def where(l):
        if l not in loc:
            raise CategoryError(f"unknown basis label {l!r}")
        return loc[l]

    homs = {}
    dmats = {}
    for src, comb in differential.items():
        x, y, i, k = where(src)
        for tgt, c in comb.items():
            x2, y2, j, r = where(tgt)
            if (x2, y2) != (x, y) or j != i - 1:
                raise CategoryError(f"differential of {src!r} contains {tgt!r} of the wrong hom or degree")
            m = dmats.setdefault((x, y, i), Matrix.zeros(field, len(basis[(x, y)][i - 1]), len(basis[(x, y)][i])))
            m.rows[r][k] = field.add(m.rows[r][k], field(c))
    for (x, y), by_deg in basis.items():
        d = {i: m for (a, b, i), m in dmats.items() if (a, b) == (x, y)}
        homs[(x, y)] = Complex(field, by_deg, d)
    zero = Complex.zero(field)
    for x in objects:
        for y in objects:
            homs.setdefault((x, y), zero)
    comp: dict = {}
    for (gl, fl), comb in products.items():
        y, z, p, gi = where(gl)
        x, y2, q, fi = where(fl)
        if y2 != y:
            raise CategoryError(f"composite {gl!r} o {fl!r} is not composable")
        res = {}
        for tl, c in comb.items():
            x3, z3, r, k = where(tl)
            if (x3, z3) != (x, z) or r != p + q:
                raise CategoryError(f"composite {gl!r} o {fl!r} contains {tl!r} of the wrong hom or degree")
            c = field(c)
            if c:
                res[k] = field.add(res.get(k, field.zero), c)
        res = {k: c for k, c in res.items() if c}
        if res:
            comp.setdefault((x, y, z), {}).setdefault((p, q), {}).setdefault(gi, {})[fi] = res
    ident = {}
    for x in objects:
        v = [field.zero] * homs[(x, x)].dim(0)
        for l, c in identities.get(x, {}).items():
            a, b, i, k = where(l)
            if (a, b) != (x, x) or i != 0:
                raise CategoryError(f"identity of {x} uses {l!r} outside hom({x},{x}) degree 0")
            v[k] = field.add(v[k], field(c))
        ident[x] = v
    return DgCategory(field, objects, homs, comp, ident, name)


def category_to_labels(A: DgCategory) -> dict:
    """Inverse of ``category_from_labels``."""
    basis = {}
    differential = {}
    for (x, y), C in A.homs.items():
        if C.is_zero():
            continue
        basis[(x, y)] = {i: list(C.labels(i)) for i in C.degrees()}
        for i in C.degrees():
            if not C.has_d(i):
                continue
            m = C.d(i)
            for k, l in enumerate(C.labels(i)):
                comb = {C.labels(i - 1)[r]: m.rows[r][k] for r in range(m.nrows) if m.rows[r][k]}
                if comb:
                    differential[l] = comb
    products = {}
    for (x, y, z), tabs in A.comp.items():
        for (p, q), tab in tabs.items():
            for gi, row in tab.items():
                for fi, res in row.items():
                    g = A.hom(y, z).labels(p)[gi]
                    f = A.hom(x, y).labels(q)[fi]
                    products[(g, f)] = {A.hom(x, z).labels(p + q)[k]: c for k, c in res.items()}
    identities = {x: {A.hom(x, x).labels(0)[k]: c for k, c in enumerate(A.ident[x]) if c} for x in A.objects}
    return {"objects": list(A.objects), "basis": basis, "differential": differential, "products": products,
            "identities": identities}


# ----------------------------------------------------------------------
# validation


def _sign(F: Field, deg: int):
    return F.one if deg % 2 == 0 else F.neg(F.one)


def validate(A: DgCategory, max_triples: int | None = None) -> list[str]:
    """Every violated axiom, naming the offending basis elements."""
    F = A.field
    problems: list[str] = []
    objs = A.objects

    def lab(x, y, i, k):
        return A.hom(x, y).labels(i)[k]

    # d o d = 0
    for (x, y), C in A.homs.items():
        for i in C.degrees():
            if C.has_d(i) and C.has_d(i - 1) and not (C.d(i - 1) @ C.d(i)).is_zero():
                problems.append(f"d^2 != 0 on hom({x},{y}) degree {i}")
    # units
    for x in objs:
        idx = A.ident[x]
        Cxx = A.hom(x, x)
        if Cxx.dim(-1) and any(Cxx.apply_d(0, idx)):
            problems.append(f"d(id_{x}) != 0")
        for y in objs:
            C = A.hom(x, y)
            idy = A.ident[y]
            for i in C.degrees():
                for k in range(C.dim(i)):
                    e = [F.zero] * C.dim(i)
                    e[k] = F.one
                    if A.compose(x, y, y, 0, idy, i, e) != e:
                        problems.append(f"left unit fails: id_{y} o {lab(x, y, i, k)}")
                    if A.compose(x, x, y, i, e, 0, idx) != e:
                        problems.append(f"right unit fails: {lab(x, y, i, k)} o id_{x}")
    # Leibniz
    for x, y, z in itertools.product(objs, repeat=3):
        Cyz, Cxy, Cxz = A.hom(y, z), A.hom(x, y), A.hom(x, z)
        for p in Cyz.degrees():
            for q in Cxy.degrees():
                if Cxz.dim(p + q - 1) == 0:
                    continue
                for gi in range(Cyz.dim(p)):
                    g = [F.zero] * Cyz.dim(p)
                    g[gi] = F.one
                    dg = Cyz.apply_d(p, g)
                    for fi in range(Cxy.dim(q)):
                        f = [F.zero] * Cxy.dim(q)
                        f[fi] = F.one
                        gf = A.compose(x, y, z, p, g, q, f)
                        lhs = Cxz.apply_d(p + q, gf) if gf else [F.zero] * Cxz.dim(p + q - 1)
                        rhs = [F.zero] * Cxz.dim(p + q - 1)
                        if Cyz.dim(p - 1):
                            vec_axpy(F, rhs, F.one, A.compose(x, y, z, p - 1, dg, q, f))
                        if Cxy.dim(q - 1):
                            df = Cxy.apply_d(q, f)
                            vec_axpy(F, rhs, _sign(F, p), A.compose(x, y, z, p, g, q - 1, df))
                        if lhs != rhs:
                            problems.append(f"Leibniz fails on ({Cyz.labels(p)[gi]}, {Cxy.labels(q)[fi]})")
    # associativity with caching of binary products
    prods: dict = {}

    def basis_prod(x, y, z, p, gi, q, fi):
        key = (x, y, z, p, gi, q, fi)
        v = prods.get(key)
        if v is None:
            v = A.compose_basis(x, y, z, p, gi, q, fi)
            prods[key] = v
        return v

    checked = 0
    for w, x, y, z in itertools.product(objs, repeat=4):
        Hyz, Hxy, Hwx = A.hom(y, z), A.hom(x, y), A.hom(w, x)
        Hwz = A.hom(w, z)
        for r in Hyz.degrees():
            for p in Hxy.degrees():
                for q in Hwx.degrees():
                    if Hwz.dim(r + p + q) == 0:
                        continue
                    for hi in range(Hyz.dim(r)):
                        for gi in range(Hxy.dim(p)):
                            hg = basis_prod(x, y, z, r, hi, p, gi)
                            for fi in range(Hwx.dim(q)):
                                gf = basis_prod(w, x, y, p, gi, q, fi)
                                if not hg and not gf:
                                    continue
                                left = _sparse_compose_left(A, w, x, z, r + p, hg, q, fi)
                                right = _sparse_compose_right(A, w, y, z, r, hi, p + q, gf)
                                if left != right:
                                    problems.append(
                                        f"associativity fails on ({Hyz.labels(r)[hi]}, {Hxy.labels(p)[gi]}, "
                                        f"{Hwx.labels(q)[fi]})")
                                checked += 1
                                if max_triples is not None and checked >= max_triples:
                                    return problems
    return problems


def _sparse_compose_left(A, w, x, z, pr, hg: dict, q, fi) -> dict:
    F = A.field
    out: dict = {}
    for k, c in hg.items():
        for t, v in A.compose_basis(w, x, z, pr, k, q, fi).items():
            out[t] = F.add(out.get(t, F.zero), F.mul(c, v))
    return {t: v for t, v in out.items() if v}


def _sparse_compose_right(A, w, y, z, r, hi, pq, gf: dict) -> dict:
    F = A.field
    out: dict = {}
    for k, c in gf.items():
        for t, v in A.compose_basis(w, y, z, r, hi, pq, k).items():
            out[t] = F.add(out.get(t, F.zero), F.mul(c, v))
    return {t: v for t, v in out.items() if v}


# ----------------------------------------------------------------------
# predicates


def is_positively_graded(A: DgCategory) -> bool:
    return all(C.is_zero() or C.lo >= 0 for C in A.homs.values())


def is_connective(A: DgCategory) -> bool:
    for C in A.homs.values():
        H = C.homology()
        if any(H.dim(i) for i in C.degrees() if i < 0):
            return False
    return True


def terminal_category(field: Field, name: str = "0") -> DgCategory:
    """One object whose endomorphism complex is zero."""
    return DgCategory(field, ["*"], {}, {}, {"*": []}, name)


# ----------------------------------------------------------------------
# functors


class DgFunctor:
    def __init__(self, source: DgCategory, target: DgCategory, obj_map: Mapping[str, str],
                 maps: Mapping[tuple, ChainMap], name: str = ""):
        self.source = source
        self.target = target
        self.obj_map = dict(obj_map)
        for x in source.objects:
            if self.obj_map.get(x) not in target.objects:
                raise CategoryError(f"object {x!r} has no image")
        self.maps = {}
        for x, y in source.pairs():
            m = maps.get((x, y))
            if m is None:
                m = ChainMap.zero(source.hom(x, y), target.hom(self.obj_map[x], self.obj_map[y]))
            self.maps[(x, y)] = m
        self.name = name

    def __call__(self, x: str) -> str:
        return self.obj_map[x]

    def apply(self, x: str, y: str, i: int, v: Sequence) -> list:
        return self.maps[(x, y)].apply(i, v)

    def then(self, G: "DgFunctor") -> "DgFunctor":
        """``G`` after ``self``."""
        maps = {}
        for x, y in self.source.pairs():
            maps[(x, y)] = self.maps[(x, y)].then(G.maps[(self(x), self(y))])
        return DgFunctor(self.source, G.target, {x: G(self(x)) for x in self.source.objects}, maps)

    def is_identity_on_objects(self) -> bool:
        return self.source.objects == self.target.objects and all(self(x) == x for x in self.source.objects)

    @classmethod
    def identity(cls, A: DgCategory) -> "DgFunctor":
        return cls(A, A, {x: x for x in A.objects}, {(x, y): ChainMap.identity(A.hom(x, y)) for x, y in A.pairs()})


def validate_functor(Fn: DgFunctor, max_pairs: int | None = None) -> list[str]:
    A, B = Fn.source, Fn.target
    F = A.field
    problems = []
    for (x, y), m in Fn.maps.items():
        if m.target is not B.hom(Fn(x), Fn(y)) and m.target != B.hom(Fn(x), Fn(y)):
            problems.append(f"component ({x},{y}) has the wrong target complex")
        bad = m.commutation_failures()
        if bad:
            problems.append(f"component ({x},{y}) does not commute with d in degrees {bad}")
    for x in A.objects:
        if Fn.apply(x, x, 0, A.ident[x]) != B.ident[Fn(x)]:
            problems.append(f"F(id_{x}) != id_{Fn(x)}")
    count = 0
    for x, y, z in itertools.product(A.objects, repeat=3):
        Cyz, Cxy = A.hom(y, z), A.hom(x, y)
        for p in Cyz.degrees():
            for q in Cxy.degrees():
                for gi in range(Cyz.dim(p)):
                    g = [F.zero] * Cyz.dim(p)
                    g[gi] = F.one
                    Fg = Fn.apply(y, z, p, g)
                    for fi in range(Cxy.dim(q)):
                        f = [F.zero] * Cxy.dim(q)
                        f[fi] = F.one
                        gf = A.compose(x, y, z, p, g, q, f)
                        lhs = Fn.apply(x, z, p + q, gf) if gf else [F.zero] * B.hom(Fn(x), Fn(z)).dim(p + q)
                        rhs = B.compose(Fn(x), Fn(y), Fn(z), p, Fg, q, Fn.apply(x, y, q, f))
                        if lhs != rhs:
                            problems.append(f"F does not preserve ({Cyz.labels(p)[gi]}) o ({Cxy.labels(q)[fi]})")
                        count += 1
                        if max_pairs is not None and count >= max_pairs:
                            return problems
    return problems


# ----------------------------------------------------------------------
# truncated categories


def truncate_category(A: DgCategory, n: int, name: str | None = None) -> tuple[DgCategory, DgFunctor]:
    """Apply ``truncate_leq(-, n)`` to every hom; composition is induced."""
    if not is_positively_graded(A):
        raise CategoryError("truncation requires a positively graded category")
    F = A.field
    homs = {}
    projs = {}
    secs = {}
    for (x, y), C in A.homs.items():
        T, pr = truncate_leq(C, n)
        homs[(x, y)] = T
        projs[(x, y)] = pr
        # complement labels are a subset of C's labels; record their indices
        secs[(x, y)] = {i: [C.index(i, l) for l in T.labels(i)] for i in T.degrees()}

    def product(x, y, z, p, gi, q, fi):
        g = [F.zero] * A.hom(y, z).dim(p)
        g[secs[(y, z)][p][gi]] = F.one
        f = [F.zero] * A.hom(x, y).dim(q)
        f[secs[(x, y)][q][fi]] = F.one
        v = A.compose(x, y, z, p, g, q, f)
        return projs[(x, z)].apply(p + q, v)

    ident = {x: projs[(x, x)].apply(0, A.ident[x]) for x in A.objects}
    T = build_category(F, A.objects, homs, product, ident, name or f"{A.name}<= {n}", max_degree=n)
    functor = DgFunctor(A, T, {x: x for x in A.objects},
                        {(x, y): ChainMap(A.hom(x, y), T.hom(x, y), {i: projs[(x, y)].at(i) for i in T.hom(x, y).degrees()},
                                          check=False) for x, y in A.pairs()})
    return T, functor


def h0(A: DgCategory) -> tuple[DgCategory, DgFunctor]:
    """Homotopy category: degree-zero homology with induced composition."""
    if not is_positively_graded(A):
        raise CategoryError("h0 requires a positively graded category")
    return truncate_category(A, 0, name=f"H0({A.name})")


def connective_cover(A: DgCategory) -> tuple[DgCategory, DgFunctor]:
    F = A.field
    homs = {}
    incl = {}
    for (x, y), C in A.homs.items():
        T, inc = truncate_geq0(C, with_inclusion=True)
        homs[(x, y)] = T
        incl[(x, y)] = inc

    def to_cover(x, y, i, v):
        if i > 0:
            return list(v)
        K = incl[(x, y)].at(0)
        sol = solve(K, v)
        if sol is None:
            raise CategoryError("degree-zero product left the cycles; Leibniz must be broken")
        return sol

    def product(x, y, z, p, gi, q, fi):
        g = incl[(y, z)].at(p).column(gi)
        f = incl[(x, y)].at(q).column(fi)
        return to_cover(x, z, p + q, A.compose(x, y, z, p, g, q, f))

    ident = {x: to_cover(x, x, 0, A.ident[x]) if homs[(x, x)].dim(0) else [] for x in A.objects}
    T = build_category(F, A.objects, homs, product, ident, name=f"cover({A.name})")
    functor = DgFunctor(T, A, {x: x for x in A.objects}, incl)
    return T, functor


# ----------------------------------------------------------------------
# invertibility and equivalences


def is_invertible_in_h0(A: DgCategory, x: str, y: str, f: Sequence) -> tuple[bool, dict | None]:
    """Whether the degree-0 cycle ``f: x -> y`` has a homotopy inverse.

    Solves for ``g`` in ``Z_0 hom(y,x)``, ``u`` in ``hom(x,x)_1`` and ``v`` in
    ``hom(y,y)_1`` with ``g f - id_x = d u`` and ``f g - id_y = d v``.
    """
    F = A.field
    Cxy, Cyx, Cxx, Cyy = A.hom(x, y), A.hom(y, x), A.hom(x, x), A.hom(y, y)
    if len(f) != Cxy.dim(0):
        raise CategoryError("f has the wrong length")
    if Cxy.dim(-1) and any(Cxy.apply_d(0, f)):
        raise CategoryError("f is not a cycle")
    nx, ny, nneg = Cxx.dim(0), Cyy.dim(0), Cyx.dim(-1)
    rows_total = nx + ny + nneg
    cols = []
    for gi in range(Cyx.dim(0)):
        g = [F.zero] * Cyx.dim(0)
        g[gi] = F.one
        col = A.compose(x, y, x, 0, g, 0, f) + A.compose(y, x, y, 0, f, 0, g)
        col += Cyx.apply_d(0, g) if nneg else []
        cols.append(col)
    for ui in range(Cxx.dim(1)):
        u = [F.zero] * Cxx.dim(1)
        u[ui] = F.one
        cols.append([F.neg(c) for c in Cxx.apply_d(1, u)] + [F.zero] * (ny + nneg))
    for vi in range(Cyy.dim(1)):
        v = [F.zero] * Cyy.dim(1)
        v[vi] = F.one
        cols.append([F.zero] * nx + [F.neg(c) for c in Cyy.apply_d(1, v)] + [F.zero] * nneg)
    rhs = list(A.ident[x]) + list(A.ident[y]) + [F.zero] * nneg
    if rows_total == 0:
        return True, {"g": [F.zero] * Cyx.dim(0), "u": [F.zero] * Cxx.dim(1), "v": [F.zero] * Cyy.dim(1)}
    if not cols:
        ok = not any(rhs)
        return ok, ({"g": [], "u": [], "v": []} if ok else None)
    M = Matrix.from_columns(F, cols, rows_total)
    sol = solve(M, rhs)
    if sol is None:
        return False, None
    a, b = Cyx.dim(0), Cxx.dim(1)
    return True, {"g": sol[:a], "u": sol[a:a + b], "v": sol[a + b:]}


DEFAULT_SEARCH_BUDGET = 4096


def _cycle_space(C: Complex) -> list:
    if C.dim(0) == 0:
        return []
    if C.has_d(0):
        return kernel_basis(C.d(0))
    n = C.dim(0)
    return [[C.field.one if k == j else C.field.zero for k in range(n)] for j in range(n)]


def _enumerate_combinations(F: Field, basis: list, n: int, budget: int):
    """All combinations of ``basis`` if the field is finite and the count fits."""
    if not basis:
        return [[F.zero] * n]
    if not F.is_finite or F.p ** len(basis) > budget:
        return None
    out = []
    for coeffs in itertools.product(range(F.p), repeat=len(basis)):
        v = [0] * n
        for c, b in zip(coeffs, basis):
            vec_axpy(F, v, c, b)
        out.append(v)
    return out


def h0_isomorphic_to(B: DgCategory, src: str, dst: str, budget: int = DEFAULT_SEARCH_BUDGET,
                     witnesses: Iterable[Sequence] = ()) -> bool | str:
    """Whether ``src`` and ``dst`` are isomorphic in ``H0(B)``."""
    if src == dst:
        return True
    for w in witnesses:
        if is_invertible_in_h0(B, src, dst, w)[0]:
            return True
    C = B.hom(src, dst)
    Z = _cycle_space(C)
    cands = _enumerate_combinations(B.field, Z, C.dim(0), budget)
    if cands is None:
        return "undecided"
    return any(is_invertible_in_h0(B, src, dst, v)[0] for v in cands)


def essentially_surjective(Fn: DgFunctor, budget: int = DEFAULT_SEARCH_BUDGET,
                           witnesses: Mapping[str, tuple] | None = None) -> bool | str:
    image = {Fn(x) for x in Fn.source.objects}
    verdict: bool | str = True
    for y in Fn.target.objects:
        if y in image:
            continue
        found: bool | str = False
        for x in Fn.source.objects:
            w = ()
            if witnesses and y in witnesses and witnesses[y][0] == x:
                w = (witnesses[y][1],)
            r = h0_isomorphic_to(Fn.target, Fn(x), y, budget, w)
            if r is True:
                found = True
                break
            if r == "undecided":
                found = "undecided"
        if found is False:
            return False
        if found == "undecided":
            verdict = "undecided"
    return verdict


def is_quasi_equivalence(Fn: DgFunctor, degrees: Iterable[int] | None = None,
                         budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[bool | str, dict]:
    """Quasi-isomorphism on every hom plus essential surjectivity on ``H0``.

    ``degrees`` restricts the homology comparison to a window.
    """
    degs = list(degrees) if degrees is not None else None
    homs = {}
    ok = True
    for (x, y), m in Fn.maps.items():
        q, rep = is_quasi_iso(m, degs)
        homs[(x, y)] = rep
        ok = ok and q
    es = essentially_surjective(Fn, budget)
    report = {"homs_quasi_iso": ok, "essentially_surjective": es, "per_hom": homs}
    if not ok or es is False:
        return False, report
    if es == "undecided":
        return "undecided", report
    return True, report


def h0_fully_faithful(Fn: DgFunctor) -> bool:
    for (x, y), m in Fn.maps.items():
        M = m.induced(0)
        if M.nrows != M.ncols or rank(M) != M.ncols:
            return False
    return True


def _degreewise_surjective(m: ChainMap) -> list[int]:
    bad = []
    for i in m.target.degrees():
        if not is_surjective(m.at(i)):
            bad.append(i)
    return bad


def is_fibration(Fn: DgFunctor, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[bool | str, dict]:
    """Decide conditions F1 and F2.

    F1 is degreewise surjectivity. F2 is first tried through the sufficient
    criterion (surjective on objects, F1, ``H0(F)`` an equivalence); otherwise
    invertible classes are enumerated over a finite field within ``budget``.
    """
    A, B = Fn.source, Fn.target
    report: dict = {}
    f1_bad = {}
    for (x, y), m in Fn.maps.items():
        bad = _degreewise_surjective(m)
        if bad:
            f1_bad[(x, y)] = bad
    report["F1"] = not f1_bad
    if f1_bad:
        report["F1_failures"] = {f"{x},{y}": v for (x, y), v in f1_bad.items()}
        report["F2"] = "not checked"
        return False, report
    surj_objects = set(B.objects) <= {Fn(x) for x in A.objects}
    if surj_objects and h0_fully_faithful(Fn):
        report["F2"] = True
        report["F2_route"] = "sufficient criterion"
        return True, report
    verdict = _check_f2(Fn, budget)
    report["F2"] = verdict
    report["F2_route"] = "enumeration"
    if verdict is True:
        return True, report
    if verdict is False:
        return False, report
    return "undecided", report


def _check_f2(Fn: DgFunctor, budget: int) -> bool | str:
    A, B = Fn.source, Fn.target
    F = A.field
    undecided = False
    for a1 in A.objects:
        for b in B.objects:
            Cb = B.hom(Fn(a1), b)
            vs = _enumerate_combinations(F, _cycle_space(Cb), Cb.dim(0), budget)
            if vs is None:
                undecided = True
                continue
            for v in vs:
                if not is_invertible_in_h0(B, Fn(a1), b, v)[0]:
                    continue
                found: bool | str = False
                for a2 in A.objects:
                    if Fn(a2) != b:
                        continue
                    r = _invertible_preimage(Fn, a1, a2, v, budget)
                    if r is True:
                        found = True
                        break
                    if r == "undecided":
                        found = "undecided"
                if found is False:
                    return False
                if found == "undecided":
                    undecided = True
    return "undecided" if undecided else True


def _invertible_preimage(Fn: DgFunctor, a1: str, a2: str, v: Sequence, budget: int) -> bool | str:
    A = Fn.source
    F = A.field
    C = A.hom(a1, a2)
    n = C.dim(0)
    if a1 == a2 and Fn.apply(a1, a1, 0, A.ident[a1]) == list(v):
        return True
    if n == 0:
        return not any(v) and is_invertible_in_h0(A, a1, a2, [])[0]
    Z = _cycle_space(C)
    if not Z:
        return False
    Zm = Matrix.from_columns(F, Z, n)
    Fm = Fn.maps[(a1, a2)].at(0) @ Zm
    part = solve(Fm, list(v))
    if part is None:
        return False
    u0 = Zm.apply(part)
    if is_invertible_in_h0(A, a1, a2, u0)[0]:
        return True
    ker = [Zm.apply(k) for k in kernel_basis(Fm)]
    cands = _enumerate_combinations(F, ker, n, budget)
    if cands is None:
        return "undecided"
    for k in cands:
        u = [F.add(a, b) for a, b in zip(u0, k)]
        if is_invertible_in_h0(A, a1, a2, u)[0]:
            return True
    return False


def terminal_functor(A: DgCategory) -> DgFunctor:
    T = terminal_category(A.field)
    return DgFunctor(A, T, {x: "*" for x in A.objects}, {})


def functor_from_matrices(A: DgCategory, B: DgCategory, obj_map: Mapping[str, str],
                          mats: Mapping[tuple, Mapping[int, Matrix]], check: bool = False) -> DgFunctor:
    maps = {}
    for x, y in A.pairs():
        maps[(x, y)] = ChainMap(A.hom(x, y), B.hom(obj_map[x], obj_map[y]), mats.get((x, y), {}), check=check)
    return DgFunctor(A, B, obj_map, maps)


def functor_equal(F1: DgFunctor, F2: DgFunctor) -> bool:
    if F1.obj_map != F2.obj_map:
        return False
    return all(F1.maps[k] == F2.maps[k] for k in F1.maps)


def categories_equal(A: DgCategory, B: DgCategory) -> bool:
    """Equality of presentations: same labels, differentials, products and units."""
    if A.field != B.field or A.objects != B.objects:
        return False
    if any(A.hom(x, y) != B.hom(x, y) for x, y in A.pairs()):
        return False
    if A.ident != B.ident:
        return False
    return _norm(A.comp) == _norm(B.comp)


def _norm(comp):
    out = {}
    for k, tabs in comp.items():
        for pq, tab in tabs.items():
            for gi, row in tab.items():
                for fi, res in row.items():
                    res = {t: c for t, c in res.items() if c}
                    if res:
                        out[(k, pq, gi, fi)] = res
    return out


def vector_from_combination(A: DgCategory, comb: Mapping[str, object]) -> tuple[str, str, int, list]:
    """Homogeneous element from ``{label: scalar}``."""
    F = A.field
    where = None
    v = None
    for l, c in comb.items():
        x, y, i, k = A.locate(l)
        if where is None:
            where = (x, y, i)
            v = [F.zero] * A.hom(x, y).dim(i)
        elif where != (x, y, i):
            raise CategoryError(f"combination mixes homs or degrees at {l!r}")
        v[k] = F.add(v[k], F(c))
    if where is None:
        raise CategoryError("empty combination has no location")
    return where[0], where[1], where[2], v
