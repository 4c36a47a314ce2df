"""Bounded chain complexes over an exact field, homologically graded.

A ``Complex`` stores, for each degree with nonzero dimension, a tuple of basis
labels and the differential ``d(i)`` as a matrix from degree ``i`` to degree
``i - 1``. Vectors in degree ``i`` are plain lists of length ``dim(i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping, Sequence

from .exactlin import (
    Field,
    Matrix,
    column_space_basis,
    inverse,
    is_injective,
    is_surjective,
    kernel_basis,
    pivot_columns,
    quotient_basis,
    solve_many,
)


class ComplexError(ValueError):
    pass


class Complex:
    __slots__ = ("field", "_labels", "_d", "_homology")

    def __init__(self, field: Field, labels: Mapping[int, Sequence[str]], d: Mapping[int, Matrix] | None = None,
                 check: bool = True):
        self.field = field
        self._labels = {i: tuple(ls) for i, ls in sorted(labels.items()) if len(ls)}
        self._d: dict[int, Matrix] = {}
        self._homology = None
        for i, m in (d or {}).items():
            if self.dim(i) == 0 or self.dim(i - 1) == 0:
                if not m.is_zero():
                    raise ComplexError(f"nonzero differential out of degree {i} with an empty end")
                continue
            if m.shape != (self.dim(i - 1), self.dim(i)):
                raise ComplexError(f"d({i}) has shape {m.shape}, expected {(self.dim(i - 1), self.dim(i))}")
            if not m.is_zero():
                self._d[i] = m
        if check:
            for i in self._d:
                if i - 1 in self._d and not (self._d[i - 1] @ self._d[i]).is_zero():
                    raise ComplexError(f"d({i - 1}) d({i}) is not zero")

    @classmethod
    def zero(cls, field: Field) -> "Complex":
        return cls(field, {})

    @classmethod
    def concentrated(cls, field: Field, degree: int, labels: Sequence[str]) -> "Complex":
        return cls(field, {degree: labels})

    # -- shape -------------------------------------------------------
    def dim(self, i: int) -> int:
        return len(self._labels.get(i, ()))

    def labels(self, i: int) -> tuple[str, ...]:
        return self._labels.get(i, ())

    def degrees(self) -> list[int]:
        return list(self._labels)

    @property
    def lo(self) -> int | None:
        return min(self._labels) if self._labels else None

    @property
    def hi(self) -> int | None:
        return max(self._labels) if self._labels else None

    def is_zero(self) -> bool:
        return not self._labels

    def total_dim(self) -> int:
        return sum(len(v) for v in self._labels.values())

    def d(self, i: int) -> Matrix:
        m = self._d.get(i)
        if m is None:
            return Matrix.zeros(self.field, self.dim(i - 1), self.dim(i))
        return m

    def has_d(self, i: int) -> bool:
        return i in self._d

    def apply_d(self, i: int, v: Sequence) -> list:
        m = self._d.get(i)
        if m is None:
            return [self.field.zero] * self.dim(i - 1)
        return m.apply(v)

    def index(self, i: int, label: str) -> int:
        return self._labels[i].index(label)

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        if self.field != other.field or self._labels != other._labels:
            return False
        return all(self.d(i) == other.d(i) for i in set(self._d) | set(other._d))

    def __repr__(self):
        dims = ", ".join(f"{i}:{len(v)}" for i, v in self._labels.items())
        return f"Complex({self.field.descriptor}; {dims})"

    def homology(self) -> "HomologyData":
        if self._homology is None:
            self._homology = homology(self)
        return self._homology

    def relabel(self, mapping) -> "Complex":
        return Complex(self.field, {i: [mapping(l) for l in ls] for i, ls in self._labels.items()}, dict(self._d),
                       check=False)


# ----------------------------------------------------------------------
# homology


@dataclass
class DegreeHomology:
    dim: int
    cycles: list  # basis of ker d(i)
    boundaries: list  # basis of im d(i+1)
    reps: list  # one representative cycle per homology basis vector
    class_of: Matrix  # dim x dim C_i; correct on cycles


@dataclass
class HomologyData:
    field: Field
    degrees: dict = dc_field(default_factory=dict)

    def dim(self, i: int) -> int:
        h = self.degrees.get(i)
        return h.dim if h else 0

    def at(self, i: int) -> DegreeHomology:
        return self.degrees[i]

    def classify(self, i: int, v: Sequence) -> list:
        h = self.degrees.get(i)
        if h is None or h.dim == 0:
            return []
        return h.class_of.apply(v)

    def rep(self, i: int, k: int) -> list:
        return list(self.degrees[i].reps[k])

    def is_boundary(self, i: int, v: Sequence) -> bool:
        """True iff the cycle ``v`` is a boundary."""
        return not any(self.classify(i, v))

    def dims(self) -> dict[int, int]:
        return {i: h.dim for i, h in self.degrees.items() if h.dim}


def homology(C: Complex) -> HomologyData:
    F = C.field
    out = HomologyData(F)
    for i in C.degrees():
        n = C.dim(i)
        di = C.d(i)
        cycles = kernel_basis(di) if C.has_d(i) else [[F.one if k == j else F.zero for k in range(n)] for j in range(n)]
        dn = C.d(i + 1)
        bnd = column_space_basis(dn) if C.has_d(i + 1) else []
        # extend the boundary basis by cycles, lowest index first
        stack = Matrix.from_columns(F, bnd + cycles, n)
        chosen = [c - len(bnd) for c in pivot_columns(stack) if c >= len(bnd)]
        reps = [cycles[k] for k in chosen]
        h = len(reps)
        if h:
            # complete [boundaries | reps] to a basis of C_i with unit vectors
            partial = bnd + reps
            full = Matrix.hstack(F, n, [Matrix.from_columns(F, partial, n), Matrix.identity(F, n)])
            extra = [c - len(partial) for c in pivot_columns(full) if c >= len(partial)]
            basis = partial + [[F.one if k == e else F.zero for k in range(n)] for e in extra]
            inv = inverse(Matrix.from_columns(F, basis, n))
            class_of = inv.select_rows(list(range(len(bnd), len(bnd) + h)))
        else:
            class_of = Matrix.zeros(F, 0, n)
        out.degrees[i] = DegreeHomology(h, cycles, bnd, reps, class_of)
    return out


# ----------------------------------------------------------------------
# chain maps


class ChainMap:
    __slots__ = ("source", "target", "_maps")

    def __init__(self, source: Complex, target: Complex, maps: Mapping[int, Matrix], check: bool = True):
        self.source = source
        self.target = target
        self._maps = {}
        for i, m in maps.items():
            if m.shape != (target.dim(i), source.dim(i)):
                raise ComplexError(f"chain map component at degree {i} has shape {m.shape}, "
                                   f"expected {(target.dim(i), source.dim(i))}")
            if not m.is_zero():
                self._maps[i] = m
        if check:
            bad = self.commutation_failures()
            if bad:
                raise ComplexError(f"not a chain map: d does not commute in degrees {bad}")

    def at(self, i: int) -> Matrix:
        m = self._maps.get(i)
        if m is None:
            return Matrix.zeros(self.source.field, self.target.dim(i), self.source.dim(i))
        return m

    def apply(self, i: int, v: Sequence) -> list:
        m = self._maps.get(i)
        if m is None:
            return [self.source.field.zero] * self.target.dim(i)
        return m.apply(v)

    def degrees(self) -> list[int]:
        return sorted(set(self.source.degrees()) | set(self.target.degrees()))

    def commutation_failures(self) -> list[int]:
        bad = []
        for i in self.source.degrees():
            lhs = self.at(i - 1) @ self.source.d(i)
            rhs = self.target.d(i) @ self.at(i)
            if lhs != rhs:
                bad.append(i)
        return bad

    def then(self, other: "ChainMap") -> "ChainMap":
        """``other`` after ``self``."""
        degs = set(self._maps) & set(other._maps)
        return ChainMap(self.source, other.target, {i: other.at(i) @ self.at(i) for i in degs}, check=False)

    def induced(self, i: int) -> Matrix:
        """Matrix of ``H_i(f)`` in the chosen homology bases."""
        hs = self.source.homology()
        ht = self.target.homology()
        F = self.source.field
        ds, dt = hs.dim(i), ht.dim(i)
        if ds == 0 or dt == 0:
            return Matrix.zeros(F, dt, ds)
        cols = [ht.classify(i, self.apply(i, r)) for r in hs.at(i).reps]
        return Matrix.from_columns(F, cols, dt)

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        return all(self.at(i) == other.at(i) for i in set(self._maps) | set(other._maps))

    @classmethod
    def identity(cls, C: Complex) -> "ChainMap":
        return cls(C, C, {i: Matrix.identity(C.field, C.dim(i)) for i in C.degrees()}, check=False)

    @classmethod
    def zero(cls, source: Complex, target: Complex) -> "ChainMap":
        return cls(source, target, {}, check=False)


def is_quasi_iso(f: ChainMap, degrees: Iterable[int] | None = None) -> tuple[bool, dict[int, tuple[bool, bool]]]:
    """Whether ``H_i(f)`` is invertible for each degree; returns a per-degree report."""
    if degrees is None:
        degrees = f.degrees()
    report = {}
    for i in degrees:
        m = f.induced(i)
        report[i] = (is_injective(m), is_surjective(m))
    return all(a and b for a, b in report.values()), report


# ----------------------------------------------------------------------
# truncations and basic constructions


def _require_nonnegative(C: Complex) -> None:
    if C.lo is not None and C.lo < 0:
        raise ComplexError("complex is not positively graded")


def truncate_leq(C: Complex, n: int) -> tuple[Complex, ChainMap]:
    """Intelligent truncation: degree ``n`` becomes ``C_n / im d(n+1)``."""
    _require_nonnegative(C)
    F = C.field
    labels: dict[int, list[str]] = {}
    d: dict[int, Matrix] = {}
    maps: dict[int, Matrix] = {}
    for i in C.degrees():
        if i < n:
            labels[i] = list(C.labels(i))
            maps[i] = Matrix.identity(F, C.dim(i))
            if C.has_d(i):
                d[i] = C.d(i)
    if C.dim(n):
        bnd = column_space_basis(C.d(n + 1)) if C.has_d(n + 1) else []
        proj, sec, chosen = quotient_basis(F, bnd, C.dim(n))
        if chosen:
            labels[n] = [C.labels(n)[j] for j in chosen]
            maps[n] = proj
            if C.has_d(n):
                d[n] = C.d(n) @ sec
    T = Complex(F, labels, d, check=False)
    return T, ChainMap(C, T, {i: m for i, m in maps.items() if T.dim(i)}, check=False)


def truncate_geq0(C: Complex, with_inclusion: bool = False):
    """Connective cover: degree 0 becomes ``ker d(0)``, negative degrees vanish."""
    F = C.field
    labels: dict[int, list[str]] = {}
    d: dict[int, Matrix] = {}
    incl: dict[int, Matrix] = {}
    for i in C.degrees():
        if i > 0:
            labels[i] = list(C.labels(i))
            incl[i] = Matrix.identity(F, C.dim(i))
            if i > 1 and C.has_d(i):
                d[i] = C.d(i)
    n0 = C.dim(0)
    if n0:
        if C.has_d(0):
            K, free = kernel_basis(C.d(0), with_free=True)
        else:
            K = [[F.one if k == j else F.zero for k in range(n0)] for j in range(n0)]
            free = list(range(n0))
        if K:
            names = []
            for v, f in zip(K, free):
                unit = sum(1 for x in v if x) == 1
                names.append(C.labels(0)[f] if unit else f"cyc({C.labels(0)[f]})")
            labels[0] = names
            kmat = Matrix.from_columns(F, K, n0)
            incl[0] = kmat
            if C.dim(1) and C.has_d(1):
                cols = solve_many(kmat, C.d(1).columns())
                d[1] = Matrix.from_columns(F, cols, len(K))
    T = Complex(F, labels, d, check=False)
    if not with_inclusion:
        return T
    return T, ChainMap(T, C, {i: m for i, m in incl.items()}, check=False)


def shift(C: Complex, k: int) -> Complex:
    F = C.field
    sign = F.one if k % 2 == 0 else F.neg(F.one)
    labels = {i + k: C.labels(i) for i in C.degrees()}
    d = {i + k: C.d(i).scale(sign) for i in C.degrees() if C.has_d(i)}
    return Complex(F, labels, d, check=False)


def cone_on_identity(field: Field, n: int, base: str | None = None, top: str | None = None) -> Complex:
    """Two copies of the field in degrees ``n`` and ``n+1`` joined by ``d = 1``."""
    base = base or f"b{n}"
    top = top or f"t{n + 1}"
    return Complex(field, {n: [base], n + 1: [top]}, {n + 1: Matrix.identity(field, 1)})


def window(C: Complex, lo: int, hi: int) -> Complex:
    """Brutal truncation to degrees ``lo..hi``."""
    labels = {i: C.labels(i) for i in C.degrees() if lo <= i <= hi}
    d = {i: C.d(i) for i in labels if C.has_d(i) and lo <= i - 1}
    return Complex(C.field, labels, d, check=False)


def restrict_map(f: ChainMap, source: Complex, target: Complex) -> ChainMap:
    """The same matrices viewed between windowed complexes."""
    return ChainMap(source, target, {i: f.at(i) for i in source.degrees() if target.dim(i)}, check=False)


def is_acyclic(C: Complex) -> bool:
    H = C.homology()
    return all(H.dim(i) == 0 for i in C.degrees())


def direct_sum(A: Complex, B: Complex) -> Complex:
    F = A.field
    labels = {}
    d = {}
    for i in sorted(set(A.degrees()) | set(B.degrees())):
        labels[i] = list(A.labels(i)) + list(B.labels(i))
    for i in labels:
        if A.has_d(i) or B.has_d(i):
            m = Matrix.zeros(F, A.dim(i - 1) + B.dim(i - 1), A.dim(i) + B.dim(i))
            for r, row in enumerate(A.d(i).rows):
                m.rows[r][:A.dim(i)] = row
            for r, row in enumerate(B.d(i).rows):
                m.rows[A.dim(i - 1) + r][A.dim(i):] = row
            d[i] = m
    return Complex(F, labels, d, check=False)


def inverse_limit(stages: Sequence[Complex], transitions: Sequence[ChainMap]) -> tuple[Complex, list[ChainMap]]:
    """Degreewise limit of ``stages[N] -> ... -> stages[0]``.

    ``transitions[n]`` maps ``stages[n+1]`` to ``stages[n]``. Returns the limit
    complex and its projections to each stage.
    """
    F = stages[0].field if stages else None
    N = len(stages)
    degs = sorted({i for C in stages for i in C.degrees()})
    labels: dict[int, list[str]] = {}
    bases: dict[int, list] = {}
    for i in degs:
        offs = [0]
        for C in stages:
            offs.append(offs[-1] + C.dim(i))
        total = offs[-1]
        # constraint rows: t_n(x_{n+1}) - x_n = 0
        rows = []
        for n in range(N - 1):
            t = transitions[n].at(i)
            for r in range(stages[n].dim(i)):
                row = [F.zero] * total
                for c in range(stages[n + 1].dim(i)):
                    row[offs[n + 1] + c] = t.rows[r][c]
                row[offs[n] + r] = F.sub(row[offs[n] + r], F.one)
                rows.append(row)
        if rows:
            K = kernel_basis(Matrix(F, len(rows), total, rows))
        else:
            K = [[F.one if k == j else F.zero for k in range(total)] for j in range(total)]
        if not K:
            continue
        bases[i] = K
        # label a limit vector by its component in the highest stage that sees it
        names = []
        for v in K:
            for n in reversed(range(N)):
                seg = v[offs[n]:offs[n + 1]]
                nz = [k for k, x in enumerate(seg) if x]
                if nz:
                    names.append(stages[n].labels(i)[nz[0]] if len(nz) == 1 else f"lim({stages[n].labels(i)[nz[0]]})")
                    break
        if len(set(names)) != len(names):
            names = [f"{nm}#{k}" for k, nm in enumerate(names)]
        labels[i] = names
    offsets = {i: [sum(C.dim(i) for C in stages[:n]) for n in range(N + 1)] for i in degs}
    # differential: apply d stagewise then re-express in the kernel basis
    d = {}
    for i in bases:
        if i - 1 not in bases:
            continue
        Kt = Matrix.from_columns(F, bases[i - 1], offsets[i - 1][-1])
        imgs = []
        for v in bases[i]:
            w = []
            for n, C in enumerate(stages):
                seg = v[offsets[i][n]:offsets[i][n + 1]]
                w.extend(C.apply_d(i, seg) if C.dim(i - 1) else [])
            imgs.append(w)
        cols = solve_many(Kt, imgs)
        d[i] = Matrix.from_columns(F, cols, len(bases[i - 1]))
    L = Complex(F, labels, d, check=True)
    projs = []
    for n, C in enumerate(stages):
        maps = {}
        for i in bases:
            if C.dim(i):
                maps[i] = Matrix.from_columns(F, [v[offsets[i][n]:offsets[i][n + 1]] for v in bases[i]], C.dim(i))
        projs.append(ChainMap(L, C, maps, check=False))
    return L, projs

