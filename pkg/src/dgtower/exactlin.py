"""Exact field arithmetic and the linear-algebra kernel.

Two fields are supported: the rationals (elements are ``fractions.Fraction``)
and prime fields ``GF(p)`` (elements are Python ints reduced into ``[0, p)``).
Every reduction uses the same rule -- reduced row echelon form with pivots
taken at the lowest column index -- so kernel bases, particular solutions and
quotient complements are canonical and reproducible.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


class FieldError(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class Field:
    """Either ``Field.rationals()`` or ``Field.prime(p)``."""

    __slots__ = ("p",)

    def __init__(self, p: int = 0):
        if p and not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        self.p = p

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls(p)

    @classmethod
    def from_descriptor(cls, text: str) -> "Field":
        text = text.strip()
        if text in ("Q", "QQ"):
            return cls(0)
        m = re.fullmatch(r"(?:GF|F)\(?(\d+)\)?", text)
        if not m:
            raise FieldError(f"unknown field descriptor {text!r}")
        return cls(int(m.group(1)))

    @property
    def descriptor(self) -> str:
        return f"GF({self.p})" if self.p else "Q"

    @property
    def is_finite(self) -> bool:
        return self.p != 0

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"Field({self.descriptor})"

    # -- elements -------------------------------------------------------
    @property
    def zero(self):
        return 0 if self.p else Fraction(0)

    @property
    def one(self):
        return 1 if self.p else Fraction(1)

    def __call__(self, x):
        if self.p:
            if isinstance(x, Fraction):
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            return int(x) % self.p
        return Fraction(x)

    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.p else a * b

    def neg(self, a):
        return (-a) % self.p if self.p else -a

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p) if self.p else 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def elements(self) -> Iterator[int]:
        if not self.p:
            raise FieldError("the rationals cannot be enumerated")
        return iter(range(self.p))

    def parse(self, text) -> object:
        """Parse an exact scalar: ``"3"``, ``"-2/3"`` or ``"4 mod 5"``."""
        if isinstance(text, int):
            return self(text)
        s = str(text).strip()
        m = re.fullmatch(r"(-?\d+)\s*mod\s*(\d+)", s)
        if m:
            if int(m.group(2)) != self.p:
                raise FieldError(f"residue {s!r} does not live in {self.descriptor}")
            return self(int(m.group(1)))
        m = re.fullmatch(r"(-?\d+)(?:\s*/\s*(\d+))?", s)
        if not m:
            raise FieldError(f"cannot parse scalar {s!r}")
        num = int(m.group(1))
        den = int(m.group(2) or 1)
        if den == 0:
            raise FieldError(f"zero denominator in {s!r}")
        if self.p and den % self.p == 0:
            raise FieldError(f"denominator of {s!r} vanishes in {self.descriptor}")
        return self(Fraction(num, den))

    def format(self, a) -> str:
        if self.p:
            return str(int(a))
        a = Fraction(a)
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"

    def random(self, rng, spread: int = 2):
        if self.p:
            return rng.randrange(self.p)
        return Fraction(rng.randint(-spread, spread))


# ----------------------------------------------------------------------
# dense matrices


class Matrix:
    """Dense row-major matrix over a ``Field``. Treated as immutable."""

    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field: Field, nrows: int, ncols: int, rows=None):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            z = field.zero
            rows = [[z] * ncols for _ in range(nrows)]
        else:
            rows = [list(r) for r in rows]
            if len(rows) != nrows or any(len(r) != ncols for r in rows):
                raise ValueError(f"entry count does not match shape {nrows}x{ncols}")
        self.rows = rows

    # constructors
    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> "Matrix":
        return cls(field, nrows, ncols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        m = cls(field, n, n)
        for i in range(n):
            m.rows[i][i] = field.one
        return m

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], ncols: int | None = None) -> "Matrix":
        rows = [[field(x) for x in r] for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return cls(field, len(rows), ncols, rows)

    @classmethod
    def from_columns(cls, field: Field, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        m = cls(field, nrows, len(cols))
        for j, c in enumerate(cols):
            if len(c) != nrows:
                raise ValueError("column length mismatch")
            for i, x in enumerate(c):
                m.rows[i][j] = x
        return m

    @classmethod
    def hstack(cls, field: Field, nrows: int, blocks: Sequence["Matrix"]) -> "Matrix":
        ncols = sum(b.ncols for b in blocks)
        m = cls(field, nrows, ncols)
        off = 0
        for b in blocks:
            if b.nrows != nrows:
                raise ValueError("hstack row mismatch")
            for i in range(nrows):
                m.rows[i][off:off + b.ncols] = b.rows[i]
            off += b.ncols
        return m

    @classmethod
    def vstack(cls, field: Field, ncols: int, blocks: Sequence["Matrix"]) -> "Matrix":
        rows = []
        for b in blocks:
            if b.ncols != ncols:
                raise ValueError("vstack column mismatch")
            rows.extend(list(r) for r in b.rows)
        return cls(field, len(rows), ncols, rows)

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def columns(self) -> list[list]:
        return [self.column(j) for j in range(self.ncols)]

    def select_columns(self, idx: Sequence[int]) -> "Matrix":
        return Matrix(self.field, self.nrows, len(idx), [[r[j] for j in idx] for r in self.rows])

    def select_rows(self, idx: Sequence[int]) -> "Matrix":
        return Matrix(self.field, len(idx), self.ncols, [self.rows[i] for i in idx])

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.ncols, self.nrows, [list(c) for c in zip(*self.rows)] if self.nrows else [[] for _ in range(self.ncols)])

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.shape == other.shape
                and self.rows == other.rows)

    def __repr__(self):
        body = "; ".join(" ".join(self.field.format(x) for x in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    # arithmetic
    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.field.p
        n = other.ncols
        out = []
        orows = other.rows
        for row in self.rows:
            acc = [0] * n
            for k, a in enumerate(row):
                if a:
                    ok = orows[k]
                    for j in range(n):
                        b = ok[j]
                        if b:
                            acc[j] += a * b
            if p:
                acc = [x % p for x in acc]
            else:
                acc = [Fraction(x) for x in acc]
            out.append(acc)
        return Matrix(self.field, self.nrows, n, out)

    def apply(self, vec: Sequence) -> list:
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        p = self.field.p
        nz = [(k, a) for k, a in enumerate(vec) if a]
        out = []
        for row in self.rows:
            s = 0
            for k, a in nz:
                b = row[k]
                if b:
                    s += a * b
            out.append(s % p if p else Fraction(s))
        return out

    def _combine(self, other: "Matrix", sign: int) -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        p = self.field.p
        rows = []
        for r1, r2 in zip(self.rows, other.rows):
            if p:
                rows.append([(a + sign * b) % p for a, b in zip(r1, r2)])
            else:
                rows.append([a + sign * b for a, b in zip(r1, r2)])
        return Matrix(self.field, self.nrows, self.ncols, rows)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, c) -> "Matrix":
        F = self.field
        return Matrix(F, self.nrows, self.ncols, [[F.mul(c, x) for x in r] for r in self.rows])


# ----------------------------------------------------------------------
# vector helpers


def vec_add(field: Field, u: Sequence, v: Sequence) -> list:
    p = field.p
    if p:
        return [(a + b) % p for a, b in zip(u, v)]
    return [a + b for a, b in zip(u, v)]


def vec_sub(field: Field, u: Sequence, v: Sequence) -> list:
    p = field.p
    if p:
        return [(a - b) % p for a, b in zip(u, v)]
    return [a - b for a, b in zip(u, v)]


def vec_scale(field: Field, c, u: Sequence) -> list:
    return [field.mul(c, a) for a in u]


def vec_axpy(field: Field, acc: list, c, u: Sequence) -> None:
    """acc += c*u in place."""
    if not c:
        return
    p = field.p
    for i, a in enumerate(u):
        if a:
            acc[i] = (acc[i] + c * a) % p if p else acc[i] + c * a


def unit_vector(field: Field, n: int, i: int) -> list:
    v = [field.zero] * n
    v[i] = field.one
    return v


def zero_vector(field: Field, n: int) -> list:
    return [field.zero] * n


# ----------------------------------------------------------------------
# elimination


def _rref_rows(field: Field, rows: Iterable[dict], reduce_fully: bool = True) -> dict[int, dict]:
    """Echelon form of sparse rows. Returns ``{pivot_col: row}``.

    Each returned row has a 1 at its pivot column and that pivot is its lowest
    nonzero column. With ``reduce_fully`` the result is the reduced form:
    every pivot column is zero in every other row.
    """
    p = field.p
    pivots: dict[int, dict] = {}
    for r in rows:
        r = {k: v for k, v in r.items() if v}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                inv = field.inv(r[c])
                if p:
                    r = {k: (v * inv) % p for k, v in r.items()}
                else:
                    r = {k: v * inv for k, v in r.items()}
                pivots[c] = r
                break
            f = r[c]
            for k, v in piv.items():
                x = r.get(k, 0) - f * v
                if p:
                    x %= p
                if x:
                    r[k] = x
                else:
                    r.pop(k, None)
    if reduce_fully and pivots:
        cols = sorted(pivots)
        for c in reversed(cols):
            prow = pivots[c]
            for c2 in cols:
                if c2 >= c:
                    break
                r2 = pivots[c2]
                f = r2.get(c)
                if f:
                    for k, v in prow.items():
                        x = r2.get(k, 0) - f * v
                        if p:
                            x %= p
                        if x:
                            r2[k] = x
                        else:
                            r2.pop(k, None)
    return pivots


def _sparse_rows(M: Matrix) -> list[dict]:
    return [{j: x for j, x in enumerate(r) if x} for r in M.rows]


def rref(M: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    piv = _rref_rows(M.field, _sparse_rows(M))
    cols = sorted(piv)
    out = Matrix(M.field, len(cols), M.ncols)
    for i, c in enumerate(cols):
        for k, v in piv[c].items():
            out.rows[i][k] = v
    return out, cols


def rank(M: Matrix) -> int:
    if M.nrows == 0 or M.ncols == 0:
        return 0
    return len(_rref_rows(M.field, _sparse_rows(M), reduce_fully=False))


def pivot_columns(M: Matrix) -> list[int]:
    return sorted(_rref_rows(M.field, _sparse_rows(M), reduce_fully=False))


def kernel_basis(M: Matrix, with_free: bool = False):
    """Canonical basis of the null space (one vector per free column).

    With ``with_free`` also returns the free column of each vector, where the
    vector has entry 1.
    """
    F = M.field
    piv = _rref_rows(F, _sparse_rows(M))
    pcols = sorted(piv)
    pset = set(pcols)
    basis = []
    free = []
    for f in range(M.ncols):
        if f in pset:
            continue
        free.append(f)
        v = [F.zero] * M.ncols
        v[f] = F.one
        for c in pcols:
            x = piv[c].get(f)
            if x:
                v[c] = F.neg(x)
        basis.append(v)
    return (basis, free) if with_free else basis


def column_space_basis(M: Matrix) -> list[list]:
    """Columns of ``M`` at its pivot positions."""
    return [M.column(j) for j in pivot_columns(M)]


def solve(M: Matrix, b: Sequence) -> list | None:
    """Some ``x`` with ``M x = b``, or ``None`` if inconsistent.

    The returned solution sets every free variable to zero.
    """
    if len(b) != M.nrows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {M.nrows}")
    sols = solve_many(M, [b])
    return sols[0]


def solve_many(M: Matrix, bs: Sequence[Sequence]) -> list[list | None]:
    """Solve ``M x = b`` for several right-hand sides with one elimination."""
    F = M.field
    n = M.ncols
    k = len(bs)
    for b in bs:
        if len(b) != M.nrows:
            raise ValueError(f"right-hand side has length {len(b)}, expected {M.nrows}")
    rows = []
    for i, r in enumerate(M.rows):
        d = {j: x for j, x in enumerate(r) if x}
        for t, b in enumerate(bs):
            if b[i]:
                d[n + t] = b[i]
        rows.append(d)
    piv = _rref_rows(F, rows)
    out = []
    for t in range(k):
        if (n + t) in piv:
            out.append(None)
            continue
        x = [F.zero] * n
        for c, r in piv.items():
            if c < n:
                v = r.get(n + t)
                if v:
                    x[c] = v
        out.append(x)
    # rows whose pivot sits in an augmented column flag inconsistency for that
    # column only if no earlier augmented pivot absorbed it
    for t in range(k):
        if out[t] is None:
            continue
        for c, r in piv.items():
            if c >= n and c < n + t and r.get(n + t):
                out[t] = None
                break
    return out


def inconsistency_certificate(M: Matrix, b: Sequence) -> list | None:
    """A row vector ``y`` with ``y M = 0`` and ``y b != 0``, if one exists."""
    F = M.field
    for y in kernel_basis(M.T):
        s = F.zero
        for yi, bi in zip(y, b):
            s = F.add(s, F.mul(yi, bi))
        if s:
            return y
    return None


def inverse(M: Matrix) -> Matrix:
    if M.nrows != M.ncols:
        raise ValueError("inverse of a non-square matrix")
    F = M.field
    n = M.nrows
    cols = solve_many(M, Matrix.identity(F, n).columns())
    if any(c is None for c in cols):
        raise ValueError("matrix is singular")
    return Matrix.from_columns(F, cols, n)


def quotient_basis(field: Field, sub: Sequence[Sequence], ambient_dim: int) -> tuple[Matrix, Matrix, list[int]]:
    """Complement of ``span(sub)`` spanned by standard basis vectors.

    Returns ``(projection, section, chosen)`` where ``chosen`` lists the
    indices of the standard vectors spanning the complement (lowest indices
    first), ``section`` is the inclusion of those vectors and ``projection``
    kills ``span(sub)`` with ``projection @ section = identity``.
    """
    for c in sub:
        if len(c) != ambient_dim:
            raise ValueError("sub vector length does not match ambient dimension")
    sub = [list(c) for c in sub]
    sub_basis = [list(c) for c in column_space_basis(Matrix.from_columns(field, sub, ambient_dim))] if sub else []
    k = len(sub_basis)
    big = Matrix.hstack(field, ambient_dim, [
        Matrix.from_columns(field, sub_basis, ambient_dim),
        Matrix.identity(field, ambient_dim),
    ])
    chosen = [c - k for c in pivot_columns(big) if c >= k]
    q = len(chosen)
    section = Matrix(field, ambient_dim, q)
    for j, i in enumerate(chosen):
        section.rows[i][j] = field.one
    basis = Matrix.hstack(field, ambient_dim, [Matrix.from_columns(field, sub_basis, ambient_dim), section])
    inv = inverse(basis) if ambient_dim else Matrix(field, 0, 0)
    projection = inv.select_rows(list(range(k, k + q)))
    return projection, section, chosen


def span_contains(field: Field, vectors: Sequence[Sequence], v: Sequence) -> bool:
    if not any(v):
        return True
    if not vectors:
        return False
    return solve(Matrix.from_columns(field, vectors, len(v)), v) is not None


def is_injective(M: Matrix) -> bool:
    return rank(M) == M.ncols


def is_surjective(M: Matrix) -> bool:
    return rank(M) == M.nrows


def enumerate_space(field: Field, basis: Sequence[Sequence], dim: int) -> Iterator[list]:
    """All vectors of ``span(basis)`` over a finite field."""
    for coeffs in itertools.product(range(field.p), repeat=len(basis)):
        v = [0] * dim
        for c, b in zip(coeffs, basis):
            vec_axpy(field, v, c, b)
        yield v
