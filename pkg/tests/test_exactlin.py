from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import sympy_rank

from dgtower.exactlin import (Field, FieldError, Matrix, enumerate_space, inconsistency_certificate, inverse,
                              kernel_basis, quotient_basis, rank, rref, solve, solve_many, span_contains)

FIELDS = [Field.prime(2), Field.prime(5), Field.rationals()]


@st.composite
def matrices(draw, max_dim=5):
    F = draw(st.sampled_from(FIELDS))
    m = draw(st.integers(0, max_dim))
    n = draw(st.integers(0, max_dim))
    if F.p:
        entry = st.integers(0, F.p - 1)
    else:
        entry = st.fractions(min_value=-3, max_value=3, max_denominator=3)
    rows = draw(st.lists(st.lists(entry, min_size=n, max_size=n), min_size=m, max_size=m))
    return Matrix.from_rows(F, [[F(x) for x in r] for r in rows], n)


def test_field_parse_and_format():
    Q = Field.rationals()
    assert Q.parse("-2/3") == Fraction(-2, 3)
    assert Q.format(Fraction(4, 2)) == "2"
    F5 = Field.prime(5)
    assert F5.parse("4 mod 5") == 4
    assert F5.parse("-1") == 4
    assert F5.parse("1/2") == 3
    with pytest.raises(FieldError):
        F5.parse("4 mod 7")
    with pytest.raises(FieldError):
        F5.parse("1/5")
    with pytest.raises(FieldError):
        Field.prime(6)
    assert Field.from_descriptor("GF(3)") == Field.prime(3)
    assert Field.from_descriptor("Q").descriptor == "Q"


def test_rref_small_example():
    Q = Field.rationals()
    M = Matrix.from_rows(Q, [[1, 2, 3], [2, 4, 7]])
    R, piv = rref(M)
    assert piv == [0, 2]
    assert R.rows == [[1, 2, 0], [0, 0, 1]]
    assert kernel_basis(M) == [[-2, 1, 0]]


@given(matrices())
def test_rank_agrees_with_sympy(M):
    assert rank(M) == sympy_rank(M)


@given(matrices())
def test_rank_nullity(M):
    K = kernel_basis(M)
    assert len(K) + rank(M) == M.ncols
    for v in K:
        assert not any(M.apply(v))


@given(matrices(), st.data())
def test_solve_or_certificate(M, data):
    F = M.field
    b = [F(data.draw(st.integers(-2, 2))) for _ in range(M.nrows)]
    x = solve(M, b)
    y = inconsistency_certificate(M, b)
    if x is None:
        assert y is not None
        assert not any(M.T.apply(y))
        pairing = F.zero
        for a, c in zip(y, b):
            pairing = F.add(pairing, F.mul(a, c))
        assert pairing
    else:
        assert M.apply(x) == b
        assert y is None


@given(matrices(), st.data())
def test_solve_many_matches_solve(M, data):
    F = M.field
    bs = [[F(data.draw(st.integers(-1, 1))) for _ in range(M.nrows)] for _ in range(3)]
    assert solve_many(M, bs) == [solve(M, b) for b in bs]


@given(matrices())
def test_quotient_basis_splits(M):
    F = M.field
    proj, sec, chosen = quotient_basis(F, M.columns(), M.nrows)
    assert len(chosen) == M.nrows - rank(M)
    assert proj @ sec == Matrix.identity(F, len(chosen))
    for c in M.columns():
        assert not any(proj.apply(c))


def test_inverse_roundtrip():
    Q = Field.rationals()
    M = Matrix.from_rows(Q, [[2, 1], [1, 1]])
    assert inverse(M) @ M == Matrix.identity(Q, 2)
    with pytest.raises(ValueError):
        inverse(Matrix.from_rows(Q, [[1, 1], [1, 1]]))


def test_enumerate_space_counts():
    F = Field.prime(3)
    vecs = list(enumerate_space(F, [[1, 0, 1], [0, 1, 1]], 3))
    assert len({tuple(v) for v in vecs}) == 9
    assert span_contains(F, [[1, 0, 1], [0, 1, 1]], [1, 1, 2])
    assert not span_contains(F, [[1, 0, 1], [0, 1, 1]], [1, 1, 1])
