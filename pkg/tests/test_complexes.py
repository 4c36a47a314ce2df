import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import homology_dims

from dgtower.complexes import (ChainMap, Complex, ComplexError, cone_on_identity, direct_sum, inverse_limit,
                               is_acyclic, is_quasi_iso, shift, truncate_geq0, truncate_leq)
from dgtower.exactlin import Field, Matrix
from dgtower.randomgen import random_complex

FIELDS = [Field.prime(2), Field.prime(5), Field.rationals()]


@st.composite
def complexes(draw, lo=0, hi=5):
    F = draw(st.sampled_from(FIELDS))
    seed = draw(st.integers(0, 10**6))
    return random_complex(F, random.Random(seed), "c", lo=lo, hi=hi, max_dim=3)


def two_term(F, d0, d1, rows):
    return Complex(F, {0: [f"a{k}" for k in range(d0)], 1: [f"b{k}" for k in range(d1)]},
                   {1: Matrix.from_rows(F, rows, d1)})


def test_zero_differential_homology_is_chains(Q):
    C = Complex(Q, {0: ["a", "b"], 2: ["c"]})
    assert C.homology().dims() == {0: 2, 2: 1}


def test_cone_on_identity_is_acyclic(field):
    for n in range(4):
        C = cone_on_identity(field, n)
        assert C.degrees() == [n, n + 1]
        assert is_acyclic(C)


def test_two_term_homology_by_hand(Q):
    C = two_term(Q, 2, 2, [[1, 0], [0, 0]])
    H = C.homology()
    assert (H.dim(0), H.dim(1)) == (1, 1)


def test_dd_zero_enforced(Q):
    with pytest.raises(ComplexError):
        Complex(Q, {0: ["a"], 1: ["b"], 2: ["c"]},
                {1: Matrix.from_rows(Q, [[1]]), 2: Matrix.from_rows(Q, [[1]])})


def test_truncate_leq_examples(Q):
    C = Complex(Q, {0: ["a", "b"]})
    T, p = truncate_leq(C, 0)
    assert T == C and p == ChainMap.identity(C)
    T, _ = truncate_leq(cone_on_identity(Q, 0), 0)
    assert T.is_zero()
    T, _ = truncate_leq(Complex(Q, {0: ["a", "b"], 1: ["c", "d", "e"]}), 0)
    assert T.dim(0) == 2 and T.dim(1) == 0


def test_truncate_geq0_examples(Q):
    C = Complex(Q, {0: ["a"], 3: ["b"]})
    assert truncate_geq0(C) == C
    assert truncate_geq0(Complex(Q, {-1: ["x"]})).is_zero()
    C = Complex(Q, {-1: ["x"], 0: ["a", "b"]}, {0: Matrix.from_rows(Q, [[1, 0]])})
    T = truncate_geq0(C)
    assert T.dim(0) == 1 and T.degrees() == [0]


def test_shift_examples(Q):
    C = Complex(Q, {0: ["e"]})
    assert shift(C, 0) == C
    S3 = shift(C, 3)
    assert S3.degrees() == [3] and S3.dim(3) == 1


def test_is_quasi_iso_examples(Q):
    C = cone_on_identity(Q, 1)
    assert is_quasi_iso(ChainMap.identity(C))[0]
    assert is_quasi_iso(ChainMap.zero(C, Complex.zero(Q)))[0]
    C = Complex(Q, {0: ["a"], 1: ["b"]})
    T, p = truncate_leq(C, 0)
    ok, report = is_quasi_iso(p)
    assert not ok and report[1] == (False, True)


@given(complexes())
def test_homology_dims_match_independent_ranks(C):
    assert C.homology().dims() == homology_dims(C)


@given(complexes(), st.data())
def test_homology_reps_are_nonbounding_cycles(C, data):
    H = C.homology()
    for i in C.degrees():
        for k in range(H.dim(i)):
            r = H.rep(i, k)
            assert not any(C.apply_d(i, r))
            assert H.classify(i, r) == [1 if j == k else 0 for j in range(H.dim(i))]


@given(complexes(), st.integers(0, 5))
def test_truncation_window(C, n):
    T, p = truncate_leq(C, n)
    HC, HT = C.homology(), T.homology()
    for i in range(n + 1):
        assert HT.dim(i) == HC.dim(i)
    for i in range(n + 1, 7):
        assert HT.dim(i) == 0
    assert not p.commutation_failures()
    ok, _ = is_quasi_iso(p, range(n + 1))
    assert ok


@given(complexes(), st.integers(5, 7))
def test_inverse_limit_of_truncations_recovers_complex(C, D):
    stages, maps = [], []
    for n in range(D + 1):
        T, p = truncate_leq(C, n)
        stages.append(T)
        maps.append(p)
    # the transition n+1 -> n is the truncation map of stage n+1 to degree n
    transitions = []
    for n in range(D):
        Tn1 = stages[n + 1]
        _, q = truncate_leq(Tn1, n)
        transitions.append(ChainMap(Tn1, stages[n], {i: q.at(i) for i in Tn1.degrees() if stages[n].dim(i)}))
    L, projs = inverse_limit(stages, transitions)
    for i in C.degrees():
        assert L.dim(i) == C.dim(i)
    assert projs[D].at(0).nrows == C.dim(0)
    assert is_quasi_iso(projs[D])[0]


@given(complexes(), complexes())
def test_direct_sum_homology_adds(A, B):
    if A.field != B.field:
        return
    S = direct_sum(A, B)
    HA, HB, HS = A.homology(), B.homology(), S.homology()
    for i in S.degrees():
        assert HS.dim(i) == HA.dim(i) + HB.dim(i)
