import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import categories

from dgtower.catalog import truncated_polynomial
from dgtower.cells import bounded_big_model, cell_category
from dgtower.complexes import Complex
from dgtower.dgcat import categories_equal, category_from_labels, functor_equal, is_fibration, validate, validate_functor
from dgtower.exactlin import Matrix, vec_add
from dgtower.sqzero import (Bimodule, BimoduleError, check_derivation, derivation_from_section, gamma, hn_bimodule,
                            phi_from_boundary, section_from_derivation, square_zero, validate_bimodule,
                            verify_fiber_sequence, zero_bimodule)


def ground_field_category(F):
    return category_from_labels(F, ["o"], {("o", "o"): {0: ["id"]}}, {}, {("id", "id"): {"id": 1}},
                                {"o": {"id": 1}}, "k")


def scalar_bimodule(A, degree):
    """``k`` in ``degree`` with both actions given by multiplication."""
    M = {("o", "o"): Complex(A.field, {degree: ["m"]})}
    left = {("o", "o", "o"): {(0, degree): {0: {0: {0: 1}}}}}
    right = {("o", "o", "o"): {(degree, 0): {0: {0: {0: 1}}}}}
    return Bimodule(A, M, left, right, "k")


def test_zero_bimodule_gives_back_the_base(field):
    A = truncated_polynomial(field, 3)
    sq = square_zero(A, zero_bimodule(A))
    assert categories_equal(sq.total, A)


def test_scalar_extension(field):
    A = ground_field_category(field)
    Mb = scalar_bimodule(A, 1)
    assert validate_bimodule(Mb) == []
    sq = square_zero(A, Mb)
    T = sq.total
    assert validate(T) == []
    assert T.hom("o", "o").degrees() == [0, 1]
    m = [field.one]
    assert T.compose("o", "o", "o", 1, m, 1, m) == []
    assert T.compose("o", "o", "o", 0, T.identity("o"), 1, m) == m
    assert is_fibration(sq.projection)[0] is True
    assert validate_functor(sq.inclusion) == []


def test_bimodule_products_vanish(field):
    Mb = hn_bimodule(cell_category("C", 1, field), 0)
    assert not Mb.is_zero()
    sq = square_zero(Mb.over, Mb)
    T = sq.total
    for x, y, z in [("1", "1", "2"), ("1", "2", "2")]:
        for p in T.hom(y, z).degrees():
            for q in T.hom(x, y).degrees():
                for gi in range(T.hom(y, z).dim(p)):
                    for fi in range(T.hom(x, y).dim(q)):
                        ng = Mb.over.hom(y, z).dim(p)
                        nf = Mb.over.hom(x, y).dim(q)
                        if gi >= ng and fi >= nf:
                            assert not T.compose_basis(x, y, z, p, gi, q, fi)


def test_square_zero_rejects_foreign_bimodule(Q):
    A = ground_field_category(Q)
    with pytest.raises(BimoduleError):
        square_zero(truncated_polynomial(Q, 2), scalar_bimodule(A, 1))


def test_hn_bimodule_examples(field):
    A = cell_category("D", 2, field)
    assert hn_bimodule(A, 0).is_zero()
    for n in range(3):
        Mb = hn_bimodule(cell_category("C", n + 1, field), n)
        assert Mb.hom("1", "2").degrees() == [n + 2] and Mb.hom("1", "2").dim(n + 2) == 1
        assert validate_bimodule(Mb) == []


@pytest.mark.parametrize("n", [0, 1, 2])
def test_gamma_on_a_sphere_cell(field, n):
    A = cell_category("C", n + 1, field)
    kd = gamma(A, n, n + 3)
    phi = kd.phi("1", "2")
    assert phi == Matrix.from_rows(field, [[field.one]])
    assert phi == phi_from_boundary(A, kd.model, "1", "2")


def test_gamma_without_higher_homology_is_the_comparison(field):
    A = cell_category("C", 0, field)
    kd = gamma(A, 0, 3)
    assert kd.derivation.is_zero()
    assert functor_equal(kd.gamma, kd.model.comparison.then(kd.extension.inclusion))


def test_fiber_sequence_on_degree_zero(field):
    A = ground_field_category(field)
    assert verify_fiber_sequence(A, 0, 4)["ok"]


@pytest.mark.parametrize("n", [0, 1])
def test_fiber_sequence_on_a_sphere_cell(field, n):
    A = cell_category("C", n + 1, field)
    report = verify_fiber_sequence(A, n, n + 4)
    assert report["ok"]
    entry = report["homs"]["1,2"]
    assert entry["kernel_identification"] and entry["theta_quasi_iso"]
    HA = A.hom("1", "2").homology()
    for i in range(n + 2):
        assert entry["homology_pullback"][i] == HA.dim(i)


@given(categories(), st.integers(0, 1))
def test_gamma_properties(A, n):
    D = 5
    kd = gamma(A, n, D)
    sq = kd.extension
    assert validate_functor(kd.gamma) == []
    assert is_fibration(kd.gamma)[0] is True
    assert functor_equal(kd.gamma.then(sq.projection), kd.model.comparison)
    assert check_derivation(kd.derivation) == []
    Fbase, Dv = derivation_from_section(sq, kd.gamma)
    assert functor_equal(section_from_derivation(sq, Fbase, Dv), kd.gamma)
    for x, y in A.pairs():
        assert kd.phi(x, y) == phi_from_boundary(A, kd.model, x, y)


@given(categories(), st.integers(0, 1))
def test_homology_action_ignores_boundaries(A, n):
    F = A.field
    for x, y, z in [(x, y, z) for x in A.objects for y in A.objects for z in A.objects]:
        Hxy, Hxz = A.hom(x, y).homology(), A.hom(x, z).homology()
        C = A.hom(y, z)
        if not Hxy.dim(n + 1) or not C.dim(1) or not C.dim(0):
            continue
        for j in range(Hxy.dim(n + 1)):
            rep = Hxy.rep(n + 1, j)
            for w in range(C.dim(1)):
                e = [F.one if k == w else F.zero for k in range(C.dim(1))]
                dw = C.apply_d(1, e)
                a = [F.one] + [F.zero] * (C.dim(0) - 1)
                base = A.compose(x, y, z, 0, a, n + 1, rep)
                moved = A.compose(x, y, z, 0, vec_add(F, a, dw), n + 1, rep)
                assert Hxz.classify(n + 1, base) == Hxz.classify(n + 1, moved)


@given(categories(), st.integers(0, 1))
def test_fiber_sequence_holds(A, n):
    report = verify_fiber_sequence(A, n, 5)
    assert report["ok"], report


def test_big_models_feed_gamma(Q):
    A = truncated_polynomial(Q, 4)
    M = bounded_big_model(A, 1, 5)
    kd = gamma(A, 1, 5, M)
    assert kd.model is M
