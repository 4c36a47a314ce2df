from hypothesis import given
from hypothesis import strategies as st
from strategies import categories

from dgtower.catalog import invertible_h0_category, massey_category, truncated_polynomial
from dgtower.cells import cell_category
from dgtower.complexes import is_quasi_iso
from dgtower.dgcat import (DgFunctor, categories_equal, category_from_labels, category_to_labels, connective_cover, functor_equal, h0,
                           is_connective, is_fibration, is_invertible_in_h0, is_positively_graded,
                           is_quasi_equivalence, terminal_functor, truncate_category, validate, validate_functor)
from dgtower.exactlin import Field, vec_add


def one_object(F, basis, differential=None, prods=None):
    """One object ``o`` with unit ``id`` and extra products given by label."""
    labels = [l for ls in basis.values() for l in ls]
    table = {("id", l): {l: 1} for l in labels}
    table.update({(l, "id"): {l: 1} for l in labels})
    table.update(prods or {})
    return category_from_labels(F, ["o"], {("o", "o"): basis}, differential or {}, table, {"o": {"id": 1}})


def test_scalar_category_is_valid(Q):
    A = one_object(Q, {0: ["id"]})
    assert validate(A) == []
    assert is_positively_graded(A) and is_connective(A)


def test_cell_categories_are_valid(field):
    for m in range(4):
        assert validate(cell_category("C", m, field)) == []
        assert validate(cell_category("D", m + 1, field)) == []


def test_tampered_associativity_is_named(Q):
    data = category_to_labels(massey_category(Q))
    data["products"][("a2a1", "a0")] = {"a2a1a0": 2}
    A = category_from_labels(Q, data["objects"], data["basis"], data["differential"], data["products"],
                             data["identities"])
    problems = validate(A)
    assert any("associativity fails on (a2, a1, a0)" in p for p in problems)


def test_grading_predicates(Q):
    A = one_object(Q, {0: ["id"], -1: ["x"], -2: ["y"]}, {"x": {"y": 1}})
    assert validate(A) == []
    assert not is_positively_graded(A) and is_connective(A)
    B = one_object(Q, {0: ["id"], -1: ["z"]})
    assert validate(B) == []
    assert not is_positively_graded(B) and not is_connective(B)


def test_connective_cover_examples(Q):
    A = truncated_polynomial(Q, 3)
    C, inc = connective_cover(A)
    assert categories_equal(C, A)
    assert functor_equal(inc, DgFunctor.identity(A))
    A = one_object(Q, {0: ["id"], -1: ["x"], -2: ["y"], 1: ["w"]}, {"x": {"y": 1}})
    C, inc = connective_cover(A)
    assert validate(C) == [] and is_positively_graded(C)
    assert is_quasi_iso(inc.maps[("o", "o")])[0]
    assert is_quasi_equivalence(inc)[0] is True
    B = one_object(Q, {0: ["id"], -1: ["z"]})
    C, inc = connective_cover(B)
    assert validate_functor(inc) == []
    assert is_quasi_equivalence(inc)[0] is False


def test_h0_examples(Q):
    A = one_object(Q, {0: ["id", "e"]}, prods={("e", "e"): {"e": 1}})
    H, _ = h0(A)
    assert categories_equal(H, A)
    for m in range(1, 4):
        H, _ = h0(cell_category("D", m, Q))
        assert H.hom("3", "4").total_dim() == 0
        assert H.hom("3", "3").dim(0) == 1
    H, _ = h0(cell_category("C", 0, Q))
    assert H.hom("1", "2").dim(0) == 1


def test_invertible_examples(Q):
    A = truncated_polynomial(Q, 3)
    ok, w = is_invertible_in_h0(A, "o", "o", A.identity("o"))
    assert ok and w["g"] == A.identity("o")
    assert not is_invertible_in_h0(A, "o", "o", [0])[0]
    B = invertible_h0_category(Q)
    assert validate(B) == []
    ok, w = is_invertible_in_h0(B, "x", "y", [1])
    assert ok
    # the witness satisfies g f - id = d u and f g - id = d v exactly
    gf = B.compose("x", "y", "x", 0, w["g"], 0, [1])
    fg = B.compose("y", "x", "y", 0, [1], 0, w["g"])
    du = B.hom("x", "x").apply_d(1, w["u"])
    dv = B.hom("y", "y").apply_d(1, w["v"])
    assert gf == vec_add(Q, B.identity("x"), du)
    assert fg == vec_add(Q, B.identity("y"), dv)


def test_quasi_equivalence_examples(Q):
    A = truncated_polynomial(Q, 3)
    assert is_quasi_equivalence(DgFunctor.identity(A))[0] is True
    P, proj = h0(A)
    ok, report = is_quasi_equivalence(proj)
    assert ok is False
    assert report["per_hom"][("o", "o")][1] == (False, True)


def test_fibration_examples(Q, F2):
    A = truncated_polynomial(F2, 4)
    T, proj = truncate_category(A, 2)
    assert is_fibration(DgFunctor.identity(A))[0] is True
    ok, rep = is_fibration(proj)
    assert ok is True and rep["F1"]
    # the zero functor H0(D(1)) -> D(1) misses hom(3,4)
    H, _ = h0(cell_category("D", 1, Q))
    G = DgFunctor(H, cell_category("D", 1, Q), {"3": "3", "4": "4"}, {})
    ok, rep = is_fibration(G)
    assert ok is False and rep["F1"] is False


@given(categories())
def test_generated_categories_validate(A):
    assert validate(A) == []
    assert is_positively_graded(A)


@given(categories())
def test_connective_cover_idempotent(A):
    C, inc = connective_cover(A)
    C2, inc2 = connective_cover(C)
    assert categories_equal(C, C2)
    assert inc.is_identity_on_objects() and inc2.is_identity_on_objects()


@given(categories())
def test_h0_projection_is_a_functor(A):
    H, proj = h0(A)
    assert validate(H) == []
    assert validate_functor(proj) == []


@given(categories(fields=[Field.prime(2), Field.prime(5)]), st.data())
def test_invertibility_stable_under_boundaries(A, data):
    x = data.draw(st.sampled_from(A.objects))
    y = data.draw(st.sampled_from(A.objects))
    C = A.hom(x, y)
    if not C.dim(0):
        return
    F = A.field
    Z = C.homology().at(0).cycles
    f = [F.zero] * C.dim(0)
    for z in Z:
        f = vec_add(F, f, [F.mul(data.draw(st.integers(0, F.p - 1)), c) for c in z])
    verdict = is_invertible_in_h0(A, x, y, f)[0]
    for k in range(C.dim(1)):
        w = [F.one if j == k else F.zero for j in range(C.dim(1))]
        assert is_invertible_in_h0(A, x, y, vec_add(F, f, C.apply_d(1, w)))[0] == verdict


@given(categories())
def test_every_category_maps_to_terminal_by_a_fibration(A):
    ok, report = is_fibration(terminal_functor(A))
    assert ok is True and report["F1"]
