import pytest
from hypothesis import given
from strategies import categories

from dgtower.catalog import truncated_polynomial
from dgtower.cells import bounded_big_model, cell_category
from dgtower.complexes import ChainMap
from dgtower.dgcat import DgFunctor, categories_equal, category_from_labels, h0
from dgtower.exactlin import Matrix, is_injective, is_surjective
from dgtower.postnikov import Tower, TowerError, reconstruct, small_tower, validate_tower


def degree_zero_category(F):
    return category_from_labels(F, ["a", "b"], {("a", "a"): {0: ["ida"]}, ("b", "b"): {0: ["idb"]},
                                                ("a", "b"): {0: ["f", "g"]}}, {},
                                {("ida", "ida"): {"ida": 1}, ("idb", "idb"): {"idb": 1},
                                 ("idb", "f"): {"f": 1}, ("idb", "g"): {"g": 1},
                                 ("f", "ida"): {"f": 1}, ("g", "ida"): {"g": 1}},
                                {"a": {"ida": 1}, "b": {"idb": 1}})


def test_degree_zero_tower_is_constant(field):
    A = degree_zero_category(field)
    T = small_tower(A, 3)
    assert all(categories_equal(S, A) for S in T.stages)
    L, rep = reconstruct(T)
    assert rep["isomorphism"] and categories_equal(L, A)


def test_acyclic_cone_dies_at_stage_zero(Q):
    T = small_tower(cell_category("D", 1, Q))
    assert T.stages[0].hom("3", "4").is_zero()


def test_stage_zero_is_h0(field):
    A = truncated_polynomial(field, 4)
    assert categories_equal(small_tower(A).stages[0], h0(A)[0])


def test_small_tower_passes(field):
    report = validate_tower(small_tower(truncated_polynomial(field, 4)))
    assert report["ok"]
    assert [s["stage"] for s in report["stages"]] == [0, 1, 2, 3]


def test_tampered_section_fails_a1_at_stage_one(Q):
    T = small_tower(truncated_polynomial(Q, 3))
    S1, P1 = T.stages[1], T.sections[1]
    maps = dict(P1.maps)
    C = T.base.hom("o", "o")
    maps[("o", "o")] = ChainMap(C, S1.hom("o", "o"), {0: P1.maps[("o", "o")].at(0),
                                                      1: Matrix.zeros(Q, 1, 1)})
    sections = list(T.sections)
    sections[1] = DgFunctor(T.base, S1, P1.obj_map, maps)
    report = validate_tower(Tower(T.base, T.stages, sections, T.transitions, T.cap))
    assert not report["ok"]
    assert report["stages"][0]["A1"] and not report["stages"][1]["A1"]


def test_big_model_tower_passes_in_window(Q):
    A = truncated_polynomial(Q, 4)
    for n in range(3):
        M = bounded_big_model(A, n, 6)
        S = M.category
        for i in range(n + 1):
            assert S.hom("o", "o").homology().dim(i) == A.hom("o", "o").homology().dim(i)
        assert all(S.hom("o", "o").homology().dim(i) == 0 for i in range(n + 1, 6))


def test_reconstruct_exact_with_spare_cap(field):
    A = truncated_polynomial(field, 4)
    assert A.max_degree() == 3
    L, rep = reconstruct(small_tower(A, 4))
    assert rep["isomorphism"] and rep["bijective"] and not rep["problems"]


def test_reconstruct_rejects_short_tower(Q):
    with pytest.raises(TowerError):
        reconstruct(small_tower(truncated_polynomial(Q, 4), 2))


@given(categories())
def test_tower_laws(A):
    report = validate_tower(small_tower(A, 5))
    assert report["ok"], report


@given(categories())
def test_transitions_induce_h0_isomorphisms(A):
    T = small_tower(A, 5)
    for t in T.transitions:
        for m in t.maps.values():
            H = m.induced(0)
            assert is_injective(H) and is_surjective(H)


@given(categories())
def test_reconstruct_is_isomorphism(A):
    L, rep = reconstruct(small_tower(A, 5))
    assert rep["isomorphism"], rep["problems"][:3]
