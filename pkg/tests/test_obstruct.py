import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgtower.catalog import (hand_nonvanishing_instances, massey_liftable_problem, massey_problem, power_instance,
                             truncated_polynomial)
from dgtower.cells import cell_category
from dgtower.dgcat import category_from_labels
from dgtower.exactlin import Field
from dgtower.obstruct import (Generator, GeneratorDerivation, LiftingProblem, ObstructionError, SemiFreeCategory,
                              SemiFreeFunctor, brute_force_full_lift, brute_force_lift_oracle, coboundary_values,
                              factor_through_cover, iter_stage_functors, lift_over_trivial_fibration,
                              obstruction_class, oracle_budget, rigidify, stage_lift, stage_model, vanishing_test)
from dgtower.randomgen import random_lifting_problem, random_stage_instance

FINITE = [Field.prime(2), Field.prime(3)]


def one_generator_problem(F, A, x, y, image):
    B = SemiFreeCategory(F, ["s", "t"], [Generator("g", "s", "t", 0)])
    return LiftingProblem.build(A, B, {"s": x, "t": y}, {"g": image})


@st.composite
def stage_instances(draw, fields=FINITE):
    F = draw(st.sampled_from(fields))
    inst = random_stage_instance(F, random.Random(draw(st.integers(0, 10**6))))
    if inst is None:
        return None
    return inst


def test_semi_free_signs_and_checks(Q):
    B = SemiFreeCategory(Q, ["o"], [Generator("a", "o", "o", 1), Generator("b", "o", "o", 1)])
    assert B.d_word(("a", "b")) == {}
    B = SemiFreeCategory(Q, ["o"], [Generator("x", "o", "o", 1), Generator("y", "o", "o", 3)], {"y": {("x", "x"): 1}})
    # d(y x) = d(y) x, d(x y) = -x d(y) since |x| is odd
    assert B.d_word(("y", "x")) == {("x", "x", "x"): 1}
    assert B.d_word(("x", "y")) == {("x", "x", "x"): -1}
    with pytest.raises(ObstructionError):
        SemiFreeCategory(Q, ["o"], [Generator("u", "o", "o", 1), Generator("v", "o", "o", 0)], {"u": {("w",): 1}})
    with pytest.raises(ObstructionError):
        SemiFreeCategory(Q, ["o"], [Generator("u", "o", "o", 1), Generator("v", "o", "o", 0)], {"u": {("v",): 1}})
    with pytest.raises(ObstructionError):
        SemiFreeCategory(Q, ["o"], [Generator("u", "o", "o", 1), Generator("v", "o", "o", 2)],
                         {"u": {(): 1}, "v": {("u",): 1}})


def test_degree_zero_generator_lifts_as_a_preimage(field):
    A = truncated_polynomial(field, 3)
    P = one_generator_problem(field, A, "o", "o", [field.one])
    sm = stage_model(P, 0)
    lift = lift_over_trivial_fibration(P.F0, sm)
    assert lift.then(sm.model.comparison).same_images(P.F0)
    oc = obstruction_class(P, 0, P.F0)
    assert oc.vanishes and oc.derivation.is_zero()
    res = rigidify(P)
    assert res.status == "lifted"
    assert res.functor.images["g"] == A.identity("o")


def test_no_homology_above_means_vanishing(field):
    A = cell_category("D", 2, field)
    B = SemiFreeCategory(field, ["s", "t"], [Generator("g", "s", "t", 1), Generator("h", "s", "t", 2)],
                         {"h": {("g",): 1}})
    P = LiftingProblem.build(A, B, {"s": "3", "t": "4"}, {})
    for n, Fn in iter_stage_functors(P, P.cap):
        if n < P.cap:
            oc = obstruction_class(P, n, Fn)
            assert oc.vanishes
            assert stage_lift(P, n, Fn, oc) is not None


@pytest.mark.parametrize("e,j", [(1, 2), (1, 3), (2, 2)])
def test_power_instances_are_obstructed(e, j):
    F = Field.prime(2)
    P, n, Fn = power_instance(F, e, j)
    oc = obstruction_class(P, n, Fn)
    assert not oc.vanishes
    assert oc.values_by_label() == {"g": {"class0": 1}}
    assert stage_lift(P, n, Fn, oc) is None
    cert = oc.witness.certificate
    assert cert is not None
    orc = brute_force_lift_oracle(P, n, Fn)
    assert orc.available and orc.exists is False


def test_vanishing_test_examples(F2):
    P, n, Fn = power_instance(F2, 1, 2)
    oc = obstruction_class(P, n, Fn)
    Dv = oc.derivation
    zero = GeneratorDerivation(Dv.source, n, Dv.base, Dv.lift, {})
    res = vanishing_test(zero)
    assert res.vanishes and all(not any(v) for v in res.H.values())
    # g has degree n+2, nothing of degree n+1 exists: any nonzero value is forced
    assert not vanishing_test(Dv).vanishes


@given(stage_instances())
def test_coboundaries_vanish(inst):
    if inst is None:
        return
    P, n, Fn = inst
    oc = obstruction_class(P, n, Fn)
    Dv = oc.derivation
    F = Dv.source.field
    rng = random.Random(n)
    H = {}
    for h in Dv.source.generators_of_degree(n + 1):
        H[h.label] = [F.random(rng) for _ in range(Dv.homology(h.source, h.target).dim(n + 1))]
    values = coboundary_values(Dv, H)
    cob = GeneratorDerivation(Dv.source, n, Dv.base, Dv.lift, values)
    res = vanishing_test(cob)
    assert res.vanishes
    assert coboundary_values(Dv, res.H) == values


@given(stage_instances())
def test_certificates_prove_failure(inst):
    if inst is None:
        return
    P, n, Fn = inst
    oc = obstruction_class(P, n, Fn)
    if oc.vanishes:
        return
    res = oc.witness
    F = P.source.field
    y = res.certificate
    rhs = [oc.derivation.values[g.label][k] for g in P.source.generators_of_degree(n + 2)
           for k in range(oc.derivation.homology(g.source, g.target).dim(n + 1))]
    assert not any(res.system.T.apply(y))
    pairing = F.zero
    for a, b in zip(y, rhs):
        pairing = F.add(pairing, F.mul(a, b))
    assert pairing


@given(stage_instances())
def test_verdict_matches_oracle(inst):
    if inst is None:
        return
    P, n, Fn = inst
    oc = obstruction_class(P, n, Fn)
    orc = brute_force_lift_oracle(P, n, Fn)
    if orc.available:
        assert oc.vanishes == orc.exists


@given(stage_instances(), st.integers(0, 1000), st.integers(0, 1000))
def test_verdict_independent_of_lift(inst, s1, s2):
    if inst is None:
        return
    P, n, Fn = inst
    assert obstruction_class(P, n, Fn, seed=s1).verdict == obstruction_class(P, n, Fn, seed=s2).verdict


@given(stage_instances())
def test_stage_lift_covers_previous_stage(inst):
    if inst is None:
        return
    P, n, Fn = inst
    oc = obstruction_class(P, n, Fn)
    Fn1 = stage_lift(P, n, Fn, oc)
    if oc.vanishes:
        assert not Fn1.problems()
        assert Fn1.then(P.tower.transitions[n]).same_images(Fn)
    else:
        assert Fn1 is None


@given(st.sampled_from(FINITE), st.integers(0, 10**6))
def test_rigidify_agrees_with_full_oracle(F, seed):
    P = random_lifting_problem(F, random.Random(seed))
    if P is None:
        return
    orc = brute_force_full_lift(P)
    res = rigidify(P)
    if orc.available and orc.exists:
        assert res.status == "lifted"
    if res.lifted:
        G = factor_through_cover(P, res.functor)
        assert G is not None
        assert G.then(P.tower.sections[0]).same_images(P.F0)
        if orc.available:
            assert orc.exists


def test_rigidify_degree_zero_target(field):
    A = category_from_labels(field, ["a", "b"], {("a", "a"): {0: ["ida"]}, ("b", "b"): {0: ["idb"]},
                                                 ("a", "b"): {0: ["f"]}}, {},
                             {("ida", "ida"): {"ida": 1}, ("idb", "idb"): {"idb": 1}, ("idb", "f"): {"f": 1},
                              ("f", "ida"): {"f": 1}}, {"a": {"ida": 1}, "b": {"idb": 1}})
    P = one_generator_problem(field, A, "a", "b", [field(2)])
    res = rigidify(P)
    assert res.status == "lifted" and res.functor.images == P.F0.images


def test_massey_problems(field):
    res = rigidify(massey_problem(field))
    assert res.status == "obstructed"
    assert res.failure.stage == 0
    assert res.failure.values_by_label()["g"]
    assert rigidify(massey_liftable_problem(field)).status == "lifted"


def test_massey_has_no_strict_lift(F2):
    orc = brute_force_full_lift(massey_problem(F2))
    assert orc.available and orc.exists is False


def test_hand_instances(F2):
    names = []
    for name, P, n, Fn in hand_nonvanishing_instances(F2):
        oc = obstruction_class(P, n, Fn)
        orc = brute_force_lift_oracle(P, n, Fn)
        assert not oc.vanishes and orc.available and orc.exists is False, name
        names.append(name)
    assert len(names) >= 5


def single_fiber_instance():
    F = Field.prime(3)
    A = truncated_polynomial(F, 2)
    B = SemiFreeCategory(F, ["b"], [Generator("g", "b", "b", 1)])
    P = LiftingProblem.build(A, B, {"b": "o"}, {})
    return P, SemiFreeFunctor(B, P.stage(0), {"b": "o"}, {})


def test_oracle_counts_a_single_fiber():
    P, Fn = single_fiber_instance()
    orc = brute_force_lift_oracle(P, 0, Fn)
    assert orc.available and orc.exists
    assert orc.search_space == 3


def test_oracle_budget(monkeypatch):
    monkeypatch.setenv("DGTOWER_ORACLE_BUDGET", "2")
    assert oracle_budget() == 2
    P, Fn = single_fiber_instance()
    assert not brute_force_lift_oracle(P, 0, Fn).available
    monkeypatch.setenv("DGTOWER_ORACLE_BUDGET", "lots")
    with pytest.raises(ObstructionError):
        oracle_budget()


def test_rationals_have_no_oracle(Q):
    P, n, Fn = power_instance(Q, 1, 2)
    assert not brute_force_lift_oracle(P, n, Fn).available
    assert not obstruction_class(P, n, Fn).vanishes
