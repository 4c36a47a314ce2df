"""Acceptance criteria, one test each; outcomes are listed in the terminal summary."""

import contextlib
import functools
import io
import os
import random
import time

from conftest import fixture_path

from dgtower.catalog import hand_nonvanishing_instances, massey_problem
from dgtower.cells import bounded_big_model, rlp_batch
from dgtower.cli import main
from dgtower.dgcat import categories_equal, is_fibration, is_quasi_equivalence, validate
from dgtower.exactlin import Field
from dgtower.manifest import emit, manifest_of, parse_text
from dgtower.obstruct import (brute_force_full_lift, brute_force_lift_oracle, factor_through_cover,
                              obstruction_class, rigidify)
from dgtower.postnikov import reconstruct, small_tower, validate_tower
from dgtower.randomgen import random_lifting_problem, random_stage_instance, random_suite
from dgtower.sqzero import verify_fiber_sequence

# pinned sizes and limits
SUITE_SIZE = 210
SUITE_SEED = 1
TOWER_SECONDS = 60.0
BIG_MODEL_INSTANCES = 105
FIBER_INSTANCES = 52
FIBER_SECONDS = 300.0
CAP = 6
ORACLE_PROBLEMS = 100
LIFTING_PROBLEMS = 120
SEED_PAIRS = 20
ROUND_TRIP_CATEGORIES = 60


@functools.lru_cache(maxsize=None)
def suite(count: int, seed: int) -> tuple:
    return tuple(random_suite(count, seed=seed))


def within_suite_bounds(A) -> bool:
    if len(A.objects) > 3 or A.field.descriptor not in ("GF(2)", "GF(5)", "Q"):
        return False
    for x, y in A.pairs():
        C = A.hom(x, y)
        if any(i < 0 or i > 5 or C.dim(i) > 2 for i in C.degrees()):
            return False
    return True


@functools.lru_cache(maxsize=None)
def towers() -> tuple:
    start = time.perf_counter()
    out = []
    for name, A in suite(SUITE_SIZE, SUITE_SEED):
        T = small_tower(A, 5)
        out.append((name, A, T, validate_tower(T)))
    return tuple(out), time.perf_counter() - start


def test_criterion_1_truncation_tower_laws(criterion):
    built, seconds = towers()
    fields = {A.field.descriptor for _, A, _, _ in built}
    bad_bounds = [name for name, A, _, _ in built if not within_suite_bounds(A) or validate(A)]
    failures = [name for name, _, _, rep in built if not rep["ok"]]
    fibrations = sum(1 for *_, rep in built for t in rep["transitions"] if t["fibration"] is True)
    passed = (len(built) >= 200 and not bad_bounds and not failures and seconds < TOWER_SECONDS
              and fields == {"GF(2)", "GF(5)", "Q"})
    criterion(1, "truncation tower laws", passed,
              f"{len(built)} categories, {fibrations} fibrations, {len(failures)} failures, {seconds:.1f}s")
    assert not bad_bounds, bad_bounds[:5]
    assert not failures, failures[:5]
    assert seconds < TOWER_SECONDS
    assert passed


def test_criterion_2_reconstruction(criterion):
    built, _ = towers()
    failures = []
    for name, A, T, _ in built:
        L, rep = reconstruct(T)
        if not rep["isomorphism"] or not rep["bijective"] or rep["problems"]:
            failures.append(name)
    passed = not failures and len(built) >= 200
    criterion(2, "reconstruction is an exact isomorphism", passed, f"{len(built)} categories, {len(failures)} failures")
    assert not failures, failures[:5]


def test_criterion_3_bounded_big_model(criterion):
    failures = []
    count = 0
    for name, A in suite(BIG_MODEL_INSTANCES, 2):
        count += 1
        for n in (0, 1, 2):
            M = bounded_big_model(A, n, CAP)
            ok = True
            for x, y in A.pairs():
                H, HA = M.category.hom(x, y).homology(), A.hom(x, y).homology()
                ok = ok and all(H.dim(i) == HA.dim(i) for i in range(n + 1))
                ok = ok and all(H.dim(i) == 0 for i in range(n + 1, CAP))
            ok = ok and is_fibration(M.comparison)[0] is True
            ok = ok and is_quasi_equivalence(M.comparison, range(CAP))[0] is True
            ok = ok and all(rlp_batch(M.comparison, m)[0] for m in range(n + 2, CAP - 1))
            if not ok:
                failures.append((name, n))
    passed = count >= 100 and not failures
    criterion(3, "bounded big model", passed, f"{count} categories x 3 stages, {len(failures)} failures")
    assert not failures, failures[:5]
    assert passed


def test_criterion_4_fiber_sequence(criterion):
    start = time.perf_counter()
    failures = []
    count = 0
    for name, A in suite(FIBER_INSTANCES, 3):
        count += 1
        for n in (0, 1):
            if not verify_fiber_sequence(A, n, CAP)["ok"]:
                failures.append((name, n))
    seconds = time.perf_counter() - start
    passed = count >= 50 and not failures and seconds < FIBER_SECONDS
    criterion(4, "fiber sequence", passed, f"{count} categories x 2 stages, {len(failures)} failures, {seconds:.1f}s")
    assert not failures, failures[:5]
    assert passed


@functools.lru_cache(maxsize=None)
def oracle_instances() -> tuple:
    """In-budget stage instances over GF(2) with at most two generators."""
    F = Field.prime(2)
    rng = random.Random(5)
    out = []
    while len(out) < ORACLE_PROBLEMS:
        inst = random_stage_instance(F, rng)
        if inst is None:
            continue
        P, n, Fn = inst
        orc = brute_force_lift_oracle(P, n, Fn)
        if orc.available and len(P.source.generators) <= 2:
            out.append((f"random#{len(out)}", P, n, Fn, orc))
    return tuple(out)


def test_criterion_5_obstruction_biconditional(criterion):
    cases = list(oracle_instances())
    for name, P, n, Fn in hand_nonvanishing_instances(Field.prime(2)):
        cases.append((name, P, n, Fn, brute_force_lift_oracle(P, n, Fn)))
    disagreements = []
    hand_nonvanishing = 0
    nonvanishing = 0
    for name, P, n, Fn, orc in cases:
        assert orc.available, name
        oc = obstruction_class(P, n, Fn)
        if oc.vanishes != orc.exists:
            disagreements.append(name)
        if not oc.vanishes:
            nonvanishing += 1
            if not name.startswith("random#"):
                hand_nonvanishing += 1
    passed = len(cases) >= 100 and not disagreements and hand_nonvanishing >= 5
    criterion(5, "obstruction biconditional", passed,
              f"{len(cases)} problems, {nonvanishing} non-vanishing ({hand_nonvanishing} by hand), "
              f"{len(disagreements)} disagreements")
    assert not disagreements, disagreements
    assert passed


def test_criterion_6_rigidification(criterion):
    F = Field.prime(2)
    rng = random.Random(6)
    liftable = 0
    failures = []
    for k in range(LIFTING_PROBLEMS):
        P = random_lifting_problem(F, rng)
        if P is None:
            continue
        orc = brute_force_full_lift(P)
        if not (orc.available and orc.exists):
            continue
        liftable += 1
        res = rigidify(P)
        G = factor_through_cover(P, res.functor) if res.lifted else None
        if G is None or not G.then(P.tower.sections[0]).same_images(P.F0) or res.functor.problems():
            failures.append(k)
    massey = rigidify(massey_problem(F))
    massey_ok = massey.status == "obstructed" and massey.failure.stage == 0
    passed = liftable >= 50 and not failures and massey_ok
    criterion(6, "end-to-end rigidification", passed,
              f"{liftable} liftable problems, {len(failures)} failures, massey {massey.status}")
    assert not failures, failures
    assert massey_ok
    assert passed


def test_criterion_7_lift_independence(criterion):
    cases = [(name, P, n, Fn) for name, P, n, Fn, _ in oracle_instances()[:SEED_PAIRS - 7]]
    cases += hand_nonvanishing_instances(Field.prime(2))
    mismatches = [name for name, P, n, Fn in cases
                  if obstruction_class(P, n, Fn, seed=11).verdict != obstruction_class(P, n, Fn, seed=29).verdict]
    passed = len(cases) >= SEED_PAIRS and not mismatches
    criterion(7, "lift independence", passed, f"{len(cases)} instances, {len(mismatches)} mismatches")
    assert not mismatches, mismatches
    assert passed


def golden_run(fixture, args) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([args[0], fixture_path(fixture), *args[1:]])
    return f"exit {code}\n{buf.getvalue()}"


def test_criterion_8_serialization(criterion):
    from test_cli import MAKE
    from test_manifest import FIXTURES

    trips = 0
    broken = []
    for name in FIXTURES:
        with open(fixture_path(name), encoding="utf-8") as fh:
            text = fh.read()
        trips += 1
        if emit(parse_text(text)) != text:
            broken.append(name)
    for name, A in suite(ROUND_TRIP_CATEGORIES, 8):
        trips += 1
        text = emit(manifest_of(A))
        if not categories_equal(parse_text(text).category(), A) or emit(parse_text(text)) != text:
            broken.append(name)
    unstable = []
    for fixture, args, golden in MAKE.GOLDEN:
        with open(fixture_path(os.path.join("golden", f"{golden}.txt")), encoding="utf-8") as fh:
            expected = fh.read()
        first, second = golden_run(fixture, args), golden_run(fixture, args)
        if not (first == second == expected):
            unstable.append(golden)
    passed = not broken and not unstable
    criterion(8, "serialization", passed,
              f"{trips} round trips, {len(MAKE.GOLDEN)} golden reports, {len(broken) + len(unstable)} mismatches")
    assert not broken, broken
    assert not unstable, unstable
