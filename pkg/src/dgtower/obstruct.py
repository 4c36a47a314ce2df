"""Obstruction classes for lifting functors out of semi-free sources through the tower."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from .cells import BoundedBigModel, bounded_big_model
from .dgcat import (
    DgCategory,
    DgFunctor,
    connective_cover,
    is_connective,
    is_positively_graded,
)
from .exactlin import (
    Field,
    Matrix,
    enumerate_space,
    inconsistency_certificate,
    kernel_basis,
    solve,
    vec_axpy,
)
from .postnikov import Tower, small_tower
from .sqzero import gamma

DEFAULT_ORACLE_BUDGET = 2 ** 16


class ObstructionError(ValueError):
    pass


def oracle_budget() -> int:
    """Search budget for brute-force oracles, overridable by ``DGTOWER_ORACLE_BUDGET``."""
    raw = os.environ.get("DGTOWER_ORACLE_BUDGET")
    if raw is None:
        return DEFAULT_ORACLE_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ObstructionError(f"DGTOWER_ORACLE_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ObstructionError("DGTOWER_ORACLE_BUDGET must be positive")
    return value


# ----------------------------------------------------------------------
# semi-free sources


Word = tuple  # generator labels, leftmost factor first
Poly = Mapping[Word, object]


@dataclass(frozen=True)
class Generator:
    label: str
    source: str
    target: str
    degree: int


class SemiFreeCategory:
    """Free on graded generators; ``d`` of a generator uses earlier generators only.

    Words are tuples of generator labels read as a composite, leftmost last
    applied. The empty word stands for the identity of the hom's source.
    """

    def __init__(self, field: Field, objects: Sequence[str], generators: Sequence[Generator],
                 differential: Mapping[str, Poly] | None = None, name: str = "B"):
        self.field = field
        self.objects = list(objects)
        self.generators = list(generators)
        self.name = name
        self.gen = {}
        for g in self.generators:
            if g.label in self.gen:
                raise ObstructionError(f"duplicate generator {g.label}")
            if g.source not in self.objects or g.target not in self.objects:
                raise ObstructionError(f"generator {g.label} has an unknown endpoint")
            if g.degree < 0:
                raise ObstructionError(f"generator {g.label} has negative degree")
            self.gen[g.label] = g
        differential = differential or {}
        for lab in differential:
            if lab not in self.gen:
                raise ObstructionError(f"differential given for unknown generator {lab}")
        self.d = {}
        order = {g.label: k for k, g in enumerate(self.generators)}
        for g in self.generators:
            poly = {}
            for w, c in differential.get(g.label, {}).items():
                w = tuple(w)
                c = field(c)
                if not c:
                    continue
                for lab in w:
                    if lab not in self.gen:
                        raise ObstructionError(f"d({g.label}) uses unknown generator {lab}")
                    if order[lab] >= order[g.label]:
                        raise ObstructionError(f"d({g.label}) uses {lab}, which is not an earlier generator")
                self._check_word(w, g.source, g.target, g.degree - 1, f"d({g.label})")
                poly[w] = field.add(poly.get(w, field.zero), c)
            self.d[g.label] = {w: c for w, c in poly.items() if c}
        for g in self.generators:
            dd = self.d_poly(self.d[g.label])
            if dd:
                raise ObstructionError(f"d(d({g.label})) is not zero")

    def word_degree(self, w: Word) -> int:
        return sum(self.gen[lab].degree for lab in w)

    def _check_word(self, w: Word, s: str, t: str, deg: int, where: str) -> None:
        if not w:
            if s != t:
                raise ObstructionError(f"{where}: identity word between different objects")
        else:
            if self.gen[w[-1]].source != s or self.gen[w[0]].target != t:
                raise ObstructionError(f"{where}: word {'*'.join(w)} has the wrong endpoints")
            for a, b in zip(w, w[1:]):
                if self.gen[a].source != self.gen[b].target:
                    raise ObstructionError(f"{where}: word {'*'.join(w)} is not composable")
        if self.word_degree(w) != deg:
            raise ObstructionError(f"{where}: word {'*'.join(w) or 'id'} has degree {self.word_degree(w)}, expected {deg}")

    def d_word(self, w: Word) -> dict:
        F = self.field
        out: dict = {}
        sign_deg = 0
        for j, lab in enumerate(w):
            sgn = F.one if sign_deg % 2 == 0 else F.neg(F.one)
            for u, c in self.d[lab].items():
                key = w[:j] + u + w[j + 1:]
                out[key] = F.add(out.get(key, F.zero), F.mul(sgn, c))
            sign_deg += self.gen[lab].degree
        return {k: c for k, c in out.items() if c}

    def d_poly(self, poly: Poly) -> dict:
        F = self.field
        out: dict = {}
        for w, c in poly.items():
            for u, e in self.d_word(w).items():
                out[u] = F.add(out.get(u, F.zero), F.mul(c, e))
        return {k: c for k, c in out.items() if c}

    def generators_of_degree(self, k: int) -> list[Generator]:
        return [g for g in self.generators if g.degree == k]

    @property
    def max_generator_degree(self) -> int:
        return max((g.degree for g in self.generators), default=0)


class SemiFreeFunctor:
    """A dg functor out of a semi-free category, given on generators."""

    def __init__(self, source: SemiFreeCategory, target: DgCategory, obj_map: Mapping[str, str],
                 images: Mapping[str, Sequence]):
        self.source = source
        self.target = target
        self.obj_map = dict(obj_map)
        for x in source.objects:
            if x not in self.obj_map:
                raise ObstructionError(f"object {x} has no image")
            if self.obj_map[x] not in target.objects:
                raise ObstructionError(f"object {x} maps to unknown object {self.obj_map[x]}")
        F = source.field
        self.images = {}
        for g in source.generators:
            n = target.hom(self.obj_map[g.source], self.obj_map[g.target]).dim(g.degree)
            v = [F(c) for c in images.get(g.label, [F.zero] * n)]
            if len(v) != n:
                raise ObstructionError(f"image of {g.label} has length {len(v)}, expected {n}")
            self.images[g.label] = v

    def __call__(self, x: str) -> str:
        return self.obj_map[x]

    def hom_of(self, g: Generator):
        return self.target.hom(self.obj_map[g.source], self.obj_map[g.target])

    def eval_word(self, w: Word, s: str, t: str) -> list:
        A = self.target
        F = A.field
        B = self.source
        deg = B.word_degree(w)
        if not w:
            return list(A.ident[self.obj_map[s]])
        out_dim = A.hom(self.obj_map[s], self.obj_map[t]).dim(deg)
        if out_dim == 0:
            return []
        g = B.gen[w[-1]]
        acc = list(self.images[g.label])
        cur_deg = g.degree
        x = self.obj_map[g.source]
        y = self.obj_map[g.target]
        for lab in reversed(w[:-1]):
            h = B.gen[lab]
            z = self.obj_map[h.target]
            if A.hom(x, z).dim(cur_deg + h.degree) == 0:
                return [F.zero] * out_dim
            acc = A.compose(x, y, z, h.degree, self.images[lab], cur_deg, acc)
            cur_deg += h.degree
            y = z
        return acc

    def eval_poly(self, poly: Poly, s: str, t: str, deg: int) -> list:
        F = self.source.field
        out = [F.zero] * self.target.hom(self.obj_map[s], self.obj_map[t]).dim(deg)
        if not out:
            return out
        for w, c in poly.items():
            vec_axpy(F, out, c, self.eval_word(w, s, t))
        return out

    def problems(self, max_degree: int | None = None) -> list[str]:
        out = []
        for g in self.source.generators:
            if max_degree is not None and g.degree > max_degree:
                continue
            C = self.hom_of(g)
            lhs = C.apply_d(g.degree, self.images[g.label]) if C.dim(g.degree - 1) else []
            rhs = self.eval_poly(self.source.d[g.label], g.source, g.target, g.degree - 1)
            if lhs != rhs:
                out.append(f"d F({g.label}) != F(d {g.label})")
        return out

    def then(self, G: DgFunctor) -> "SemiFreeFunctor":
        images = {}
        for g in self.source.generators:
            x, y = self.obj_map[g.source], self.obj_map[g.target]
            images[g.label] = G.apply(x, y, g.degree, self.images[g.label])
        return SemiFreeFunctor(self.source, G.target, {x: G(self.obj_map[x]) for x in self.source.objects}, images)

    def same_images(self, other: "SemiFreeFunctor") -> bool:
        return self.obj_map == other.obj_map and self.images == other.images


# ----------------------------------------------------------------------
# lifting problems


@dataclass
class LiftingProblem:
    """Lift ``F0: B -> H0(A)`` to ``B -> A``."""
    target: DgCategory
    source: SemiFreeCategory
    F0: SemiFreeFunctor
    tower: Tower = None
    cover_inclusion: DgFunctor | None = None

    @classmethod
    def build(cls, target: DgCategory, source: SemiFreeCategory, obj_map: Mapping[str, str],
              images0: Mapping[str, Sequence], cap: int | None = None) -> "LiftingProblem":
        cover_inclusion = None
        base = target
        if not is_positively_graded(target):
            if not is_connective(target):
                raise ObstructionError("target must be connective")
            base, cover_inclusion = connective_cover(target)
        if cap is not None and cap < base.max_degree():
            raise ObstructionError(f"cap {cap} is below the top degree {base.max_degree()} of the target")
        tower = small_tower(base, cap)
        F0 = SemiFreeFunctor(source, tower.stages[0], obj_map, images0)
        bad = F0.problems()
        if bad:
            raise ObstructionError(f"F0 is not a dg functor: {bad[0]}")
        return cls(target, source, F0, tower, cover_inclusion)

    @property
    def base(self) -> DgCategory:
        return self.tower.base

    @property
    def cap(self) -> int:
        return self.tower.cap

    def stage(self, n: int) -> DgCategory:
        return self.tower.stages[n]


def _check_stage(P: LiftingProblem, n: int, Fn: SemiFreeFunctor) -> None:
    if n < 0 or n >= P.cap:
        raise ObstructionError(f"stage {n} is outside 0..{P.cap - 1}")
    if Fn.target is not P.stage(n):
        raise ObstructionError(f"functor does not land in stage {n}")


# ----------------------------------------------------------------------
# stage data


@dataclass
class StageModel:
    """The capped model used at stage ``n``: built over the stage-(n+2) truncation."""
    n: int
    base: DgCategory
    model: BoundedBigModel


def stage_model(P: LiftingProblem, n: int) -> StageModel:
    base = P.stage(min(n + 2, P.cap))
    return StageModel(n, base, bounded_big_model(base, n, n + 2))


def lift_over_trivial_fibration(Fn: SemiFreeFunctor, sm: StageModel, seed: int | None = None) -> SemiFreeFunctor:
    """Lift ``Fn: B -> P_n`` through the comparison from the capped model.

    Generators above the cap are left at zero and are not part of the lift.
    With a seed, each value is shifted by a random element of the fiber cycles.
    """
    B = Fn.source
    Pm = sm.model.category
    Mn = sm.model.comparison
    F = B.field
    rng = random.Random(seed) if seed is not None else None
    cap = sm.model.cap
    images: dict = {}
    partial = SemiFreeFunctor(B, Pm, Fn.obj_map, {})
    for g in B.generators:
        if g.degree > cap:
            continue
        x, y = Fn(g.source), Fn(g.target)
        C = Pm.hom(x, y)
        k = g.degree
        if C.dim(k) == 0:
            partial.images[g.label] = []
            continue
        rhs_d = partial.eval_poly(B.d[g.label], g.source, g.target, k - 1)
        rows_d = C.d(k) if C.dim(k - 1) else Matrix.zeros(F, 0, C.dim(k))
        Mk = Mn.maps[(x, y)].at(k) if Mn.target.hom(x, y).dim(k) else Matrix.zeros(F, 0, C.dim(k))
        system = Matrix.vstack(F, C.dim(k), [rows_d, Mk])
        rhs = list(rhs_d) + list(Fn.images[g.label])
        sol = solve(system, rhs)
        if sol is None:
            raise ObstructionError(f"no lift of {g.label} through the trivial fibration; inputs violate preconditions")
        if rng is not None:
            for v in kernel_basis(system):
                vec_axpy(F, sol, F.random(rng), v)
        partial.images[g.label] = sol
        images[g.label] = sol
    return partial


# ----------------------------------------------------------------------
# obstruction classes


class GeneratorDerivation:
    """A derivation of ``B`` into ``H_{n+1}(A)[n+2]`` given by its values on generators.

    Only generators of degree ``n+2`` carry values. ``lift`` supplies the
    degree-0 images through which the bimodule acts.
    """

    def __init__(self, source: SemiFreeCategory, n: int, base: DgCategory, lift: SemiFreeFunctor,
                 values: Mapping[str, Sequence]):
        self.source = source
        self.n = n
        self.base = base
        self.lift = lift
        F = source.field
        self.values = {}
        for g in source.generators_of_degree(n + 2):
            dim = self.homology(g.source, g.target).dim(n + 1)
            v = [F(c) for c in values.get(g.label, [F.zero] * dim)]
            if len(v) != dim:
                raise ObstructionError(f"value on {g.label} has length {len(v)}, expected {dim}")
            self.values[g.label] = v

    def homology(self, s: str, t: str):
        return self.base.hom(self.lift(s), self.lift(t)).homology()

    def is_zero(self) -> bool:
        return all(not any(v) for v in self.values.values())

    def _act(self, w: Word, j: int, s: str, t: str, rep: Sequence) -> list:
        """Class of ``L * rep * R`` where factor ``j`` of the degree-0 word context is replaced by ``rep``."""
        B = self.source
        A = self.base
        G = self.lift
        gj = B.gen[w[j]]
        left, right = w[:j], w[j + 1:]
        vec = list(rep)
        x, y, z = G(s), G(gj.source), G(gj.target)
        if right:
            vec = A.compose(x, y, z, self.n + 1, vec, 0, G.eval_word(right, s, gj.source))
        if left:
            vec = A.compose(x, z, G(t), 0, G.eval_word(left, gj.target, t), self.n + 1, vec)
        return self.homology(s, t).classify(self.n + 1, vec)

    def _rep(self, g: Generator, coeffs: Sequence) -> list:
        F = self.source.field
        H = self.homology(g.source, g.target)
        rep = [F.zero] * self.base.hom(self.lift(g.source), self.lift(g.target)).dim(self.n + 1)
        for k, c in enumerate(coeffs):
            if c:
                vec_axpy(F, rep, c, H.rep(self.n + 1, k))
        return rep

    def evaluate(self, w: Word, s: str, t: str) -> list:
        """Leibniz extension to a word of degree ``n+2``; other factors act through degree 0."""
        B = self.source
        F = B.field
        out = [F.zero] * self.homology(s, t).dim(self.n + 1)
        if B.word_degree(w) != self.n + 2:
            return out
        for j, lab in enumerate(w):
            g = B.gen[lab]
            if g.degree == self.n + 2:
                vec_axpy(F, out, F.one, self._act(w, j, s, t, self._rep(g, self.values[lab])))
        return out


def coboundary_values(template: GeneratorDerivation, H: Mapping[str, Sequence]) -> dict:
    """Values ``H(d g)`` on degree-(n+2) generators for ``H`` given on degree-(n+1) generators."""
    B = template.source
    F = B.field
    n = template.n
    out = {}
    for g in B.generators_of_degree(n + 2):
        dim = template.homology(g.source, g.target).dim(n + 1)
        val = [F.zero] * dim
        for w, c in B.d[g.label].items():
            for j, lab in enumerate(w):
                if B.gen[lab].degree != n + 1 or lab not in H:
                    continue
                rep = template._rep(B.gen[lab], H[lab])
                vec_axpy(F, val, c, template._act(w, j, g.source, g.target, rep))
        out[g.label] = val
    return out


@dataclass
class VanishingResult:
    vanishes: bool
    H: dict | None = None
    certificate: list | None = None
    system: Matrix | None = None
    unknowns: list = dc_field(default_factory=list)
    kernel: list = dc_field(default_factory=list)


def _coboundary_system(Dv: GeneratorDerivation) -> tuple[Matrix, list, list, list]:
    B = Dv.source
    F = B.field
    n = Dv.n
    unknowns = []  # (generator label, class index)
    for h in B.generators_of_degree(n + 1):
        for k in range(Dv.homology(h.source, h.target).dim(n + 1)):
            unknowns.append((h.label, k))
    rows_meta = []  # (generator label, class index)
    for g in B.generators_of_degree(n + 2):
        for k in range(Dv.homology(g.source, g.target).dim(n + 1)):
            rows_meta.append((g.label, k))
    cols = []
    for lab, k in unknowns:
        h = B.gen[lab]
        dimH = Dv.homology(h.source, h.target).dim(n + 1)
        e = [F.zero] * dimH
        e[k] = F.one
        vals = coboundary_values(Dv, {lab: e})
        cols.append([vals[g][i] for g, i in rows_meta])
    M = Matrix.from_columns(F, cols, len(rows_meta)) if cols else Matrix.zeros(F, len(rows_meta), 0)
    rhs = [Dv.values[g][i] for g, i in rows_meta]
    return M, rhs, unknowns, rows_meta


def vanishing_test(Dv: GeneratorDerivation) -> VanishingResult:
    """Decide whether ``D = H o d`` on generators for some ``H`` on degree-(n+1) generators."""
    B = Dv.source
    F = B.field
    n = Dv.n
    M, rhs, unknowns, _ = _coboundary_system(Dv)
    sol = solve(M, rhs)
    if sol is None:
        return VanishingResult(False, certificate=inconsistency_certificate(M, rhs), system=M, unknowns=unknowns)
    H = {}
    for h in B.generators_of_degree(n + 1):
        H[h.label] = [F.zero] * Dv.homology(h.source, h.target).dim(n + 1)
    for (lab, k), c in zip(unknowns, sol):
        H[lab][k] = c
    return VanishingResult(True, H=H, system=M, unknowns=unknowns, kernel=kernel_basis(M) if unknowns else [])


@dataclass
class ObstructionClass:
    stage: int
    derivation: GeneratorDerivation
    verdict: str  # "vanishes" or "does not vanish"
    witness: VanishingResult
    lift: SemiFreeFunctor
    model: StageModel

    @property
    def vanishes(self) -> bool:
        return self.verdict == "vanishes"

    def values_by_label(self) -> dict:
        out = {}
        for lab, v in self.derivation.values.items():
            g = self.derivation.source.gen[lab]
            H = self.derivation.homology(g.source, g.target)
            out[lab] = {f"class{k}": c for k, c in enumerate(v) if c} if H.dim(self.stage + 1) else {}
        return out


def obstruction_class(P: LiftingProblem, n: int, Fn: SemiFreeFunctor, seed: int | None = None,
                      sm: StageModel | None = None) -> ObstructionClass:
    _check_stage(P, n, Fn)
    sm = sm or stage_model(P, n)
    if sm.n != n:
        raise ObstructionError("stage model was built for another stage")
    lift = lift_over_trivial_fibration(Fn, sm, seed)
    B = P.source
    base = sm.base
    kd = gamma(base, n, sm.model.cap, sm.model)
    values = {}
    for g in B.generators_of_degree(n + 2):
        x, y = lift(g.source), lift(g.target)
        H = base.hom(x, y).homology()
        direct = H.classify(n + 1, lift.eval_poly(B.d[g.label], g.source, g.target, n + 1)) if H.dim(n + 1) else []
        via_gamma = kd.phi(x, y).apply(lift.images[g.label]) if H.dim(n + 1) else []
        if direct != via_gamma:
            raise ObstructionError(f"k-invariant route and boundary route disagree on {g.label}")
        values[g.label] = direct
    # degree-0 images act on the bimodule through the base category
    acting = SemiFreeFunctor(B, base, lift.obj_map,
                             {g.label: lift.images[g.label] for g in B.generators if g.degree <= n + 1})
    Dv = GeneratorDerivation(B, n, base, acting, values)
    res = vanishing_test(Dv)
    return ObstructionClass(n, Dv, "vanishes" if res.vanishes else "does not vanish", res, lift, sm)


def stage_lift(P: LiftingProblem, n: int, Fn: SemiFreeFunctor, oc: ObstructionClass,
               H: Mapping[str, Sequence] | None = None) -> SemiFreeFunctor | None:
    """Lift to stage ``n+1`` using the coboundary witness, or ``None`` when obstructed."""
    if not oc.vanishes:
        return None
    if H is None:
        H = oc.witness.H
    B = P.source
    F = B.field
    target = P.stage(n + 1)
    sec = P.tower.sections[n + 1]
    base = oc.model.base
    images = {}
    for g in B.generators:
        x, y = Fn(g.source), Fn(g.target)
        if g.degree <= n:
            images[g.label] = list(oc.lift.images[g.label])
        elif g.degree == n + 1:
            v = list(oc.lift.images[g.label])
            Hc = base.hom(x, y).homology()
            for k, c in enumerate(H.get(g.label, [])):
                if c:
                    vec_axpy(F, v, F.neg(c), Hc.rep(n + 1, k))
            images[g.label] = sec.apply(x, y, n + 1, v) if target.hom(x, y).dim(n + 1) else []
        else:
            images[g.label] = [F.zero] * target.hom(x, y).dim(g.degree)
    Fn1 = SemiFreeFunctor(B, target, Fn.obj_map, images)
    bad = Fn1.problems()
    if bad:
        raise ObstructionError(f"vanishing verdict but the corrected lift is not a functor: {bad[0]}")
    if not Fn1.then(P.tower.transitions[n]).same_images(Fn):
        raise ObstructionError("corrected lift does not cover the previous stage")
    return Fn1


# ----------------------------------------------------------------------
# rigidification


@dataclass
class RigidifyResult:
    status: str  # "lifted", "obstructed" or "undecided"
    functor: SemiFreeFunctor | None
    stages: list
    log: list
    failure: ObstructionClass | None = None

    @property
    def lifted(self) -> bool:
        return self.status == "lifted"


def _h_choices(oc: ObstructionClass, budget: int):
    """Witness choices: the particular one, then its translates by the kernel over a finite field."""
    res = oc.witness
    yield res.H, True
    F = oc.derivation.source.field
    if not res.kernel:
        return
    if not F.is_finite:
        yield None, False
        return
    count = F.p ** len(res.kernel)
    if count > budget:
        yield None, False
        return
    first = True
    for v in enumerate_space(F, res.kernel, len(res.unknowns)):
        if first:
            first = False
            continue
        H = {lab: list(vals) for lab, vals in res.H.items()}
        for (lab, k), c in zip(res.unknowns, v):
            H[lab][k] = F.add(H[lab][k], c)
        yield H, True


def rigidify(P: LiftingProblem, budget: int | None = None, seed: int | None = None) -> RigidifyResult:
    """Run the stagewise lifting up the tower, backtracking over witness choices."""
    budget = budget if budget is not None else oracle_budget()
    N = P.cap
    log: list = []
    models: dict = {}
    state = {"explored": 0, "exhaustive": True, "first_failure": None}

    def model(n):
        if n not in models:
            models[n] = stage_model(P, n)
        return models[n]

    def go(n, Fn, path):
        if n >= N:
            return path + [Fn]
        oc = obstruction_class(P, n, Fn, seed=seed, sm=model(n))
        log.append({"stage": n, "verdict": oc.verdict, "values": oc.values_by_label()})
        if not oc.vanishes:
            if state["first_failure"] is None:
                state["first_failure"] = oc
            return None
        for H, usable in _h_choices(oc, budget):
            if not usable:
                state["exhaustive"] = False
                break
            state["explored"] += 1
            if state["explored"] > budget:
                state["exhaustive"] = False
                return None
            Fn1 = stage_lift(P, n, Fn, oc, H)
            done = go(n + 1, Fn1, path + [Fn])
            if done is not None:
                return done
        return None

    stages = go(0, P.F0, [])
    if stages is None:
        status = "obstructed" if state["exhaustive"] else "undecided"
        return RigidifyResult(status, None, [], log, state["first_failure"])
    top = stages[-1]
    # the top stage equals the base category, so its images are already lifts
    base = P.base
    images = {g.label: list(top.images[g.label]) for g in P.source.generators}
    F = SemiFreeFunctor(P.source, base, top.obj_map, images)
    if P.cover_inclusion is not None:
        F = F.then(P.cover_inclusion)
    check_final(P, F, stages)
    return RigidifyResult("lifted", F, stages, log)


def check_final(P: LiftingProblem, F: SemiFreeFunctor, stages: Sequence[SemiFreeFunctor]) -> None:
    """The lift is a functor, covers ``F0`` exactly and agrees with every stage."""
    bad = F.problems()
    if bad:
        raise ObstructionError(f"assembled lift is not a functor: {bad[0]}")
    G = factor_through_cover(P, F)
    if G is None:
        raise ObstructionError("assembled lift does not factor through the connective cover")
    for n, Fn in enumerate(stages):
        if not G.then(P.tower.sections[n]).same_images(Fn):
            raise ObstructionError(f"assembled lift disagrees with stage {n}")
    if not G.then(P.tower.sections[0]).same_images(P.F0):
        raise ObstructionError("assembled lift does not cover F0")


def factor_through_cover(P: LiftingProblem, F: SemiFreeFunctor) -> SemiFreeFunctor | None:
    """Express ``F`` as a functor into the tower base (the connective cover), if possible."""
    if P.cover_inclusion is None:
        return F if F.target is P.base else None
    inc = P.cover_inclusion
    images = {}
    for g in P.source.generators:
        x, y = F(g.source), F(g.target)
        m = inc.maps[(x, y)]
        if not P.base.hom(x, y).dim(g.degree):
            if any(F.images[g.label]):
                return None
            images[g.label] = []
            continue
        sol = solve(m.at(g.degree), F.images[g.label])
        if sol is None:
            return None
        images[g.label] = sol
    return SemiFreeFunctor(P.source, P.base, F.obj_map, images)


# ----------------------------------------------------------------------
# brute-force oracles


@dataclass
class OracleResult:
    available: bool
    exists: bool | None
    candidates: int
    search_space: int
    witness: dict | None = None


def _search(source: SemiFreeCategory, target: DgCategory, obj_map, options: Mapping[str, list], budget: int,
            max_degree: int | None = None) -> OracleResult:
    total = 1
    for g in source.generators:
        total *= max(len(options[g.label]), 1)
    if total > budget:
        return OracleResult(False, None, 0, total)
    order = source.generators
    partial = SemiFreeFunctor(source, target, obj_map, {})
    checked = [0]

    def consistent(g):
        if max_degree is not None and g.degree > max_degree:
            return True
        C = partial.hom_of(g)
        lhs = C.apply_d(g.degree, partial.images[g.label]) if C.dim(g.degree - 1) else []
        return lhs == partial.eval_poly(source.d[g.label], g.source, g.target, g.degree - 1)

    def rec(k):
        if k == len(order):
            return True
        g = order[k]
        for v in options[g.label]:
            checked[0] += 1
            partial.images[g.label] = v
            if consistent(g) and rec(k + 1):
                return True
        return False

    found = rec(0)
    return OracleResult(True, found, checked[0], total, dict(partial.images) if found else None)


def _affine_options(F: Field, constraint: Matrix | None, rhs: Sequence | None, dim: int) -> list | None:
    if dim == 0:
        return [[]]
    if constraint is None or constraint.nrows == 0:
        base = [F.zero] * dim
        K = [[F.one if i == j else F.zero for i in range(dim)] for j in range(dim)]
    else:
        base = solve(constraint, rhs)
        if base is None:
            return []
        K = kernel_basis(constraint)
    out = []
    for k in enumerate_space(F, K, dim):
        v = list(base)
        vec_axpy(F, v, F.one, k)
        out.append(v)
    return out


def brute_force_lift_oracle(P: LiftingProblem, n: int, Fn: SemiFreeFunctor, budget: int | None = None) -> OracleResult:
    """Enumerate all stage-(n+1) functors covering ``Fn``; finite fields only."""
    _check_stage(P, n, Fn)
    budget = budget if budget is not None else oracle_budget()
    F = P.source.field
    if not F.is_finite:
        return OracleResult(False, None, 0, 0)
    target = P.stage(n + 1)
    t = P.tower.transitions[n]
    options = {}
    total = 1
    for g in P.source.generators:
        x, y = Fn(g.source), Fn(g.target)
        dim = target.hom(x, y).dim(g.degree)
        lower = P.stage(n).hom(x, y).dim(g.degree)
        # count before enumerating so oversized spaces are never materialized
        free = dim - (lower if dim else 0)
        total *= F.p ** max(free, 0)
        if total > budget:
            return OracleResult(False, None, 0, total)
        cons = t.maps[(x, y)].at(g.degree) if lower and dim else None
        opts = _affine_options(F, cons, Fn.images[g.label] if cons is not None else None, dim)
        if dim and not lower and any(Fn.images[g.label]):
            opts = []
        options[g.label] = opts
    return _search(P.source, target, Fn.obj_map, options, budget)


def brute_force_full_lift(P: LiftingProblem, budget: int | None = None) -> OracleResult:
    """Enumerate all strict functors ``B -> A`` covering ``F0``; finite fields only."""
    budget = budget if budget is not None else oracle_budget()
    F = P.source.field
    if not F.is_finite:
        return OracleResult(False, None, 0, 0)
    A = P.base
    sec0 = P.tower.sections[0]
    options = {}
    total = 1
    for g in P.source.generators:
        x, y = P.F0(g.source), P.F0(g.target)
        dim = A.hom(x, y).dim(g.degree)
        if g.degree == 0 and dim:
            cons = sec0.maps[(x, y)].at(0) if P.stage(0).hom(x, y).dim(0) else None
            free = dim - (cons.nrows if cons is not None else 0)
        else:
            cons, free = None, dim
        total *= F.p ** free
        if total > budget:
            return OracleResult(False, None, 0, total)
        if cons is None and g.degree == 0 and any(P.F0.images[g.label]):
            options[g.label] = []
            continue
        options[g.label] = _affine_options(F, cons, P.F0.images[g.label] if cons is not None else None, dim)
    return _search(P.source, A, P.F0.obj_map, options, budget)


def lift_log_entry(oc: ObstructionClass) -> dict:
    return {"stage": oc.stage, "verdict": oc.verdict, "values": oc.values_by_label()}


def iter_stage_functors(P: LiftingProblem, upto: int, seed: int | None = None):
    """The canonical stagewise lifts ``F0, F1, ...`` while obstructions vanish."""
    Fn = P.F0
    yield 0, Fn
    for n in range(min(upto, P.cap)):
        oc = obstruction_class(P, n, Fn, seed=seed)
        if not oc.vanishes:
            return
        Fn = stage_lift(P, n, Fn, oc)
        yield n + 1, Fn

