"""Line-oriented JSON format for categories, functors and lifting problems.

Every line is one JSON object with a ``kind``. Grammar, one record per line::

    manifest   {"kind": "manifest", "version": 1, "field": "Q" | "GF(p)"}
    category   {"kind": "category", "name": N, "objects": [x, ...]}
    hom        {"kind": "hom", "category": N, "source": x, "target": y,
                "degrees": [[i, [label, ...]], ...]}
    d          {"kind": "d", "category": N, "from": label, "to": label, "scalar": s}
    compose    {"kind": "compose", "category": N, "g": label, "f": label,
                "result": [[label, s], ...]}
    identity   {"kind": "identity", "category": N, "object": x, "value": [[label, s], ...]}
    functor    {"kind": "functor", "name": G, "source": N, "target": N, "objects": [[x, y], ...]}
    image      {"kind": "image", "functor": G, "label": label, "value": [[label, s], ...]}
    problem    {"kind": "problem", "name": P, "target": N, "objects": [b, ...],
                "object_map": [[b, x], ...]}
    generator  {"kind": "generator", "problem": P, "label": g, "source": b, "target": b,
                "degree": k, "d": [[[g, ...], s], ...], "F0": [[label, s], ...]}

Scalars ``s`` are strings: ``"3"``, ``"-2/3"`` or ``"4 mod 5"``. The manifest
line comes first; every label must be declared by a ``hom`` line before use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Iterable

from .dgcat import CategoryError, DgCategory, DgFunctor, category_from_labels, category_to_labels, validate, validate_functor
from .complexes import ChainMap
from .exactlin import Field, FieldError, Matrix
from .obstruct import Generator, LiftingProblem, ObstructionError, SemiFreeCategory

FORMAT_VERSION = 1


class ManifestError(ValueError):
    def __init__(self, message: str, line: int | None = None, label: str | None = None):
        self.line = line
        self.label = label
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class Manifest:
    field: Field
    categories: dict = dc_field(default_factory=dict)
    functors: dict = dc_field(default_factory=dict)
    problems: dict = dc_field(default_factory=dict)

    def category(self, name: str | None = None) -> DgCategory:
        if name is None:
            if not self.categories:
                raise ManifestError("file declares no category")
            return next(iter(self.categories.values()))
        if name not in self.categories:
            raise ManifestError(f"no category named {name!r}")
        return self.categories[name]

    def problem(self, name: str | None = None) -> LiftingProblem:
        if name is None:
            if not self.problems:
                raise ManifestError("file declares no lifting problem")
            return next(iter(self.problems.values()))
        if name not in self.problems:
            raise ManifestError(f"no lifting problem named {name!r}")
        return self.problems[name]


# ----------------------------------------------------------------------
# parsing


def _require(rec: dict, keys: Iterable[str], line: int) -> None:
    for k in keys:
        if k not in rec:
            raise ManifestError(f"{rec.get('kind')} record is missing {k!r}", line)


class _CategoryDraft:
    def __init__(self, name, objects, line):
        self.name = name
        self.objects = list(objects)
        self.line = line
        self.basis: dict = {}
        self.labels: dict = {}  # label -> (x, y, degree)
        self.differential: dict = {}
        self.products: dict = {}
        self.identities: dict = {}


def _scalar(F: Field, text, line: int, label: str | None = None):
    try:
        return F.parse(text)
    except FieldError as e:
        raise ManifestError(str(e), line, label) from None


def _combination(F: Field, pairs, draft: _CategoryDraft, line: int, where: str) -> dict:
    if not isinstance(pairs, list):
        raise ManifestError(f"{where} must be a list of [label, scalar] pairs", line)
    out = {}
    for item in pairs:
        if not (isinstance(item, list) and len(item) == 2):
            raise ManifestError(f"{where} must be a list of [label, scalar] pairs", line)
        lab, c = item
        if lab not in draft.labels:
            raise ManifestError(f"unknown basis label {lab!r} in {where}", line, lab)
        out[lab] = _scalar(F, c, line, lab)
    return out


def parse_lines(lines: Iterable[str], check: bool = True) -> Manifest:
    """Parse manifest text; with ``check`` every category and functor is validated."""
    F = None
    drafts: dict = {}
    functor_drafts: dict = {}
    problem_drafts: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as e:
            raise ManifestError(f"invalid JSON at column {e.colno}: {e.msg}", lineno) from None
        if not isinstance(rec, dict) or "kind" not in rec:
            raise ManifestError("record must be an object with a 'kind'", lineno)
        kind = rec["kind"]
        if F is None and kind != "manifest":
            raise ManifestError("the first record must be the manifest header", lineno)
        if kind == "manifest":
            if F is not None:
                raise ManifestError("duplicate manifest header", lineno)
            _require(rec, ["version", "field"], lineno)
            if rec["version"] != FORMAT_VERSION:
                raise ManifestError(f"unsupported format version {rec['version']}", lineno)
            try:
                F = Field.from_descriptor(rec["field"])
            except (FieldError, ValueError) as e:
                raise ManifestError(str(e), lineno) from None
        elif kind == "category":
            _require(rec, ["name", "objects"], lineno)
            if rec["name"] in drafts:
                raise ManifestError(f"duplicate category {rec['name']!r}", lineno)
            objs = rec["objects"]
            if len(set(objs)) != len(objs):
                raise ManifestError("duplicate object names", lineno)
            drafts[rec["name"]] = _CategoryDraft(rec["name"], objs, lineno)
        elif kind in ("hom", "d", "compose", "identity"):
            _require(rec, ["category"], lineno)
            draft = drafts.get(rec["category"])
            if draft is None:
                raise ManifestError(f"unknown category {rec['category']!r}", lineno)
            _category_record(F, draft, rec, lineno)
        elif kind == "functor":
            _require(rec, ["name", "source", "target", "objects"], lineno)
            for side in ("source", "target"):
                if rec[side] not in drafts:
                    raise ManifestError(f"unknown category {rec[side]!r}", lineno)
            functor_drafts[rec["name"]] = {"rec": rec, "line": lineno, "images": {}}
        elif kind == "image":
            _require(rec, ["functor", "label", "value"], lineno)
            fd = functor_drafts.get(rec["functor"])
            if fd is None:
                raise ManifestError(f"unknown functor {rec['functor']!r}", lineno)
            src = drafts[fd["rec"]["source"]]
            if rec["label"] not in src.labels:
                raise ManifestError(f"unknown basis label {rec['label']!r}", lineno, rec["label"])
            fd["images"][rec["label"]] = (_combination(F, rec["value"], drafts[fd["rec"]["target"]], lineno,
                                                       "functor image"), lineno)
        elif kind == "problem":
            _require(rec, ["name", "target", "objects", "object_map"], lineno)
            if rec["target"] not in drafts:
                raise ManifestError(f"unknown category {rec['target']!r}", lineno)
            problem_drafts[rec["name"]] = {"rec": rec, "line": lineno, "generators": []}
        elif kind == "generator":
            _require(rec, ["problem", "label", "source", "target", "degree"], lineno)
            pd = problem_drafts.get(rec["problem"])
            if pd is None:
                raise ManifestError(f"unknown problem {rec['problem']!r}", lineno)
            pd["generators"].append((rec, lineno))
        else:
            raise ManifestError(f"unknown record kind {kind!r}", lineno)
    if F is None:
        raise ManifestError("empty manifest")
    out = Manifest(F)
    for name, draft in drafts.items():
        try:
            A = category_from_labels(F, draft.objects, draft.basis, draft.differential, draft.products,
                                     draft.identities, name)
        except (CategoryError, ValueError) as e:
            raise ManifestError(str(e), draft.line) from None
        if check:
            bad = validate(A)
            if bad:
                raise ManifestError(f"category {name!r} is invalid: {bad[0]}", draft.line)
        out.categories[name] = A
    for name, fd in functor_drafts.items():
        out.functors[name] = _build_functor(out, fd, name, check)
    for name, pd in problem_drafts.items():
        out.problems[name] = _build_problem(out, F, pd, name, drafts)
    return out


def _category_record(F: Field, draft: _CategoryDraft, rec: dict, line: int) -> None:
    kind = rec["kind"]
    if kind == "hom":
        _require(rec, ["source", "target", "degrees"], line)
        x, y = rec["source"], rec["target"]
        for o in (x, y):
            if o not in draft.objects:
                raise ManifestError(f"unknown object {o!r}", line)
        if (x, y) in draft.basis:
            raise ManifestError(f"duplicate hom ({x},{y})", line)
        by_deg = {}
        for item in rec["degrees"]:
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], int)):
                raise ManifestError("degrees must be a list of [degree, [labels]] pairs", line)
            i, labs = item
            if i in by_deg:
                raise ManifestError(f"degree {i} listed twice", line)
            for lab in labs:
                if not isinstance(lab, str):
                    raise ManifestError("labels must be strings", line)
                if lab in draft.labels:
                    raise ManifestError(f"basis label {lab!r} is not unique", line, lab)
                draft.labels[lab] = (x, y, i)
            by_deg[i] = list(labs)
        draft.basis[(x, y)] = by_deg
    elif kind == "d":
        _require(rec, ["from", "to", "scalar"], line)
        for side in ("from", "to"):
            if rec[side] not in draft.labels:
                raise ManifestError(f"unknown basis label {rec[side]!r}", line, rec[side])
        c = _scalar(F, rec["scalar"], line, rec["from"])
        draft.differential.setdefault(rec["from"], {})[rec["to"]] = c
    elif kind == "compose":
        _require(rec, ["g", "f", "result"], line)
        for side in ("g", "f"):
            if rec[side] not in draft.labels:
                raise ManifestError(f"unknown basis label {rec[side]!r}", line, rec[side])
        draft.products[(rec["g"], rec["f"])] = _combination(F, rec["result"], draft, line, "composite")
    else:
        _require(rec, ["object", "value"], line)
        if rec["object"] not in draft.objects:
            raise ManifestError(f"unknown object {rec['object']!r}", line)
        draft.identities[rec["object"]] = _combination(F, rec["value"], draft, line, "identity")


def _build_functor(man: Manifest, fd: dict, name: str, check: bool) -> DgFunctor:
    rec, line = fd["rec"], fd["line"]
    A, B = man.categories[rec["source"]], man.categories[rec["target"]]
    F = man.field
    obj_map = {}
    for item in rec["objects"]:
        x, y = item
        if x not in A.objects or y not in B.objects:
            raise ManifestError(f"object pair {item!r} is not in the categories", line)
        obj_map[x] = y
    if set(obj_map) != set(A.objects):
        raise ManifestError("functor object map is not total", line)
    maps = {}
    for x, y in A.pairs():
        C, T = A.hom(x, y), B.hom(obj_map[x], obj_map[y])
        mats = {}
        for i in C.degrees():
            if not T.dim(i):
                continue
            cols = []
            for lab in C.labels(i):
                comb, ln = fd["images"].get(lab, ({}, line))
                v = [F.zero] * T.dim(i)
                for tl, c in comb.items():
                    tx, ty, ti, k = B.locate(tl)
                    if (tx, ty) != (obj_map[x], obj_map[y]) or ti != i:
                        raise ManifestError(f"image of {lab!r} uses {tl!r} of the wrong hom or degree", ln, tl)
                    v[k] = c
                cols.append(v)
            mats[i] = Matrix.from_columns(F, cols, T.dim(i))
        maps[(x, y)] = ChainMap(C, T, mats, check=False)
    G = DgFunctor(A, B, obj_map, maps, name=name)
    if check:
        bad = validate_functor(G)
        if bad:
            raise ManifestError(f"functor {name!r} is invalid: {bad[0]}", line)
    return G


def _build_problem(man: Manifest, F: Field, pd: dict, name: str, drafts: dict) -> LiftingProblem:
    rec, line = pd["rec"], pd["line"]
    A = man.categories[rec["target"]]
    obj_map = {}
    for item in rec["object_map"]:
        b, x = item
        if b not in rec["objects"] or x not in A.objects:
            raise ManifestError(f"object pair {item!r} is not valid", line)
        obj_map[b] = x
    gens, diff, f0 = [], {}, {}
    for g, ln in pd["generators"]:
        try:
            gens.append(Generator(g["label"], g["source"], g["target"], int(g["degree"])))
        except (TypeError, ValueError):
            raise ManifestError("generator degree must be an integer", ln, g.get("label")) from None
        poly = {}
        for item in g.get("d", []):
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], list)):
                raise ManifestError("d must be a list of [[labels], scalar] pairs", ln, g["label"])
            poly[tuple(item[0])] = _scalar(F, item[1], ln, g["label"])
        diff[g["label"]] = poly
        f0[g["label"]] = (g.get("F0", []), ln)
    try:
        B = SemiFreeCategory(F, rec["objects"], gens, diff, name=name)
    except ObstructionError as e:
        raise ManifestError(str(e), line) from None
    try:
        stub = LiftingProblem.build(A, B, obj_map, {})
    except ObstructionError as e:
        raise ManifestError(str(e), line) from None
    S = stub.stage(0)
    images = {}
    for g in gens:
        pairs, ln = f0[g.label]
        T = S.hom(obj_map[g.source], obj_map[g.target])
        v = [F.zero] * T.dim(g.degree)
        for item in pairs:
            if not (isinstance(item, list) and len(item) == 2):
                raise ManifestError("F0 must be a list of [label, scalar] pairs", ln, g.label)
            lab, c = item
            try:
                k = T.index(g.degree, lab)
            except (KeyError, ValueError):
                raise ManifestError(f"F0 value {lab!r} is not a basis label of the target's H0", ln, lab) from None
            v[k] = _scalar(F, c, ln, lab)
        images[g.label] = v
    try:
        return LiftingProblem.build(A, B, obj_map, images)
    except ObstructionError as e:
        raise ManifestError(str(e), line) from None


def parse_text(text: str, check: bool = True) -> Manifest:
    return parse_lines(text.splitlines(), check)


def parse_file(path: str, check: bool = True) -> Manifest:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh, check)


# ----------------------------------------------------------------------
# emitting


def _dump(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(", ", ": "), ensure_ascii=False)


def _pairs(F: Field, comb: dict, order: list) -> list:
    pos = {lab: k for k, lab in enumerate(order)}
    return [[lab, F.format(c)] for lab, c in sorted(comb.items(), key=lambda kv: pos[kv[0]]) if c]


def emit_category(A: DgCategory, name: str | None = None) -> list[str]:
    F = A.field
    name = name or A.name
    data = category_to_labels(A)
    out = [_dump({"kind": "category", "name": name, "objects": list(A.objects)})]
    order = []
    for x in A.objects:
        for y in A.objects:
            C = A.hom(x, y)
            if C.is_zero():
                continue
            degs = [[i, list(C.labels(i))] for i in C.degrees()]
            out.append(_dump({"kind": "hom", "category": name, "source": x, "target": y, "degrees": degs}))
            for i in C.degrees():
                order.extend(C.labels(i))
    for lab in order:
        for tl, c in sorted(data["differential"].get(lab, {}).items(), key=lambda kv: order.index(kv[0])):
            out.append(_dump({"kind": "d", "category": name, "from": lab, "to": tl, "scalar": F.format(c)}))
    pos = {lab: k for k, lab in enumerate(order)}
    for (g, f) in sorted(data["products"], key=lambda gf: (pos[gf[0]], pos[gf[1]])):
        res = _pairs(F, data["products"][(g, f)], order)
        if res:
            out.append(_dump({"kind": "compose", "category": name, "g": g, "f": f, "result": res}))
    for x in A.objects:
        out.append(_dump({"kind": "identity", "category": name, "object": x,
                          "value": _pairs(F, data["identities"][x], order)}))
    return out


def emit_functor(G: DgFunctor, name: str, source: str, target: str) -> list[str]:
    F = G.source.field
    out = [_dump({"kind": "functor", "name": name, "source": source, "target": target,
                  "objects": [[x, G(x)] for x in G.source.objects]})]
    A, B = G.source, G.target
    for x in A.objects:
        for y in A.objects:
            C = A.hom(x, y)
            T = B.hom(G(x), G(y))
            for i in C.degrees():
                for k, lab in enumerate(C.labels(i)):
                    e = [F.zero] * C.dim(i)
                    e[k] = F.one
                    v = G.apply(x, y, i, e) if T.dim(i) else []
                    val = [[T.labels(i)[j], F.format(c)] for j, c in enumerate(v) if c]
                    if val:
                        out.append(_dump({"kind": "image", "functor": name, "label": lab, "value": val}))
    return out


def emit_problem(P: LiftingProblem, name: str, target: str) -> list[str]:
    F = P.source.field
    B = P.source
    out = [_dump({"kind": "problem", "name": name, "target": target, "objects": list(B.objects),
                  "object_map": [[b, P.F0(b)] for b in B.objects]})]
    S = P.stage(0)
    for g in B.generators:
        T = S.hom(P.F0(g.source), P.F0(g.target))
        f0 = [[T.labels(g.degree)[k], F.format(c)] for k, c in enumerate(P.F0.images[g.label]) if c]
        d = [[list(w), F.format(c)] for w, c in B.d[g.label].items()]
        out.append(_dump({"kind": "generator", "problem": name, "label": g.label, "source": g.source,
                          "target": g.target, "degree": g.degree, "d": d, "F0": f0}))
    return out


def emit(man: Manifest) -> str:
    lines = [_dump({"kind": "manifest", "version": FORMAT_VERSION, "field": man.field.descriptor})]
    names = {id(A): n for n, A in man.categories.items()}
    for n, A in man.categories.items():
        lines.extend(emit_category(A, n))
    for n, G in man.functors.items():
        lines.extend(emit_functor(G, n, names[id(G.source)], names[id(G.target)]))
    for n, P in man.problems.items():
        if id(P.target) not in names:
            raise ManifestError(f"problem {n!r} targets a category that is not in the manifest")
        lines.extend(emit_problem(P, n, names[id(P.target)]))
    return "\n".join(lines) + "\n"


def manifest_of(*categories: DgCategory, functors: dict | None = None, problems: dict | None = None) -> Manifest:
    if not categories:
        raise ManifestError("need at least one category")
    man = Manifest(categories[0].field)
    for A in categories:
        if A.name in man.categories:
            raise ManifestError(f"duplicate category name {A.name!r}")
        man.categories[A.name] = A
    man.functors.update(functors or {})
    man.problems.update(problems or {})
    return man
