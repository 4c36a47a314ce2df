"""Regenerate the manifest fixtures and their golden CLI reports.

Run from the repository root: ``python scripts/make_fixtures.py``.
"""

import contextlib
import io
import os
import sys

from dgtower.catalog import massey_liftable_problem, massey_problem, truncated_polynomial
from dgtower.cells import cell_category, cell_inclusion
from dgtower.cli import main
from dgtower.exactlin import Field
from dgtower.manifest import emit, manifest_of

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)
FIX = os.path.join(ROOT, "fixtures")

# (fixture, command line after the file name, golden name)
GOLDEN = [
    ("d3.jsonl", ["check"], "check_d3"),
    ("c2.jsonl", ["homology"], "homology_c2"),
    ("poly.jsonl", ["tower", "--max", "4"], "tower_poly"),
    ("poly.jsonl", ["bigmodel", "-n", "1", "--cap", "5"], "bigmodel_poly"),
    ("poly.jsonl", ["kinvariant", "-n", "0", "--cap", "4"], "kinvariant_poly"),
    ("c1.jsonl", ["fiberseq", "-n", "0", "--cap", "4"], "fiberseq_c1"),
    ("massey.jsonl", ["obstruct", "-n", "0"], "obstruct_massey"),
    ("massey.jsonl", ["rigidify", "--cap", "2"], "rigidify_massey"),
    ("massey_liftable.jsonl", ["rigidify", "--cap", "2"], "rigidify_massey_liftable"),
    ("c2_inclusion.jsonl", ["check", "--category", "D(3)"], "check_c2_inclusion"),
]


def fixtures() -> dict:
    F2 = Field.prime(2)
    Q = Field.rationals()
    inc = cell_inclusion(2, Q)
    P = massey_problem(F2)
    L = massey_liftable_problem(F2)
    return {
        "c1.jsonl": manifest_of(cell_category("C", 1, Q)),
        "c2.jsonl": manifest_of(cell_category("C", 2, Q)),
        "d3.jsonl": manifest_of(cell_category("D", 3, Q)),
        "poly.jsonl": manifest_of(truncated_polynomial(F2, 4)),
        "c2_inclusion.jsonl": manifest_of(inc.source, inc.target, functors={"inclusion": inc}),
        "massey.jsonl": manifest_of(P.target, problems={"massey": P}),
        "massey_liftable.jsonl": manifest_of(L.target, problems={"massey_liftable": L}),
    }


def run(args) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(args)
    return code, buf.getvalue()


def write_all() -> None:
    os.makedirs(os.path.join(FIX, "golden"), exist_ok=True)
    for name, man in fixtures().items():
        with open(os.path.join(FIX, name), "w", encoding="utf-8") as fh:
            fh.write(emit(man))
    for fixture, args, golden in GOLDEN:
        code, out = run([args[0], os.path.join(FIX, fixture), *args[1:]])
        with open(os.path.join(FIX, "golden", f"{golden}.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"exit {code}\n{out}")


if __name__ == "__main__":
    sys.exit(write_all())
