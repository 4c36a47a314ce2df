"""Independent reference computations used only by the tests."""

from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix


def sympy_rank(M) -> int:
    """Rank through sympy's domain matrices, a second elimination routine."""
    if M.nrows == 0 or M.ncols == 0:
        return 0
    dom = GF(M.field.p) if M.field.p else QQ
    if M.field.p:
        rows = [[dom(int(x)) for x in r] for r in M.rows]
    else:
        rows = [[dom(x.numerator, x.denominator) for x in r] for r in M.rows]
    return DomainMatrix(rows, (M.nrows, M.ncols), dom).rank()


def homology_dims(C) -> dict:
    """``dim H_i = dim C_i - rank d_i - rank d_{i+1}`` via sympy ranks."""
    out = {}
    for i in C.degrees():
        h = C.dim(i) - sympy_rank(C.d(i)) - sympy_rank(C.d(i + 1))
        if h:
            out[i] = h
    return out
