"""Exact linear algebra over the rationals.

The public interface passes dense lists of Fraction rows, but elimination
runs on sparse row dictionaries: the matrices coming from simplicial
complexes and coordinate charts are overwhelmingly sparse, and exact ranks
on a few hundred dimensions are only tractable that way.
"""

from __future__ import annotations

from fractions import Fraction


def zeros(rows: int, cols: int):
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(d: int):
    m = zeros(d, d)
    for i in range(d):
        m[i][i] = Fraction(1)
    return m


def shape(A):
    return len(A), len(A[0]) if A else 0


def transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def mat_mul(A, B):
    ra, ca = shape(A)
    rb, cb = shape(B)
    if ca != rb:
        raise ValueError(f"shape mismatch: {ra}x{ca} times {rb}x{cb}")
    out = zeros(ra, cb)
    for i, row in enumerate(A):
        acc = out[i]
        for k, a in enumerate(row):
            if a == 0:
                continue
            brow = B[k]
            for j, b in enumerate(brow):
                if b != 0:
                    acc[j] += a * b
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        s = Fraction(0)
        for a, b in zip(row, v):
            if a != 0 and b != 0:
                s += a * b
        out.append(s)
    return out


def mat_add(A, B, scale=Fraction(1)):
    return [[a + scale * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, c):
    return [[c * a for a in row] for row in A]


def is_zero_matrix(A) -> bool:
    return all(x == 0 for row in A for x in row)


def _sparse_rows(A):
    return [{j: x for j, x in enumerate(row) if x != 0} for row in A]


class RowReducer:
    """Incremental reduced row echelon basis over sparse rows."""

    def __init__(self):
        self.rows = {}  # pivot column -> reduced row dict (pivot entry == 1)

    def reduce(self, vec: dict) -> dict:
        vec = dict(vec)
        for col in sorted(vec):
            if vec.get(col, 0) == 0:
                continue
            pivot_row = self.rows.get(col)
            if pivot_row is None:
                continue
            f = vec[col]
            for j, x in pivot_row.items():
                s = vec.get(j, Fraction(0)) - f * x
                if s == 0:
                    vec.pop(j, None)
                else:
                    vec[j] = s
        return {j: x for j, x in vec.items() if x != 0}

    def add(self, vec: dict) -> bool:
        """Insert a vector; True if it enlarged the span."""
        red = self.reduce(vec)
        if not red:
            return False
        pivot = min(red)
        inv = Fraction(1) / red[pivot]
        new_row = {j: x * inv for j, x in red.items()}
        # back-substitute into existing rows to stay fully reduced
        for pc, row in self.rows.items():
            f = row.get(pivot)
            if f:
                for j, x in new_row.items():
                    s = row.get(j, Fraction(0)) - f * x
                    if s == 0:
                        row.pop(j, None)
                    else:
                        row[j] = s
        self.rows[pivot] = new_row
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    rr = RowReducer()
    for row in _sparse_rows(A):
        rr.add(row)
    return rr.rank


def rref(A):
    """Reduced row echelon form (dense output) with pivot columns."""
    rows, cols = shape(A)
    rr = RowReducer()
    for row in _sparse_rows(A):
        rr.add(row)
    pivots = sorted(rr.rows)
    R = zeros(rows, cols)
    for i, p in enumerate(pivots):
        for j, x in rr.rows[p].items():
            R[i][j] = x
    return R, pivots


def nullspace(A):
    """Basis of the kernel, as a list of column vectors."""
    rows, cols = shape(A)
    if cols == 0:
        return []
    if rows == 0:
        return [[Fraction(1) if i == j else Fraction(0) for i in range(cols)]
                for j in range(cols)]
    rr = RowReducer()
    for row in _sparse_rows(A):
        rr.add(row)
    pivots = sorted(rr.rows)
    pivot_set = set(pivots)
    basis = []
    for fc in range(cols):
        if fc in pivot_set:
            continue
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for p in pivots:
            x = rr.rows[p].get(fc)
            if x:
                v[p] = -x
        basis.append(v)
    return basis


def column_space_basis(A):
    """Independent subset of columns (as column vectors)."""
    rows, cols = shape(A)
    if rows == 0 or cols == 0:
        return []
    rr = RowReducer()
    out = []
    for c in range(cols):
        col = {i: A[i][c] for i in range(rows) if A[i][c] != 0}
        if rr.add(col):
            out.append([A[i][c] for i in range(rows)])
    return out


def stack_columns(vectors, length=None):
    """Matrix whose columns are the given vectors."""
    if not vectors:
        return [[] for _ in range(length)] if length else []
    return transpose(vectors)


def in_span(vectors, v) -> bool:
    rr = RowReducer()
    for w in vectors:
        rr.add({j: x for j, x in enumerate(w) if x != 0})
    return rr.contains({j: x for j, x in enumerate(v) if x != 0})


def span_dim(vectors) -> int:
    rr = RowReducer()
    for w in vectors:
        rr.add({j: x for j, x in enumerate(w) if x != 0})
    return rr.rank


def same_span(vs, ws) -> bool:
    return span_contains(vs, ws) and span_contains(ws, vs)


def span_contains(vs, ws) -> bool:
    """Span of vs contains every w in ws."""
    if not ws:
        return True
    rr = RowReducer()
    for w in vs:
        rr.add({j: x for j, x in enumerate(w) if x != 0})
    return all(rr.contains({j: x for j, x in enumerate(w) if x != 0}) for w in ws)


def extend_to_basis(inner, outer):
    """Vectors from `outer` extending span(inner) to span(inner + outer)."""
    rr = RowReducer()
    for w in inner:
        rr.add({j: x for j, x in enumerate(w) if x != 0})
    chosen = []
    for w in outer:
        if rr.add({j: x for j, x in enumerate(w) if x != 0}):
            chosen.append(w)
    return chosen


def solve(A, b):
    """One solution of A x = b, or None."""
    rows, cols = shape(A)
    rr = RowReducer()
    for i in range(rows):
        row = {j: A[i][j] for j in range(cols) if A[i][j] != 0}
        if b[i] != 0:
            row[cols] = b[i]
        rr.add(row)
    if cols in rr.rows:
        return None
    x = [Fraction(0)] * cols
    for p, row in rr.rows.items():
        x[p] = row.get(cols, Fraction(0))
    return x
