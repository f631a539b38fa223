"""Small exact linear algebra over any ``Field``.

Matrices are tuples of row tuples of ``FieldElement``. The elimination core
works on raw payloads so it can be shared with the Clifford engine.
"""

from __future__ import annotations

from .errors import DimensionMismatch
from .exactfield import Field, FieldElement

Matrix = tuple[tuple[FieldElement, ...], ...]


def identity(F: Field, n: int) -> Matrix:
    one, zero = F.one, F.zero
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def diagonal(entries) -> Matrix:
    entries = list(entries)
    zero = entries[0].field.zero
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n))


def as_matrix(F: Field, rows) -> Matrix:
    return tuple(tuple(F(x) for x in row) for row in rows)


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    if len(A[0]) != len(B):
        raise DimensionMismatch(f"{len(A)}x{len(A[0])} times {len(B)}x{len(B[0])}")
    F = A[0][0].field
    add, mul = F._add, F._mul
    Bv = [[x.v for x in row] for row in B]
    out = []
    for row in A:
        av = [x.v for x in row]
        new = []
        for j in range(len(B[0])):
            acc = F._coerce(0)
            for k, a in enumerate(av):
                acc = add(acc, mul(a, Bv[k][j]))
            new.append(FieldElement(F, acc))
        out.append(tuple(new))
    return tuple(out)


def mat_vec(A: Matrix, v) -> tuple[FieldElement, ...]:
    if len(A[0]) != len(v):
        raise DimensionMismatch("matrix/vector size mismatch")
    return tuple(sum((a * x for a, x in zip(row, v)), A[0][0].field.zero) for row in A)


def scale(c: FieldElement, A: Matrix) -> Matrix:
    return tuple(tuple(c * x for x in row) for row in A)


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def rref_payload(F: Field, rows: list[list], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form in place on payload rows; returns (rows, pivots)."""
    add, mul, neg, inv, is_zero = F._add, F._mul, F._neg, F._inv, F._is_zero
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        for i in range(r, nrows):
            if not is_zero(rows[i][c]):
                break
        else:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        piv_inv = inv(rows[r][c])
        prow = [mul(x, piv_inv) for x in rows[r]]
        rows[r] = prow
        nz = [(j, prow[j]) for j in range(c, ncols) if not is_zero(prow[j])]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if not is_zero(f):
                    row = rows[i]
                    nf = neg(f)
                    for j, pj in nz:
                        row[j] = add(row[j], mul(nf, pj))
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def nullspace_payload(F: Field, rows: list[list], ncols: int) -> list[list]:
    reduced, pivots = rref_payload(F, [list(r) for r in rows], ncols)
    zero, one = F._coerce(0), F._coerce(1)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        vec = [zero] * ncols
        vec[free] = one
        for row, pc in zip(reduced, pivots):
            vec[pc] = F._neg(row[free])
        basis.append(vec)
    return basis


def nullspace(A: Matrix) -> list[tuple[FieldElement, ...]]:
    """Basis of {x : A x = 0}."""
    F = A[0][0].field
    basis = nullspace_payload(F, [[x.v for x in row] for row in A], len(A[0]))
    return [tuple(FieldElement(F, x) for x in vec) for vec in basis]


def row_space_rref(vectors) -> list[tuple[FieldElement, ...]]:
    """Canonical basis (RREF rows) of the span of ``vectors``."""
    vectors = list(vectors)
    F = vectors[0][0].field
    reduced, _ = rref_payload(F, [[x.v for x in v] for v in vectors], len(vectors[0]))
    return [tuple(FieldElement(F, x) for x in row) for row in reduced]


def det(A: Matrix) -> FieldElement:
    F = A[0][0].field
    n = len(A)
    if any(len(row) != n for row in A):
        raise DimensionMismatch("determinant of a non-square matrix")
    rows = [[x.v for x in row] for row in A]
    add, mul, neg, inv, is_zero = F._add, F._mul, F._neg, F._inv, F._is_zero
    result = F._coerce(1)
    for c in range(n):
        for i in range(c, n):
            if not is_zero(rows[i][c]):
                break
        else:
            return F.zero
        if i != c:
            rows[c], rows[i] = rows[i], rows[c]
            result = neg(result)
        p = rows[c][c]
        result = mul(result, p)
        pinv = inv(p)
        for i in range(c + 1, n):
            f = rows[i][c]
            if not is_zero(f):
                nf = neg(mul(f, pinv))
                row, prow = rows[i], rows[c]
                for j in range(c, n):
                    row[j] = add(row[j], mul(nf, prow[j]))
    return FieldElement(F, result)


def inverse(A: Matrix) -> Matrix:
    F = A[0][0].field
    n = len(A)
    one, zero = F._coerce(1), F._coerce(0)
    rows = [[x.v for x in row] + [one if i == j else zero for j in range(n)] for i, row in enumerate(A)]
    reduced, pivots = rref_payload(F, rows, 2 * n)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(FieldElement(F, x) for x in row[n:]) for row in reduced)


def matrix_to_json(A: Matrix):
    return [[x.to_json() for x in row] for row in A]


def matrix_from_json(F: Field, rows) -> Matrix:
    return tuple(tuple(F.from_json(x) for x in row) for row in rows)
