"""Diagonal quadratic spaces, isometries, reflections and spinor norms."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    DimensionMismatch,
    ImproperIsometry,
    IsotropicVector,
    UnsupportedField,
    ValidationError,
    ZeroInput,
)
from .exactfield import Field, FieldElement, SquareClass, field_from_descriptor
from .linalg import Matrix, det, diagonal, identity, mat_mul, mat_vec, row_space_rref, transpose

Vector = tuple[FieldElement, ...]


class QuadSpace:
    """A regular quadratic space <d_1, ..., d_m> over ``field``."""

    def __init__(self, field: Field, diagonal_entries):
        entries = []
        for i, d in enumerate(diagonal_entries):
            x = field(d)
            if x.is_zero():
                raise ZeroInput(f"diagonal[{i}]: entry must be nonzero")
            entries.append(x)
        if len(entries) < 2:
            raise DimensionMismatch("quadratic spaces must have dimension >= 2")
        self.field = field
        self.diagonal = tuple(entries)
        self.dim = len(entries)

    @classmethod
    def from_gram(cls, field: Field, gram) -> tuple[QuadSpace, Matrix]:
        """Diagonalize a symmetric Gram matrix; returns (space, P) with P^T G P diagonal."""
        G = [[field(x) for x in row] for row in gram]
        m = len(G)
        if any(len(row) != m for row in G) or any(G[i][j] != G[j][i] for i in range(m) for j in range(m)):
            raise ValidationError("Gram matrix must be square and symmetric")

        def b(x, y):
            return sum((x[i] * G[i][j] * y[j] for i in range(m) for j in range(m)), field.zero)

        remaining = [tuple(field.one if i == j else field.zero for j in range(m)) for i in range(m)]
        basis = []
        while remaining:
            pick = next((v for v in remaining if b(v, v)), None)
            if pick is None:
                pair = next(
                    ((u, w) for u in remaining for w in remaining if u is not w and b(u, w)), None
                )
                if pair is None:
                    raise ZeroInput("Gram matrix is singular")
                pick = tuple(a + c for a, c in zip(*pair))
            qp = b(pick, pick)
            basis.append(pick)
            rest = []
            for v in remaining:
                w = tuple(a - (b(v, pick) / qp) * c for a, c in zip(v, pick))
                if any(w):
                    rest.append(w)
            # keep a linearly independent spanning set of the complement
            remaining = [tuple(r) for r in row_space_rref(rest)] if rest else []
        P = transpose(tuple(basis))
        return cls(field, [b(v, v) for v in basis]), P

    # -- basic evaluation ---------------------------------------------------
    def _check(self, v):
        if len(v) != self.dim:
            raise DimensionMismatch(f"vector of length {len(v)} in a space of dimension {self.dim}")

    def evaluate(self, v) -> FieldElement:
        self._check(v)
        F = self.field
        return sum((d * F(x) * F(x) for d, x in zip(self.diagonal, v)), F.zero)

    def bilinear(self, x, y) -> FieldElement:
        self._check(x)
        self._check(y)
        F = self.field
        return sum((d * F(a) * F(b) for d, a, b in zip(self.diagonal, x, y)), F.zero)

    @cached_property
    def gram(self) -> Matrix:
        return diagonal(self.diagonal)

    def vector(self, coords) -> Vector:
        v = tuple(self.field(c) for c in coords)
        self._check(v)
        return v

    def basis_vector(self, i: int) -> Vector:
        F = self.field
        return tuple(F.one if j == i else F.zero for j in range(self.dim))

    @property
    def half_dim(self) -> int:
        return self.dim // 2

    # -- invariants ---------------------------------------------------------
    def determinant(self) -> FieldElement:
        out = self.field.one
        for d in self.diagonal:
            out = out * d
        return out

    def discriminant_value(self) -> FieldElement:
        m = self.dim
        sign = -1 if (m * (m - 1) // 2) % 2 else 1
        return self.determinant() * sign

    def discriminant(self) -> SquareClass:
        return SquareClass(self.discriminant_value())

    def is_finite(self) -> bool:
        return self.field.is_finite

    # -- constructions --------------------------------------------------------
    def base_change(self, L: Field) -> QuadSpace:
        return QuadSpace(L, [L.embed(d) for d in self.diagonal])

    def scaled(self, f) -> QuadSpace:
        f = self.field(f)
        return QuadSpace(self.field, [f * d for d in self.diagonal])

    def __eq__(self, other):
        return isinstance(other, QuadSpace) and self.field == other.field and self.diagonal == other.diagonal

    def __hash__(self):
        return hash((self.field.key, self.diagonal))

    def __repr__(self):
        return f"<{', '.join(str(d) for d in self.diagonal)}> over {self.field}"

    def to_json(self):
        return {"field": self.field.descriptor(), "diagonal": [d.to_json() for d in self.diagonal]}

    @classmethod
    def from_json(cls, obj) -> QuadSpace:
        if not isinstance(obj, dict) or "field" not in obj or "diagonal" not in obj:
            raise ValidationError("form literal needs 'field' and 'diagonal'")
        F = field_from_descriptor(obj["field"])
        if not isinstance(obj["diagonal"], list):
            raise ValidationError("'diagonal' must be a list")
        return cls(F, [F.from_json(d) for d in obj["diagonal"]])


def _matrix_preserves(space: QuadSpace, M: Matrix, mult: FieldElement) -> bool:
    G = space.gram
    lhs = mat_mul(mat_mul(transpose(M), G), M)
    return all(lhs[i][j] == (mult * G[i][j] if i == j else G[i][j] * mult) for i in range(space.dim) for j in range(space.dim))


@dataclass(frozen=True, eq=False)
class Isometry:
    space: QuadSpace
    matrix: Matrix

    def __post_init__(self):
        if len(self.matrix) != self.space.dim:
            raise DimensionMismatch("matrix size does not match the space")

    @classmethod
    def checked(cls, space: QuadSpace, matrix) -> Isometry:
        M = tuple(tuple(space.field(x) for x in row) for row in matrix)
        if len(M) != space.dim or any(len(r) != space.dim for r in M):
            raise DimensionMismatch("matrix size does not match the space")
        if not _matrix_preserves(space, M, space.field.one):
            raise ValidationError("matrix does not preserve the quadratic form")
        return cls(space, M)

    @classmethod
    def identity(cls, space: QuadSpace) -> Isometry:
        return cls(space, identity(space.field, space.dim))

    def __call__(self, v) -> Vector:
        return mat_vec(self.matrix, v)

    def __mul__(self, other: Isometry) -> Isometry:
        return Isometry(self.space, mat_mul(self.matrix, other.matrix))

    def inverse(self) -> Isometry:
        # M^{-1} = G^{-1} M^T G for an isometry
        D = self.space.diagonal
        M = self.matrix
        m = self.space.dim
        return Isometry(self.space, tuple(tuple(M[j][i] * D[j] / D[i] for j in range(m)) for i in range(m)))

    @cached_property
    def det(self) -> FieldElement:
        return det(self.matrix)

    def is_proper(self) -> bool:
        return self.det == self.space.field.one

    def __eq__(self, other):
        return isinstance(other, Isometry) and self.space == other.space and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)


def reflection(space: QuadSpace, v) -> Isometry:
    """tau_v(x) = x - 2 b(x, v)/q(v) v."""
    v = space.vector(v)
    qv = space.evaluate(v)
    if qv.is_zero():
        raise IsotropicVector(f"q({[str(x) for x in v]}) = 0")
    F = space.field
    c = F(2) / qv
    D = space.diagonal
    m = space.dim
    M = tuple(
        tuple((F.one if i == j else F.zero) - c * v[i] * D[j] * v[j] for j in range(m)) for i in range(m)
    )
    return Isometry(space, M)


def compose_reflections(space: QuadSpace, vectors) -> Isometry:
    g = Isometry.identity(space)
    for v in vectors:
        g = g * reflection(space, v)
    return g


def _vec_eq(a, b):
    return all(x == y for x, y in zip(a, b))


def cartan_dieudonne(g: Isometry, rng: random.Random | None = None) -> list[Vector]:
    """Anisotropic v_1..v_r with g = tau_{v_1} o ... o tau_{v_r}.

    Grows a set of mutually orthogonal anisotropic vectors fixed by the
    current map; each step either finds a fixed anisotropic x or kills one
    with tau_{g(x)-x}. With ``rng`` the candidate order is shuffled, giving
    a different but equally valid decomposition.
    """
    space = g.space
    F = space.field
    m = space.dim
    M = g.matrix
    fixed: list[tuple[Vector, FieldElement]] = []
    out: list[Vector] = []
    stalled = False

    def project(v):
        for x, qx in fixed:
            c = space.bilinear(v, x) / qx
            v = tuple(a - c * b for a, b in zip(v, x))
        return v

    def left_reflect(u):
        nonlocal M
        M = mat_mul(reflection(space, u).matrix, M)
        out.append(u)

    while True:
        spans = [p for p in (project(space.basis_vector(j)) for j in range(m)) if any(p)]
        if all(_vec_eq(mat_vec(M, p), p) for p in spans):
            break
        cands = list(spans)
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                cands.append(tuple(a + b for a, b in zip(spans[i], spans[j])))
                cands.append(tuple(a - b for a, b in zip(spans[i], spans[j])))
        if rng is not None:
            rng.shuffle(cands)
        anisotropic = [(x, space.evaluate(x)) for x in cands if any(x)]
        anisotropic = [(x, qx) for x, qx in anisotropic if qx]
        progressed = False
        for x, qx in anisotropic:
            fx = mat_vec(M, x)
            if _vec_eq(fx, x):
                fixed.append((x, qx))
                progressed = True
                break
            u = tuple(a - b for a, b in zip(fx, x))
            if space.evaluate(u):
                left_reflect(u)
                fixed.append((x, qx))
                progressed = True
                break
        if progressed:
            stalled = False
            continue
        x, qx = anisotropic[0]
        if not stalled:
            # every candidate has g(x)-x isotropic: one reflection breaks this
            left_reflect(x)
            stalled = True
            continue
        fx = mat_vec(M, x)
        left_reflect(tuple(a + b for a, b in zip(fx, x)))
        left_reflect(x)
        fixed.append((x, qx))
        stalled = False
    return out


def spinor_norm_certificate(g: Isometry, rng: random.Random | None = None) -> tuple[list[Vector], FieldElement]:
    """(reflection vectors, product of their q-values) for a proper isometry."""
    if not g.is_proper():
        raise ImproperIsometry("spinor norm is defined on proper isometries")
    vectors = cartan_dieudonne(g, rng)
    prod = g.space.field.one
    for v in vectors:
        prod = prod * g.space.evaluate(v)
    return vectors, prod


def spinor_norm(g: Isometry, rng: random.Random | None = None) -> SquareClass:
    return SquareClass(spinor_norm_certificate(g, rng)[1])


def represented_values(space: QuadSpace) -> set:
    """Nonzero values q(v) (as payloads) over a finite field."""
    F = space.field
    if not F.is_finite:
        raise UnsupportedField("value sets are only enumerable over finite fields")
    squares = {F._mul(x.v, x.v) for x in F.elements()}
    values = {F._coerce(0)}
    for d in space.diagonal:
        dsq = {F._mul(d.v, s) for s in squares}
        values = {F._add(a, b) for a in values for b in dsq}
    return {v for v in values if not F._is_zero(v)}


def spinor_norm_group(space: QuadSpace) -> frozenset[SquareClass]:
    """Subgroup of k*/k*^2 generated by q(v)q(w); finite fields only."""
    F = space.field
    if not F.is_finite:
        raise UnsupportedField("spinor_norm_group needs a finite field; use is_spinor_norm over Q")
    classes = {SquareClass(FieldElement(F, v)) for v in represented_values(space)}
    group = {a * b for a in classes for b in classes}
    while True:
        bigger = group | {a * b for a in group for b in group}
        if bigger == group:
            return frozenset(group)
        group = bigger


def random_vector(space: QuadSpace, rng: random.Random, height: int = 3) -> Vector:
    return tuple(space.field.random_element(rng, height) for _ in range(space.dim))


def random_anisotropic_vector(space: QuadSpace, rng: random.Random, height: int = 3) -> Vector:
    while True:
        v = random_vector(space, rng, height)
        if any(v) and space.evaluate(v):
            return v


def random_isometry(space: QuadSpace, rng: random.Random, proper: bool | None = None, height: int = 3,
                    max_reflections: int | None = None) -> Isometry:
    """Product of at most 2m (or ``max_reflections``) random reflections; parity forced by ``proper``."""
    count = rng.randint(0, 2 * space.dim if max_reflections is None else max_reflections)
    if proper is True and count % 2:
        count -= 1
    elif proper is False and count % 2 == 0:
        count += 1
    return compose_reflections(space, [random_anisotropic_vector(space, rng, height) for _ in range(count)])


def _anisotropic_lines(space: QuadSpace):
    F = space.field
    elems = list(F.elements())
    for lead in range(space.dim):
        for tail in itertools.product(elems, repeat=space.dim - lead - 1):
            v = (F.zero,) * lead + (F.one,) + tail
            if space.evaluate(v):
                yield v


def enumerate_orthogonal_group(space: QuadSpace, proper_only: bool = False) -> list[Isometry]:
    """All of O(q)(k) over a finite field, as the closure of its reflections."""
    F = space.field
    if not F.is_finite:
        raise UnsupportedField("group enumeration needs a finite field")
    m = space.dim
    add, mul = F._add, F._mul
    zero = F._coerce(0)
    gens = [tuple(tuple(x.v for x in row) for row in reflection(space, v).matrix) for v in _anisotropic_lines(space)]

    def mul_payload(A, B):
        return tuple(
            tuple(_dot(add, mul, zero, A[i], [B[k][j] for k in range(m)]) for j in range(m)) for i in range(m)
        )

    start = tuple(tuple(x.v for x in row) for row in identity(F, m))
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for r in gens:
            nxt = mul_payload(r, cur)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    out = [Isometry(space, tuple(tuple(FieldElement(F, x) for x in row) for row in M)) for M in sorted(seen)]
    if proper_only:
        out = [g for g in out if g.is_proper()]
    return out


def search_coefficients(F: Field, r: int, bound: int, dense_cap: int = 20000):
    """Coefficient tuples for bounded vector searches.

    Finite fields: every tuple. Infinite fields: by increasing height, sparse
    tuples (support <= 2) first, then dense ones while the level stays small.
    """
    if F.is_finite:
        yield from itertools.product(list(F.elements()), repeat=r)
        return
    zero = F.zero
    prev: set = set()
    for height in range(1, bound + 1):
        level = list(F.small_elements(height))
        new = [c for c in level if c not in prev]
        if height == 1:
            yield (zero,) * r
        for i in range(r):
            for c in new:
                if c:
                    yield tuple(c if k == i else zero for k in range(r))
        for i in range(r):
            for j in range(i + 1, r):
                for a in level:
                    if not a:
                        continue
                    for b in level:
                        if b and (a in new or b in new):
                            vec = [zero] * r
                            vec[i], vec[j] = a, b
                            yield tuple(vec)
        if r > 2 and len(level) ** r <= dense_cap:
            for coeffs in itertools.product(level, repeat=r):
                if sum(1 for c in coeffs if c) >= 3 and any(c in new for c in coeffs):
                    yield coeffs
        prev = set(level)


def _dot(add, mul, zero, a, b):
    acc = zero
    for x, y in zip(a, b):
        acc = add(acc, mul(x, y))
    return acc
