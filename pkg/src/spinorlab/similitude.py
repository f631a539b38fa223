"""Similitudes of a diagonal quadratic space and their multipliers."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from functools import cached_property

from .errors import DimensionMismatch, ImproperIsometry, NoAnisotropicVector, OddDimension, ValidationError, ZeroInput
from .brauer import similitude_locally_possible
from .exactfield import QQ, FieldElement, SquareClass
from .linalg import Matrix, det, identity, mat_mul, mat_vec, nullspace, scale, transpose
from .quadform import Isometry, QuadSpace, enumerate_orthogonal_group, random_isometry, reflection, search_coefficients


class Outcome(enum.Enum):
    """Non-constructive search results."""

    NOT_FOUND = "not_found"  # a proof of nonexistence
    UNKNOWN = "unknown"  # search budget exhausted


@dataclass(frozen=True, eq=False)
class Similitude:
    space: QuadSpace
    matrix: Matrix
    multiplier: FieldElement

    @classmethod
    def checked(cls, space: QuadSpace, matrix, multiplier=None) -> Similitude:
        F = space.field
        M = tuple(tuple(F(x) for x in row) for row in matrix)
        m = space.dim
        if len(M) != m or any(len(r) != m for r in M):
            raise DimensionMismatch("matrix size does not match the space")
        if multiplier is None:
            col0 = tuple(row[0] for row in M)
            multiplier = space.evaluate(col0) / space.diagonal[0]
        mu = F(multiplier)
        if mu.is_zero():
            raise ZeroInput("similitudes have nonzero multiplier")
        D = space.diagonal
        cols = transpose(M)
        for i in range(m):
            for j in range(i, m):
                want = mu * D[i] if i == j else F.zero
                if space.bilinear(cols[i], cols[j]) != want:
                    raise ValidationError(f"matrix is not a similitude with multiplier {mu}")
        return cls(space, M, mu)

    @classmethod
    def identity(cls, space: QuadSpace) -> Similitude:
        return cls(space, identity(space.field, space.dim), space.field.one)

    @classmethod
    def scalar(cls, space: QuadSpace, c) -> Similitude:
        c = space.field(c)
        if c.is_zero():
            raise ZeroInput("scalar similitude by 0")
        return cls(space, scale(c, identity(space.field, space.dim)), c * c)

    @classmethod
    def from_isometry(cls, h: Isometry) -> Similitude:
        return cls(h.space, h.matrix, h.space.field.one)

    def as_isometry(self) -> Isometry:
        if self.multiplier != self.space.field.one:
            raise ValidationError("multiplier is not 1")
        return Isometry(self.space, self.matrix)

    def __call__(self, v):
        return mat_vec(self.matrix, v)

    def __mul__(self, other):
        if isinstance(other, Isometry):
            other = Similitude.from_isometry(other)
        return Similitude(self.space, mat_mul(self.matrix, other.matrix), self.multiplier * other.multiplier)

    def __rmul__(self, other):
        if isinstance(other, Isometry):
            return Similitude.from_isometry(other) * self
        return NotImplemented

    def inverse(self) -> Similitude:
        # g^{-1} = mu^{-1} G^{-1} g^T G
        D = self.space.diagonal
        M = self.matrix
        m = self.space.dim
        mi = self.multiplier.inverse()
        return Similitude(
            self.space,
            tuple(tuple(mi * M[j][i] * D[j] / D[i] for j in range(m)) for i in range(m)),
            mi,
        )

    @cached_property
    def det(self) -> FieldElement:
        return det(self.matrix)

    def is_proper(self) -> bool:
        return is_proper(self)

    def __eq__(self, other):
        return isinstance(other, Similitude) and self.space == other.space and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def to_json(self):
        return {
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
            "multiplier": self.multiplier.to_json(),
        }


def multiplier(g: Similitude) -> FieldElement:
    return g.multiplier


def is_proper(g: Similitude) -> bool:
    """det(g) = mu(g)^n in dimension 2n."""
    m = g.space.dim
    if m % 2:
        raise OddDimension("properness needs even dimension")
    return g.det == g.multiplier ** (m // 2)


def correct_to_proper(g: Similitude) -> Similitude:
    """g * tau_{e_i} for the first anisotropic basis vector e_i."""
    if is_proper(g):
        raise ImproperIsometry("correct_to_proper expects an improper similitude")
    space = g.space
    for i in range(space.dim):
        e = space.basis_vector(i)
        if space.evaluate(e):
            return g * reflection(space, e)
    raise NoAnisotropicVector("regular diagonal forms always have one")  # pragma: no cover


class PGOPlusClass:
    """A proper similitude modulo nonzero scalar matrices."""

    __slots__ = ("representative", "key")

    def __init__(self, g: Similitude):
        if not is_proper(g):
            raise ImproperIsometry("PGO+ classes need a proper representative")
        lead = next(x for row in g.matrix for x in row if x)
        self.representative = g
        self.key = tuple(tuple((x / lead).v for x in row) for row in g.matrix)

    def canonical(self) -> Similitude:
        g = self.representative
        lead = next(x for row in g.matrix for x in row if x)
        c = lead.inverse()
        return Similitude(g.space, scale(c, g.matrix), g.multiplier * c * c)

    def multiplier_class(self) -> SquareClass:
        return SquareClass(self.representative.multiplier)

    def __eq__(self, other):
        return isinstance(other, PGOPlusClass) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


# -- constructing similitudes with a prescribed multiplier ---------------------

def _complement_basis(space: QuadSpace, chosen):
    """Basis of the orthogonal complement of ``chosen`` (whole space if empty)."""
    if not chosen:
        return [space.basis_vector(i) for i in range(space.dim)]
    rows = tuple(tuple(d * x for d, x in zip(space.diagonal, w)) for w in chosen)
    return nullspace(rows)


def _combine(basis, coeffs):
    F = basis[0][0].field
    return tuple(sum((c * u[k] for c, u in zip(coeffs, basis)), F.zero) for k in range(len(basis[0])))


def _find_value(space, basis, target, bound, budget):
    """w in span(basis) with q(w) = target, or an Outcome."""
    F = space.field
    if len(basis) == 1:
        u = basis[0]
        s = F.sqrt(target / space.evaluate(u))
        return Outcome.NOT_FOUND if s is None else tuple(s * x for x in u)
    r = len(basis)
    # evaluate through the Gram matrix of the basis, on raw payloads
    gram = [[space.bilinear(u, v).v for v in basis] for u in basis]
    add, mul, zero = F._add, F._mul, F.zero.v
    tried = 0
    for coeffs in search_coefficients(F, r, bound):
        if not any(coeffs):
            continue
        tried += 1
        if tried > budget:
            return Outcome.UNKNOWN
        c = [x.v for x in coeffs]
        val = zero
        for i in range(r):
            if F._is_zero(c[i]):
                continue
            row = zero
            for j in range(r):
                if not F._is_zero(c[j]):
                    row = add(row, mul(gram[i][j], c[j]))
            val = add(val, mul(c[i], row))
        if F._is_zero(val):
            continue
        s = F.sqrt(target / FieldElement(F, val))
        if s is not None:
            return tuple(s * x for x in _combine(basis, coeffs))
    return Outcome.NOT_FOUND if F.is_finite else Outcome.UNKNOWN


def find_similitude_with_multiplier(space: QuadSpace, f, bound: int = 50, budget: int = 200_000,
                                    local_precheck: bool = False):
    """A proper similitude with multiplier ``f``, or ``Outcome.NOT_FOUND``/``UNKNOWN``.

    Builds orthogonal w_1..w_m with q(w_i) = f d_i one at a time. By Witt
    cancellation any admissible choice of w_1..w_{i-1} extends whenever
    f.q and q are isometric, so a failed final (one-dimensional) step proves
    nonexistence. Over finite fields the search is exhaustive. With
    ``local_precheck`` over Q, multipliers excluded by Hasse-Minkowski are
    rejected before searching.
    """
    F = space.field
    f = F(f)
    if f.is_zero():
        raise ZeroInput("multiplier must be nonzero")
    c = F.sqrt(f)
    if c is not None:
        return Similitude.scalar(space, c)
    if local_precheck and F == QQ and not similitude_locally_possible(space, f):
        return Outcome.NOT_FOUND
    chosen = []
    for d in space.diagonal:
        basis = _complement_basis(space, chosen)
        w = _find_value(space, basis, f * d, bound, budget)
        if isinstance(w, Outcome):
            return w
        chosen.append(w)
    g = Similitude(space, transpose(tuple(chosen)), f)
    if space.dim % 2 == 0 and not is_proper(g):
        g = correct_to_proper(g)
    return g


def norm_form_similitude(space: QuadSpace, a, b) -> Similitude | None:
    """Block similitude with multiplier a^2 + e b^2 when coordinate pairs share the ratio e.

    Pairs (d_1, d_2), (d_3, d_4), ...; each block [[a, -e b], [b, a]] scales
    d(x^2 + e y^2) by a^2 + e b^2. Returns None if the ratios differ.
    """
    F = space.field
    a, b = F(a), F(b)
    D = space.diagonal
    if space.dim % 2:
        return None
    ratios = {D[i + 1] / D[i] for i in range(0, space.dim, 2)}
    if len(ratios) != 1:
        return None
    e = ratios.pop()
    mu = a * a + e * b * b
    if mu.is_zero():
        return None
    m = space.dim
    rows = [[F.zero] * m for _ in range(m)]
    for i in range(0, m, 2):
        rows[i][i], rows[i][i + 1] = a, -e * b
        rows[i + 1][i], rows[i + 1][i + 1] = b, a
    return Similitude(space, tuple(tuple(r) for r in rows), mu)


def random_proper_similitude(space: QuadSpace, rng: random.Random, height: int = 3, budget: int = 2000,
                             max_reflections: int | None = None) -> Similitude:
    """A proper isometry times a similitude whose multiplier is known to be realizable."""
    F = space.field
    h = random_isometry(space, rng, proper=True, height=height, max_reflections=max_reflections)
    if F.is_finite:
        while True:
            f = F.random_element(rng)
            if f:
                break
        s = find_similitude_with_multiplier(space, f)
    else:
        s = norm_form_similitude(space, F.random_element(rng, height), F.random_element(rng, height))
        if s is None:
            s = find_similitude_with_multiplier(space, rng.randint(1, 7), bound=4, budget=budget)
        if isinstance(s, Outcome) or s is None:
            c = F.random_element(rng, height)
            s = Similitude.scalar(space, c if c else F.one)
    g = Similitude.from_isometry(h) * s
    assert is_proper(g)
    return g


def enumerate_pgo_plus(space: QuadSpace) -> list[PGOPlusClass]:
    """All classes of PGO+(q)(k) over a finite field.

    Translates O+(q) by one proper similitude per realizable multiplier
    square class.
    """
    F = space.field
    o_plus = enumerate_orthogonal_group(space, proper_only=True)
    reps = [F.one, F.least_nonsquare()]
    seen = {}
    for f in reps:
        s = find_similitude_with_multiplier(space, f)
        if isinstance(s, Outcome):
            continue
        for h in o_plus:
            cls = PGOPlusClass(s * h)
            seen.setdefault(cls, cls)
    return list(seen.values())
