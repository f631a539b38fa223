"""Clifford algebra of a diagonal quadratic space, its even part, and lifts.

Basis blades are bitmasks (bit i <-> e_{i+1}); coefficients are stored as raw
field payloads. The blade order used for canonical forms is by grade, then
lexicographic on the index list.
"""

from __future__ import annotations

from functools import cache, cached_property

from .errors import (
    AlgebraMismatch,
    DimensionMismatch,
    ImproperIsometry,
    InconsistentLift,
    LiftFailure,
    MultiplierNotInBase,
    NotInCliffordGroup,
    NotInU,
    NotScalar,
    WrongParity,
    ZeroInput,
)
from .exactfield import FieldElement, QuadraticExtension, quadratic_extension
from .linalg import nullspace_payload, rref_payload
from .quadform import Isometry, QuadSpace, cartan_dieudonne
from .similitude import PGOPlusClass, Similitude, is_proper

MAX_DIM = 8


def _reorder_parity(a: int, b: int) -> int:
    """Parity of transpositions needed to sort e_A e_B into blade order."""
    a >>= 1
    count = 0
    while a:
        count += bin(a & b).count("1")
        a >>= 1
    return count & 1


def _blade_key(blade: int):
    idx = [i for i in range(blade.bit_length()) if blade >> i & 1]
    return (len(idx), idx)


class CliffordAlgebra:
    def __init__(self, space: QuadSpace):
        if space.dim > MAX_DIM:
            raise DimensionMismatch(f"Clifford engine supports dimension <= {MAX_DIM}, got {space.dim}")
        self.space = space
        self.field = F = space.field
        self.m = m = space.dim
        self.size = 1 << m
        self.blades = sorted(range(self.size), key=_blade_key)
        self.even_blades = [b for b in self.blades if bin(b).count("1") % 2 == 0]
        self.position = {b: i for i, b in enumerate(self.blades)}
        d = [x.v for x in space.diagonal]
        one = F._coerce(1)
        # product coefficient of e_A e_B (the blade is A ^ B)
        sq = [one] * self.size
        for blade in range(1, self.size):
            low = (blade & -blade).bit_length() - 1
            sq[blade] = F._mul(sq[blade & (blade - 1)], d[low])
        table = []
        for a in range(self.size):
            row = []
            for b in range(self.size):
                c = sq[a & b]
                row.append(F._neg(c) if _reorder_parity(a, b) else c)
            table.append(row)
        self._table = table
        self.top = self.size - 1

    def __eq__(self, other):
        return isinstance(other, CliffordAlgebra) and self.space == other.space

    def __hash__(self):
        return hash(self.space)

    # -- constructors -------------------------------------------------------
    def element(self, terms: dict) -> CliffordElement:
        F = self.field
        clean = {}
        for blade, c in terms.items():
            p = F(c).v if not isinstance(c, FieldElement) else c.v
            if not F._is_zero(p):
                clean[blade] = p
        return CliffordElement(self, clean)

    def scalar(self, c) -> CliffordElement:
        return self.element({0: c})

    @property
    def one(self) -> CliffordElement:
        return self.scalar(1)

    def blade(self, *indices: int) -> CliffordElement:
        """Product e_{i1} e_{i2} ... (1-based indices, any order)."""
        out = self.one
        for i in indices:
            out = out * self.element({1 << (i - 1): 1})
        return out

    def embed_vector(self, v) -> CliffordElement:
        v = self.space.vector(v)
        return self.element({1 << i: x for i, x in enumerate(v)})

    @cached_property
    def zeta(self) -> CliffordElement:
        """e_1 e_2 ... e_m."""
        return self.element({self.top: 1})

    @cached_property
    def zeta_square(self) -> FieldElement:
        return FieldElement(self.field, self._table[self.top][self.top])

    @cached_property
    def center_field(self) -> QuadraticExtension:
        """Z = k(zeta); raises SplitDiscriminant when zeta^2 is a square."""
        return quadratic_extension(self.field, self.zeta_square)

    def from_center(self, z: FieldElement) -> CliffordElement:
        Z = self.center_field
        if z.field != Z:
            z = Z(z)
        a, b = Z.coords(z)
        return self.element({0: a, self.top: b})

    def to_center(self, c: CliffordElement) -> FieldElement:
        extra = set(c.terms) - {0, self.top}
        if extra or (self.m % 2 and self.top in c.terms):
            raise NotScalar("element does not lie in k + k*zeta")
        F = self.field
        zero = F._coerce(0)
        return self.center_field.make(
            FieldElement(F, c.terms.get(0, zero)), FieldElement(F, c.terms.get(self.top, zero))
        )

    def in_center(self, c: CliffordElement) -> bool:
        return not (set(c.terms) - {0, self.top})

    # -- linear algebra helpers ---------------------------------------------
    def left_matrix(self, c: CliffordElement, basis) -> list[list]:
        """Rows indexed by blades of the algebra, columns by ``basis``: c * e_s."""
        return self._mult_matrix(c, basis, left=True)

    def right_matrix(self, c: CliffordElement, basis) -> list[list]:
        return self._mult_matrix(c, basis, left=False)

    def _mult_matrix(self, c, basis, left):
        F = self.field
        add, mul = F._add, F._mul
        zero = F._coerce(0)
        table = self._table
        rows = [[zero] * len(basis) for _ in range(self.size)]
        for col, s in enumerate(basis):
            for t, ct in c.terms.items():
                if left:
                    blade, coef = t ^ s, mul(ct, table[t][s])
                else:
                    blade, coef = s ^ t, mul(ct, table[s][t])
                r = rows[blade]
                r[col] = add(r[col], coef)
        return rows


@cache
def algebra_for(space: QuadSpace) -> CliffordAlgebra:
    return CliffordAlgebra(space)


class CliffordElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: CliffordAlgebra, terms: dict):
        self.algebra = algebra
        self.terms = terms

    def _other(self, other):
        if isinstance(other, CliffordElement):
            if other.algebra is not self.algebra and other.algebra != self.algebra:
                raise AlgebraMismatch("elements of different Clifford algebras")
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        other = self._other(other)
        F = self.algebra.field
        out = dict(self.terms)
        for b, c in other.terms.items():
            s = F._add(out[b], c) if b in out else c
            if F._is_zero(s):
                out.pop(b, None)
            else:
                out[b] = s
        return CliffordElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.algebra.field
        return CliffordElement(self.algebra, {b: F._neg(c) for b, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if isinstance(other, (FieldElement, int)):
            F = self.algebra.field
            c = F(other).v
            if F._is_zero(c):
                return CliffordElement(self.algebra, {})
            return CliffordElement(self.algebra, {b: F._mul(x, c) for b, x in self.terms.items()})
        other = self._other(other)
        alg = self.algebra
        F = alg.field
        add, mul, is_zero = F._add, F._mul, F._is_zero
        table = alg._table
        out: dict = {}
        for a, ca in self.terms.items():
            row = table[a]
            for b, cb in other.terms.items():
                blade = a ^ b
                val = mul(mul(ca, cb), row[b])
                out[blade] = add(out[blade], val) if blade in out else val
        return CliffordElement(alg, {b: c for b, c in out.items() if not is_zero(c)})

    def __rmul__(self, other):
        if isinstance(other, (FieldElement, int)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (FieldElement, int)):
            return self * self.algebra.field(other).inverse()
        return self * self._other(other).inverse()

    def __eq__(self, other):
        if isinstance(other, CliffordElement):
            return self.algebra == other.algebra and self.terms == other.terms
        if isinstance(other, (int, FieldElement)):
            return self == self.algebra.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        F = self.algebra.field
        if not self.terms:
            return "0"
        parts = []
        for b in self.algebra.blades:
            if b in self.terms:
                name = "".join(f"e{i + 1}" for i in range(b.bit_length()) if b >> i & 1) or "1"
                parts.append(f"({F.format(self.terms[b])})*{name}")
        return " + ".join(parts)

    def coefficient(self, blade: int) -> FieldElement:
        F = self.algebra.field
        return FieldElement(F, self.terms.get(blade, F._coerce(0)))

    def grades(self) -> set[int]:
        return {bin(b).count("1") for b in self.terms}

    def is_even(self) -> bool:
        return all(g % 2 == 0 for g in self.grades())

    def is_odd(self) -> bool:
        return all(g % 2 == 1 for g in self.grades())

    def is_scalar(self) -> bool:
        return set(self.terms) <= {0}

    def scalar_part(self) -> FieldElement:
        return self.coefficient(0)

    def reversal(self) -> CliffordElement:
        F = self.algebra.field
        out = {}
        for b, c in self.terms.items():
            k = bin(b).count("1")
            out[b] = F._neg(c) if (k * (k - 1) // 2) % 2 else c
        return CliffordElement(self.algebra, out)

    def grade_involution(self) -> CliffordElement:
        F = self.algebra.field
        return CliffordElement(
            self.algebra, {b: (F._neg(c) if bin(b).count("1") % 2 else c) for b, c in self.terms.items()}
        )

    def as_vector(self):
        """Coordinates if this is a pure grade-1 element, else None."""
        if any(bin(b).count("1") != 1 for b in self.terms):
            return None
        alg = self.algebra
        return tuple(self.coefficient(1 << i) for i in range(alg.m))

    def inverse(self) -> CliffordElement:
        """Two-sided inverse by solving x * self = 1 over the full algebra."""
        if not self.terms:
            raise ZeroInput("0 is not invertible")
        nrm = self.reversal() * self
        if nrm.is_scalar() and nrm:
            return self.reversal() * nrm.scalar_part().inverse()
        alg = self.algebra
        F = alg.field
        basis = alg.blades
        # x * self = 1 : columns of the right-multiplication matrix
        rows = alg.right_matrix(self, basis)
        one, zero = F._coerce(1), F._coerce(0)
        aug = [row + [one if blade == 0 else zero] for blade, row in enumerate(rows)]
        reduced, pivots = rref_payload(F, aug, len(basis) + 1)
        if len(basis) in pivots or len(pivots) < len(basis):
            raise ZeroDivisionError("element is not a unit")
        x = {basis[pc]: row[-1] for row, pc in zip(reduced, pivots) if not F._is_zero(row[-1])}
        inv = CliffordElement(alg, x)
        if (self * inv) != alg.one:
            raise ZeroDivisionError("element has only a one-sided inverse")
        return inv


# -- Clifford group, lifts ---------------------------------------------------

def _conjugation_matrix(c: CliffordElement, c_inv: CliffordElement, twisted: bool):
    alg = c.algebra
    cols = []
    left = c.grade_involution() if twisted else c
    for i in range(alg.m):
        img = (left * alg.element({1 << i: 1}) * c_inv).as_vector()
        if img is None:
            return None
        cols.append(img)
    return tuple(zip(*cols))


def vector_representation(gamma: CliffordElement) -> Isometry:
    """v -> gamma v gamma^{-1} (even), or the twisted action for odd gamma."""
    if gamma.is_even():
        twisted = False
    elif gamma.is_odd():
        twisted = True
    else:
        raise NotInCliffordGroup("mixed-parity element")
    try:
        inv = gamma.inverse()
    except ZeroDivisionError:
        raise NotInCliffordGroup("element is not a unit") from None
    M = _conjugation_matrix(gamma, inv, twisted)
    if M is None:
        raise NotInCliffordGroup("conjugation does not preserve V")
    return Isometry(gamma.algebra.space, M)


def lift_isometry_to_gamma(h: Isometry, algebra: CliffordAlgebra | None = None) -> CliffordElement:
    """gamma = v_1 ... v_r in the special Clifford group with vector representation h."""
    if not h.is_proper():
        raise ImproperIsometry("only proper isometries lift to the special Clifford group")
    alg = algebra or algebra_for(h.space)
    gamma = alg.one
    for v in cartan_dieudonne(h):
        gamma = gamma * alg.embed_vector(v)
    return gamma


class OmegaElement:
    """A unit of C_0 inducing the even automorphism of a proper similitude.

    ``similitude`` is one representative of the induced PGO+ class; it is
    carried along because the x-map needs it.
    """

    __slots__ = ("value", "similitude")

    def __init__(self, value: CliffordElement, similitude: Similitude):
        self.value = value
        self.similitude = similitude

    @property
    def algebra(self) -> CliffordAlgebra:
        return self.value.algebra

    @property
    def induced_class(self) -> PGOPlusClass:
        return PGOPlusClass(self.similitude)

    def canonical(self) -> OmegaElement:
        return OmegaElement(canonical_omega(self.value), self.similitude)

    def __mul__(self, other):
        if isinstance(other, OmegaElement):
            return OmegaElement(self.value * other.value, self.similitude * other.similitude)
        if isinstance(other, CliffordElement):
            return OmegaElement(self.value * other, self.similitude)
        return NotImplemented

    def times_center(self, z: FieldElement) -> OmegaElement:
        return OmegaElement(self.value * self.algebra.from_center(z), self.similitude)

    def inverse(self) -> OmegaElement:
        return OmegaElement(self.value.inverse(), self.similitude.inverse())

    @classmethod
    def from_center(cls, algebra: CliffordAlgebra, z: FieldElement) -> OmegaElement:
        if not z:
            raise ZeroInput("0 is not a unit")
        return cls(algebra.from_center(z), Similitude.identity(algebra.space))

    @classmethod
    def from_gamma(cls, gamma: CliffordElement) -> OmegaElement:
        h = vector_representation(gamma)
        return cls(gamma, Similitude.from_isometry(h))

    def same_coset(self, other: OmegaElement) -> bool:
        """Equal modulo Z*."""
        return canonical_omega(self.value) == canonical_omega(other.value)

    def __repr__(self):
        return f"Omega({self.value!r})"


def canonical_omega(value: CliffordElement) -> CliffordElement:
    """Deterministic representative of value * Z*: first RREF row of span(value, value*zeta)."""
    alg = value.algebra
    F = alg.field
    blades = alg.even_blades
    zero = F._coerce(0)
    v1 = value
    v2 = value * alg.zeta
    rows = [[v.terms.get(b, zero) for b in blades] for v in (v1, v2)]
    reduced, _ = rref_payload(F, rows, len(blades))
    return CliffordElement(alg, {b: c for b, c in zip(blades, reduced[0]) if not F._is_zero(c)})


def even_automorphism_image(g: Similitude, alg: CliffordAlgebra, i: int, j: int) -> CliffordElement:
    """mu(g)^{-1} g(e_i) g(e_j) for 0-based i, j."""
    space = g.space
    gi = alg.embed_vector(g(space.basis_vector(i)))
    gj = alg.embed_vector(g(space.basis_vector(j)))
    return gi * gj * g.multiplier.inverse()


def lift_similitude_to_omega(g: Similitude, algebra: CliffordAlgebra | None = None) -> OmegaElement:
    """Solve omega * B = C_0(g)(B) * omega for B = e_1 e_j and normalize modulo Z*."""
    space = g.space
    if space.dim % 2:
        raise WrongParity("the extended Clifford group needs even dimension")
    if not is_proper(g):
        raise ImproperIsometry("only proper similitudes lift to the extended Clifford group")
    alg = algebra or algebra_for(space)
    F = alg.field
    basis = alg.even_blades
    sub = F._sub
    # restrict to the current solution space after each generator
    sol = None  # list of vectors in coordinates over ``basis``
    for j in range(1, space.dim):
        B = alg.element({1 | (1 << j): 1})
        image = even_automorphism_image(g, alg, 0, j)
        R = alg.right_matrix(B, basis)
        L = alg.left_matrix(image, basis)
        rows = [[sub(R[b][c], L[b][c]) for c in range(len(basis))] for b in basis]
        if sol is None:
            sol = nullspace_payload(F, rows, len(basis))
        else:
            # rows @ sum_k y_k sol_k = 0
            proj = [[_dot(F, row, s) for s in sol] for row in rows]
            coeffs = nullspace_payload(F, proj, len(sol))
            sol = [_combine(F, c, sol) for c in coeffs]
        if len(sol) < 2:
            break
    if sol is None or len(sol) != 2:
        raise LiftFailure(f"solution space has dimension {0 if sol is None else len(sol)}, expected 2")
    reduced, _ = rref_payload(F, [list(v) for v in sol], len(basis))
    value = CliffordElement(alg, {basis[k]: c for k, c in enumerate(reduced[0]) if not F._is_zero(c)})
    omega = OmegaElement(value, g)
    _verify_lift(omega)
    return omega


def _dot(F, a, b):
    add, mul = F._add, F._mul
    acc = F._coerce(0)
    for x, y in zip(a, b):
        if not F._is_zero(x) and not F._is_zero(y):
            acc = add(acc, mul(x, y))
    return acc


def _combine(F, coeffs, vectors):
    add, mul = F._add, F._mul
    out = [F._coerce(0)] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        if F._is_zero(c):
            continue
        out = [add(o, mul(c, x)) for o, x in zip(out, v)]
    return out


def _verify_lift(omega: OmegaElement):
    alg = omega.algebra
    g = omega.similitude
    w = omega.value
    nrm = w.reversal() * w
    if not nrm or not alg.in_center(nrm):
        raise LiftFailure("lift is not a unit with central reduced norm")
    for i in range(alg.m):
        for j in range(i + 1, alg.m):
            B = alg.element({(1 << i) | (1 << j): 1})
            if w * B != even_automorphism_image(g, alg, i, j) * w:
                raise LiftFailure(f"conjugation identity fails on e{i + 1}e{j + 1}")


# -- the maps mu_bar, x, mu_* ---------------------------------------------------

def mu_bar(omega) -> FieldElement:
    """reversal(omega) * omega as an element of Z."""
    value = omega.value if isinstance(omega, OmegaElement) else omega
    alg = value.algebra
    c = value.reversal() * value
    if not alg.in_center(c):
        raise NotScalar("reversal(omega)*omega is not central")
    return alg.to_center(c)


class CenterModBase:
    """An element of Z* modulo k*; the representative is 1 or t + zeta."""

    __slots__ = ("rep",)

    def __init__(self, z: FieldElement):
        Z = z.field
        if not z:
            raise ZeroInput("0 in Z*/k*")
        a, b = Z.coords(z)
        self.rep = Z.one if b.is_zero() else Z.make(a / b, 1)

    def __mul__(self, other):
        return CenterModBase(self.rep * other.rep)

    def is_trivial(self) -> bool:
        return self.rep == self.rep.field.one

    def __eq__(self, other):
        return isinstance(other, CenterModBase) and self.rep == other.rep

    def __hash__(self):
        return hash(self.rep)

    def __repr__(self):
        return f"[{self.rep}]k*"


def x_map(omega: OmegaElement) -> CenterModBase:
    """z k* where omega^2 = gamma z and gamma lifts mu(g)^{-1} g^2."""
    alg = omega.algebra
    g = omega.similitude
    sq = g * g
    h = Isometry(g.space, tuple(tuple(x / g.multiplier for x in row) for row in sq.matrix))
    gamma = lift_isometry_to_gamma(h, alg)
    nrm = gamma.reversal() * gamma
    if not nrm.is_scalar():
        raise InconsistentLift("special Clifford element with non-scalar norm")
    gamma_inv = gamma.reversal() * nrm.scalar_part().inverse()
    z = omega.value * omega.value * gamma_inv
    if not alg.in_center(z) or not z:
        raise InconsistentLift("omega^2 gamma^{-1} is not a unit of Z")
    return CenterModBase(alg.to_center(z))


class UPoint:
    """(f, z) in k* x Z* with f^4 = N(z)."""

    __slots__ = ("f", "z")

    def __init__(self, f: FieldElement, z: FieldElement):
        Z = z.field
        f = Z.base(f) if f.field != Z.base else f
        if not f or not z:
            raise ZeroInput("U-points have nonzero coordinates")
        if f**4 != Z.rel_norm(z):
            raise NotInU(f"f^4 = {f ** 4} but N(z) = {Z.rel_norm(z)}")
        self.f = f
        self.z = z

    @property
    def center_field(self) -> QuadraticExtension:
        return self.z.field

    def __mul__(self, other: UPoint) -> UPoint:
        return UPoint(self.f * other.f, self.z * other.z)

    def inverse(self) -> UPoint:
        return UPoint(self.f.inverse(), self.z.inverse())

    def __truediv__(self, other: UPoint) -> UPoint:
        return self * other.inverse()

    def __eq__(self, other):
        return isinstance(other, UPoint) and self.f == other.f and self.z == other.z

    def __hash__(self):
        return hash((self.f, self.z))

    def __repr__(self):
        return f"UPoint({self.f}, {self.z})"

    def to_json(self):
        return {"f": self.f.to_json(), "z": self.z.to_json()}


def mu_star(omega: OmegaElement) -> UPoint:
    alg = omega.algebra
    if alg.m % 4 != 2:
        raise WrongParity("mu_* is defined for dimension 2n with n odd")
    mb = mu_bar(omega)
    Z = mb.field
    if not Z.in_base(mb):
        raise MultiplierNotInBase(f"mu_bar = {mb} is not in the base field")
    a = x_map(omega).rep
    z = a / Z.conj(a) * mb * mb
    return UPoint(Z.coords(mb)[0], z)


def image_map(omega: OmegaElement):
    """mu_* for n odd, mu_bar for n even."""
    return mu_star(omega) if omega.algebra.m % 4 == 2 else mu_bar(omega)


def spin_membership(c: CliffordElement) -> bool:
    if not c or not c.is_even():
        return False
    if c.reversal() * c != c.algebra.one:
        return False
    return _conjugation_matrix(c, c.reversal(), twisted=False) is not None
