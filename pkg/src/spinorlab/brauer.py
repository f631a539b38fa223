"""Hilbert symbols, quaternion algebra classes and rational isometry tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import UnsupportedField, ValidationError, ZeroInput
from .exactfield import QQ, FieldElement, QuadraticExtension, factor, squarefree_part

REAL = "inf"


def _as_fraction(x) -> Fraction:
    if isinstance(x, FieldElement):
        if x.field != QQ:
            raise UnsupportedField(f"Hilbert symbols here are over Q, got {x.field}")
        x = x.v
    x = Fraction(x)
    if x == 0:
        raise ZeroInput("Hilbert symbol of 0")
    return x


def _square_class_int(x) -> int:
    """Squarefree integer in the square class of a nonzero rational."""
    x = _as_fraction(x)
    return squarefree_part(x.numerator * x.denominator)


def _legendre(u: int, p: int) -> int:
    return 1 if pow(u % p, (p - 1) // 2, p) == 1 else -1


def _split_valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a, b, place) -> int:
    """(a, b)_v for nonzero rationals; ``place`` is a prime or ``"inf"``."""
    a, b = _square_class_int(a), _square_class_int(b)
    if place == REAL:
        return -1 if a < 0 and b < 0 else 1
    p = int(place)
    if p == 2:
        alpha, u = _split_valuation(a, 2)
        beta, v = _split_valuation(b, 2)

        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    alpha, u = _split_valuation(a, p)
    beta, v = _split_valuation(b, p)
    sign = -1 if (alpha * beta * (p - 1) // 2) % 2 else 1
    if beta % 2:
        sign *= _legendre(u, p)
    if alpha % 2:
        sign *= _legendre(v, p)
    return sign


def relevant_places(a, b) -> list:
    """The real place and every prime dividing 2ab (numerators and denominators)."""
    primes = {2}
    for x in (_as_fraction(a), _as_fraction(b)):
        primes |= set(factor(abs(x.numerator))) | set(factor(x.denominator))
    primes.discard(1)
    return sorted(primes) + [REAL]


def ramified_places(a, b) -> frozenset:
    return frozenset(v for v in relevant_places(a, b) if hilbert_symbol(a, b, v) == -1)


# -- independent oracles ---------------------------------------------------

def local_solvable(a, b, place) -> bool:
    """Whether a x^2 + b y^2 = z^2 has a nontrivial solution over Q_p (or R).

    After reducing a, b to squarefree integers, a primitive solution modulo
    p^3 (odd p) or 2^5 lifts by Hensel's lemma. Scaling by a unit puts x or y
    equal to 1; both divisible by p is impossible for a primitive solution.
    """
    a, b = _square_class_int(a), _square_class_int(b)
    if place == REAL:
        return a > 0 or b > 0
    p = int(place)
    mod = p**5 if p == 2 else p**3
    squares = {z * z % mod for z in range(mod)}
    for y in range(mod):
        if (a + b * y * y) % mod in squares:
            return True
    for x in range(0, mod, p):
        if (a * x * x + b) % mod in squares:
            return True
    return False


def conic_point(a, b, bound: int = 60):
    """Integer (x, y, z) != 0 with a' x^2 + b' y^2 = z^2, |x|, |y| <= bound, or None.

    a', b' are the squarefree integers in the square classes of a, b.
    """
    a, b = _square_class_int(a), _square_class_int(b)
    for x, y in itertools.product(range(bound + 1), repeat=2):
        if x == 0 and y == 0:
            continue
        t = a * x * x + b * y * y
        if t < 0:
            continue
        z = int(t**0.5)
        while z * z > t:
            z -= 1
        while (z + 1) ** 2 <= t:
            z += 1
        if z * z == t:
            return x, y, z
    return None


# -- quaternion algebras ----------------------------------------------------

class QuaternionClass:
    """The Brauer class of (a, b) over Q or a finite field."""

    def __init__(self, a, b, field=QQ):
        self.field = field
        if field.is_finite:
            a, b = field(a), field(b)
            if not a or not b:
                raise ZeroInput("quaternion symbol with a zero entry")
            self.a, self.b = a, b
            self.ramification = frozenset()
        elif field == QQ:
            self.a, self.b = _as_fraction(a), _as_fraction(b)
            self.ramification = ramified_places(self.a, self.b)
            if len(self.ramification) % 2:
                raise AssertionError("odd number of ramified places")  # pragma: no cover
        else:
            raise UnsupportedField(f"quaternion classes over {field} are not supported")

    def is_split(self) -> bool:
        return not self.ramification

    def __repr__(self):
        return f"({self.a}, {self.b}) ramified at {sorted(self.ramification, key=str)}"


def is_split(q: QuaternionClass) -> bool:
    return q.is_split()


# -- quadratic forms over Q ----------------------------------------------------

def hasse_invariant(diagonal, place) -> int:
    out = 1
    for i, j in itertools.combinations(range(len(diagonal)), 2):
        out *= hilbert_symbol(diagonal[i], diagonal[j], place)
    return out


def rational_forms_isometric(diag1, diag2) -> bool:
    """Hasse-Minkowski: dimension, determinant class, signature, Hasse invariants."""
    d1 = [_as_fraction(x) for x in diag1]
    d2 = [_as_fraction(x) for x in diag2]
    if len(d1) != len(d2):
        return False
    det1, det2 = Fraction(1), Fraction(1)
    for x in d1:
        det1 *= x
    for x in d2:
        det2 *= x
    if _square_class_int(det1) != _square_class_int(det2):
        return False
    if sum(x > 0 for x in d1) != sum(x > 0 for x in d2):
        return False
    primes = {2}
    for x in d1 + d2:
        primes |= set(factor(abs(x.numerator))) | set(factor(x.denominator))
    primes.discard(1)
    return all(hasse_invariant(d1, p) == hasse_invariant(d2, p) for p in primes)


def similitude_locally_possible(space, f) -> bool:
    """Whether f.q and q are isometric over Q (a similitude with multiplier f exists)."""
    if space.field != QQ:
        raise UnsupportedField("local precheck is implemented over Q")
    f = _as_fraction(f)
    return rational_forms_isometric([f * d.v for d in space.diagonal], [d.v for d in space.diagonal])


# -- checks from the norm-principle argument -------------------------------------

@dataclass
class CorestrictionCheck:
    premise: str  # "split", "non_split" or "unknown"
    consequence: bool | None  # splitness of (d, N(f1)) over Q when the premise holds
    norm: Fraction | None = None
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.premise == "split" and self.consequence is False


def _sign_under(x: FieldElement, L: QuadraticExtension, root_sign: int) -> int:
    """Sign of a + b sqrt(m) under the real embedding with sqrt(m) -> root_sign * |sqrt(m)|."""
    a, b = (c.v for c in L.coords(x))
    b = b * root_sign
    m = L.d.v

    def sgn(t):
        return (t > 0) - (t < 0)

    if b == 0 or (a != 0 and sgn(a) == sgn(b)):
        return sgn(a) if a else sgn(b)
    if a == 0:
        return sgn(b)
    return sgn(a) if a * a > b * b * m else sgn(b)


def corestriction_consequence_check(d, L: QuadraticExtension, f1: FieldElement, certificate=None,
                                    height: int = 3) -> CorestrictionCheck:
    """If (d, f1) splits over L then (d, N_{L/Q}(f1)) must split over Q.

    The premise is certified by (z, y) in L with (z^2 - d y^2)/f1 a square in
    L, either given or found by a small search; it is refuted at a real place
    of L when possible, and otherwise the instance is skipped.
    """
    if not isinstance(L, QuadraticExtension) or L.base != QQ:
        raise ValidationError("L must be a quadratic extension of Q")
    d = _as_fraction(d)
    f1 = L(f1)
    if not f1:
        raise ZeroInput("f1 must be nonzero")
    dL = L(QQ(d))
    premise = "unknown"
    detail = ""
    if L.sqrt(dL) is not None:
        premise, detail = "split", "d is a square in L"
    elif certificate is not None:
        z, y = (L(c) for c in certificate)
        val = z * z - dL * y * y
        if val and L.sqrt(val / f1) is not None:
            premise, detail = "split", "norm certificate"
    if premise == "unknown":
        small = list(L.small_elements(height))
        for z, y in itertools.product(small, repeat=2):
            val = z * z - dL * y * y
            if val and L.sqrt(val / f1) is not None:
                premise, detail = "split", "norm certificate found by search"
                break
    if premise == "unknown" and L.d.v > 0 and d < 0:
        for s in (1, -1):
            if _sign_under(f1, L, s) < 0:
                premise, detail = "non_split", "ramified at a real place of L"
                break
    if premise != "split":
        return CorestrictionCheck(premise, None, None, detail)
    N = L.rel_norm(f1).v
    return CorestrictionCheck(premise, QuaternionClass(d, N).is_split(), N, detail)


def dieudonne_split_check(g) -> bool:
    """(disc q, mu(g)) splits for an improper similitude g over Q."""
    space = g.space
    if space.field != QQ:
        raise UnsupportedField("the split check runs over Q")
    if space.dim % 2 or g.det == g.multiplier ** (space.dim // 2):
        raise ValidationError("expects an improper similitude of an even-dimensional space")
    return QuaternionClass(space.discriminant_value().v, g.multiplier.v).is_split()
