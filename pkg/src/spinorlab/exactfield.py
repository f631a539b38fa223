"""Exact scalars over Q, Q(sqrt d), F_p, F_{p^m} and quadratic towers on top.

Every field object works on raw *payloads* (``Fraction`` for Q, ``int`` for
F_p, coefficient tuples for F_{p^m}, pairs for quadratic extensions) through
``_add``/``_mul``/... so that the Clifford and matrix engines can run on
payloads directly; ``FieldElement`` is the thin public wrapper.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cache

from sympy import Poly, factorint, isprime, symbols
from sympy.ntheory import sqrt_mod

from .errors import (
    AlgebraMismatch,
    NotAnExtension,
    SplitDiscriminant,
    UnsupportedField,
    ValidationError,
    ZeroInput,
)

_X = symbols("x")


def factor(n: int) -> dict[int, int]:
    """sympy's factorint with plain ints (it may hand back gmpy2 integers)."""
    return {int(prime): int(e) for prime, e in factorint(n).items()}


def squarefree_part(n: int) -> int:
    """Signed squarefree kernel of a nonzero integer."""
    if n == 0:
        raise ZeroInput("0 has no squarefree part")
    out = -1 if n < 0 else 1
    for prime, e in factor(abs(n)).items():
        if e % 2:
            out *= prime
    return out


class FieldElement:
    __slots__ = ("field", "v")

    def __init__(self, field: Field, v):
        self.field = field
        self.v = v

    def _payload(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise AlgebraMismatch(f"{other.field} vs {self.field}")
            return other.v
        return self.field._coerce(other)

    def __add__(self, other):
        return FieldElement(self.field, self.field._add(self.v, self._payload(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field._sub(self.v, self._payload(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field._sub(self._payload(other), self.v))

    def __mul__(self, other):
        return FieldElement(self.field, self.field._mul(self.v, self._payload(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._payload(other)
        return FieldElement(self.field, self.field._mul(self.v, self.field._inv(o)))

    def __rtruediv__(self, other):
        return FieldElement(self.field, self.field._mul(self._payload(other), self.field._inv(self.v)))

    def __neg__(self):
        return FieldElement(self.field, self.field._neg(self.v))

    def __pow__(self, e: int):
        F = self.field
        base = self.v
        if e < 0:
            base, e = F._inv(base), -e
        return FieldElement(F, F._pow(base, e))

    def inverse(self) -> FieldElement:
        return FieldElement(self.field, self.field._inv(self.v))

    def is_zero(self) -> bool:
        return self.field._is_zero(self.v)

    def __bool__(self):
        return not self.field._is_zero(self.v)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.v == other.v
        try:
            return self.v == self.field._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.field.key, self.v))

    def __repr__(self):
        return f"{self.field.format(self.v)} in {self.field}"

    def __str__(self):
        return self.field.format(self.v)

    def to_json(self):
        return self.field.to_json(self)


class Field:
    """Common interface; subclasses implement the payload arithmetic."""

    key: tuple = ()
    is_finite = False
    order: int | None = None
    characteristic = 0
    canonical_square_classes = True

    def __eq__(self, other):
        return isinstance(other, Field) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __call__(self, value) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.field == self:
                return value
            return self.embed(value)
        return FieldElement(self, self._coerce(value))

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, self._coerce(0))

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, self._coerce(1))

    def _sub(self, a, b):
        return self._add(a, self._neg(b))

    def _pow(self, a, e: int):
        result = self._coerce(1)
        while e:
            if e & 1:
                result = self._mul(result, a)
            a = self._mul(a, a)
            e >>= 1
        return result

    # -- squares ----------------------------------------------------------
    def is_square(self, x: FieldElement) -> bool:
        if x.is_zero():
            raise ZeroInput("is_square of 0")
        return self.sqrt(x) is not None

    def sqrt(self, x: FieldElement) -> FieldElement | None:
        raise NotImplementedError

    def square_class_rep(self, x: FieldElement) -> FieldElement:
        if x.is_zero():
            raise ZeroInput("square class of 0")
        return self.one if self.is_square(x) else self.least_nonsquare()

    @cache
    def least_nonsquare(self) -> FieldElement:
        if not self.is_finite:
            raise UnsupportedField(f"{self} has infinitely many square classes")
        for x in self.elements():
            if x and not self.is_square(x):
                return x
        raise SplitDiscriminant(f"{self} has no nonsquares")

    def nonzero_elements(self):
        return (x for x in self.elements() if x)

    def elements(self):
        raise UnsupportedField(f"{self} is infinite")

    @cache
    def multiplicative_generator(self) -> FieldElement:
        n = self.order - 1
        prime_divisors = list(factor(n))
        for x in self.nonzero_elements():
            if all(x ** (n // r) != self.one for r in prime_divisors):
                return x
        raise AssertionError("no generator")  # pragma: no cover

    # -- towers -----------------------------------------------------------
    def embed(self, x: FieldElement) -> FieldElement:
        """Image of ``x`` (from a subfield) inside this field."""
        if x.field == self:
            return x
        raise NotAnExtension(f"cannot embed {x.field} into {self}")

    def contains_subfield(self, sub: Field) -> bool:
        return sub == self

    def restrict(self, x: FieldElement, sub: Field) -> FieldElement:
        """Inverse of ``sub``'s embedding; raises if ``x`` is not in ``sub``."""
        if sub == self:
            return x
        raise NotAnExtension(f"{sub} is not a subfield of {self}")

    def format(self, v) -> str:
        return str(v)

    def __repr__(self):
        return self.name


class RationalField(Field):
    name = "Q"
    key = ("Q",)

    def _coerce(self, value):
        if isinstance(value, str):
            return Fraction(value.strip())
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        raise TypeError(f"cannot coerce {value!r} to Q")

    _add = staticmethod(lambda a, b: a + b)
    _sub = staticmethod(lambda a, b: a - b)
    _mul = staticmethod(lambda a, b: a * b)
    _neg = staticmethod(lambda a: -a)
    _is_zero = staticmethod(lambda a: a == 0)

    @staticmethod
    def _inv(a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in Q")
        return 1 / a

    def _pow(self, a, e):
        return a**e

    def sqrt(self, x):
        v = x.v
        if v < 0:
            return None
        n, d = math.isqrt(v.numerator), math.isqrt(v.denominator)
        if n * n == v.numerator and d * d == v.denominator:
            return FieldElement(self, Fraction(n, d))
        return None

    def square_class_rep(self, x):
        if x.is_zero():
            raise ZeroInput("square class of 0")
        return self(squarefree_part(x.v.numerator * x.v.denominator))

    def random_element(self, rng, height=5):
        return FieldElement(self, Fraction(rng.randint(-height, height), rng.randint(1, height)))

    def small_elements(self, height):
        for h in range(height + 1):
            yield from ((self(c) for c in (h, -h)) if h else [self.zero])

    def descriptor(self):
        return {"kind": "Q"}

    def to_json(self, x):
        v = x.v
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def from_json(self, obj):
        return self(obj)


QQ = RationalField()


class PrimeField(Field):
    is_finite = True

    def __init__(self, p: int):
        if p == 2 or not isprime(p):
            raise ValidationError(f"p={p} must be an odd prime")
        self.p = self.characteristic = self.order = p
        self.degree = 1
        self.name = f"F_{p}"
        self.key = ("Fp", p)

    def _coerce(self, value):
        if isinstance(value, Fraction):
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        if isinstance(value, int):
            return value % self.p
        raise TypeError(f"cannot coerce {value!r} to {self}")

    def _add(self, a, b):
        return (a + b) % self.p

    def _sub(self, a, b):
        return (a - b) % self.p

    def _mul(self, a, b):
        return a * b % self.p

    def _neg(self, a):
        return -a % self.p

    def _inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        return pow(a, -1, self.p)

    def _pow(self, a, e):
        return pow(a, e, self.p)

    @staticmethod
    def _is_zero(a):
        return a == 0

    def is_square(self, x):
        if x.v == 0:
            raise ZeroInput("is_square of 0")
        return pow(x.v, (self.p - 1) // 2, self.p) == 1

    def sqrt(self, x):
        if x.v == 0:
            return self.zero
        r = sqrt_mod(x.v, self.p)
        return None if r is None else FieldElement(self, r)

    def elements(self):
        return (FieldElement(self, i) for i in range(self.p))

    def random_element(self, rng, height=None):
        return FieldElement(self, rng.randrange(self.p))

    def descriptor(self):
        return {"kind": "Fp", "p": self.p}

    def to_json(self, x):
        return x.v

    def from_json(self, obj):
        if isinstance(obj, list) and len(obj) == 1:
            obj = obj[0]
        if not isinstance(obj, int):
            raise ValidationError(f"expected an integer for {self}, got {obj!r}")
        return self(obj)


def canonical_modulus(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m over F_p.

    Candidates x^m + c_{m-1} x^{m-1} + ... + c_0 are ordered by the tuple
    (c_{m-1}, ..., c_0). Returned as (c_0, ..., c_{m-1}).
    """
    for high_to_low in itertools.product(range(p), repeat=m):
        coeffs = [1, *high_to_low]
        if high_to_low[-1] == 0:
            continue
        if Poly(coeffs, _X, modulus=p).is_irreducible:
            return tuple(reversed(high_to_low))
    raise AssertionError("no irreducible polynomial")  # pragma: no cover


class GaloisField(Field):
    """F_{p^m} as F_p[x]/(canonical modulus); payloads are coefficient tuples."""

    is_finite = True
    _TABLE_LIMIT = 1 << 20

    def __init__(self, p: int, m: int):
        if p == 2 or not isprime(p):
            raise ValidationError(f"p={p} must be an odd prime")
        if m < 2:
            raise ValidationError("use PrimeField for degree 1")
        self.p = self.characteristic = p
        self.degree = m
        self.order = p**m
        self.modulus = canonical_modulus(p, m)
        self.name = f"F_{p}^{m}"
        self.key = ("Fq", p, m)
        self._zero = (0,) * m
        self._exp = self._log = None
        if self.order <= self._TABLE_LIMIT:
            self._build_tables()

    def _build_tables(self):
        n = self.order - 1
        primes = list(factor(n))
        for idx in range(1, self.order):
            g = self._from_index(idx)
            if all(self._poly_pow(g, n // r) != self._one_payload() for r in primes):
                break
        exp = [self._one_payload()]
        for _ in range(n - 1):
            exp.append(self._poly_mul(exp[-1], g))
        self._exp = exp
        self._log = {v: i for i, v in enumerate(exp)}

    def _one_payload(self):
        return (1,) + (0,) * (self.degree - 1)

    def _from_index(self, idx):
        out = []
        for _ in range(self.degree):
            idx, r = divmod(idx, self.p)
            out.append(r)
        return tuple(out)

    def _poly_mul(self, a, b):
        p, m = self.p, self.degree
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * m - 2, m - 1, -1):
            c = prod[k] % p
            if c:
                for i, mi in enumerate(self.modulus):
                    prod[k - m + i] -= c * mi
        return tuple(x % p for x in prod[:m])

    def _poly_pow(self, a, e):
        result = self._one_payload()
        while e:
            if e & 1:
                result = self._poly_mul(result, a)
            a = self._poly_mul(a, a)
            e >>= 1
        return result

    def _coerce(self, value):
        if isinstance(value, Fraction):
            c = value.numerator * pow(value.denominator, -1, self.p) % self.p
            return (c,) + self._zero[1:]
        if isinstance(value, int):
            return (value % self.p,) + self._zero[1:]
        if isinstance(value, (tuple, list)):
            if len(value) > self.degree:
                raise ValidationError(f"too many coefficients for {self}")
            padded = list(value) + [0] * (self.degree - len(value))
            return tuple(int(c) % self.p for c in padded)
        raise TypeError(f"cannot coerce {value!r} to {self}")

    def _add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def _sub(self, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def _neg(self, a):
        p = self.p
        return tuple(-x % p for x in a)

    def _mul(self, a, b):
        if self._exp is None:
            return self._poly_mul(a, b)
        if a == self._zero or b == self._zero:
            return self._zero
        log = self._log
        return self._exp[(log[a] + log[b]) % (self.order - 1)]

    def _inv(self, a):
        if a == self._zero:
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        if self._exp is None:
            return self._poly_pow(a, self.order - 2)
        return self._exp[-self._log[a] % (self.order - 1)]

    def _pow(self, a, e):
        if self._exp is None:
            return self._poly_pow(a, e)
        if a == self._zero:
            return self._zero if e else self._one_payload()
        return self._exp[self._log[a] * e % (self.order - 1)]

    def _is_zero(self, a):
        return a == self._zero

    def is_square(self, x):
        if x.is_zero():
            raise ZeroInput("is_square of 0")
        if self._exp is not None:
            return self._log[x.v] % 2 == 0
        return self._poly_pow(x.v, (self.order - 1) // 2) == self._one_payload()

    def sqrt(self, x):
        if x.is_zero():
            return self.zero
        if self._exp is None:
            raise UnsupportedField(f"sqrt in {self} needs log tables")
        lg = self._log[x.v]
        return None if lg % 2 else FieldElement(self, self._exp[lg // 2])

    def elements(self):
        return (FieldElement(self, self._from_index(i)) for i in range(self.order))

    def random_element(self, rng, height=None):
        return FieldElement(self, self._from_index(rng.randrange(self.order)))

    def frobenius(self, x: FieldElement, times: int = 1) -> FieldElement:
        return x ** (self.p**times)

    # -- subfields F_{p^d}, d | m ----------------------------------------
    def contains_subfield(self, sub):
        if sub == self:
            return True
        return (
            isinstance(sub, (PrimeField, GaloisField))
            and sub.p == self.p
            and self.degree % sub.degree == 0
        )

    @cache
    def _subfield_generator_image(self, sub: GaloisField):
        # image of sub's x: a root of sub's modulus in self
        for r in self.elements():
            value = self.zero
            for c in reversed((*sub.modulus, 1)):
                value = value * r + c
            if value.is_zero():
                return r
        raise AssertionError("modulus has no root")  # pragma: no cover

    def embed(self, x):
        if x.field == self:
            return x
        sub = x.field
        if isinstance(sub, PrimeField) and sub.p == self.p:
            return self(x.v)
        if isinstance(sub, GaloisField) and self.contains_subfield(sub):
            r = self._subfield_generator_image(sub)
            out = self.zero
            for c in reversed(x.v):
                out = out * r + c
            return out
        raise NotAnExtension(f"cannot embed {sub} into {self}")

    @cache
    def _restriction_table(self, sub):
        return {self.embed(y).v: y for y in sub.elements()}

    def restrict(self, x, sub):
        if sub == self:
            return x
        if not self.contains_subfield(sub):
            raise NotAnExtension(f"{sub} is not a subfield of {self}")
        try:
            return self._restriction_table(sub)[x.v]
        except KeyError:
            raise NotAnExtension(f"{x} does not lie in {sub}") from None

    def format(self, v):
        terms = []
        for i, c in enumerate(v):
            if c:
                mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                terms.append(f"{c}{'*' if mono else ''}{mono}" if (c != 1 or not mono) else mono)
        return " + ".join(reversed(terms)) or "0"

    def descriptor(self):
        return {"kind": "Fq", "p": self.p, "m": self.degree}

    def to_json(self, x):
        return list(x.v)

    def from_json(self, obj):
        if isinstance(obj, int):
            return self(obj)
        if isinstance(obj, list) and all(isinstance(c, int) for c in obj):
            return self(tuple(obj))
        raise ValidationError(f"expected an int or coefficient list for {self}, got {obj!r}")


class QuadraticExtension(Field):
    """base(sqrt d) with payloads (a, b) meaning a + b*sqrt(d)."""

    def __init__(self, base: Field, d: FieldElement):
        d = base(d)
        if d.is_zero():
            raise ZeroInput("quadratic extension by sqrt(0)")
        if base.is_square(d):
            raise SplitDiscriminant(f"{d} is a square in {base}; the algebra is split")
        self.base = base
        self.d = d
        self.characteristic = base.characteristic
        self.is_finite = base.is_finite
        self.order = base.order**2 if base.is_finite else None
        self.canonical_square_classes = base.is_finite
        self.name = f"{base}(sqrt({d}))"
        self.key = ("quad", base.key, d.v)
        self._bzero = base._coerce(0)

    def _coerce(self, value):
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return (self.base._coerce(value[0]), self.base._coerce(value[1]))
        return (self.base._coerce(value), self._bzero)

    def _add(self, a, b):
        B = self.base
        return (B._add(a[0], b[0]), B._add(a[1], b[1]))

    def _sub(self, a, b):
        B = self.base
        return (B._sub(a[0], b[0]), B._sub(a[1], b[1]))

    def _neg(self, a):
        B = self.base
        return (B._neg(a[0]), B._neg(a[1]))

    def _mul(self, a, b):
        B = self.base
        a0, a1 = a
        b0, b1 = b
        return (
            B._add(B._mul(a0, b0), B._mul(self.d.v, B._mul(a1, b1))),
            B._add(B._mul(a0, b1), B._mul(a1, b0)),
        )

    def _inv(self, a):
        B = self.base
        n = B._sub(B._mul(a[0], a[0]), B._mul(self.d.v, B._mul(a[1], a[1])))
        if B._is_zero(n):
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        ni = B._inv(n)
        return (B._mul(a[0], ni), B._neg(B._mul(a[1], ni)))

    def _is_zero(self, a):
        return self.base._is_zero(a[0]) and self.base._is_zero(a[1])

    def make(self, a, b) -> FieldElement:
        return FieldElement(self, (self.base(a).v, self.base(b).v))

    @property
    def gen(self) -> FieldElement:
        """The adjoined square root of d."""
        return self.make(0, 1)

    def coords(self, x: FieldElement) -> tuple[FieldElement, FieldElement]:
        return FieldElement(self.base, x.v[0]), FieldElement(self.base, x.v[1])

    def conj(self, x: FieldElement) -> FieldElement:
        return FieldElement(self, (x.v[0], self.base._neg(x.v[1])))

    def rel_norm(self, x: FieldElement) -> FieldElement:
        a, b = self.coords(x)
        return a * a - self.d * b * b

    def rel_trace(self, x: FieldElement) -> FieldElement:
        a, _ = self.coords(x)
        return a + a

    def in_base(self, x: FieldElement) -> bool:
        return self.base._is_zero(x.v[1])

    def sqrt(self, x):
        if x.is_zero():
            return self.zero
        B = self.base
        a, b = self.coords(x)
        if b.is_zero():
            r = B.sqrt(a)
            if r is not None:
                return self.make(r, 0)
            r = B.sqrt(a / self.d)
            return None if r is None else self.make(0, r)
        c = B.sqrt(self.rel_norm(x))
        if c is None:
            return None
        for s in ((a + c) / 2, (a - c) / 2):
            if s.is_zero():
                continue
            u = B.sqrt(s)
            if u is None:
                continue
            y = self.make(u, b / (2 * u))
            if y * y == x:
                return y
        return None

    def square_class_rep(self, x):
        if x.is_zero():
            raise ZeroInput("square class of 0")
        if self.is_finite:
            return super().square_class_rep(x)
        return self._reduced_rep(x)

    def _reduced_rep(self, x):
        # Scale by base squares only: a reduced, not canonical, representative.
        a, b = self.coords(x)
        if not isinstance(self.base, RationalField):
            return x
        if b.is_zero():
            if self.base.is_square(a) or self.base.is_square(a / self.d):
                return self.one
            return self(self.base.square_class_rep(a))
        den = math.lcm(a.v.denominator, b.v.denominator)
        ai, bi = int(a.v * den), int(b.v * den)
        g = math.gcd(ai, bi)
        sq = 1
        for prime, e in factor(g).items():
            sq *= prime ** (e // 2)
        return self.make(Fraction(ai, sq * sq), Fraction(bi, sq * sq))

    def elements(self):
        if not self.is_finite:
            return super().elements()
        base_elems = list(self.base.elements())
        return (self.make(a, b) for b in base_elems for a in base_elems)

    def random_element(self, rng, height=3):
        return self.make(self.base.random_element(rng, height), self.base.random_element(rng, height))

    def small_elements(self, height):
        base_small = list(self.base.small_elements(height))
        for b in base_small:
            for a in base_small:
                yield self.make(a, b)

    def contains_subfield(self, sub):
        return sub == self or self.base.contains_subfield(sub)

    def embed(self, x):
        if x.field == self:
            return x
        y = self.base.embed(x)
        return FieldElement(self, (y.v, self._bzero))

    def restrict(self, x, sub):
        if sub == self:
            return x
        if not self.in_base(x):
            raise NotAnExtension(f"{x} does not lie in {self.base}")
        return self.base.restrict(FieldElement(self.base, x.v[0]), sub)

    def format(self, v):
        a, b = self.base.format(v[0]), self.base.format(v[1])
        root = "sqrt(" + str(self.d) + ")"
        if self.base._is_zero(v[1]):
            return a
        return f"({a}) + ({b})*{root}"

    def descriptor(self):
        if isinstance(self.base, RationalField) and self.d.v.denominator == 1:
            d = int(self.d.v)
            if squarefree_part(d) == d:
                return {"kind": "Qsqrt", "d": d}
        return {"kind": "quad", "base": self.base.descriptor(), "d": self.base.to_json(self.d)}

    def to_json(self, x):
        a, b = self.coords(x)
        return [self.base.to_json(a), self.base.to_json(b)]

    def from_json(self, obj):
        if isinstance(obj, list) and len(obj) == 2:
            return self.make(self.base.from_json(obj[0]), self.base.from_json(obj[1]))
        return self.embed(self.base.from_json(obj))


# -- factories ------------------------------------------------------------

@cache
def Fp(p: int) -> PrimeField:
    return PrimeField(p)


@cache
def Fq(p: int, m: int) -> Field:
    return Fp(p) if m == 1 else GaloisField(p, m)


@cache
def Qsqrt(d: int) -> QuadraticExtension:
    if d in (0, 1) or squarefree_part(d) != d:
        raise ValidationError(f"d={d} must be a squarefree integer other than 0, 1")
    return QuadraticExtension(QQ, QQ(d))


@cache
def quadratic_extension(base: Field, d: FieldElement) -> QuadraticExtension:
    return QuadraticExtension(base, d)


def field_from_descriptor(desc: dict) -> Field:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ValidationError(f"field descriptor needs a 'kind': {desc!r}")
    kind = desc["kind"]
    try:
        if kind == "Q":
            return QQ
        if kind == "Qsqrt":
            return Qsqrt(int(desc["d"]))
        if kind == "Fp":
            return Fp(int(desc["p"]))
        if kind == "Fq":
            return Fq(int(desc["p"]), int(desc["m"]))
        if kind == "quad":
            base = field_from_descriptor(desc["base"])
            return quadratic_extension(base, base.from_json(desc["d"]))
    except KeyError as exc:
        raise ValidationError(f"field descriptor {desc!r} is missing {exc}") from None
    raise ValidationError(f"unknown field kind {kind!r}")


# -- module-level operations ---------------------------------------------

def is_square(x: FieldElement) -> bool:
    return x.field.is_square(x)


class SquareClass:
    """A nonzero element modulo nonzero squares of its field."""

    __slots__ = ("rep",)

    def __init__(self, x: FieldElement):
        if x.is_zero():
            raise ZeroInput("square class of 0")
        self.rep = x.field.square_class_rep(x)

    @property
    def field(self):
        return self.rep.field

    def __mul__(self, other: SquareClass) -> SquareClass:
        return SquareClass(self.rep * other.rep)

    def inverse(self):
        return self

    def is_trivial(self) -> bool:
        return self.field.is_square(self.rep)

    def __eq__(self, other):
        if not isinstance(other, SquareClass):
            return NotImplemented
        return self.field == other.field and self.field.is_square(self.rep / other.rep)

    def __hash__(self):
        if self.field.canonical_square_classes:
            return hash(self.rep)
        return hash(self.field.key)

    def __repr__(self):
        return f"[{self.rep}]"


def square_class(x: FieldElement) -> SquareClass:
    return SquareClass(x)


def _check_pair(z: FieldElement, sub: Field):
    F = z.field
    if F == sub or not F.contains_subfield(sub):
        raise NotAnExtension(f"{F} is not an extension of {sub}")
    return F


def galois_conj(z: FieldElement) -> FieldElement:
    """Nontrivial automorphism of a quadratic extension; Frobenius for F_{p^m}."""
    F = z.field
    if isinstance(F, QuadraticExtension):
        return F.conj(z)
    if isinstance(F, GaloisField):
        return F.frobenius(z)
    raise NotAnExtension(f"{F} has no distinguished automorphism")


def galois_orbit(z: FieldElement, sub: Field) -> list[FieldElement]:
    """All images of z under Gal(F/sub), F = z.field (quadratic or finite)."""
    F = _check_pair(z, sub)
    if isinstance(F, QuadraticExtension) and sub == F.base:
        return [z, F.conj(z)]
    if isinstance(F, GaloisField):
        q = sub.order
        r = F.degree // sub.degree
        return [z ** (q**i) for i in range(r)]
    raise NotAnExtension(f"unsupported extension {F}/{sub}")


def norm(z: FieldElement, sub: Field) -> FieldElement:
    F = _check_pair(z, sub)
    if isinstance(F, QuadraticExtension) and sub == F.base:
        return F.rel_norm(z)
    out = F.one
    for c in galois_orbit(z, sub):
        out = out * c
    return F.restrict(out, sub)


def trace(z: FieldElement, sub: Field) -> FieldElement:
    F = _check_pair(z, sub)
    if isinstance(F, QuadraticExtension) and sub == F.base:
        return F.rel_trace(z)
    out = F.zero
    for c in galois_orbit(z, sub):
        out = out + c
    return F.restrict(out, sub)
