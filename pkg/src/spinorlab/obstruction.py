"""U/U_0, the maps S, i, j, special elements and the scalar obstruction alpha.

Parity conventions for a space of dimension 2n:

* n odd: targets are U-points (f, z) and classes in U/U_0;
* n even: targets are elements of Z* and classes in Z*/Z*^2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cache

from sympy.solvers.diophantine.diophantine import sum_of_four_squares, sum_of_squares, sum_of_three_squares

from .brauer import hilbert_symbol, relevant_places
from .clifford import (
    CliffordElement,
    OmegaElement,
    UPoint,
    algebra_for,
    image_map,
    lift_similitude_to_omega,
)
from .errors import (
    Hilbert90Failure,
    InconsistentLift,
    NotInImageOfI,
    UnsupportedField,
    ValidationError,
    WrongParity,
    ZeroInput,
)
from .exactfield import QQ, FieldElement, Fq, QuadraticExtension, SquareClass, is_square
from .quadform import QuadSpace, search_coefficients
from .similitude import Outcome, PGOPlusClass, Similitude, find_similitude_with_multiplier


def _half_dim_parity(space: QuadSpace) -> str:
    if space.dim % 2:
        raise WrongParity("obstruction maps need even dimension 2n")
    return "odd" if space.half_dim % 2 else "even"


def center_field(space: QuadSpace) -> QuadraticExtension:
    return algebra_for(space).center_field


# -- U, U_0 -------------------------------------------------------------------

def u_membership(f, z) -> UPoint:
    return UPoint(f, z)


def fourth_roots(z: FieldElement) -> list[FieldElement]:
    Z = z.field
    s = Z.sqrt(z)
    if s is None:
        return []
    roots = []
    for t2 in (s, -s):
        t = Z.sqrt(t2)
        if t is not None:
            roots.extend([t, -t])
    return roots


def u0_witness(p: UPoint) -> FieldElement | None:
    """z0 with (N(z0), z0^4) = p, or None."""
    Z = p.center_field
    for t in fourth_roots(p.z):
        if Z.rel_norm(t) == p.f:
            return t
    return None


def in_u0(p: UPoint) -> bool:
    return u0_witness(p) is not None


@cache
def _u0_points(Z: QuadraticExtension) -> frozenset:
    return frozenset((Z.rel_norm(z).v, (z**4).v) for z in Z.nonzero_elements())


class UClass:
    """A U-point modulo U_0."""

    __slots__ = ("representative", "_key")

    def __init__(self, p: UPoint):
        self.representative = p
        Z = p.center_field
        if Z.is_finite:
            B = Z.base
            coset = (
                (B._mul(p.f.v, F), Z._mul(p.z.v, W)) for F, W in _u0_points(Z)
            )
            self._key = min(coset)
        else:
            self._key = None

    def __mul__(self, other):
        return UClass(self.representative * other.representative)

    def __truediv__(self, other):
        return UClass(self.representative / other.representative)

    def is_trivial(self) -> bool:
        return in_u0(self.representative)

    def __eq__(self, other):
        if not isinstance(other, UClass):
            return NotImplemented
        if self._key is not None and other._key is not None:
            return self._key == other._key
        return in_u0(self.representative / other.representative)

    def __hash__(self):
        if self._key is not None:
            return hash(self._key)
        return hash(self.representative.center_field.key)

    def __repr__(self):
        return f"[{self.representative.f}, {self.representative.z}]"


def u0_reduce(p: UPoint) -> UClass:
    return UClass(p)


class ZSquareClass:
    """An element of Z* modulo Z*^2."""

    __slots__ = ("representative",)

    def __init__(self, z: FieldElement):
        if not z:
            raise ZeroInput("square class of 0")
        self.representative = z

    def __mul__(self, other):
        return ZSquareClass(self.representative * other.representative)

    def __truediv__(self, other):
        return ZSquareClass(self.representative / other.representative)

    def is_trivial(self) -> bool:
        return is_square(self.representative)

    def __eq__(self, other):
        if not isinstance(other, ZSquareClass):
            return NotImplemented
        return is_square(self.representative / other.representative)

    def __hash__(self):
        Z = self.representative.field
        if Z.is_finite:
            return hash(is_square(self.representative))
        return hash(Z.key)

    def __repr__(self):
        return f"[{self.representative}]Z*^2"


def enumerate_u(space: QuadSpace) -> list[UPoint]:
    Z = center_field(space)
    if not Z.is_finite:
        raise UnsupportedField("U is only enumerable over finite fields")
    k = Z.base
    out = []
    for f in k.nonzero_elements():
        target = f**4
        for z in Z.nonzero_elements():
            if Z.rel_norm(z) == target:
                out.append(UPoint(f, z))
    return out


def enumerate_u0(space: QuadSpace) -> set[UPoint]:
    Z = center_field(space)
    if not Z.is_finite:
        raise UnsupportedField("U_0 is only enumerable over finite fields")
    return {UPoint(Z.rel_norm(z), z**4) for z in Z.nonzero_elements()}


# -- S, i, j -------------------------------------------------------------------

def theta_class(theta, space: QuadSpace):
    if _half_dim_parity(space) == "odd":
        if not isinstance(theta, UPoint):
            raise ValidationError("n odd: theta must be a U-point")
        return UClass(theta)
    if not isinstance(theta, FieldElement) or theta.field != center_field(space):
        raise ValidationError("n even: theta must be an element of Z*")
    return ZSquareClass(theta)


def S_of(cls, space: QuadSpace | None = None):
    """S([g]) via the Clifford lift; accepts a PGOPlusClass, Similitude or OmegaElement."""
    if isinstance(cls, PGOPlusClass):
        cls = cls.representative
    omega = cls if isinstance(cls, OmegaElement) else lift_similitude_to_omega(cls)
    space = omega.algebra.space
    return theta_class(image_map(omega), space)


def i_map(alpha, space: QuadSpace):
    if isinstance(alpha, SquareClass):
        alpha = alpha.rep
    alpha = space.field(alpha)
    Z = center_field(space)
    if _half_dim_parity(space) == "odd":
        return UClass(UPoint(alpha, Z(alpha * alpha)))
    return ZSquareClass(Z(alpha))


def hilbert90(w: FieldElement) -> FieldElement:
    """y with y / conj(y) = w, for w of norm 1."""
    Z = w.field
    if Z.rel_norm(w) != Z.base.one:
        raise Hilbert90Failure(f"N({w}) != 1")
    y = Z.gen if w == -Z.one else Z.one + w
    if y / Z.conj(y) != w:
        raise Hilbert90Failure("closed form failed")  # pragma: no cover
    return y


def j_map(c, space: QuadSpace) -> SquareClass:
    if isinstance(c, ZSquareClass):
        z = c.representative
        return SquareClass(z.field.rel_norm(z))
    if isinstance(c, UClass):
        p = c.representative
        Z = p.center_field
        y = hilbert90(p.z / Z(p.f * p.f))
        return SquareClass(Z.rel_norm(y))
    raise ValidationError(f"j is not defined on {type(c).__name__}")


def i_kernel(space: QuadSpace) -> list[FieldElement]:
    """Representatives of ker(i) in k*/k*^2."""
    k = space.field
    D = space.discriminant_value()
    extra = D if _half_dim_parity(space) == "even" else -D
    return [k.one] if is_square(extra) else [k.one, extra]


# -- special elements ---------------------------------------------------------

class SpecialStatus(enum.Enum):
    SPECIAL = "special"
    NOT_SPECIAL = "not_special"
    UNKNOWN = "unknown"


@dataclass
class SpecialResult:
    status: SpecialStatus
    target: SquareClass
    witness: Similitude | None = None


def is_special(theta, space: QuadSpace, bound: int = 50, budget: int = 200_000) -> SpecialResult:
    target = j_map(theta_class(theta, space), space)
    g = find_similitude_with_multiplier(space, target.rep, bound=bound, budget=budget)
    if g is Outcome.NOT_FOUND:
        return SpecialResult(SpecialStatus.NOT_SPECIAL, target)
    if g is Outcome.UNKNOWN:
        return SpecialResult(SpecialStatus.UNKNOWN, target)
    return SpecialResult(SpecialStatus.SPECIAL, target, g)


# -- spinor norms -------------------------------------------------------------

class Verdict(enum.Enum):
    SPINOR_NORM = "spinor_norm"
    NOT_SPINOR_NORM = "not_spinor_norm"
    UNKNOWN = "unknown"


@dataclass
class SpinorNormDecision:
    verdict: Verdict
    alpha: FieldElement
    vectors: list = field(default_factory=list)
    scale: FieldElement | None = None  # gamma = v_1...v_r / scale has mu_bar(gamma) = alpha
    witness: str | None = None

    def gamma(self, space: QuadSpace) -> CliffordElement:
        alg = algebra_for(space)
        out = alg.one
        for v in self.vectors:
            out = out * alg.embed_vector(v)
        return out * self.scale.inverse()

    def to_json(self):
        out = {"verdict": self.verdict.value, "alpha": self.alpha.to_json()}
        if self.verdict is Verdict.SPINOR_NORM:
            out["vectors"] = [[x.to_json() for x in v] for v in self.vectors]
            out["scale"] = self.scale.to_json()
        if self.witness:
            out["witness"] = self.witness
        return out


def _yes(alpha, space, vectors):
    prod = space.field.one
    for v in vectors:
        prod = prod * space.evaluate(v)
    s = space.field.sqrt(prod / alpha)
    assert s is not None
    return SpinorNormDecision(Verdict.SPINOR_NORM, alpha, list(vectors), s)


def _is_definite(space: QuadSpace) -> bool:
    if space.field != QQ:
        return False
    signs = {d.v > 0 for d in space.diagonal}
    return len(signs) == 1


def is_spinor_norm(alpha, space: QuadSpace, bound: int = 50, budget: int = 50_000) -> SpinorNormDecision:
    """Decide whether alpha lies in Sn(O+(q)(k)), with certificates.

    Yes carries vectors whose q-values multiply to alpha times a square.
    No is only returned for sound reasons: a definite form over Q and a
    negative alpha, or in dimension 2 a place where alpha is not a local norm.
    """
    k = space.field
    if isinstance(alpha, SquareClass):
        alpha = alpha.rep
    alpha = k(alpha)
    if not alpha:
        raise ZeroInput("alpha must be nonzero")
    if is_square(alpha):
        return _yes(alpha, space, [])
    if k == QQ:
        if _is_definite(space) and alpha.v < 0:
            return SpinorNormDecision(Verdict.NOT_SPINOR_NORM, alpha, witness="real place: the form is definite")
        if space.dim == 2:
            e = -space.diagonal[0] * space.diagonal[1]
            for place in relevant_places(alpha.v, e.v):
                if hilbert_symbol(alpha.v, e.v, place) == -1:
                    return SpinorNormDecision(
                        Verdict.NOT_SPINOR_NORM, alpha, witness=f"not a local norm at {place}"
                    )
    if k == QQ:
        vectors = _sum_of_squares_certificate(alpha, space)
        if vectors is not None:
            return _yes(alpha, space, vectors)
    # search q(v) q(e_i) in alpha k*^2
    tried = 0
    for coeffs in search_coefficients(k, space.dim, bound):
        if not any(coeffs):
            continue
        tried += 1
        if tried > budget:
            break
        qv = space.evaluate(coeffs)
        if not qv:
            continue
        for i, d in enumerate(space.diagonal):
            if is_square(qv * d / alpha):
                return _yes(alpha, space, [tuple(coeffs), space.basis_vector(i)])
    if k.is_finite:
        return SpinorNormDecision(Verdict.NOT_SPINOR_NORM, alpha, witness="exhaustive search")
    return SpinorNormDecision(Verdict.UNKNOWN, alpha)


def _sum_of_squares_certificate(alpha: FieldElement, space: QuadSpace):
    """Over Q: v with q(v) = d * alpha * den^2 for a repeated entry d, paired with e_i.

    v is supported on the coordinates sharing d, plus at most one other
    coordinate j (with d_j / d integral) carrying a small t.
    """
    N = alpha.v.numerator * alpha.v.denominator
    groups: dict = {}
    for i, d in enumerate(space.diagonal):
        groups.setdefault(d, []).append(i)
    for d, idx in groups.items():
        if len(idx) < 2 or (N > 0) != (d.v > 0):
            continue
        n = abs(N)
        found = None
        parts = _squares(n, len(idx))
        if parts is not None:
            found = (parts, None)
        else:
            for j in range(space.dim):
                ratio = space.diagonal[j].v / d.v
                if j in idx or ratio.denominator != 1 or ratio < 0:
                    continue
                for t in range(1, 64):
                    rest = n - int(ratio) * t * t
                    if rest < 0:
                        break
                    parts = _squares(rest, len(idx))
                    if parts is not None:
                        found = (parts, (j, t))
                        break
                if found:
                    break
        if found is None:
            continue
        parts, extra = found
        v = [QQ.zero] * space.dim
        for i, x in zip(idx, parts):
            v[i] = QQ(x)
        if extra:
            v[extra[0]] = QQ(extra[1])
        return [tuple(v), space.basis_vector(idx[0])]
    return None


def _squares(n: int, count: int):
    """n as a sum of ``count`` (2, 3 or 4+) integer squares, or None."""
    if n == 0:
        return (0,) * count
    if count >= 4:
        return tuple(int(x) for x in sum_of_four_squares(n)) + (0,) * (count - 4)
    if count == 3:
        m = n
        while m % 4 == 0:
            m //= 4
        if m % 8 == 7:
            return None
        return tuple(int(x) for x in sum_of_three_squares(n))
    pair = next(iter(sum_of_squares(n, 2, zeros=True)), None)
    return None if pair is None else tuple(int(x) for x in pair)


# -- alpha extraction ----------------------------------------------------------

def _split_square_norm(r: FieldElement):
    """For r in Z* with N(r) a square in k: (t, s) with t in k*, r = t s^2."""
    Z = r.field
    c = Z.base.sqrt(Z.rel_norm(r))
    if c is None:
        raise NotInImageOfI(f"N({r}) is not a square")
    a, _ = Z.coords(r)
    for cc in (c, -c):
        if a + cc:
            t = 2 * (a + cc)
            s = (r + Z(cc)) / Z(t)
            if Z(t) * s * s == r:
                return t, s
    raise NotInImageOfI("no square-norm decomposition")  # pragma: no cover


def _reduce_alpha(alpha: FieldElement, s: FieldElement):
    """Replace alpha by its square-class representative alpha / c^2 and s by c s."""
    k = alpha.field
    rep = k.square_class_rep(alpha)
    c = k.sqrt(alpha / rep)
    if c is None:  # non-canonical representatives
        return alpha, s
    return rep, s * s.field(c)


def extract_alpha(quotient, space: QuadSpace):
    """alpha in k* and s in Z* with quotient = i(alpha) * (class of s) exactly.

    n even: the Z-element equals alpha * s^2.
    n odd: the U-point equals (alpha N(s), alpha^2 s^4).
    """
    if isinstance(quotient, ZSquareClass):
        return _reduce_alpha(*_split_square_norm(quotient.representative))
    p = quotient.representative
    Z = p.center_field
    w = p.z / Z(p.f * p.f)
    y = hilbert90(w)
    _, s = _split_square_norm(y)
    alpha = p.f / Z.rel_norm(s)
    if (alpha * Z.rel_norm(s), Z(alpha * alpha) * s**4) != (p.f, p.z):
        raise NotInImageOfI("alpha extraction did not reproduce the quotient")
    return _reduce_alpha(alpha, s)


@dataclass
class ObstructionResult:
    theta: object
    witness: Similitude
    alpha: FieldElement
    decision: SpinorNormDecision
    certificate: OmegaElement | None = None  # omega over k with map(omega) = theta

    @property
    def verdict(self) -> Verdict:
        return self.decision.verdict

    def to_json(self):
        theta = self.theta.to_json()
        out = {
            "theta": theta,
            "special": "special",
            "witness": self.witness.to_json(),
            "alpha": self.alpha.to_json(),
            "verdict": self.verdict.value,
            "spinor_norm": self.decision.to_json(),
        }
        if self.certificate is not None:
            out["certificate"] = {
                "omega": omega_to_json(self.certificate.value),
                "similitude": self.certificate.similitude.to_json(),
            }
        return out


def omega_to_json(value: CliffordElement):
    """Sparse [blade bitmask, coefficient] pairs in blade order."""
    alg = value.algebra
    return [[b, value.coefficient(b).to_json()] for b in alg.blades if b in value.terms]


def omega_from_json(space: QuadSpace, data) -> CliffordElement:
    alg = algebra_for(space)
    return alg.element({int(b): space.field.from_json(c) for b, c in data})


def obstruction_alpha(theta, g: Similitude, space: QuadSpace | None = None, bound: int = 50,
                      omega_g: OmegaElement | None = None) -> ObstructionResult:
    """alpha with [theta] = S([g]) i(alpha), and its spinor-norm decision.

    On a Yes the certificate omega_g * gamma * s is rebuilt and checked to map
    exactly onto theta.
    """
    space = space or g.space
    parity = _half_dim_parity(space)
    omega_g = omega_g or lift_similitude_to_omega(g)
    image = image_map(omega_g)
    if parity == "odd":
        quotient = UClass(theta / image)
    else:
        quotient = ZSquareClass(theta / image)
    if not j_map(quotient, space).is_trivial():
        raise NotInImageOfI("theta / S([g]) is not in the kernel of j")
    alpha, s = extract_alpha(quotient, space)
    decision = is_spinor_norm(alpha, space, bound)
    if decision.verdict is not Verdict.SPINOR_NORM:
        # alpha is only defined modulo ker(i); try the other representatives
        for kappa in i_kernel(space)[1:]:
            other = is_spinor_norm(alpha * kappa, space, bound)
            if other.verdict is Verdict.SPINOR_NORM:
                alpha = alpha * kappa
                s = _rescale_for_kernel(s, kappa, space)
                decision = other
                break
    certificate = None
    if decision.verdict is Verdict.SPINOR_NORM:
        alg = algebra_for(space)
        value = omega_g.value * decision.gamma(space) * alg.from_center(s)
        gamma_part = OmegaElement.from_gamma(decision.gamma(space)) if decision.vectors else None
        sim = omega_g.similitude if gamma_part is None else omega_g.similitude * gamma_part.similitude
        certificate = OmegaElement(value, sim)
        if image_map(certificate) != theta:
            raise InconsistentLift("certificate does not map onto theta")
    return ObstructionResult(theta, g, alpha, decision, certificate)


def _rescale_for_kernel(s: FieldElement, kappa: FieldElement, space: QuadSpace) -> FieldElement:
    """Adjust s after replacing alpha by alpha * kappa with kappa in ker(i)."""
    Z = s.field
    zeta = Z.gen
    # n even: kappa = D = zeta^2, so alpha s^2 = (alpha D)(s/zeta)^2.
    # n odd: kappa = -D; (alpha N(s), alpha^2 s^4) = (alpha kappa N(s/zeta), (alpha kappa)^2 (s/zeta)^4)
    # since N(zeta) = -D and zeta^4 = D^2.
    return s / zeta


def verify_certificate(result: ObstructionResult) -> bool:
    cert = result.certificate
    return cert is not None and image_map(cert) == result.theta


# -- H^1(k, mu_4[Z]) over finite fields ---------------------------------------------

def _quotient_group(elements, subgroup, mul):
    cosets = {}
    for x in elements:
        key = frozenset(mul(x, h) for h in subgroup)
        cosets.setdefault(key, x)
    return cosets


def invariant_factors(elements, mul, identity) -> list[int]:
    """Invariant factors of a finite abelian group by splitting off max-order cyclic factors."""
    elements = list(elements)

    def order_in(x, sub):
        n, y = 1, x
        while y not in sub:
            y = mul(y, x)
            n += 1
        return n

    sub = {identity}
    factors = []
    while len(sub) < len(elements):
        best, best_order = None, 0
        for x in elements:
            o = order_in(x, sub)
            if o > best_order:
                best, best_order = x, o
        factors.append(best_order)
        power, new = identity, set()
        for _ in range(best_order):
            new |= {mul(power, h) for h in sub}
            power = mul(power, best)
        sub = new
    return factors


def frobenius_coinvariants(elements, frob, mul, inv, identity):
    """M / (F - 1) M for a finite multiplicative module M with Frobenius F."""
    elements = list(elements)
    image = {mul(frob(x), inv(x)) for x in elements}
    cosets = _quotient_group(elements, image, mul)
    reps = list(cosets.values())
    keys = {frozenset(mul(x, h) for h in image): x for x in reps}

    def coset_of(x):
        return next(k for k in keys if x in k)

    def qmul(a, b):
        return coset_of(mul(keys[a], keys[b]))

    ident = coset_of(identity)
    return list(keys), qmul, ident


@dataclass
class H1Report:
    order: int
    invariant_factors: list[int]
    module_order: int
    u_order: int
    u0_order: int
    quotient_order: int

    def to_json(self):
        return {
            "order": self.order,
            "invariant_factors": self.invariant_factors,
            "module_order": self.module_order,
            "u_order": self.u_order,
            "u0_order": self.u0_order,
            "u_mod_u0_order": self.quotient_order,
            "agree": self.order == self.quotient_order,
        }


def h1_mu4Z_finite_field(space: QuadSpace) -> H1Report:
    """H^1 of the Frobenius on ker(N: R_{Z/k} mu_4 -> mu_4), next to |U/U_0|."""
    k = space.field
    if not k.is_finite:
        raise UnsupportedField("h1 needs a finite base field")
    if _half_dim_parity(space) != "odd":
        raise WrongParity("h1 is computed for n odd")
    q = k.order
    r = 1 if q % 4 == 1 else 2
    K = Fq(k.p, k.degree * r)
    mu4 = [x for x in K.nonzero_elements() if x**4 == K.one]

    # over an algebraic closure R_{Z/k} mu_4 = mu_4 x mu_4, Frobenius swaps the factors
    def frob(pair):
        a, b = pair
        return (b**q, a**q)

    module = [(a, a.inverse()) for a in mu4]
    mul = lambda x, y: (x[0] * y[0], x[1] * y[1])  # noqa: E731
    inv = lambda x: (x[0].inverse(), x[1].inverse())  # noqa: E731
    ident = (K.one, K.one)
    assert all(frob(m) in module for m in module)
    quotient, qmul, qid = frobenius_coinvariants(module, frob, mul, inv, ident)
    factors = invariant_factors(quotient, qmul, qid)
    u = enumerate_u(space)
    u0 = enumerate_u0(space)
    classes = {UClass(p) for p in u}
    if len(u) // len(u0) != len(classes):
        raise InconsistentLift("U/U_0 class count disagrees with |U|/|U_0|")
    return H1Report(len(quotient), factors, len(module), len(u), len(u0), len(classes))
