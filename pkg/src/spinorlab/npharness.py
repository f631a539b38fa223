"""Norm-principle experiments: extensions, norms of image points, Scharlau construction."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .clifford import UPoint, algebra_for, image_map, lift_similitude_to_omega
from .errors import InvariantViolation, MalformedTower, SplitDiscriminantOverL, SplitDiscriminant, ValidationError
from .exactfield import QQ, Field, FieldElement, Fq, QuadraticExtension, Qsqrt, SquareClass, galois_orbit, norm
from .obstruction import (
    ObstructionResult,
    Verdict,
    j_map,
    obstruction_alpha,
    theta_class,
    verify_certificate,
)
from .quadform import QuadSpace
from .similitude import (
    Outcome,
    Similitude,
    find_similitude_with_multiplier,
    norm_form_similitude,
    random_proper_similitude,
)


@dataclass(frozen=True)
class ExtensionSpec:
    """A finite separable extension L/k: Q(sqrt d)/Q or F_{q^r}/F_q."""

    base: Field
    top: Field
    degree: int
    kind: str

    @classmethod
    def quadratic(cls, d: int) -> ExtensionSpec:
        return cls(QQ, Qsqrt(d), 2, "quadratic")

    @classmethod
    def finite(cls, base: Field, r: int) -> ExtensionSpec:
        if not base.is_finite or isinstance(base, QuadraticExtension):
            raise ValidationError("finite extensions start from F_p or F_{p^m}")
        if r < 1:
            raise ValidationError("degree must be positive")
        return cls(base, Fq(base.p, base.degree * r), r, "finite")

    @classmethod
    def from_json(cls, base: Field, obj) -> ExtensionSpec:
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError(f"an extension needs a 'kind': {obj!r}")
        if obj["kind"] == "quadratic":
            if base != QQ:
                raise ValidationError("quadratic extensions are over Q")
            return cls.quadratic(int(obj["d"]))
        if obj["kind"] == "finite":
            return cls.finite(base, int(obj["degree"]))
        raise ValidationError(f"unknown extension kind {obj['kind']!r}")

    def to_json(self):
        if self.kind == "quadratic":
            return {"kind": "quadratic", "d": int(self.top.d.v)}
        return {"kind": "finite", "degree": self.degree, "base": self.base.descriptor()}

    def embed(self, x) -> FieldElement:
        return self.top.embed(self.base(x))

    def conjugates(self, x: FieldElement) -> list[FieldElement]:
        if self.degree == 1:
            return [x]
        return galois_orbit(x, self.base)

    def norm(self, x: FieldElement) -> FieldElement:
        if self.degree == 1:
            return self.top.restrict(x, self.base) if self.top != self.base else x
        return norm(x, self.base)


def center_over(space: QuadSpace, ext: ExtensionSpec):
    """(Z over k, Z_L over L) with Z_L = L(zeta) for the same zeta."""
    Zk = algebra_for(space).center_field
    space_L = space.base_change(ext.top)
    try:
        ZL = algebra_for(space_L).center_field
    except SplitDiscriminant:
        raise SplitDiscriminantOverL(f"the discriminant becomes a square over {ext.top}") from None
    return Zk, ZL, space_L


def _center_norm(z: FieldElement, ext: ExtensionSpec, Zk: QuadraticExtension) -> FieldElement:
    """N_{Z_L/Z}(z) by multiplying coefficientwise Galois conjugates."""
    ZL = z.field
    if ZL.d != ext.embed(Zk.d):
        raise MalformedTower("Z_L is not the base change of Z")
    a, b = ZL.coords(z)
    ca, cb = ext.conjugates(a), ext.conjugates(b)
    out = ZL.one
    for x, y in zip(ca, cb):
        out = out * ZL.make(x, y)
    u, w = ZL.coords(out)
    return Zk.make(ext.top.restrict(u, ext.base), ext.top.restrict(w, ext.base))


def norm_of_theta(theta, ext: ExtensionSpec, space: QuadSpace):
    Zk, ZL, _ = center_over(space, ext)
    if isinstance(theta, UPoint):
        return UPoint(ext.norm(theta.f), _center_norm(theta.z, ext, Zk))
    if isinstance(theta, FieldElement) and theta.field == ZL:
        return _center_norm(theta, ext, Zk)
    raise MalformedTower(f"theta does not live over {ZL}")


def scharlau_go_plus(space: QuadSpace, ext: ExtensionSpec, g1: Similitude, bound: int = 50,
                     budget: int = 200_000):
    """A proper similitude over k with multiplier N_{L/k}(mu(g1)), or Outcome.UNKNOWN."""
    if g1.space.field != ext.top:
        raise ValidationError("g1 must be defined over the top field")
    f = ext.norm(g1.multiplier)
    g = find_similitude_with_multiplier(space, f, bound=bound, budget=budget)
    if g is Outcome.NOT_FOUND:
        raise InvariantViolation(f"norm {f} of a multiplier over L is not a multiplier over k")
    if isinstance(g, Similitude):
        if g.multiplier != f or not g.is_proper():
            raise InvariantViolation("constructed similitude fails its postcondition")
    return g


@dataclass
class SampleOutcome:
    index: int
    theta: object
    status: str  # yes / no / unknown
    result: ObstructionResult | None = None
    note: str = ""

    def to_json(self):
        out = {"index": self.index, "theta": _theta_json(self.theta), "status": self.status}
        if self.result is not None:
            out.update(self.result.to_json())
        if self.note:
            out["note"] = self.note
        return out


def _theta_json(theta):
    return theta.to_json()


@dataclass
class NPReport:
    map_name: str
    space: QuadSpace
    extension: ExtensionSpec
    samples: int
    seed: int
    outcomes: list[SampleOutcome] = field(default_factory=list)

    def tally(self) -> dict:
        counts = {"yes": 0, "no": 0, "unknown": 0}
        for o in self.outcomes:
            counts[o.status] += 1
        return counts

    @property
    def counterexample_candidates(self) -> list[SampleOutcome]:
        return [o for o in self.outcomes if o.status == "no"]

    def to_json(self):
        return {
            "map": self.map_name,
            "form": self.space.to_json(),
            "extension": self.extension.to_json(),
            "samples": self.samples,
            "seed": self.seed,
            "tally": self.tally(),
            "outcomes": [o.to_json() for o in self.outcomes],
            "counterexample_candidates": [o.index for o in self.counterexample_candidates],
        }


def map_name(space: QuadSpace) -> str:
    return "mu_star" if space.half_dim % 2 else "mu_bar"


def _j_commutes(theta_L, theta, ext, space, space_L) -> bool:
    left = j_map(theta_class(theta, space), space)
    right = j_map(theta_class(theta_L, space_L), space_L)
    return left == SquareClass(ext.norm(right.rep))


def run_sample(space: QuadSpace, ext: ExtensionSpec, g1: Similitude, index: int, bound: int = 50,
               budget: int = 200_000) -> SampleOutcome:
    """One weak-norm-principle trial for the image point of g1's lift over L."""
    space_L = g1.space
    omega1 = lift_similitude_to_omega(g1)
    theta_L = image_map(omega1)
    theta = norm_of_theta(theta_L, ext, space)
    if not _j_commutes(theta_L, theta, ext, space, space_L):
        raise InvariantViolation("j does not commute with the norm")
    g = scharlau_go_plus(space, ext, g1, bound=bound, budget=budget)
    if g is Outcome.UNKNOWN:
        return SampleOutcome(index, theta, "unknown", note="no similitude found within the search bound")
    if j_map(theta_class(theta, space), space) != SquareClass(g.multiplier):
        raise InvariantViolation("norm of an image point is not special")
    result = obstruction_alpha(theta, g, space, bound=bound)
    if result.verdict is Verdict.SPINOR_NORM:
        if not verify_certificate(result):
            raise InvariantViolation("certificate does not re-verify")
        return SampleOutcome(index, theta, "yes", result)
    if result.verdict is Verdict.NOT_SPINOR_NORM:
        return SampleOutcome(index, theta, "no", result)
    return SampleOutcome(index, theta, "unknown", result, note="spinor-norm search exhausted")


def weak_np_experiment(space: QuadSpace, ext: ExtensionSpec, samples: int, seed: int, bound: int = 50,
                       height: int = 2, max_reflections: int | None = None) -> NPReport:
    if space.field != ext.base:
        raise ValidationError("the form must be defined over the base of the extension")
    _, _, space_L = center_over(space, ext)
    rng = random.Random(seed)
    if max_reflections is None and not ext.base.is_finite:
        max_reflections = 2
    report = NPReport(map_name(space), space, ext, samples, seed)
    for index in range(samples):
        g1 = random_proper_similitude(space_L, rng, height=height, max_reflections=max_reflections)
        report.outcomes.append(run_sample(space, ext, g1, index, bound=bound))
    return report


def counterexample_search(config: dict):
    """Yield (run index, SampleOutcome) for every No or Unknown outcome.

    ``config`` has a list ``runs`` of {"form", "ext", "samples", "seed"}
    and an optional global ``bound``.
    """
    bound = int(config.get("bound", 50))
    for run_index, run in enumerate(config.get("runs", [])):
        space = QuadSpace.from_json(run["form"])
        ext = ExtensionSpec.from_json(space.field, run["ext"])
        report = weak_np_experiment(space, ext, int(run.get("samples", 10)), int(run.get("seed", 0)), bound=bound)
        for outcome in report.outcomes:
            if outcome.status != "yes":
                yield run_index, outcome


def curated_rational_examples():
    """(space, ext, g1) triples over L = Q(sqrt 2) with q = <1,1,1,1>.

    g1 runs through block norm-form similitudes and scalars, so the norms
    N(mu(g1)) include squares, 1 and non-squares such as 8 and 17.
    """
    ext = ExtensionSpec.quadratic(2)
    L = ext.top
    space = QuadSpace(QQ, [1, 1, 1, 1])
    space_L = space.base_change(L)
    r2 = L.gen
    out = []
    for a, b in ((L.one, L.one), (L.one, r2), (L.one + r2, L.one), (L(3), r2), (L.one + r2, r2)):
        out.append((space, ext, norm_form_similitude(space_L, a, b)))
    for c in (L.one + r2, r2, L(3)):
        out.append((space, ext, Similitude.scalar(space_L, c)))
    return out
