import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinorlab.errors import DimensionMismatch, ImproperIsometry, IsotropicVector, ZeroInput
from spinorlab.exactfield import QQ, Fp, Qsqrt, SquareClass
from spinorlab.linalg import identity, mat_mul, transpose
from spinorlab.quadform import (
    Isometry,
    QuadSpace,
    cartan_dieudonne,
    compose_reflections,
    enumerate_orthogonal_group,
    random_anisotropic_vector,
    random_isometry,
    reflection,
    search_coefficients,
    spinor_norm,
    spinor_norm_certificate,
    spinor_norm_group,
)


def orthogonal_order(q, dim, eps):
    """Textbook order of O(q) for a regular form over F_q."""
    if dim % 2:
        n = dim // 2
        out = 2 * q ** (n * n)
        for i in range(1, n + 1):
            out *= q ** (2 * i) - 1
        return out
    n = dim // 2
    out = 2 * q ** (n * (n - 1)) * (q**n - eps)
    for i in range(1, n):
        out *= q ** (2 * i) - 1
    return out


def witt_sign(space):
    # split (+1) iff the signed discriminant is a square
    return 1 if space.discriminant().is_trivial() else -1


def test_evaluate_examples():
    assert QuadSpace(QQ, [1, 1]).evaluate((QQ(1), QQ(0))) == QQ(1)
    F = Fp(3)
    assert QuadSpace(F, [1, 1, 1, 2]).evaluate(tuple(F(1) for _ in range(4))) == F(2)
    assert QuadSpace(QQ, [1] * 6).evaluate((QQ(1),) * 6) == QQ(6)


def test_construction_errors():
    with pytest.raises(ZeroInput, match=r"diagonal\[2\]"):
        QuadSpace(QQ, [1, 1, 0])
    with pytest.raises(DimensionMismatch):
        QuadSpace(QQ, [1])
    sp = QuadSpace(QQ, [1, -1])
    with pytest.raises(IsotropicVector):
        reflection(sp, (1, 1))


def test_reflection_examples(rng):
    sp = QuadSpace(QQ, [1, 1])
    r = reflection(sp, (1, 0))
    assert r.matrix == ((QQ(-1), QQ(0)), (QQ(0), QQ(1)))
    F5 = QuadSpace(Fp(5), [1, 2, 3])
    for _ in range(20):
        v = random_anisotropic_vector(F5, rng)
        t = reflection(F5, v)
        assert t.det == Fp(5)(-1)
        assert (t * t).matrix == identity(Fp(5), 3)


def test_discriminant_examples():
    F3 = Fp(3)
    assert QuadSpace(F3, [1, 1, 1, 2]).discriminant_value() == F3(2)
    assert not QuadSpace(F3, [1, 1, 1, 2]).discriminant().is_trivial()
    assert QuadSpace(QQ, [1] * 6).discriminant_value() == QQ(-1)
    assert QuadSpace(QQ, [1, 1]).discriminant_value() == QQ(-1)


def test_cartan_dieudonne_examples():
    F3 = Fp(3)
    sp = QuadSpace(F3, [1, 2])
    assert cartan_dieudonne(Isometry.identity(sp)) == []
    v = (F3(1), F3(0))
    assert cartan_dieudonne(reflection(sp, v)) == [v]
    minus = Isometry(sp, tuple(tuple(-x for x in row) for row in identity(F3, 2)))
    vecs = cartan_dieudonne(minus)
    assert len(vecs) == 2
    assert compose_reflections(sp, vecs) == minus


def test_spinor_norm_examples():
    sp6 = QuadSpace(QQ, [1] * 6)
    e = [sp6.basis_vector(i) for i in range(2)]
    assert spinor_norm(Isometry.identity(sp6)).is_trivial()
    assert spinor_norm(compose_reflections(sp6, e)).is_trivial()
    F3 = Fp(3)
    sp2 = QuadSpace(F3, [1, 2])
    g = compose_reflections(sp2, [sp2.basis_vector(0), sp2.basis_vector(1)])
    assert spinor_norm(g) == SquareClass(F3(2))
    with pytest.raises(ImproperIsometry):
        spinor_norm(reflection(sp2, sp2.basis_vector(0)))


@pytest.mark.parametrize("p,diag", [(3, [1, 1]), (3, [1, 2]), (5, [1, 1]), (5, [1, 2]), (3, [1, 1, 1]),
                                    (3, [1, 1, 1, 2]), (3, [1, 1, 1, 1]), (5, [1, 2, 3])])
def test_orthogonal_group_orders(p, diag):
    sp = QuadSpace(Fp(p), diag)
    group = enumerate_orthogonal_group(sp)
    assert len(group) == orthogonal_order(p, len(diag), witt_sign(sp))
    proper = [g for g in group if g.is_proper()]
    assert 2 * len(proper) == len(group)


def test_spinor_norm_group_examples():
    F3, F5 = Fp(3), Fp(5)
    full3 = {SquareClass(F3(1)), SquareClass(F3(2))}
    assert spinor_norm_group(QuadSpace(F3, [1, 1, 1, 2])) == full3
    # brute force: classes of q(v)q(w) over anisotropic pairs
    for sp in (QuadSpace(F5, [1, 1]), QuadSpace(F3, [1, 1]), QuadSpace(F3, [1, 2])):
        F = sp.field
        vecs = [(a, b) for a in F.elements() for b in F.elements() if sp.evaluate((a, b))]
        brute = {SquareClass(sp.evaluate(v) * sp.evaluate(w)) for v in vecs for w in vecs}
        assert spinor_norm_group(sp) == brute


def test_spinor_norm_matches_enumeration_q4_f3(q4_f3):
    rng = random.Random(3)
    group = enumerate_orthogonal_group(q4_f3, proper_only=True)
    for g in rng.sample(group, 60):
        vecs, prod = spinor_norm_certificate(g)
        assert compose_reflections(q4_f3, vecs) == g
        # a shuffled decomposition gives the same class
        assert SquareClass(prod) == spinor_norm(g, random.Random(len(vecs)))


@given(st.integers(0, 10**6))
def test_cartan_dieudonne_recomposes_over_q(seed):
    rng = random.Random(seed)
    sp = QuadSpace(QQ, [1, 2, -3, 5])
    g = random_isometry(sp, rng, height=2, max_reflections=4)
    vecs = cartan_dieudonne(g)
    assert compose_reflections(sp, vecs) == g
    assert len(vecs) <= 2 * sp.dim


@given(st.integers(0, 10**6))
def test_isometry_preserves_form_over_quadratic_field(seed):
    rng = random.Random(seed)
    L = Qsqrt(2)
    sp = QuadSpace(L, [1, 1, 1, 2])
    g = random_isometry(sp, rng, proper=True, height=1, max_reflections=2)
    G = sp.gram
    assert mat_mul(mat_mul(transpose(g.matrix), G), g.matrix) == G
    assert g.is_proper()


def test_search_coefficients_shapes():
    F3 = Fp(3)
    assert len(list(search_coefficients(F3, 2, 5))) == 9
    got = list(search_coefficients(QQ, 3, 1))
    assert len(set(got)) == len(got)
    assert all(len(c) == 3 for c in got)


def test_json_round_trip(q4_f3):
    assert QuadSpace.from_json(q4_f3.to_json()) == q4_f3
    sp = QuadSpace(QQ, ["1/2", 3])
    assert QuadSpace.from_json(sp.to_json()) == sp
