import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinorlab.brauer import similitude_locally_possible
from spinorlab.errors import ImproperIsometry, OddDimension, ValidationError
from spinorlab.exactfield import QQ, Fp, SquareClass
from spinorlab.quadform import Isometry, QuadSpace, enumerate_orthogonal_group, random_isometry, reflection
from spinorlab.similitude import (
    Outcome,
    PGOPlusClass,
    Similitude,
    correct_to_proper,
    enumerate_pgo_plus,
    find_similitude_with_multiplier,
    is_proper,
    multiplier,
    norm_form_similitude,
    random_proper_similitude,
)


def test_multiplier_examples(q4_q, rng):
    assert multiplier(Similitude.scalar(q4_q, 3)) == QQ(9)
    h = random_isometry(q4_q, rng, proper=True, height=2, max_reflections=4)
    assert multiplier(Similitude.from_isometry(h)) == QQ(1)
    for _ in range(10):
        a = random_proper_similitude(q4_q, rng, height=2, max_reflections=2)
        b = random_proper_similitude(q4_q, rng, height=2, max_reflections=2)
        ab = a * b
        assert multiplier(ab) == multiplier(a) * multiplier(b)
        Similitude.checked(q4_q, ab.matrix, ab.multiplier)


def test_is_proper_examples(q4_f3):
    assert is_proper(Similitude.identity(q4_f3))
    assert not is_proper(Similitude.from_isometry(reflection(q4_f3, q4_f3.basis_vector(0))))
    assert is_proper(Similitude.scalar(q4_f3, 2))
    with pytest.raises(OddDimension):
        is_proper(Similitude.identity(QuadSpace(QQ, [1, 1, 1])))


def test_checked_rejects_non_similitudes(q4_q):
    m = [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    with pytest.raises(ValidationError):
        Similitude.checked(q4_q, m)


def test_correct_to_proper_examples(q4_f3):
    tau = Similitude.from_isometry(reflection(q4_f3, q4_f3.basis_vector(0)))
    g = correct_to_proper(tau)
    assert g == Similitude.identity(q4_f3)
    for h in enumerate_orthogonal_group(q4_f3):
        if not h.is_proper():
            g = correct_to_proper(Similitude.from_isometry(h))
            assert is_proper(g) and g.multiplier == Fp(3).one
    with pytest.raises(ImproperIsometry):
        correct_to_proper(Similitude.identity(q4_f3))


def test_correct_to_proper_random_f5(q4_f5):
    for seed in range(50):
        rng = random.Random(seed)
        g = random_proper_similitude(q4_f5, rng)
        bad = g * reflection(q4_f5, q4_f5.basis_vector(seed % 4))
        fixed = correct_to_proper(bad)
        assert is_proper(fixed) and fixed.multiplier == bad.multiplier


def test_square_multiplier_gives_scalar(q4_q):
    g = find_similitude_with_multiplier(q4_q, 49)
    assert g == Similitude.scalar(q4_q, 7) or g == Similitude.scalar(q4_q, -7)


def test_finite_field_multipliers_all_realized(q4_f3, q6_f3, q4_f5):
    # even-dimensional forms over finite fields have every multiplier
    for sp in (q4_f3, q6_f3, q4_f5):
        for f in sp.field.nonzero_elements():
            g = find_similitude_with_multiplier(sp, f)
            assert isinstance(g, Similitude)
            assert g.multiplier == f and is_proper(g)
            Similitude.checked(sp, g.matrix, f)


def test_odd_dimension_only_square_multipliers():
    sp = QuadSpace(Fp(3), [1, 1, 2])
    assert find_similitude_with_multiplier(sp, 2) is Outcome.NOT_FOUND


@pytest.mark.parametrize("diag", [[1, 1, 1, 1], [1, 1, 1, 2], [1, -1, 3, 5], [1, 1, 1, 1, 1, 1]])
@pytest.mark.parametrize("f", [2, 3, -1, 5, 6, 7, -3])
def test_search_agrees_with_local_conditions(diag, f):
    sp = QuadSpace(QQ, diag)
    g = find_similitude_with_multiplier(sp, f, bound=6, budget=20000)
    possible = similitude_locally_possible(sp, f)
    if isinstance(g, Similitude):
        assert possible
        assert g.multiplier == QQ(f) and is_proper(g)
    elif g is Outcome.NOT_FOUND:
        assert not possible
    else:
        # a bounded search may give up, but never on a provably impossible case it could decide
        assert g is Outcome.UNKNOWN
    pre = find_similitude_with_multiplier(sp, f, bound=6, budget=20000, local_precheck=True)
    if not possible:
        assert pre is Outcome.NOT_FOUND


def test_two_on_sum_of_four_squares():
    sp = QuadSpace(QQ, [1, 1, 1, 1])
    g = find_similitude_with_multiplier(sp, 2)
    assert isinstance(g, Similitude) and similitude_locally_possible(sp, 2)


def test_norm_form_similitude():
    sp = QuadSpace(QQ, [1, 2, 3, 6])
    g = norm_form_similitude(sp, 1, 1)
    assert g.multiplier == QQ(3)
    Similitude.checked(sp, g.matrix, g.multiplier)
    assert is_proper(g)
    assert norm_form_similitude(QuadSpace(QQ, [1, 2, 1, 3]), 1, 1) is None


def test_inverse_and_pgo_classes(q4_f3, rng):
    for _ in range(10):
        g = random_proper_similitude(q4_f3, rng)
        inv = g.inverse()
        assert (g * inv) == Similitude.identity(q4_f3)
        assert PGOPlusClass(g) == PGOPlusClass(g * Similitude.scalar(q4_f3, 2))
        c = PGOPlusClass(g).canonical()
        assert PGOPlusClass(c) == PGOPlusClass(g)


def test_pgo_plus_size_q4_f3(q4_f3):
    # |GO+| = |O+| * |{multipliers}|, modulo the scalars k*
    classes = enumerate_pgo_plus(q4_f3)
    o_plus = enumerate_orthogonal_group(q4_f3, proper_only=True)
    assert len(classes) == len(o_plus) * 2 // 2
    assert len(classes) == 720


@given(st.integers(0, 10**6))
def test_random_proper_similitude_is_valid(seed):
    rng = random.Random(seed)
    sp = QuadSpace(QQ, [1, 1, 1, 2])
    g = random_proper_similitude(sp, rng, height=2, max_reflections=2)
    Similitude.checked(sp, g.matrix, g.multiplier)
    assert is_proper(g)
    assert SquareClass(g.multiplier) == SquareClass(g.inverse().multiplier)
