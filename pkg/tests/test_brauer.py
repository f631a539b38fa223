import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinorlab.brauer import (
    REAL,
    QuaternionClass,
    conic_point,
    corestriction_consequence_check,
    dieudonne_split_check,
    hasse_invariant,
    hilbert_symbol,
    local_solvable,
    ramified_places,
    rational_forms_isometric,
    relevant_places,
)
from spinorlab.errors import ValidationError, ZeroInput
from spinorlab.exactfield import QQ, Fp, Qsqrt, squarefree_part
from spinorlab.quadform import QuadSpace, random_isometry, reflection
from spinorlab.similitude import Outcome, Similitude, find_similitude_with_multiplier

small_nonzero = st.integers(-60, 60).filter(bool)


def test_symbol_examples():
    for place in (2, 3, 5, 7, REAL):
        assert hilbert_symbol(1, 7, place) == 1
        assert hilbert_symbol(-3, 1, place) == 1
    assert hilbert_symbol(2, 5, 5) == -1
    assert hilbert_symbol(-1, -1, REAL) == -1
    assert hilbert_symbol(Fraction(2, 9), 5, 5) == -1


def test_ramification_examples():
    assert QuaternionClass(1, 7).is_split()
    assert ramified_places(-1, -1) == {2, REAL}
    assert ramified_places(2, 5) == {2, 5}
    assert not QuaternionClass(2, 5).is_split()
    assert QuaternionClass(Fp(5)(2), Fp(5)(3), field=Fp(5)).is_split()
    with pytest.raises(ZeroInput):
        hilbert_symbol(0, 3, 3)


@given(small_nonzero, small_nonzero)
def test_product_formula(a, b):
    prod = 1
    for v in relevant_places(a, b):
        prod *= hilbert_symbol(a, b, v)
    assert prod == 1


@given(small_nonzero, small_nonzero)
def test_symbol_matches_solvability_oracle(a, b):
    for v in relevant_places(a, b):
        assert (hilbert_symbol(a, b, v) == 1) == local_solvable(a, b, v)


@given(small_nonzero, small_nonzero, small_nonzero)
def test_bimultiplicativity(a, b, c):
    for v in relevant_places(a * c, b):
        assert hilbert_symbol(a * c, b, v) == hilbert_symbol(a, b, v) * hilbert_symbol(c, b, v)


@given(small_nonzero, small_nonzero)
def test_split_iff_rational_point(a, b):
    pt = conic_point(a, b, bound=40)
    if pt is not None:
        x, y, z = pt
        a0, b0 = squarefree_part(a), squarefree_part(b)
        assert a0 * x * x + b0 * y * y == z * z
        assert QuaternionClass(a, b).is_split()
    if not QuaternionClass(a, b).is_split():
        assert pt is None


def test_rational_isometry():
    assert rational_forms_isometric([1, 1], [2, 2])
    assert not rational_forms_isometric([1, 1], [1, 3])
    assert not rational_forms_isometric([1, 1], [-1, -1])
    assert rational_forms_isometric([1, 1, 1, 1], [2, 2, 2, 2])
    # <1,1,1,1> is a Pfister form, so it is similar to all its values
    assert rational_forms_isometric([1, 1, 1, 1], [3, 3, 3, 3])
    # same determinant and signature, Hasse invariant -1 at 3
    assert not rational_forms_isometric([1, 1, 1, 1], [1, 1, 3, 3])
    d = [1, 2, 3]
    assert hasse_invariant(d, REAL) == 1


def test_corestriction_examples():
    L = Qsqrt(2)
    chk = corestriction_consequence_check(-1, L, L.one)
    assert chk.premise == "split" and chk.consequence
    chk = corestriction_consequence_check(-1, L, L.make(1, 1))
    # (-1, 1+sqrt 2) is ramified at a real place of L, so the instance is skipped
    assert chk.premise == "non_split" and not chk.failed
    with pytest.raises(ValidationError):
        corestriction_consequence_check(-1, QQ, QQ(2))


def test_corestriction_random_run():
    rng = random.Random(99)
    run = 0
    for _ in range(400):
        m = rng.choice([2, 3, 5, 6, 7, -1, -2, -3, -5])
        d = rng.choice([-1, -2, 2, 3, -3, 5, 6, -7])
        L = Qsqrt(m)
        # f1 a norm twist: (z^2 - d y^2) * w^2 makes the premise hold with a certificate
        z, y, w = (L.make(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(3))
        val = z * z - L(QQ(d)) * y * y
        if not val or not w:
            continue
        chk = corestriction_consequence_check(d, L, val * w * w, certificate=(z, y))
        assert chk.premise == "split"
        assert not chk.failed
        run += 1
    assert run >= 50


def test_dieudonne_examples():
    sp = QuadSpace(QQ, [1, 1, 1, 2])
    tau = Similitude.from_isometry(reflection(sp, sp.basis_vector(0)))
    assert dieudonne_split_check(tau)
    rng = random.Random(4)
    count = 0
    for diag in ([1, 1, 1, 2], [1, 2, 3, 5], [1, -1, 1, 3], [1, 1, 1, 1, 1, 2]):
        space = QuadSpace(QQ, diag)
        for f in (2, 3, 5, 6, 10, 13, 17, -1, -2):
            g = find_similitude_with_multiplier(space, f, bound=5, budget=5000)
            if isinstance(g, Outcome):
                continue
            for _ in range(4):
                h = random_isometry(space, rng, proper=False, height=2, max_reflections=3)
                improper = g * h
                assert dieudonne_split_check(improper)
                count += 1
    assert count >= 25
    with pytest.raises(ValidationError):
        dieudonne_split_check(Similitude.identity(sp))
