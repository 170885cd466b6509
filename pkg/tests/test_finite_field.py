import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclicfrob.errors import BadCongruence, FieldTooLarge, NonPrime
from cyclicfrob.finite_field import CycInt, char_eval, extend_field, make_field
from cyclicfrob.polynomials import Poly, is_irreducible


def test_prime_field_generators():
    assert make_field(7).generator == 3
    assert make_field(2).generator == 1
    F13 = make_field(13)
    assert F13.generator == 2


def test_f9_modulus_is_smallest_irreducible():
    F3 = make_field(3)
    expected = next(
        (c0, c1, 1)
        for c0, c1 in itertools.product(range(3), repeat=2)
        if is_irreducible(Poly(F3, (c0, c1, 1)))
    )
    assert make_field(3, 2).modulus == expected


@pytest.mark.parametrize("p,a", [(2, 1), (3, 2), (2, 4), (5, 1), (7, 1), (13, 1)])
def test_generator_and_log_table(p, a):
    F = make_field(p, a)
    q = F.q
    powers = [F.power(F.generator, k) for k in range(q - 1)]
    assert sorted(powers) == list(range(1, q))
    assert F.power(F.generator, q - 1) == 1
    assert all(F.log_of(F.elem(k)) == k for k in range(q - 1))


def test_make_field_errors():
    with pytest.raises(NonPrime):
        make_field(4)
    with pytest.raises(FieldTooLarge):
        make_field(2, 21)


def test_field_axioms_f9():
    F = make_field(3, 2)
    for x, y in itertools.product(range(9), repeat=2):
        assert F.add(x, y) == F.add(y, x)
        assert F.mul(x, y) == F.mul(y, x)
        if y:
            assert F.mul(F.div(x, y), y) == x
        assert F.add(F.sub(x, y), y) == x


def test_extension_f25():
    F5 = make_field(5)
    E = extend_field(F5, 2)
    assert E.order == 25
    assert E.norm_exponent == 6
    image = {E.power(E.generator, 6 * k) for k in range(4)}
    assert image == {E.embed(c) for c in range(1, 5)}
    # the norm of the extension generator is the base generator
    assert E.power(E.generator, 6) == F5.generator


def test_extension_degree_one_is_base():
    F7 = make_field(7)
    E = extend_field(F7, 1)
    assert E.order == 7
    assert all(E.mul(x, y) == F7.mul(x, y) for x in range(7) for y in range(7))


def test_extension_f49_embedding():
    F7 = make_field(7)
    E = extend_field(F7, 2)
    k = E.log_of(E.embed(3))
    assert k % 8 == 0
    assert E.power(E.generator, k) == 3


def test_extension_too_large():
    with pytest.raises(FieldTooLarge):
        extend_field(make_field(7), 9)


def test_char_eval_examples():
    F7 = make_field(7)
    assert char_eval(F7, 3, 0) == CycInt.zero(3)
    assert char_eval(F7, 3, 1) == CycInt.one(3)
    assert char_eval(F7, 3, 2) == CycInt.root(3, 2)
    with pytest.raises(BadCongruence):
        char_eval(make_field(5), 3, 2)


@pytest.mark.parametrize("q,n,s", [(7, 1, 3), (7, 2, 3), (7, 2, 6), (13, 2, 4), (5, 3, 4), (13, 1, 12)])
def test_orthogonality_and_powers(q, n, s):
    E = extend_field(make_field(q), n)
    total = CycInt.zero(s)
    for x in range(1, E.order):
        total = total + char_eval(E, s, x)
    assert total.is_zero()
    for x in range(1, E.order, max(1, E.order // 200)):
        assert char_eval(E, s, E.power(x, s)) == CycInt.one(s)


def test_char_multiplicative_random_pairs():
    E = extend_field(make_field(13), 2)
    rng = np.random.default_rng(1)
    for x, y in rng.integers(1, E.order, size=(1000, 2)).tolist():
        for s in (2, 3, 4, 6, 12):
            assert char_eval(E, s, E.mul(x, y), 12) == char_eval(E, s, x, 12) * char_eval(E, s, y, 12)


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6, 8, 12])
def test_root_encoding(r):
    for t in range(-r, 2 * r):
        z = CycInt.root(r, t).to_complex()
        assert abs(z - cmath.exp(2j * math.pi * t / r)) < 1e-12
        for u in range(r):
            assert CycInt.root(r, t) * CycInt.root(r, u) == CycInt.root(r, t + u)


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from([3, 4, 5, 6, 12]),
    st.lists(st.integers(-10**6, 10**6), min_size=12, max_size=12),
    st.lists(st.integers(-1000, 1000), min_size=12, max_size=12),
)
def test_cycint_ring_homomorphism(r, a, b):
    x = CycInt.from_counts(r, a[:r])
    y = CycInt.from_counts(r, b[:r])
    zx = sum(c * cmath.exp(2j * math.pi * t / r) for t, c in enumerate(a[:r]))
    zy = sum(c * cmath.exp(2j * math.pi * t / r) for t, c in enumerate(b[:r]))
    assert abs(x.to_complex() - zx) < 1e-12 * max(1, abs(zx)) + 1e-6
    assert abs((x * y).to_complex() - zx * zy) < 1e-9 * max(1, abs(zx * zy))
    assert (x + y) - y == x
    assert (x - x).is_zero()
