import itertools

import numpy as np
import pytest

from cyclicfrob.errors import BadCongruence
from cyclicfrob.finite_field import CycInt, extend_field, make_field
from cyclicfrob.polynomials import Poly, PrimePoly, enumerate_irreducibles, monic_polys
from cyclicfrob.residue_symbols import INFINITY, SymbolContext, symbol_context


def _divisors(r):
    return [s for s in range(1, r + 1) if r % s == 0]


def test_context_requires_congruence():
    with pytest.raises(BadCongruence):
        SymbolContext(make_field(5), 3)


@pytest.mark.parametrize("q,r", [(7, 3), (13, 4), (13, 12)])
def test_mu_generators_have_exact_order(q, r):
    ctx = symbol_context(make_field(q), r)
    F = ctx.field
    for s, z in ctx.mu_generators.items():
        orders = [k for k in range(1, s + 1) if F.power(z, k) == 1]
        assert orders[0] == s


@pytest.mark.parametrize("q,r,max_f", [(5, 4, 3), (7, 6, 3), (13, 12, 2)])
def test_euler_criterion_oracle(q, r, max_f):
    F = make_field(q)
    ctx = symbol_context(F, r)
    primes = enumerate_irreducibles(F, 1) + enumerate_irreducibles(F, 2)
    for d in range(0, max_f + 1):
        for f in monic_polys(F, d):
            for P in primes:
                for s in _divisors(r):
                    assert ctx.legendre(f, P, s) == ctx.legendre_euler(f, P, s)


def test_euler_oracle_random_cubics_q13():
    F = make_field(13)
    ctx = symbol_context(F, 12)
    rng = np.random.default_rng(0)
    primes = enumerate_irreducibles(F, 1) + enumerate_irreducibles(F, 2)
    for low in rng.integers(0, 13, size=(150, 3)).tolist():
        f = Poly(F, low + [1])
        for P in primes[::3]:
            for s in (2, 3, 4, 6, 12):
                assert ctx.legendre(f, P, s) == ctx.legendre_euler(f, P, s)


def test_legendre_basic_cases(F7):
    ctx = symbol_context(F7, 3)
    x = Poly.x(F7)
    one = Poly.one(F7)
    P = enumerate_irreducibles(F7, 2)[4]
    assert ctx.legendre(P.poly * (x + one), P, 3) == CycInt.zero(3)
    assert ctx.legendre(P.poly * x + one, P, 3) == CycInt.one(3)
    with pytest.raises(ValueError):
        ctx.legendre(x, PrimePoly.infinity(), 3)


def test_legendre_multiplicative(F7):
    ctx = symbol_context(F7, 6)
    fs = list(itertools.islice(monic_polys(F7, 2), 0, 49, 5))
    for P in enumerate_irreducibles(F7, 2)[:6]:
        for f, g in itertools.product(fs, repeat=2):
            assert ctx.legendre(f * g, P, 6) == ctx.legendre(f, P, 6) * ctx.legendre(g, P, 6)


def test_power_relation_between_orders(F7):
    ctx = symbol_context(F7, 6)
    for P in enumerate_irreducibles(F7, 1) + enumerate_irreducibles(F7, 2)[:8]:
        for f in itertools.islice(monic_polys(F7, 3), 0, 343, 17):
            for s in (1, 2, 3, 6):
                assert ctx.legendre(f, P, 6) ** (6 // s) == ctx.legendre(f, P, s)


def test_symbol_infinity(F7):
    ctx = symbol_context(F7, 6)
    x = Poly.x(F7)
    assert ctx.symbol_infinity(x**3 + x, 2) == CycInt.zero(6)
    assert ctx.symbol_infinity(x**6 + x, 3) == CycInt.one(6)
    ctx3 = symbol_context(F7, 3)
    assert ctx3.symbol_infinity(x**3 * 3, 3) == CycInt.root(3, 1)


def test_character_via_symbol_f25():
    F5 = make_field(5)
    ctx = symbol_context(F5, 2)
    x = Poly.x(F5)
    values = [ctx.char_via_symbol(x, a, 2, 2) for a in range(25)]
    assert sum(v.is_zero() for v in values) == 1
    assert sum(v == CycInt.one(2) for v in values) == 12
    assert sum(v == CycInt.integer(2, -1) for v in values) == 12


def test_character_via_symbol_exhaustive_small(F7):
    ctx = symbol_context(F7, 3)
    for n in (1, 2, 3):
        E = extend_field(F7, n)
        step = 1 if n < 3 else 7
        for f in itertools.islice(monic_polys(F7, 3), 0, 343, 41):
            for a in range(0, E.order, step):
                ctx.char_via_symbol(f, a, n, 3)
            ctx.char_via_symbol(f * 3, INFINITY, n, 3)


def test_character_via_symbol_vanishes_at_roots(F7):
    ctx = symbol_context(F7, 3)
    f = Poly(F7, (4, 0, 1))  # roots in F_49
    E = extend_field(F7, 2)
    roots = [a for a in range(E.order) if E.add(E.mul(a, a), 4) == 0]
    assert len(roots) == 2
    for a in roots:
        assert ctx.char_via_symbol(f, a, 2, 3).is_zero()


@pytest.mark.parametrize("q,r", [(7, 3), (13, 4), (13, 6)])
def test_unit_character_sums(q, r):
    F = make_field(q)
    ctx = symbol_context(F, r)
    for m_deg in (1, 2):
        for P in enumerate_irreducibles(F, m_deg)[:3]:
            for m in range(0, 2 * r):
                expected = r if (m * P.degree) % r == 0 else 0
                assert ctx.unit_character_sum(P, m) == expected
    for m in range(0, 2 * r):
        assert ctx.unit_character_sum(PrimePoly.infinity(), m) == (r if m % r == 0 else 0)
