import math
from fractions import Fraction

import numpy as np
import pytest

from cyclicfrob.errors import BadCongruence, EmptyFamily, NonIntegralGenus
from cyclicfrob.families import (
    P_INF,
    Branch,
    FamilySpec,
    branch_counts,
    count_by_leaves,
    count_family,
    count_from_series,
    count_naive,
    enumerate_family,
    genus_of,
    incexc_coeff,
    monic_count,
    phi,
    sample_family,
    series_coeff,
    unram_ratio,
)
from cyclicfrob.finite_field import CycInt, make_field
from cyclicfrob.polynomials import Poly, enumerate_irreducibles, gcd, is_squarefree


def _poly_of_degree(F, d):
    return Poly(F, [1] * d + [1])


def test_genus_examples():
    F = make_field(7)
    assert genus_of(2, {1: _poly_of_degree(F, 5)}) == 2
    assert genus_of(2, {1: _poly_of_degree(F, 6)}) == 2
    assert genus_of(3, {1: _poly_of_degree(F, 2), 2: _poly_of_degree(F, 1)}) == 2
    with pytest.raises(NonIntegralGenus):
        genus_of(4, {1: _poly_of_degree(F, 2), 2: _poly_of_degree(F, 1)})


def test_spec_validation():
    with pytest.raises(BadCongruence):
        FamilySpec(make_field(5), 3, 2)
    with pytest.raises(EmptyFamily):
        FamilySpec(make_field(7), 3, 1) and FamilySpec(make_field(13), 4, 2)
    assert FamilySpec(make_field(7), 3, 1).d == 3


def test_enumeration_small():
    spec = FamilySpec(make_field(3), 2, 1)
    members = list(enumerate_family(spec))
    assert len(members) == 144 == 2 * ((3**4 - 3**3) + (3**3 - 3**2))
    assert len(set(members)) == 144
    for m in members:
        assert m.genus == 1
        assert is_squarefree(m.monic_F)
        assert spec.allowed_class(m.branch, m.deg_F)


def test_enumeration_invariants_r3():
    spec = FamilySpec(make_field(7), 3, 1)
    members = list(enumerate_family(spec))
    assert len(members) == count_family(spec)
    for m in members:
        assert m.genus == 1
        assert m.radical_degree == (3 if m.branch is Branch.R else 2)
        assert math.gcd(m.deg_F, 3) in (1, 3)
        parts = [m.part(i) for i in (1, 2)]
        assert all(is_squarefree(p) for p in parts)
        assert gcd(parts[0], parts[1]).degree == 0


@pytest.mark.parametrize("q,r,g", [(3, 2, 1), (3, 2, 2), (7, 3, 1), (7, 3, 2), (5, 4, 3)])
def test_counting_routes_agree(q, r, g):
    spec = FamilySpec(make_field(q), r, g)
    n = count_family(spec)
    assert count_from_series(spec) == n
    assert count_by_leaves(spec) == n
    if n <= 10_000:
        assert sum(1 for _ in enumerate_family(spec)) == n
    if q**spec.d <= 3**6:
        assert count_naive(spec) == n


def test_refined_counts_by_class():
    spec = FamilySpec(make_field(7), 3, 2)
    tally = {}
    for m in enumerate_family(spec):
        if m.alpha_index == 0:
            key = (m.branch, m.deg_F % 3)
            tally[key] = tally.get(key, 0) + 1
    for branch, per_k in branch_counts(spec).items():
        for k, n in per_k.items():
            assert tally[(branch, k)] == n == monic_count(spec, spec.radical_degree(branch), k)


def test_coprime_counts():
    spec = FamilySpec(make_field(3), 2, 1)
    members = list(enumerate_family(spec))
    for P in enumerate_irreducibles(spec.field, 1) + enumerate_irreducibles(spec.field, 2):
        brute = sum(1 for m in members if gcd(m.monic_F, P.poly).degree == 0)
        assert count_family(spec, P) == brute == count_naive(spec, P.poly) == count_by_leaves(spec, P)
    brute_inf = sum(1 for m in members if m.deg_F % 2 == 0)
    assert count_family(spec, P_INF) == brute_inf == 2 * monic_count(spec, spec.d, 0)


def test_series_examples():
    for q in (3, 5, 7):
        F = make_field(q)
        for r in (2, 3, 4, 6):
            if (q - 1) % r:
                continue
            H = series_coeff(r, 1, None, 10, F)
            assert H[0] == 1
            assert H[1] == phi(r) * q
        H2 = series_coeff(2, 1, None, 12, F)
        assert all(H2[d] == q**d - q ** (d - 1) for d in range(2, 13))


def test_inclusion_exclusion_identity():
    F3 = make_field(3)
    primes = enumerate_irreducibles(F3, 1) + enumerate_irreducibles(F3, 2)
    for P in primes:
        for s in (1, 2):
            for d in range(0, 9):
                lhs = incexc_coeff(2, s, P, d, F3)
                assert lhs == CycInt.integer(2, series_coeff(2, s, P, d, F3)[d])
    F13 = make_field(13)
    for P in enumerate_irreducibles(F13, 1)[:2] + enumerate_irreducibles(F13, 2)[:2]:
        for s in (1, 2, 4):
            for d in range(0, 7):
                assert incexc_coeff(4, s, P, d, F13) == CycInt.integer(4, series_coeff(4, s, P, d, F13)[d])
    # below deg P the coefficient is that of the unrestricted series
    P3 = enumerate_irreducibles(F3, 3)[0]
    for d in range(3):
        assert incexc_coeff(2, 1, P3, d, F3) == CycInt.integer(2, series_coeff(2, 1, None, d, F3)[d])


def test_unram_ratio_examples():
    spec = FamilySpec(make_field(7), 3, 2)
    big = enumerate_irreducibles(spec.field, 5)[0]
    assert unram_ratio(spec, big)[0] == 1
    for g in (2, 4, 6, 8):
        spec = FamilySpec(make_field(7), 3, g)
        exact, formula, res = unram_ratio(spec, P_INF)
        assert abs(exact - Fraction(7, 9)) < Fraction(1, g)
        assert res < Fraction(1, g)


def test_sampling_contract():
    spec = FamilySpec(make_field(7), 3, 2)
    assert sample_family(spec, 0, 1) == []
    a = sample_family(spec, 50, 123)
    assert a == sample_family(spec, 50, 123)
    assert a != sample_family(spec, 50, 124)
    for m in a:
        assert m.genus == 2
        assert is_squarefree(m.part(1) * m.part(2))


def test_sampling_branch_frequencies():
    spec = FamilySpec(make_field(7), 3, 2)
    draws = sample_family(spec, 10_000, 7)
    p = count_family(spec, P_INF) / count_family(spec)
    freq = sum(m.branch is Branch.R for m in draws) / len(draws)
    assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / len(draws))
    alphas = np.bincount([m.alpha_index for m in draws], minlength=3) / len(draws)
    assert np.all(np.abs(alphas - 1 / 3) <= 3 * math.sqrt(2 / 9 / len(draws)))


def test_sampling_uniform_over_members():
    spec = FamilySpec(make_field(3), 2, 1)
    draws = sample_family(spec, 14_400, 3)
    counts = {}
    for m in draws:
        counts[m] = counts.get(m, 0) + 1
    assert len(counts) == 144
    obs = np.array(list(counts.values()))
    chi2 = float(((obs - 100) ** 2 / 100).sum())
    assert chi2 < 143 + 5 * math.sqrt(2 * 143)


@pytest.mark.parametrize("q,r", [(7, 3), (13, 3), (5, 4), (13, 4)])
def test_series_growth_is_polynomial_in_d(q, r):
    # [u^d]H_{r;1}/q^d is a polynomial of degree phi(r)-1 in d up to a
    # geometrically small error, so its phi(r)-th difference decays
    F = make_field(q)
    H = series_coeff(r, 1, None, 30, F)
    c = [Fraction(H[d], q**d) for d in range(31)]
    k = phi(r)
    diffs = c
    for _ in range(k):
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    for d in range(5, 26):
        assert abs(float(diffs[d])) <= q ** (-d / 3)
