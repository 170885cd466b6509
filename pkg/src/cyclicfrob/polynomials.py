"""Univariate polynomials over a FieldSpec: gcd, squarefree tests, factoring,
and enumeration of monic irreducibles.

Polynomials are ordered by degree, then coefficient by coefficient from the
constant term upward, comparing field elements by their discrete-log rank
(0 first, then beta^0, beta^1, ...).  Enumeration follows this order.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from sympy import divisors, mobius

from .errors import BothZero, DegreeTooLarge, TooMany, ZeroPolynomial
from .finite_field import MAX_EXT_ORDER, ZERO_LOG, FieldSpec, extend_field

MAX_FACTOR_DEGREE = 64


class Poly:
    """Immutable polynomial with coefficients (low degree first) in ``field``."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldSpec, coeffs: Sequence[int] = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.field = field
        self.coeffs = tuple(int(x) for x in c)

    @classmethod
    def x(cls, field: FieldSpec) -> Poly:
        return cls(field, (0, 1))

    @classmethod
    def const(cls, field: FieldSpec, c: int) -> Poly:
        return cls(field, (c,))

    @classmethod
    def one(cls, field: FieldSpec) -> Poly:
        return cls(field, (1,))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.lead == 1

    def monic(self) -> Poly:
        if self.is_zero():
            raise ZeroPolynomial("cannot normalise the zero polynomial")
        inv = self.field.inv(self.lead)
        return self.scale(inv)

    def scale(self, c: int) -> Poly:
        mul = self.field.mul
        return Poly(self.field, [mul(a, c) for a in self.coeffs])

    def __add__(self, other: Poly) -> Poly:
        add = self.field.add
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly(self.field, [add(x, y) for x, y in itertools.zip_longest(a, b, fillvalue=0)])

    def __neg__(self) -> Poly:
        return Poly(self.field, [self.field.neg(a) for a in self.coeffs])

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        if isinstance(other, int):
            return self.scale(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(self.field)
        add, mul = self.field.add, self.field.mul
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = add(out[i + j], mul(x, y))
        return Poly(self.field, out)

    def __divmod__(self, other: Poly) -> tuple[Poly, Poly]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        rem = list(self.coeffs)
        db = other.degree
        if len(rem) - 1 < db:
            return Poly(f), self
        inv_lead = f.inv(other.lead)
        quot = [0] * (len(rem) - db)
        b = other.coeffs
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            c = f.mul(c, inv_lead)
            quot[i - db] = c
            nc = f.neg(c)
            for j in range(db + 1):
                if b[j]:
                    rem[i - db + j] = f.add(rem[i - db + j], f.mul(nc, b[j]))
        return Poly(f, quot), Poly(f, rem[:db])

    def __mod__(self, other: Poly) -> Poly:
        return divmod(self, other)[1]

    def __floordiv__(self, other: Poly) -> Poly:
        return divmod(self, other)[0]

    def __pow__(self, e: int) -> Poly:
        result = Poly.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def powmod(self, e: int, mod: Poly) -> Poly:
        result = Poly.one(self.field) % mod
        base = self % mod
        while e:
            if e & 1:
                result = (result * base) % mod
            base = (base * base) % mod
            e >>= 1
        return result

    def derivative(self) -> Poly:
        f = self.field
        out = []
        for i, c in enumerate(self.coeffs[1:], start=1):
            k = i % f.p
            acc = 0
            for _ in range(k):
                acc = f.add(acc, c)
            out.append(acc)
        return Poly(f, out)

    def __call__(self, x: int) -> int:
        f = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def sort_key(self) -> tuple:
        rank = self.field.rank
        return (self.degree, tuple(rank(c) for c in self.coeffs))

    def __lt__(self, other: Poly) -> bool:
        return self.sort_key() < other.sort_key()

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs and self.field == other.field

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if c == 1 and mono:
                terms.append(mono)
            else:
                terms.append(f"{c}{'*' if mono else ''}{mono}")
        return " + ".join(terms)


class PrimePoly:
    """A monic irreducible polynomial, or the prime at infinity (degree 1)."""

    __slots__ = ("poly", "degree")

    def __init__(self, poly: Poly | None, _trusted: bool = False):
        if poly is None:
            self.poly = None
            self.degree = 1
            return
        if not _trusted and not (poly.is_monic() and is_irreducible(poly)):
            raise ValueError(f"{poly!r} is not monic irreducible")
        self.poly = poly
        self.degree = poly.degree

    @classmethod
    def infinity(cls) -> PrimePoly:
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.poly is None

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimePoly) and self.poly == other.poly

    def __hash__(self) -> int:
        return hash(self.poly)

    def __repr__(self) -> str:
        return "P_inf" if self.poly is None else f"PrimePoly({self.poly!r})"


def gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd."""
    if f.is_zero() and g.is_zero():
        raise BothZero("gcd(0, 0) is undefined")
    while not g.is_zero():
        f, g = g, f % g
    return f.monic()


def is_squarefree(f: Poly) -> bool:
    if f.is_zero():
        raise ZeroPolynomial("squarefreeness of 0")
    if f.degree <= 0:
        return True
    return gcd(f, f.derivative()).degree == 0


def is_irreducible(f: Poly) -> bool:
    """Rabin's test."""
    n = f.degree
    if n <= 0:
        return False
    if n == 1:
        return True
    q = f.field.q
    f = f.monic()
    x = Poly.x(f.field)
    if x.powmod(q**n, f) != x % f:
        return False
    for ell in _prime_divisors(n):
        h = x.powmod(q ** (n // ell), f) - x
        if gcd(f, h).degree != 0:
            return False
    return True


def _prime_divisors(n: int) -> list[int]:
    return [d for d in range(2, n + 1) if n % d == 0 and all(d % e for e in range(2, d))]


def _pth_root(f: Poly) -> Poly:
    fld = f.field
    p = fld.p
    e = fld.q // p
    return Poly(fld, [fld.power(f.coeffs[i], e) for i in range(0, len(f.coeffs), p)])


def _squarefree_decomposition(f: Poly) -> list[tuple[Poly, int]]:
    """Monic f -> [(g_i, i)] with g_i squarefree, pairwise coprime, f = prod g_i^i."""
    out: list[tuple[Poly, int]] = []
    p = f.field.p

    def rec(f: Poly, mult: int):
        if f.degree <= 0:
            return
        fp = f.derivative()
        if fp.is_zero():
            rec(_pth_root(f), mult * p)
            return
        c = gcd(f, fp)
        w = f // c
        i = 1
        while w.degree > 0:
            y = gcd(w, c)
            z = w // y
            if z.degree > 0:
                out.append((z, i * mult))
            i += 1
            w = y
            c = c // y
        if c.degree > 0:
            rec(_pth_root(c), mult * p)

    rec(f, 1)
    return out


def _distinct_degree(f: Poly) -> list[tuple[Poly, int]]:
    q = f.field.q
    x = Poly.x(f.field)
    out = []
    h = x
    i = 0
    while f.degree >= 2 * (i + 1):
        i += 1
        h = h.powmod(q, f)
        g = gcd(f, h - x)
        if g.degree > 0:
            out.append((g, i))
            f = f // g
            h = h % f
    if f.degree > 0:
        out.append((f, f.degree))
    return out


def _equal_degree(f: Poly, m: int) -> list[Poly]:
    if f.degree == m:
        return [f]
    fld = f.field
    if m == 1:
        return [Poly(fld, (fld.neg(c), 1)) for c in fld.elements() if f(c) == 0]
    if fld.q**m <= MAX_EXT_ORDER:
        found = []
        for P in enumerate_irreducibles(fld, m):
            if (f % P.poly).is_zero():
                found.append(P.poly)
                if len(found) * m == f.degree:
                    break
        return found
    return _cantor_zassenhaus(f, m)


def _cantor_zassenhaus(f: Poly, m: int) -> list[Poly]:
    # fixed seed keeps the factor order reproducible
    fld = f.field
    rng = np.random.default_rng(f.degree * 7919 + m)
    if f.degree == m:
        return [f]
    while True:
        a = Poly(fld, rng.integers(0, fld.q, size=f.degree).tolist())
        if a.degree <= 0:
            continue
        if fld.p == 2:
            t = a
            acc = a
            for _ in range(fld.a * m - 1):
                t = (t * t) % f
                acc = acc + t
            b = acc
        else:
            b = a.powmod((fld.q**m - 1) // 2, f) - Poly.one(fld)
        g = gcd(f, b) if not b.is_zero() else f
        if 0 < g.degree < f.degree:
            return _cantor_zassenhaus(g, m) + _cantor_zassenhaus(f // g, m)


def factor(f: Poly) -> list[tuple[PrimePoly, int]]:
    """Factor monic f into (irreducible, multiplicity), sorted by the
    polynomial ordering."""
    if f.is_zero():
        raise ZeroPolynomial("cannot factor 0")
    if f.degree > MAX_FACTOR_DEGREE:
        raise DegreeTooLarge(f"degree {f.degree} > {MAX_FACTOR_DEGREE}")
    f = f.monic()
    out: dict[Poly, int] = {}
    for g, mult in _squarefree_decomposition(f):
        for h, m in _distinct_degree(g):
            for P in _equal_degree(h, m):
                out[P] = out.get(P, 0) + mult
    return [(PrimePoly(P, _trusted=True), e) for P, e in sorted(out.items(), key=lambda kv: kv[0].sort_key())]


def radical(f: Poly) -> Poly:
    if f.is_zero():
        raise ZeroPolynomial("radical of 0")
    out = Poly.one(f.field)
    for P, _ in factor(f):
        out = out * P.poly
    return out


def prime_count(field_or_q: FieldSpec | int, m: int) -> int:
    """Number of monic irreducibles of degree m over F_q (Moebius formula)."""
    q = field_or_q.q if isinstance(field_or_q, FieldSpec) else int(field_or_q)
    if m < 1:
        raise ValueError("degree must be positive")
    return sum(int(mobius(e)) * q ** (m // e) for e in divisors(m)) // m


@lru_cache(maxsize=None)
def irreducibles_with_roots(field: FieldSpec, m: int) -> tuple[tuple[Poly, ...], np.ndarray]:
    """Monic irreducibles of degree m in order, with the log (in
    ``extend_field(field, m)``) of one root of each.

    Found as minimal polynomials of Frobenius orbits of elements of exact
    degree m.
    """
    q = field.q
    if q**m > MAX_EXT_ORDER:
        raise TooMany(f"q^m = {q**m} exceeds {MAX_EXT_ORDER}")
    ext = extend_field(field, m)
    M = ext.order - 1
    logs = np.arange(M, dtype=np.int64)
    exact = np.ones(M, dtype=bool)
    for k in divisors(m)[:-1]:
        exact &= logs % (M // (q**k - 1)) != 0
    cand = logs[exact]
    conj = np.stack([(cand * pow(q, i, M)) % M for i in range(m)], axis=1)
    reps = cand[conj.min(axis=1) == cand]
    roots = np.stack([(reps * pow(q, i, M)) % M for i in range(m)], axis=1)
    if m == 1:
        reps = np.concatenate([[ZERO_LOG], reps])
        roots = reps[:, None]
    # multiply out prod_i (x - rho_i) in the log domain
    n = len(reps)
    coeffs = np.zeros((n, 1), dtype=np.int64)  # log(1) = 0
    neg = ext.neg_one_log
    for i in range(m):
        rho = roots[:, i]
        neg_rho = np.where(rho < 0, ZERO_LOG, (rho + neg) % M)
        new = np.full((n, coeffs.shape[1] + 1), ZERO_LOG, dtype=np.int64)
        new[:, -1] = coeffs[:, -1]
        for k in range(coeffs.shape[1] - 1, -1, -1):
            term = ext.lmul(coeffs[:, k], neg_rho)
            new[:, k] = term if k == 0 else ext.ladd(term, coeffs[:, k - 1])
        coeffs = new
    ints = np.where(coeffs < 0, 0, ext.exp[np.maximum(coeffs, 0) % M])
    if ints.max() >= q:
        raise ArithmeticError("minimal polynomial left the base field")
    ranks = np.where(ints == 0, 0, 1 + field.log[ints])
    order = np.lexsort([ranks[:, k] for k in range(m - 1, -1, -1)])
    polys = tuple(Poly(field, row) for row in ints[order].tolist())
    return polys, reps[order]


def enumerate_irreducibles(field: FieldSpec, m: int) -> list[PrimePoly]:
    """All monic irreducibles of degree m over field, in polynomial order."""
    polys, _ = irreducibles_with_roots(field, m)
    return [PrimePoly(P, _trusted=True) for P in polys]


def monic_polys(field: FieldSpec, d: int) -> Iterator[Poly]:
    """All monic polynomials of degree d, in polynomial order."""
    by_rank = sorted(field.elements(), key=field.rank)
    for low in itertools.product(by_rank, repeat=d):
        yield Poly(field, tuple(low) + (1,))
