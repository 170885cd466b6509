"""Finite fields F_q and F_{q^n} with discrete-log tables, plus Z[xi_r].

Elements are plain Python ints.  An element of F_q = F_p[x]/(m(x)) is
encoded as sum c_i p^i; an element of F_{q^n} = F_q[y]/(M(y)) is encoded
as sum c_i q^i with c_i in F_q.  With this encoding the base-p digits of an
int are its F_p-coordinates at every level of the tower, and F_q embeds in
F_{q^n} as the ints below q.

Once built, a field is immutable.  Multiplication goes through the
discrete-log tables; vectorised code works directly on log indices, with
``ZERO_LOG`` (-1) standing for the zero element.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from sympy import factorint, isprime, totient
from sympy.polys.specialpolys import cyclotomic_poly

from .errors import BadCongruence, FieldTooLarge, NonIntegerResult, NonPrime

MAX_FIELD_ORDER = 2**20
MAX_EXT_ORDER = 2**24
ZERO_LOG = -1


# ---------------------------------------------------------------------------
# cyclotomic integers


@lru_cache(maxsize=None)
def _cyclo_data(r: int) -> tuple[int, tuple[tuple[int, ...], ...]]:
    """Return (phi(r), table) where table[t] is x^t mod Phi_r, low degree first."""
    phi = int(totient(r))
    poly = cyclotomic_poly(r, polys=True).all_coeffs()[::-1]
    poly = [int(c) for c in poly]
    table = []
    v = [1] + [0] * (phi - 1)
    for _ in range(r):
        table.append(tuple(v))
        v = [0] + v
        top = v.pop()
        if top:
            for j in range(phi):
                v[j] -= top * poly[j]
    return phi, tuple(table)


class CycInt:
    """An element of Z[xi_r], stored canonically modulo Phi_r."""

    __slots__ = ("r", "coeffs")

    def __init__(self, r: int, coeffs: Sequence[int]):
        phi, _ = _cyclo_data(r)
        if len(coeffs) != phi:
            raise ValueError(f"expected {phi} coefficients for r={r}, got {len(coeffs)}")
        self.r = r
        self.coeffs = tuple(int(c) for c in coeffs)

    @classmethod
    def zero(cls, r: int) -> CycInt:
        return cls(r, (0,) * _cyclo_data(r)[0])

    @classmethod
    def integer(cls, r: int, n: int) -> CycInt:
        phi, _ = _cyclo_data(r)
        return cls(r, (int(n),) + (0,) * (phi - 1))

    @classmethod
    def one(cls, r: int) -> CycInt:
        return cls.integer(r, 1)

    @classmethod
    def root(cls, r: int, t: int) -> CycInt:
        """xi_r^t."""
        return cls(r, _cyclo_data(r)[1][t % r])

    @classmethod
    def from_counts(cls, r: int, counts: Sequence[int]) -> CycInt:
        """sum_t counts[t] * xi_r^t for a length-r count vector."""
        phi, table = _cyclo_data(r)
        out = [0] * phi
        for t, c in enumerate(counts):
            c = int(c)
            if c:
                row = table[t % r]
                for j in range(phi):
                    out[j] += c * row[j]
        return cls(r, out)

    def _check(self, other: CycInt) -> None:
        if self.r != other.r:
            raise ValueError(f"mixing Z[xi_{self.r}] and Z[xi_{other.r}]")

    def __add__(self, other):
        if isinstance(other, int):
            other = CycInt.integer(self.r, other)
        self._check(other)
        return CycInt(self.r, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.r, [-a for a in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, int):
            other = CycInt.integer(self.r, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CycInt(self.r, [a * other for a in self.coeffs])
        if not isinstance(other, CycInt):
            return NotImplemented
        self._check(other)
        phi, table = _cyclo_data(self.r)
        prod = [0] * (2 * phi - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        out = prod[:phi]
        for k in range(phi, len(prod)):
            c = prod[k]
            if c:
                row = table[k % self.r]
                for j in range(phi):
                    out[j] += c * row[j]
        return CycInt(self.r, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not defined in Z[xi_r]")
        result = CycInt.one(self.r)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycInt.integer(self.r, other)
        if not isinstance(other, CycInt):
            return NotImplemented
        return self.r == other.r and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.r, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational_integer(self) -> bool:
        return not any(self.coeffs[1:])

    def to_int(self) -> int:
        if not self.is_rational_integer():
            raise NonIntegerResult(f"{self!r} is not a rational integer")
        return self.coeffs[0]

    def to_complex(self) -> complex:
        z = np.exp(2j * np.pi * np.arange(len(self.coeffs)) / self.r)
        return complex(np.dot(np.array(self.coeffs, dtype=float), z))

    def __repr__(self):
        return f"CycInt(r={self.r}, {list(self.coeffs)})"


# ---------------------------------------------------------------------------
# tabulated fields


def _prime_factors(n: int) -> list[int]:
    return sorted(factorint(n))


class _TabulatedField:
    """Shared machinery for a field with exp/log/Zech tables.

    Subclasses set ``p``, ``order``, ``dim``, ``generator`` and the tables.
    """

    p: int
    order: int
    dim: int
    generator: int
    exp: np.ndarray
    log: np.ndarray

    @cached_property
    def _exp_list(self) -> list[int]:
        return self.exp.tolist()

    @cached_property
    def _log_list(self) -> list[int]:
        return self.log.tolist()

    @cached_property
    def zech(self) -> np.ndarray:
        """zech[k] = log(1 + beta^k), ZERO_LOG when 1 + beta^k = 0."""
        e = self.exp.astype(np.int64)
        low = e % self.p
        plus_one = e - low + (low + 1) % self.p
        return self.log[plus_one]

    @cached_property
    def neg_one_log(self) -> int:
        return 0 if self.p == 2 else (self.order - 1) // 2

    # scalar arithmetic -------------------------------------------------

    def add(self, x: int, y: int) -> int:
        p = self.p
        if self.dim == 1:
            return (x + y) % p
        out, scale = 0, 1
        while x or y:
            out += ((x % p + y % p) % p) * scale
            x //= p
            y //= p
            scale *= p
        return out

    def neg(self, x: int) -> int:
        p = self.p
        if self.dim == 1:
            return (-x) % p
        out, scale = 0, 1
        while x:
            out += ((-(x % p)) % p) * scale
            x //= p
            scale *= p
        return out

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        if self.dim == 1:
            return (x * y) % self.p
        lg = self._log_list
        return self._exp_list[(lg[x] + lg[y]) % (self.order - 1)]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        lg = self._log_list
        return self._exp_list[(-lg[x]) % (self.order - 1)]

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def power(self, x: int, e: int) -> int:
        if x == 0:
            return 1 if e == 0 else 0
        return self._exp_list[(self._log_list[x] * e) % (self.order - 1)]

    def log_of(self, x: int) -> int:
        if x == 0:
            raise ValueError("discrete log of zero")
        return self._log_list[x]

    def elem(self, k: int) -> int:
        """beta^k."""
        return self._exp_list[k % (self.order - 1)]

    def rank(self, x: int) -> int:
        """Position in the element ordering: 0 first, then beta^0, beta^1, ..."""
        return 0 if x == 0 else 1 + self._log_list[x]

    def elements(self) -> range:
        return range(self.order)

    # log-domain vector arithmetic --------------------------------------

    def lmul(self, a: np.ndarray, b) -> np.ndarray:
        m = self.order - 1
        out = (a + b) % m
        return np.where((a < 0) | (np.asarray(b) < 0), ZERO_LOG, out)

    def ladd(self, a: np.ndarray, b) -> np.ndarray:
        """Sum of two elements given by logs (broadcasting)."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        m = self.order - 1
        z = self.zech[(b - a) % m]
        out = np.where(z < 0, ZERO_LOG, (a + z) % m)
        out = np.where(a < 0, b, out)
        return np.where(b < 0, a, out)

    def horner_logs(self, coeffs: Sequence[int], x_logs: np.ndarray) -> np.ndarray:
        """Logs of f(x) for f given by int coefficients (low first, in this
        field's encoding) and points given by their logs."""
        x_logs = np.asarray(x_logs, dtype=np.int64)
        lg = self._log_list
        acc = np.full(x_logs.shape, lg[coeffs[-1]] if coeffs[-1] else ZERO_LOG, dtype=np.int64)
        for c in reversed(coeffs[:-1]):
            acc = self.lmul(acc, x_logs)
            if c:
                acc = self.ladd(acc, lg[c])
        return acc

    def all_logs(self) -> np.ndarray:
        """Logs of every element, in encoding order (ZERO_LOG for 0)."""
        return self.log.astype(np.int64)


class _QuotientRing:
    """K[y]/(M) with K given by scalar ops; used only while building tables."""

    def __init__(self, k: int, kadd, kmul, kneg, modulus: Sequence[int]):
        self.k = k
        self.kadd, self.kmul, self.kneg = kadd, kmul, kneg
        self.mod = list(modulus)
        self.n = len(modulus) - 1

    def decode(self, x: int) -> list[int]:
        out = []
        for _ in range(self.n):
            out.append(x % self.k)
            x //= self.k
        return out

    def encode(self, v: Sequence[int]) -> int:
        out = 0
        for c in reversed(v):
            out = out * self.k + c
        return out

    def mul(self, x: int, y: int) -> int:
        a, b = self.decode(x), self.decode(y)
        n = self.n
        prod = [0] * (2 * n - 1)
        kadd, kmul = self.kadd, self.kmul
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] = kadd(prod[i + j], kmul(ai, bj))
        for i in range(len(prod) - 1, n - 1, -1):
            c = prod[i]
            if c:
                nc = self.kneg(c)
                for j in range(n):
                    if self.mod[j]:
                        prod[i - n + j] = kadd(prod[i - n + j], kmul(nc, self.mod[j]))
        return self.encode(prod[:n])

    def power(self, x: int, e: int) -> int:
        result, base = 1, x
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result


def _exp_table(ring: _QuotientRing, p: int, dim: int, beta: int, order: int) -> np.ndarray:
    """beta^0 .. beta^(order-2) as ints, via F_p-linear block stepping."""

    def matrix_of(c: int) -> np.ndarray:
        cols = []
        for j in range(dim):
            v = ring.mul(c, p**j)
            digits = []
            for _ in range(dim):
                digits.append(v % p)
                v //= p
            cols.append(digits)
        return np.array(cols, dtype=np.int64).T

    total = order - 1
    block = min(total, math.isqrt(total) + 1)
    m_beta = matrix_of(beta)
    first = np.zeros((dim, block), dtype=np.int64)
    first[0, 0] = 1
    for t in range(1, block):
        first[:, t] = (m_beta @ first[:, t - 1]) % p
    m_block = matrix_of(ring.power(beta, block))
    blocks = [first]
    have = block
    cur = first
    while have < total:
        cur = (m_block @ cur) % p
        blocks.append(cur)
        have += block
    coords = np.concatenate(blocks, axis=1)[:, :total]
    weights = np.array([p**j for j in range(dim)], dtype=np.int64)
    return weights @ coords


def _log_table(exp: np.ndarray, order: int) -> np.ndarray:
    log = np.full(order, ZERO_LOG, dtype=np.int64)
    log[exp] = np.arange(order - 1, dtype=np.int64)
    if np.count_nonzero(log >= 0) != order - 1 or log[0] != ZERO_LOG:
        raise ArithmeticError("generator does not generate the multiplicative group")
    return log


def _is_primitive(ring: _QuotientRing, x: int, order: int, factors: list[int]) -> bool:
    if x == 0 or ring.power(x, order - 1) != 1:
        return False
    return all(ring.power(x, (order - 1) // ell) != 1 for ell in factors)


class FieldSpec(_TabulatedField):
    """The finite field F_q, q = p^a, with a fixed generator."""

    def __init__(self, p: int, a: int, modulus: tuple[int, ...], generator: int, exp: np.ndarray, log: np.ndarray):
        self.p = p
        self.a = a
        self.q = p**a
        self.order = self.q
        self.dim = a
        self.modulus = modulus
        self.generator = generator
        self.exp = exp
        self.log = log

    @cached_property
    def _add_table(self):
        if self.dim == 1 or self.q > 256:
            return None
        return [[_TabulatedField.add(self, x, y) for y in range(self.q)] for x in range(self.q)]

    def add(self, x: int, y: int) -> int:
        if self.dim == 1:
            return (x + y) % self.p
        t = self._add_table
        if t is not None:
            return t[x][y]
        return _TabulatedField.add(self, x, y)

    def __repr__(self):
        return f"FieldSpec(p={self.p}, a={self.a}, modulus={self.modulus}, generator={self.generator})"

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.a, self.modulus) == (other.p, other.a, other.modulus)

    def __hash__(self):
        return hash(("FieldSpec", self.p, self.a, self.modulus))

    def __reduce__(self):
        return (make_field, (self.p, self.a))


class ExtFieldSpec(_TabulatedField):
    """F_{q^n} built over a FieldSpec.

    The generator is chosen so that its norm beta_n^((q^n-1)/(q-1)) equals the
    base generator.  This keeps the characters chi_{s;n} on different
    extensions compatible with each other through the norm map.
    """

    def __init__(self, base: FieldSpec, n: int, modulus: tuple[int, ...], generator: int, exp: np.ndarray, log: np.ndarray):
        self.base = base
        self.n = n
        self.p = base.p
        self.q = base.q
        self.order = base.q**n
        self.dim = base.a * n
        self.modulus = modulus
        self.generator = generator
        self.exp = exp
        self.log = log

    @property
    def norm_exponent(self) -> int:
        return (self.order - 1) // (self.q - 1)

    def embed(self, c: int) -> int:
        """Image of c in F_q (identity on the int encoding)."""
        if not 0 <= c < self.q:
            raise ValueError(f"{c} is not an element of F_{self.q}")
        return c

    def subfield_logs(self, m: int) -> np.ndarray:
        """Logs (in this field) of the nonzero elements of F_{q^m}, m | n."""
        if self.n % m:
            raise ValueError(f"F_q^{m} is not a subfield of F_q^{self.n}")
        step = (self.order - 1) // (self.q**m - 1)
        return np.arange(0, self.order - 1, step, dtype=np.int64)

    def __repr__(self):
        return f"ExtFieldSpec(q={self.q}, n={self.n}, modulus={self.modulus}, generator={self.generator})"

    def __reduce__(self):
        return (extend_field, (self.base, self.n))


def _prime_field_ops(p: int):
    return (lambda x, y: (x + y) % p, lambda x, y: (x * y) % p, lambda x: (-x) % p)


@lru_cache(maxsize=None)
def make_field(p: int, a: int = 1) -> FieldSpec:
    """Build F_{p^a} with the smallest monic irreducible modulus and the
    smallest generator (in int-encoding order)."""
    if not isprime(p):
        raise NonPrime(f"{p} is not prime")
    if a < 1:
        raise ValueError("exponent must be positive")
    q = p**a
    if q > MAX_FIELD_ORDER:
        raise FieldTooLarge(f"q = {q} exceeds {MAX_FIELD_ORDER}")
    kadd, kmul, kneg = _prime_field_ops(p)
    if a == 1:
        modulus = (0, 1)
    else:
        from .polynomials import Poly, is_irreducible

        prime_field = make_field(p, 1)
        modulus = None
        for low in itertools.product(range(p), repeat=a):
            cand = tuple(low) + (1,)
            if low[0] == 0:
                continue
            if is_irreducible(Poly(prime_field, cand)):
                modulus = cand
                break
        assert modulus is not None
    ring = _QuotientRing(p, kadd, kmul, kneg, modulus)
    factors = _prime_factors(q - 1) if q > 2 else []
    if a == 1:
        ring.mul = lambda x, y: (x * y) % p  # constants only
        ring.power = lambda x, e: pow(x, e, p)
    generator = next(x for x in range(1, q) if _is_primitive(ring, x, q, factors))
    exp = _exp_table(ring, p, a, generator, q)
    log = _log_table(exp, q)
    return FieldSpec(p, a, modulus, generator, exp, log)


@lru_cache(maxsize=None)
def extend_field(base: FieldSpec, n: int) -> ExtFieldSpec:
    """Build F_{q^n} over ``base``.

    The modulus is the first monic irreducible of degree n in the polynomial
    ordering of :mod:`cyclicfrob.polynomials`; the generator is the smallest
    primitive element whose norm is the base generator.
    """
    if n < 1:
        raise ValueError("extension degree must be positive")
    q = base.q
    order = q**n
    if order > MAX_EXT_ORDER:
        raise FieldTooLarge(f"q^n = {order} exceeds {MAX_EXT_ORDER}")
    if n == 1:
        return ExtFieldSpec(base, 1, (0, 1), base.generator, base.exp, base.log)

    from .polynomials import Poly, is_irreducible

    order_of = [0] + [1 + base.log_of(c) for c in range(1, q)]
    by_rank = sorted(range(q), key=lambda c: order_of[c])
    modulus = None
    for low in itertools.product(by_rank, repeat=n):
        if low[0] == 0:
            continue
        cand = tuple(low) + (1,)
        if is_irreducible(Poly(base, cand)):
            modulus = cand
            break
    assert modulus is not None

    ring = _QuotientRing(q, base.add, base.mul, base.neg, modulus)
    factors = _prime_factors(order - 1)
    norm_exp = (order - 1) // (q - 1)
    generator = None
    for x in range(2, order):
        if ring.power(x, norm_exp) != base.generator:
            continue
        if _is_primitive(ring, x, order, factors):
            generator = x
            break
    assert generator is not None
    exp = _exp_table(ring, base.p, base.a * n, generator, order)
    log = _log_table(exp, order)
    ext = ExtFieldSpec(base, n, modulus, generator, exp, log)
    # the embedding F_q -> F_{q^n} must be multiplicative on the int encoding
    rng = np.random.default_rng(q * 1000 + n)
    for x, y in rng.integers(1, q, size=(min(64, q * q), 2)).tolist():
        if ext.mul(x, y) != base.mul(x, y):
            raise ArithmeticError("embedding of the base field is not multiplicative")
    return ext


def char_eval(ext: ExtFieldSpec | FieldSpec, s: int, x: int, r: int | None = None) -> CycInt:
    """chi_{s;n}(x) as an element of Z[xi_r] (r defaults to s).

    xi_s is realised as xi_r^(r/s).
    """
    r = s if r is None else r
    if r % s:
        raise ValueError(f"{s} does not divide {r}")
    q = ext.q
    if (q - 1) % s:
        raise BadCongruence(f"q = {q} is not 1 mod {s}")
    if x == 0:
        return CycInt.zero(r)
    return CycInt.root(r, (r // s) * ext.log_of(x))
