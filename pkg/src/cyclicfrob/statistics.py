"""Family averages of Frobenius traces, the main/error term split, and
one-level densities against random matrix predictions."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable

import mpmath
import numpy as np
from sympy import divisors

from .batch import FamilyEngine, newton_coefficients, power_sums, prime_columns, scaled_traces
from .errors import EmptyFamily, OutOfRange, SupportViolation, UnsupportedDirectEval
from .families import (
    Branch,
    FamilySpec,
    P_INF,
    count_family,
    monic_blocks,
    phi,
    prime_catalogue,
    sample_family,
)
from .finite_field import CycInt
from .polynomials import PrimePoly, enumerate_irreducibles, prime_count
from .traces import Curve, angles_from_roots, inverse_roots

EPSILON = 0.1
DENSITY_TOL = 1e-6
# cap on (monic members) x (symbol columns) for one engine pass
WORK_BUDGET = 4 * 10**8


# -- test functions ------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A test function f given by its Fourier transform fhat.

    Built-in kinds are "fejer" (fhat(x) = max(0, 1 - |x|/alpha), or its
    restriction to x >= 0 when one_sided) and "zero"; kind "table" holds
    user-supplied values on the grid n/(2g).
    """

    __test__ = False  # not a pytest class

    kind: str
    alpha: float
    one_sided: bool = True
    table: tuple[tuple[Fraction, float], ...] = ()

    @classmethod
    def fejer(cls, alpha: float, one_sided: bool = True) -> TestFunction:
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return cls("fejer", float(alpha), one_sided)

    @classmethod
    def zero(cls) -> TestFunction:
        return cls("zero", 0.0, True)

    @classmethod
    def from_table(cls, rows: Iterable[tuple[Fraction, float]]) -> TestFunction:
        rows = tuple(sorted((Fraction(x), float(v)) for x, v in rows))
        values = dict(rows)
        one_sided = all(x >= 0 for x in values)
        if not one_sided:
            for x, v in values.items():
                if abs(values.get(-x, 0.0) - v) > 1e-12:
                    raise ValueError(f"table is neither one-sided nor even at x = {x}")
        nonzero = [abs(x) for x, v in values.items() if v != 0]
        return cls("table", float(max(nonzero, default=0)), one_sided, rows)

    @classmethod
    def from_csv(cls, path: str | Path) -> TestFunction:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["x", "fhat"]:
                raise ValueError('table needs the header "x,fhat"')
            return cls.from_table((Fraction(row["x"].strip()), float(row["fhat"])) for row in reader)

    @cached_property
    def _lookup(self) -> dict[Fraction, float]:
        return dict(self.table)

    def fhat(self, x) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "table":
            return self._lookup.get(Fraction(x), 0.0)
        x = float(x)
        if self.one_sided and x < 0:
            return 0.0
        return max(0.0, 1.0 - abs(x) / self.alpha)

    def check_grid(self, g: int) -> None:
        """Table points must lie on the grid n/(2g)."""
        for x, _ in self.table:
            if (x * 2 * g).denominator != 1:
                raise ValueError(f"table point x = {x} is not on the grid n/{2 * g}")

    def grid_values(self, N: int, n_max: int) -> np.ndarray:
        """fhat(n/N) for n = 0..n_max."""
        return np.array([self.fhat(Fraction(n, N)) for n in range(n_max + 1)])

    def support_terms(self, N: int) -> int:
        """Largest n with fhat(n/N) possibly nonzero."""
        if self.kind == "zero":
            return 0
        if self.kind == "table":
            return max((int(abs(x) * N) for x, v in self.table if v != 0), default=0)
        return math.ceil(self.alpha * N)

    def check_support(self, bound: Fraction, g: int) -> None:
        """Raise SupportViolation unless fhat vanishes off [0, bound)."""
        if not self.one_sided:
            raise SupportViolation("a one-sided test function is required")
        N = 2 * g
        for n in range(self.support_terms(N) + 1):
            x = Fraction(n, N)
            if x >= bound and self.fhat(x) != 0:
                raise SupportViolation(f"fhat({x}) = {self.fhat(x):.6g} at grid point n/2g = {n}/{N}, but the support must lie in [0, {bound})")
        if self.kind == "fejer" and Fraction(self.alpha) > bound:
            raise SupportViolation(f"alpha = {self.alpha} exceeds {bound}")

    # closed forms for the direct (eigenangle) evaluation --------------------

    @property
    def has_direct(self) -> bool:
        return self.kind in ("fejer", "zero")

    def _pieces(self):
        """f(t/2pi) = D i/t + A/t^2 + sum_k B_k e^{i beta_k t}/t^2."""
        a = self.alpha
        if self.kind == "zero":
            return 0.0, 0.0, []
        if self.one_sided:
            return 1.0, 1 / a, [(-1 / a, a)]
        return 0.0, 2 / a, [(-1 / a, a), (-1 / a, -a)]

    def _moment(self, k: int) -> float:
        a = self.alpha
        m = a ** (k + 1) / ((k + 1) * (k + 2))
        if self.one_sided:
            return m
        return 2 * m if k % 2 == 0 else 0.0

    def f_of_t(self, t: np.ndarray) -> np.ndarray:
        """f at y = t/(2 pi), i.e. the integral of fhat(x) e^{i x t}."""
        if not self.has_direct:
            raise UnsupportedDirectEval("table test functions have no closed form")
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros(t.shape, dtype=complex)
        D, A, B = self._pieces()
        small = np.abs(t) * self.alpha < 1e-2
        ts = np.where(small, 1.0, t)
        out = D * 1j / ts + A / ts**2 + sum(b * np.exp(1j * beta * ts) / ts**2 for b, beta in B)
        series = sum((1j * t) ** k / math.factorial(k) * self._moment(k) for k in range(10))
        return np.where(small, series, out)

    def f(self, y) -> np.ndarray:
        return self.f_of_t(2 * np.pi * np.asarray(y, dtype=float))

    @property
    def jump_at_zero(self) -> float:
        """fhat(0+) - fhat(0-)."""
        return self.fhat(0) if self.one_sided else 0.0


def _cot_rest(w: np.ndarray) -> np.ndarray:
    """sum_{m != 0} 1/(w - m) = pi cot(pi w) - 1/w, for |w| <= 1/2."""
    pi = np.pi
    small = np.abs(w) < 1e-3
    ws = np.where(small, 0.5, w)
    exact = pi / np.tan(pi * ws) - 1 / ws
    series = -(pi**2) * w / 3 - pi**4 * w**3 / 45 - 2 * pi**6 * w**5 / 945
    return np.where(small, series, exact)


def _csc2_rest(w: np.ndarray) -> np.ndarray:
    """sum_{m != 0} 1/(w - m)^2 = pi^2/sin^2(pi w) - 1/w^2, for |w| <= 1/2."""
    pi = np.pi
    small = np.abs(w) < 1e-3
    ws = np.where(small, 0.5, w)
    exact = pi**2 / np.sin(pi * ws) ** 2 - 1 / ws**2
    series = pi**2 / 3 + pi**4 * w**2 / 15 + 2 * pi**6 * w**4 / 189
    return np.where(small, series, exact)


def _twisted_rest(w: np.ndarray, c: float) -> np.ndarray:
    """sum_{m != 0} e^{-2 pi i c m}/(w - m)^2 in closed form, for |w| <= 1/2.

    With a = c mod 1 and E = e^{-2 pi i w} the full sum over m is
    -4 pi^2 e^{-2 pi i a w} (a/(1 - E) + E/(1 - E)^2); near w = 0 the
    Taylor series in w with Bernoulli polynomial coefficients is used.
    """
    a = float(c) % 1.0
    pi = np.pi
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 0.1
    ws = np.where(small, 0.5, w)
    E = np.exp(-2j * pi * ws)
    exact = -4 * pi**2 * np.exp(-2j * pi * a * ws) * (a / (1 - E) + E / (1 - E) ** 2) - 1 / ws**2
    series = np.zeros(w.shape, dtype=complex)
    for k in range(24):
        coef = -((2j * pi) ** (k + 2)) / math.factorial(k + 2) * float(mpmath.bernpoly(k + 2, a))
        series += (k + 1) * (-w) ** k * coef
    return np.where(small, series, exact)


def density_eigen(angles: np.ndarray, f: TestFunction, N: int) -> np.ndarray:
    """sum_j sum_m f(N (theta_j/2pi - m)) per row of angles, with the
    conditionally convergent 1/t part summed symmetrically and the jump of
    fhat at 0 restored so the n = 0 term equals fhat(0)."""
    if not f.has_direct:
        raise UnsupportedDirectEval("the eigenangle route needs a closed-form test function")
    angles = np.atleast_2d(angles)
    if f.kind == "zero":
        return np.zeros(len(angles))
    z = angles / (2 * np.pi)
    w = (z - np.round(z)).ravel()
    two_pi_n = 2 * np.pi * N
    D, A, B = f._pieces()
    total = f.f_of_t(two_pi_n * w).astype(complex)
    total += D * 1j / two_pi_n * _cot_rest(w)
    total += A / two_pi_n**2 * _csc2_rest(w)
    for b, beta in B:
        total += b * np.exp(1j * beta * two_pi_n * w) / two_pi_n**2 * _twisted_rest(w, beta * N)
    per_row = total.reshape(angles.shape).sum(axis=1)
    return per_row.real + f.jump_at_zero * angles.shape[1] / (2 * N)


def density_spectral(traces: np.ndarray, f: TestFunction, q: int, g: int) -> np.ndarray:
    """fhat(0) + (1/2g) sum_{n >= 1} (fhat(n/2g) [+ fhat(-n/2g)]) t_n / q^(n/2).

    ``traces`` holds t_1..t_K per row with K >= the support of fhat."""
    N = 2 * g
    traces = np.atleast_2d(traces)
    K = f.support_terms(N)
    vals = f.grid_values(N, K)
    if not f.one_sided:
        vals[1:] *= 2
    out = np.full(len(traces), vals[0])
    for n in range(1, K + 1):
        if vals[n] != 0:
            if n > traces.shape[1]:
                raise ValueError(f"trace t_{n} needed but only {traces.shape[1]} available")
            out = out + vals[n] * traces[:, n - 1].astype(float) / q ** (n / 2) / N
    return out


def one_level_density_curve(curve: Curve, f: TestFunction) -> float:
    """Spectral value, cross-checked against the eigenangle sum when f has a closed form."""
    g, q = curve.g, curve.q
    f.check_grid(g)
    K = max(f.support_terms(2 * g), 1)
    coeffs = np.array([curve.lpoly.coeffs], dtype=np.int64)
    t = power_sums(coeffs, K)
    spectral = float(density_spectral(t, f, q, g)[0])
    if f.has_direct:
        direct = float(density_eigen(angles_from_roots(np.array([curve.lpoly.inverse_roots])), f, 2 * g)[0])
        if abs(direct - spectral) > DENSITY_TOL:
            raise ArithmeticError(f"density routes disagree: {spectral} vs {direct}")
    return spectral


# -- random matrix moments -------------------------------------------------


def rmt_moment(group, N: int, n: int) -> int:
    """Haar moments E[Tr U^n]; ``group`` is "USp", "U" or ("M", s)."""
    n = abs(n)
    if group == "USp":
        if N % 2:
            raise ValueError("USp needs even N")
        if n == 0:
            return N
        return -1 if n <= N and n % 2 == 0 else 0
    if group == "U":
        return N if n == 0 else 0
    if isinstance(group, tuple) and group[0] == "M":
        s = group[1]
        if N % phi(s) or not 1 <= n <= N // phi(s):
            raise OutOfRange(f"M_({s})({N}) moment defined only for 1 <= n <= {N // phi(s)}")
        return -phi(s) if n % s == 0 else 0
    raise ValueError(f"unknown group {group!r}")


# -- exact main-term ingredients -----------------------------------------------


def _unram_sum(spec: FamilySpec, m: int, q_m) -> object:
    d, ph = spec.d, phi(spec.r)
    return sum(((-ph / q_m) ** a * (1 - Fraction(a * m, d)) ** (ph - 1) for a in range(1, d // m + 1)), 0)


def d_r(spec: FamilySpec, n: int) -> Fraction:
    """q^(n/2) D_r(g, n), an exact rational."""
    q, r = spec.q, spec.r
    total = Fraction(0)
    for m in divisors(n):
        w = math.gcd(r, n // m) - 1
        if w == 0 or spec.d // m == 0:
            continue
        total += m * prime_count(q, m) * w * _unram_sum(spec, m, Fraction(q**m))
    return total


def a0_identity(q: int, r: int, n: int) -> tuple[int, int]:
    """(sum_{m|n} m pi_q(m)((r, n/m) - 1), sum_{s|(r,n), s>1} phi(s) q^(n/s))."""
    lhs = sum(m * prime_count(q, m) * (math.gcd(r, n // m) - 1) for m in divisors(n))
    rhs = sum(phi(s) * q ** (n // s) for s in divisors(math.gcd(r, n)) if s > 1)
    return lhs, rhs


def secondary_term(spec: FamilySpec, n: int) -> int:
    """sum_{s|(r,n), s>1} phi(s) q^(n/s)."""
    return a0_identity(spec.q, spec.r, n)[1]


def prediction_main(spec: FamilySpec, n: int) -> Fraction:
    """Scaled prediction -sum phi(s) q^(n/s) - q^(n/2) D_r(g,n)."""
    return -secondary_term(spec, n) - d_r(spec, n)


def _count_coprime_degree(spec: FamilySpec, m: int) -> int:
    return count_family(spec, enumerate_irreducibles(spec.field, m)[0])


def mt_term(spec: FamilySpec, n: int) -> Fraction:
    """q^(n/2) MT_r(g, n) from exact coprime counts."""
    r, q = spec.r, spec.q
    size = count_family(spec)
    total = 0
    for m in divisors(n):
        hits = sum(1 for i in range(1, r) if (i * n // m) % r == 0)
        if hits:
            total += m * prime_count(q, m) * hits * _count_coprime_degree(spec, m)
    hits_inf = sum(1 for i in range(1, r) if (i * n) % r == 0)
    total += hits_inf * count_family(spec, P_INF)
    return Fraction(-total, size)


def dev_r(spec: FamilySpec, f: TestFunction) -> float:
    """fhat(0) sum_{s|r, s>1} phi(s) sum_P deg P/(|P|^(s/2) - 1) sum_a (-phi(r)/|P|)^a (1 - a deg P/d)^(phi(r)-1)."""
    f0 = f.fhat(0)
    if f0 == 0:
        return 0.0
    q, r, d = spec.q, spec.r, spec.d
    terms = []
    for s in divisors(r):
        if s == 1:
            continue
        for m in range(1, d + 1):
            inner = float(_unram_sum(spec, m, Fraction(q**m)))
            terms.append(phi(s) * m * prime_count(q, m) / (q ** (m * s / 2) - 1) * inner)
    return f0 * math.fsum(terms)


def refined_prediction(spec: FamilySpec, f: TestFunction, include_dev: bool = True) -> float:
    """fhat(0) - (1/2g) sum_{s|r,s>1} phi(s) sum_{n <= 2g/(s(r-1))} q^{n(1-s/2)} fhat(ns/2g), minus dev_r/2g."""
    g, q, r = spec.g, spec.q, spec.r
    f.check_support(Fraction(1, r - 1), g)
    terms = []
    for s in divisors(r):
        if s == 1:
            continue
        for n in range(1, 2 * g // (s * (r - 1)) + 1):
            terms.append(phi(s) * q ** (n * (1 - s / 2)) * f.fhat(Fraction(n * s, 2 * g)))
    value = f.fhat(0) - math.fsum(terms) / (2 * g)
    if include_dev:
        value -= dev_r(spec, f) / (2 * g)
    return value


def katz_sarnak_prediction(spec: FamilySpec, f: TestFunction) -> float:
    """Density predicted by USp(2g) for r = 2 and U(2g) otherwise."""
    g = spec.g
    group = "USp" if spec.r == 2 else "U"
    N = 2 * g
    total = f.fhat(0)
    for n in range(1, f.support_terms(N) + 1):
        w = f.fhat(Fraction(n, N)) + (0 if f.one_sided else f.fhat(Fraction(-n, N)))
        total += w * rmt_moment(group, N, n) / N
    return total


# -- family data --------------------------------------------------------------


class FamilyData:
    """Symbol histograms and traces for every member of a family, or for a
    seeded uniform sample of it.

    Members are ordered twist-major (alpha = beta^0 first) in exhaustive
    mode.  Traces t_n for n <= col_deg come straight from the residue-symbol
    formula; the L-polynomial is built from t_1..t_g and the functional
    equation, and its power sums give t_n for larger n.
    """

    def __init__(self, spec: FamilySpec, col_deg: int | None = None, sample: int | None = None, seed: int = 0):
        self.spec = spec
        self.col_deg = max(col_deg or spec.g, spec.g)
        self.sampled = sample is not None
        self.seed = seed
        engine = FamilyEngine(spec, prime_columns(spec.field, self.col_deg))
        if self.sampled:
            self.models = sample_family(spec, sample, seed)
            self.hist = engine.run_models(self.models)
            self.direct = scaled_traces(self.hist, None, range(1, self.col_deg + 1))
            self.alpha = self.hist.alpha
            self.branch_r = self.hist.branch_r
        else:
            self.hist = engine.run()
            r = spec.r
            self.direct = np.concatenate([scaled_traces(self.hist, j, range(1, self.col_deg + 1)) for j in range(r)])
            self.alpha = np.repeat(np.arange(r), len(self.hist))
            self.branch_r = np.tile(self.hist.branch_r, r)
        if len(self.direct) == 0:
            raise EmptyFamily("no members")
        self.lcoeffs = newton_coefficients(self.direct[:, : spec.g], spec.q, spec.g)
        self._power_sums = power_sums(self.lcoeffs, self.col_deg)
        self.newton_matches_direct = bool(np.array_equal(self._power_sums, self.direct))

    @property
    def size(self) -> int:
        return len(self.direct)

    def traces(self, n_max: int) -> np.ndarray:
        """t_1..t_{n_max} for every member (exact integers)."""
        if n_max <= self.col_deg:
            return self.direct[:, :n_max]
        if self._power_sums.shape[1] < n_max:
            self._power_sums = power_sums(self.lcoeffs, n_max)
        return self._power_sums[:, :n_max]

    @cached_property
    def unique_lpolys(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(distinct coefficient rows, member -> row index, multiplicities)."""
        uniq, inv, counts = np.unique(self.lcoeffs.astype(np.int64), axis=0, return_inverse=True, return_counts=True)
        return uniq, np.asarray(inv).ravel(), counts

    @cached_property
    def inverse_roots(self) -> np.ndarray:
        """Inverse roots of each distinct L-polynomial."""
        return inverse_roots(self.unique_lpolys[0], self.spec.q)

    def rh_deviation(self) -> float:
        """max over members of | |u| sqrt(q) - 1 | for the roots u."""
        return float(np.max(np.abs(math.sqrt(self.spec.q) / np.abs(self.inverse_roots) - 1)))

    # aggregates over monic members per (branch, deg F mod r) ---------------

    @cached_property
    def class_histograms(self) -> dict[tuple[Branch, int], np.ndarray]:
        """(branch, k) -> sum over monic members of hist[:, group, v]."""
        if self.sampled:
            raise ValueError("class histograms need the exhaustive family")
        out = {}
        k = self.hist.deg_F % self.spec.r
        for b in Branch:
            for kk in np.unique(k):
                rows = (self.hist.branch_r == (b is Branch.R)) & (k == kk)
                if rows.any():
                    out[(b, int(kk))] = self.hist.hist[rows].astype(np.int64).sum(axis=0)
        return out


@lru_cache(maxsize=16)
def family_data(spec: FamilySpec, col_deg: int | None = None, sample: int | None = None, seed: int = 0) -> FamilyData:
    return FamilyData(spec, col_deg, sample, seed)


def max_feasible_columns(spec: FamilySpec, budget: int = WORK_BUDGET) -> int:
    """Largest degree m such that symbols at all primes of degree <= m fit the budget."""
    monic = count_family(spec) // spec.r
    m, cols = 0, 0
    while True:
        nxt = cols + prime_count(spec.q, m + 1)
        if monic * nxt > budget or spec.q ** (m + 1) > 2**24:
            return m
        m, cols = m + 1, nxt


def et_term(spec: FamilySpec, n: int, data: FamilyData | None = None) -> Fraction:
    """q^(n/2) ET_r(g, n) by the definition (explicit sum over twists alpha)
    and by the reduction to monic members and the sums S_{j;k}; the two must
    agree exactly, vanish when (r, n) = 1, and get nothing from P_inf."""
    data = data or family_data(spec, max(spec.g, n))
    if data.col_deg < n:
        raise ValueError(f"symbols at primes of degree up to {n} are needed")
    r = spec.r
    hists = data.class_histograms
    groups = {grp.degree: k for k, grp in enumerate(data.hist.groups)}

    definitional = CycInt.zero(r)
    for m in divisors(n):
        g_idx = groups[m]
        for i in range(1, r):
            e = i * n // m
            if e % r == 0:
                continue
            counts = [0] * r
            for hist in hists.values():
                for v in range(r):
                    c = int(hist[g_idx, v])
                    if c:
                        for j in range(r):
                            counts[((v + j * m) * e) % r] += c
            definitional = definitional + CycInt.from_counts(r, counts) * m
    definitional = -definitional

    infinity = CycInt.zero(r)
    n_branch_r = int(np.sum(data.hist.branch_r))
    for i in range(1, r):
        if (i * n) % r == 0:
            continue
        for j in range(r):
            infinity = infinity + CycInt.root(r, i * j * n) * n_branch_r
    if not infinity.is_zero():
        raise ArithmeticError("the prime at infinity contributes to the error term")

    rn = math.gcd(r, n)
    reduced = CycInt.zero(r)
    for m in divisors(n):
        g_idx = groups[m]
        for j in range(1, rn):
            e = j * n // m
            if e % rn == 0:
                continue
            for hist in hists.values():
                counts = [0] * r
                for v in range(r):
                    counts[((r // rn) * v * e) % r] += int(hist[g_idx, v])
                reduced = reduced + CycInt.from_counts(r, counts) * m
    reduced = -(reduced * r)

    if definitional != reduced:
        raise ArithmeticError(f"error term routes disagree at n={n}: {definitional} vs {reduced}")
    value = definitional.to_int()
    if rn == 1 and value != 0:
        raise ArithmeticError(f"error term is {value} although (r, n) = 1")
    return Fraction(value, data.size)


def mt_from_histograms(spec: FamilySpec, n: int, data: FamilyData) -> Fraction:
    """q^(n/2) MT_r(g, n) counted directly from which members each prime divides."""
    r = spec.r
    groups = {grp.degree: k for k, grp in enumerate(data.hist.groups)}
    total = 0
    for m in divisors(n):
        hits = sum(1 for i in range(1, r) if (i * n // m) % r == 0)
        if hits:
            coprime = sum(int(h[groups[m]].sum()) for h in data.class_histograms.values())
            total += m * hits * r * coprime
    hits_inf = sum(1 for i in range(1, r) if (i * n) % r == 0)
    total += hits_inf * r * int(np.sum(data.hist.branch_r))
    return Fraction(-total, data.size)


def s_jk_sum(spec: FamilySpec, j: int, k: int, d: int, P: PrimePoly, n: int) -> CycInt:
    """S_{j;k}(d;P) = sum over monic members of radical degree d with
    deg F = k mod r of (F/P)_{(r,n)}^(j n / deg P)."""
    if P.is_infinite:
        raise ValueError("P must be finite")
    r = spec.r
    rn = math.gcd(r, n)
    m = P.degree
    if n % m:
        raise ValueError("deg P must divide n")
    if (j * n // m) % rn == 0:
        raise ValueError(f"(r, n) = {rn} divides j n / deg P, so the character is trivial")
    cat = prime_catalogue(spec.field, max(d, 1))
    blocks = monic_blocks(cat, r, d, [k], Branch.R)
    from .batch import ColumnGroup, symbol_table

    root = np.array([_root_log(spec, P)], dtype=np.int64)
    R = symbol_table(cat, r, [ColumnGroup("prime", m, root)])[:, 0]
    counts = [0] * r
    e = j * n // m
    for block in blocks:
        for lab in block.labels:
            acc = (R[block.sets] * lab[None, :]).sum(axis=1) if block.sets.shape[1] else np.zeros(len(block.sets), dtype=np.int64)
            nz = acc < (1 << 20)
            vals = acc[nz] % r
            for v, c in zip(*np.unique(vals, return_counts=True)):
                counts[((r // rn) * int(v) * e) % r] += int(c)
    return CycInt.from_counts(r, counts)


def _root_log(spec: FamilySpec, P: PrimePoly) -> int:
    from .residue_symbols import symbol_context

    return symbol_context(spec.field, spec.r).root_log(P)


# -- reports ------------------------------------------------------------------


@dataclass
class TraceReport:
    spec: FamilySpec
    n: int
    family_size: int
    avg_scaled: Fraction | float
    prediction_main: Fraction
    residual: float
    bound_envelope: float
    stderr: float | None = None
    mt_scaled: Fraction | None = None
    et_scaled: Fraction | None = None
    checks: dict[str, bool] = dc_field(default_factory=dict)

    @property
    def avg_trace(self) -> float:
        """<Tr(Theta^n)> itself (the scaled average divided by q^(n/2))."""
        return float(self.avg_scaled) / self.spec.q ** (self.n / 2)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def bound_envelope(spec: FamilySpec, n: int) -> float:
    """Diagnostic size of the scaled residual: n/g + ((r,n)-1) q^n q^{-(1/2 - eps) 2g/(r-1)}."""
    rn = math.gcd(spec.r, n)
    return n / spec.g + (rn - 1) * spec.q**n * spec.q ** (-(0.5 - EPSILON) * 2 * spec.g / (spec.r - 1))


def average_scaled_trace(spec: FamilySpec, n: int, mode: str = "exhaustive", count: int = 10_000, seed: int = 0) -> TraceReport:
    """Average of t_n over the family (exact) or over a seeded uniform sample."""
    if mode == "exhaustive":
        data = family_data(spec)
        t = data.traces(n)[:, n - 1]
        avg: Fraction | float = Fraction(int(t.sum()), data.size)
        stderr = None
    elif mode == "sample":
        data = family_data(spec, None, count, seed)
        t = data.traces(n)[:, n - 1].astype(float)
        avg = float(t.mean())
        stderr = float(t.std(ddof=1) / math.sqrt(len(t))) if len(t) > 1 else float("nan")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    pred = prediction_main(spec, n)
    report = TraceReport(spec, n, count_family(spec), avg, pred, abs(float(avg) - float(pred)), bound_envelope(spec, n), stderr)
    if math.gcd(spec.r, n) == 1 and mode == "exhaustive":
        report.checks["vanishing"] = avg == 0
    return report


def verify_theorem_1_5(spec: FamilySpec, n_range: Iterable[int], mode: str = "exhaustive", count: int = 10_000, seed: int = 0) -> list[TraceReport]:
    """Per n: the exact average, its split into main and error terms (when
    symbols at all primes of degree n are affordable), and the prediction."""
    n_range = list(n_range)
    if mode != "exhaustive":
        return [average_scaled_trace(spec, n, mode, count, seed) for n in n_range]
    reach = max(spec.g, min(max(n_range), max_feasible_columns(spec)))
    data = family_data(spec, reach)
    reports = []
    for n in n_range:
        t = data.traces(n)[:, n - 1]
        avg = Fraction(int(t.sum()), data.size)
        pred = prediction_main(spec, n)
        rep = TraceReport(spec, n, data.size, avg, pred, abs(float(avg - pred)), bound_envelope(spec, n))
        rep.checks["newton_vs_direct"] = data.newton_matches_direct
        rep.checks["family_size"] = data.size == count_family(spec)
        mt = mt_term(spec, n)
        rep.mt_scaled = mt
        if math.gcd(spec.r, n) == 1:
            rep.checks["vanishing"] = avg == 0
            rep.checks["mt_vanishing"] = mt == 0
        if n <= data.col_deg:
            et = et_term(spec, n, data)
            rep.et_scaled = et
            rep.checks["mt_histogram"] = mt == mt_from_histograms(spec, n, data)
            rep.checks["partition"] = avg == mt + et
            if math.gcd(spec.r, n) == 1:
                rep.checks["et_vanishing"] = et == 0
        reports.append(rep)
    return reports


@dataclass
class DensityReport:
    spec: FamilySpec
    testfn: TestFunction
    family_size: int
    lhs: float
    lhs_eigen: float | None
    route_gap: float | None
    rhs_refined: float | None  # only defined for one-sided f
    rhs_ks: float
    dev_r_value: float
    residual_refined: float | None
    residual_ks: float
    stderr: float | None = None


def density_report(spec: FamilySpec, f: TestFunction, mode: str = "exhaustive", count: int = 10_000, seed: int = 0) -> DensityReport:
    """Family average of the one-level density against the refined and the
    Katz-Sarnak predictions.  Both evaluation routes are run per distinct
    L-polynomial when f has a closed form."""
    g, q = spec.g, spec.q
    f.check_grid(g)
    rhs = refined_prediction(spec, f) if f.one_sided else None
    data = family_data(spec) if mode == "exhaustive" else family_data(spec, None, count, seed)
    K = max(f.support_terms(2 * g), 1)
    uniq, inv, mult = data.unique_lpolys
    spectral = density_spectral(power_sums(uniq, K), f, q, g)
    lhs = float(np.dot(spectral, mult) / data.size)
    lhs_eigen = gap = None
    if f.has_direct:
        eig = density_eigen(angles_from_roots(data.inverse_roots), f, 2 * g)
        gap = float(np.max(np.abs(eig - spectral)))
        lhs_eigen = float(np.dot(eig, mult) / data.size)
    stderr = None
    if mode != "exhaustive":
        per = spectral[inv]
        stderr = float(per.std(ddof=1) / math.sqrt(len(per)))
    dev = dev_r(spec, f)
    ks = katz_sarnak_prediction(spec, f)
    residual = None if rhs is None else abs(lhs - rhs)
    return DensityReport(spec, f, data.size, lhs, lhs_eigen, gap, rhs, ks, dev, residual, abs(lhs - ks), stderr)
