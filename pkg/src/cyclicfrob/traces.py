"""Point counts, Frobenius traces and L-polynomials of single curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
import sympy
from sympy import divisors

from .batch import newton_coefficients, power_sums
from .errors import ExtensionTooLarge, RHViolation
from .families import FamilySpec, ThinModel, units
from .finite_field import MAX_EXT_ORDER, ZERO_LOG, CycInt, extend_field
from .polynomials import Poly, PrimePoly, enumerate_irreducibles, irreducibles_with_roots
from .residue_symbols import symbol_context

RH_TOL = 1e-8
RH_HARD_TOL = 1e-6
FULL_COUNT_LIMIT = 2**16


def f_sub(model: ThinModel, s: int) -> Poly:
    """F_(s) = alpha * prod_i f_i^(i mod s); for a thin model this is F * H^s."""
    out = Poly.const(model.field, model.alpha)
    for i, f in model.parts.items():
        if i % s:
            out = out * f ** (i % s)
    return out


class Curve:
    def __init__(self, spec: FamilySpec, model: ThinModel):
        if model.r != spec.r or model.field != spec.field:
            raise ValueError("model does not belong to this family")
        self.spec = spec
        self.model = model
        self._counts: dict[int, int] = {}

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def g(self) -> int:
        return self.spec.g

    def points(self, n: int) -> int:
        if n not in self._counts:
            self._counts[n] = count_points(self, n)
        return self._counts[n]

    def trace(self, n: int) -> int:
        return self.q**n + 1 - self.points(n)

    @cached_property
    def lpoly(self) -> LPolynomial:
        return l_polynomial(self)

    def __repr__(self):
        return f"Curve({self.model!r})"


def _value_logs(ext, F: Poly) -> np.ndarray:
    return ext.horner_logs(list(F.coeffs), ext.all_logs())


def _character_sum(r: int, s: int, logs: np.ndarray) -> CycInt:
    """sum over the given field values of sum_{(i,s)=1} chi_s^i, in Z[xi_r]."""
    nz = logs[logs != ZERO_LOG]
    counts = np.bincount(nz % s, minlength=s)
    total = CycInt.zero(r)
    for i in units(s):
        exps = np.zeros(r, dtype=np.int64)
        for v in range(s):
            exps[((r // s) * i * v) % r] += counts[v]
        total = total + CycInt.from_counts(r, exps.tolist())
    return total


def _infinity_points(model: ThinModel, n: int) -> CycInt:
    r = model.r
    total = CycInt.zero(r)
    lead_log = model.alpha_index * (model.field.q**n - 1) // (model.field.q - 1)
    for s in divisors(r):
        if s == 1 or model.deg_F % s:
            continue
        for i in units(s):
            total = total + CycInt.root(r, (r // s) * i * lead_log)
    return total


def count_points(curve: Curve, n: int) -> int:
    """#C(F_{q^n}) by the character sum over P^1(F_{q^n}), checked against a
    direct count of solutions of y^r = F(x)."""
    q, r, model = curve.q, curve.spec.r, curve.model
    if q**n > MAX_EXT_ORDER:
        raise ExtensionTooLarge(f"q^n = {q**n} exceeds {MAX_EXT_ORDER}")
    ext = extend_field(curve.spec.field, n)
    total = CycInt.integer(r, q**n + 1)
    for s in divisors(r):
        if s > 1:
            total = total + _character_sum(r, s, _value_logs(ext, f_sub(model, s)))
    infinity = _infinity_points(model, n)
    total = total + infinity
    count = total.to_int()

    logs = _value_logs(ext, model.F)
    affine = int(np.sum(logs == ZERO_LOG)) + r * int(np.sum((logs != ZERO_LOG) & (logs % r == 0)))
    oracle = affine + 1 + infinity.to_int()
    if oracle != count:
        raise ArithmeticError(f"point count mismatch for {model!r}, n={n}: {count} vs {oracle}")
    return count


def scaled_trace(curve: Curve, n: int) -> int:
    """t_n = q^n + 1 - #C(F_{q^n}) = q^(n/2) Tr(Theta^n)."""
    t = curve.trace(n)
    if t * t > 4 * curve.g**2 * curve.q**n:
        raise RHViolation(f"|t_{n}| = {abs(t)} exceeds 2g q^(n/2)")
    return t


def _primes_dividing(field, n: int) -> list[PrimePoly]:
    out = []
    for m in divisors(n):
        out.extend(enumerate_irreducibles(field, m))
    return out


def trace_formula_thin(curve: Curve, n: int) -> int:
    """sum_{i=1}^{r-1} sum_{deg P | n} deg P (F/P)_r^(i n / deg P), P_inf included.

    (F/P)_r is read off from log F(alpha_P) for a root alpha_P of each prime,
    all primes of one degree at once."""
    r, model = curve.spec.r, curve.model
    field = curve.spec.field
    counts = [0] * r
    for m in divisors(n):
        roots = irreducibles_with_roots(field, m)[1]
        logs = extend_field(field, m).horner_logs(list(model.F.coeffs), roots)
        v = np.bincount(logs[logs != ZERO_LOG] % r, minlength=r)
        for i in range(1, r):
            for t in range(r):
                counts[(i * t * (n // m)) % r] += m * int(v[t])
    total = CycInt.from_counts(r, counts)
    sym = symbol_context(field, r).symbol_infinity(model.F, r)
    for i in range(1, r):
        total = total + sym ** (i * n)
    return total.to_int()


def trace_formula_general(curve: Curve, n: int) -> int:
    """sum_{s|r} sum_{(i,s)=1} sum_{deg P | n} deg P (F_(s)/P)_s^(i n / deg P)."""
    r, model = curve.spec.r, curve.model
    ctx = symbol_context(curve.spec.field, r)
    total = CycInt.zero(r)
    primes = _primes_dividing(curve.spec.field, n)
    for s in divisors(r):
        if s == 1:
            continue
        Fs = f_sub(model, s)
        for P in primes:
            sym = ctx.legendre(Fs, P, s)
            for i in units(s):
                total = total + sym ** (i * n // P.degree) * P.degree
        # the convention at infinity keys on deg F, not deg F_(s)
        if model.deg_F % s == 0:
            sym = CycInt.root(r, (r // s) * model.alpha_index)
            for i in units(s):
                total = total + sym ** (i * n)
    return total.to_int()


@dataclass(frozen=True)
class LPolynomial:
    q: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = self.coeffs
        if len(c) % 2 == 0 or len(c) < 3:
            raise ValueError("an L-polynomial has even degree 2g >= 2")
        if c[0] != 1:
            raise ValueError("constant term must be 1")
        g = self.g
        for k in range(g + 1):
            if c[2 * g - k] != self.q ** (g - k) * c[k]:
                raise ValueError(f"functional equation fails at k={k}")

    @property
    def g(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def __call__(self, u):
        return sum(c * u**k for k, c in enumerate(self.coeffs))

    @cached_property
    def inverse_roots(self) -> np.ndarray:
        """omega_j with L(u) = prod (1 - omega_j u), accurate to RH_TOL."""
        return inverse_roots(np.array([self.coeffs], dtype=object), self.q)[0]

    def roots(self) -> np.ndarray:
        return 1 / self.inverse_roots

    def rh_deviation(self) -> float:
        return float(np.max(np.abs(np.abs(self.roots()) * math.sqrt(self.q) - 1)))

    def power_sum(self, n: int) -> int:
        return int(power_sums(np.array([self.coeffs], dtype=object), n)[0, n - 1])


def _companion_roots(c: np.ndarray) -> np.ndarray:
    """Roots of x^2g + c_1 x^(2g-1) + ... + c_2g for each row."""
    N, w = c.shape
    deg = w - 1
    comp = np.zeros((N, deg, deg))
    comp[:, 0, :] = -c[:, 1:].astype(float)
    comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
    return np.linalg.eigvals(comp).astype(complex)


def _mp_roots(coeffs, dps: int = 60) -> np.ndarray:
    """Inverse roots via exact squarefree factorisation and high precision
    root finding on each factor, which then has simple roots."""
    x = sympy.Symbol("x")
    out = []
    with mpmath.workdps(dps):
        for factor, mult in sympy.Poly([int(c) for c in coeffs], x).sqf_list()[1]:
            if factor.degree() == 0:
                continue
            rts = mpmath.polyroots([int(c) for c in factor.all_coeffs()], maxsteps=200, extraprec=4 * dps)
            out.extend([complex(z) for z in rts] * mult)
    return np.array(out)


def inverse_roots(coeffs: np.ndarray, q: int, tol: float = RH_TOL) -> np.ndarray:
    """Inverse roots of many L-polynomials at once.

    Double precision eigenvalues are used where they sit on |omega| = sqrt q
    within tol; rows that do not (typically repeated roots) are redone with
    high precision polynomial root finding.
    """
    coeffs = np.asarray(coeffs)
    uniq, inverse = np.unique(coeffs.astype(np.int64), axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    roots = _companion_roots(uniq)
    dev = np.abs(np.abs(roots) / math.sqrt(q) - 1).max(axis=1)
    for k in np.nonzero(dev > tol / 4)[0]:
        roots[k] = _mp_roots(uniq[k])
    dev = np.abs(np.abs(roots) / math.sqrt(q) - 1).max(axis=1)
    if np.any(dev > RH_HARD_TOL):
        k = int(np.argmax(dev))
        raise RHViolation(f"L-polynomial {uniq[k].tolist()} has a root off the circle by {dev[k]:.3g}")
    return roots[inverse]


def l_polynomial(curve: Curve) -> LPolynomial:
    """From t_1..t_g and the functional equation; when q^(2g) is small enough
    the coefficients are also derived from t_1..t_2g and compared."""
    g, q = curve.g, curve.q
    if g < 1:
        raise ValueError("genus must be positive")
    t = np.array([[scaled_trace(curve, n) for n in range(1, g + 1)]], dtype=object)
    coeffs = newton_coefficients(t, q, g)[0]
    if q ** (2 * g) <= FULL_COUNT_LIMIT:
        full = [scaled_trace(curve, n) for n in range(1, 2 * g + 1)]
        e = [1]
        for k in range(1, 2 * g + 1):
            s = sum((-1) ** (i - 1) * e[k - i] * full[i - 1] for i in range(1, k + 1))
            e.append(s // k)
        direct = [(-1) ** k * x for k, x in enumerate(e)]
        if direct != [int(x) for x in coeffs]:
            raise ArithmeticError("functional equation disagrees with the full count")
    lp = LPolynomial(q, tuple(int(x) for x in coeffs))
    lp.inverse_roots  # raises RHViolation if a root leaves the circle
    return lp


def eigenangles(lpoly: LPolynomial) -> np.ndarray:
    """theta_j in [0, 2pi) with inverse roots sqrt(q) e^(i theta_j), sorted."""
    return angles_from_roots(lpoly.inverse_roots[None, :])[0]


def angles_from_roots(roots: np.ndarray) -> np.ndarray:
    return np.sort(np.mod(np.angle(roots), 2 * np.pi), axis=-1)
