"""s-th power residue symbols (F/P)_s for finite primes and for P_inf."""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np

from .errors import BadCongruence
from .finite_field import ZERO_LOG, CycInt, ExtFieldSpec, FieldSpec, char_eval, extend_field
from .polynomials import Poly, PrimePoly, irreducibles_with_roots

INFINITY = "inf"


class SymbolContext:
    """Residue symbols of order dividing r over a fixed F_q.

    mu_s(F_q) is identified with <xi_s> by beta^((q-1)/s) <-> xi_s, beta the
    field generator.  Because every extension generator has norm beta, this
    agrees with the discrete-log definition of chi_{s;n} on every F_{q^n}.
    """

    def __init__(self, field: FieldSpec, r: int):
        if (field.q - 1) % r:
            raise BadCongruence(f"q = {field.q} is not 1 mod r = {r}")
        self.field = field
        self.r = r
        self._roots: dict[tuple[int, ...], int] = {}

    def ext(self, m: int) -> ExtFieldSpec:
        return extend_field(self.field, m)

    def _check_s(self, s: int) -> None:
        if self.r % s:
            raise ValueError(f"s = {s} does not divide r = {self.r}")
        if (self.field.q - 1) % s:
            raise BadCongruence(f"q = {self.field.q} is not 1 mod {s}")

    @cached_property
    def mu_generators(self) -> dict[int, int]:
        """s -> the element of F_q identified with xi_s."""
        f = self.field
        return {s: f.elem((f.q - 1) // s) for s in range(1, self.r + 1) if self.r % s == 0}

    def root_log(self, P: PrimePoly) -> int:
        """Log, in ext(deg P), of a root of P."""
        key = P.poly.coeffs
        if key in self._roots:
            return self._roots[key]
        m = P.degree
        try:
            polys, roots = irreducibles_with_roots(self.field, m)
            for poly, root in zip(polys, roots.tolist()):
                self._roots.setdefault(poly.coeffs, root)
            return self._roots[key]
        except KeyError:
            raise ValueError(f"{P!r} not found among irreducibles") from None

    def evaluate_at_root(self, F: Poly, P: PrimePoly) -> int:
        """log of F(alpha) in ext(deg P) for a root alpha of P (ZERO_LOG if P | F)."""
        R = F % P.poly
        if R.is_zero():
            return ZERO_LOG
        ext = self.ext(P.degree)
        return int(ext.horner_logs(list(R.coeffs), np.array([self.root_log(P)]))[0])

    def exponent(self, F: Poly, P: PrimePoly) -> int | None:
        """t with (F/P)_r = xi_r^t, or None when P | F."""
        if P.is_infinite:
            if F.degree % self.r:
                return None
            return self.field.log_of(F.lead) % self.r
        L = self.evaluate_at_root(F, P)
        return None if L == ZERO_LOG else L % self.r

    def legendre(self, F: Poly, P: PrimePoly, s: int) -> CycInt:
        """(F/P)_s = chi_{s; deg P}(F(alpha)) as an element of Z[xi_r]."""
        self._check_s(s)
        if P.is_infinite:
            raise ValueError("use symbol_infinity for P_inf")
        R = F % P.poly
        if R.is_zero():
            return CycInt.zero(self.r)
        ext = self.ext(P.degree)
        L = int(ext.horner_logs(list(R.coeffs), np.array([self.root_log(P)]))[0])
        return char_eval(ext, s, ext.elem(L), self.r)

    def legendre_euler(self, F: Poly, P: PrimePoly, s: int) -> CycInt:
        """Euler-criterion evaluation: F^((q^m - 1)/s) mod P is a constant in
        mu_s(F_q), read off against the pinned s-th root of unity."""
        self._check_s(s)
        R = F % P.poly
        if R.is_zero():
            return CycInt.zero(self.r)
        e = (self.field.q**P.degree - 1) // s
        c = R.powmod(e, P.poly)
        if c.degree != 0:
            raise ArithmeticError("Euler power is not a constant")
        zeta = self.mu_generators[s]
        f = self.field
        acc = 1
        for t in range(s):
            if acc == c.coeffs[0]:
                return CycInt.root(self.r, (self.r // s) * t)
            acc = f.mul(acc, zeta)
        raise ArithmeticError("Euler power is not an s-th root of unity")

    def symbol_infinity(self, F: Poly, s: int) -> CycInt:
        """(F/P_inf)_s: chi_{s;1}(lead F) if s | deg F, else 0."""
        self._check_s(s)
        if F.is_zero() or F.degree % s:
            return CycInt.zero(self.r)
        return char_eval(self.field, s, F.lead, self.r)

    def minimal_polynomial(self, n: int, alpha: int) -> PrimePoly:
        """Minimal polynomial over F_q of alpha in F_{q^n} (alpha an int)."""
        ext = self.ext(n)
        field = self.field
        if alpha < field.q:
            return PrimePoly(Poly(field, (field.neg(alpha), 1)), _trusted=True)
        M = ext.order - 1
        L = ext.log_of(alpha)
        orbit = []
        cur = L
        while cur not in orbit:
            orbit.append(cur)
            cur = (cur * field.q) % M
        coeffs = [1]  # ints in ext encoding, low first
        for rho in orbit:
            neg_rho = ext.neg(ext.elem(rho))
            new = [0] * (len(coeffs) + 1)
            for k, c in enumerate(coeffs):
                new[k + 1] = ext.add(new[k + 1], c)
                new[k] = ext.add(new[k], ext.mul(c, neg_rho))
            coeffs = new
        if max(coeffs) >= field.q:
            raise ArithmeticError("minimal polynomial left the base field")
        return PrimePoly(Poly(field, coeffs), _trusted=True)

    def char_via_symbol(self, F: Poly, alpha, n: int, s: int) -> CycInt:
        """chi_{s;n}(F(alpha)) computed through the residue symbol at the
        minimal polynomial of alpha, checked against direct evaluation.

        ``alpha`` is an element of F_{q^n} (int) or INFINITY.
        """
        self._check_s(s)
        if alpha == INFINITY:
            if F.degree % s:
                return CycInt.zero(self.r)
            via_symbol = self.symbol_infinity(F, s) ** n
            direct = char_eval(self.field, s, self.field.power(F.lead, n), self.r)
            # chi_{s;n}(lead) on F_{q^n}: lead in F_q has log norm_exp * log_q(lead)
            ext = self.ext(n)
            direct_n = char_eval(ext, s, F.lead, self.r)
            if not (via_symbol == direct_n and direct == via_symbol):
                raise ArithmeticError("infinity symbol disagrees with direct evaluation")
            return via_symbol
        ext = self.ext(n)
        val = _horner_int(ext, F.coeffs, alpha)
        direct = char_eval(ext, s, val, self.r)
        P = self.minimal_polynomial(n, alpha)
        via_symbol = self.legendre(F, P, s) ** (n // P.degree)
        if direct != via_symbol:
            raise ArithmeticError(f"character identity failed at alpha={alpha}, P={P!r}")
        return via_symbol

    def unit_character_sum(self, P: PrimePoly, m: int) -> int:
        """sum_{j=0}^{r-1} (beta^j / P)_r^m, as an integer."""
        total = CycInt.zero(self.r)
        for j in range(self.r):
            alpha = Poly.const(self.field, self.field.elem(j))
            sym = self.symbol_infinity(alpha, self.r) if P.is_infinite else self.legendre(alpha, P, self.r)
            total = total + sym**m
        return total.to_int()


def _horner_int(ext: ExtFieldSpec, coeffs, x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = ext.add(ext.mul(acc, x), c)
    return acc


@lru_cache(maxsize=None)
def symbol_context(field: FieldSpec, r: int) -> SymbolContext:
    return SymbolContext(field, r)
