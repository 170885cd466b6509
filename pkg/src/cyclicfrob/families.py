"""The thin family of r-cyclic covers: enumeration, sampling and exact counts."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np
from sympy import divisors, mobius, totient

from .errors import BadCongruence, EmptyFamily, FamilyTooLarge, NonIntegerResult, NonIntegralGenus
from .finite_field import CycInt, FieldSpec
from .polynomials import (
    Poly,
    PrimePoly,
    factor,
    gcd,
    irreducibles_with_roots,
    is_squarefree,
    monic_polys,
    prime_count,
)

MAX_ENUMERATION = 10**8
MAX_SERIES_DEGREE = 40


def phi(n: int) -> int:
    return int(totient(n))


def mu(n: int) -> int:
    return int(mobius(n))


def units(r: int) -> tuple[int, ...]:
    """Part indices i in 1..r-1 with gcd(i, r) = 1."""
    return tuple(i for i in range(1, r) if math.gcd(i, r) == 1)


class Branch(enum.Enum):
    """The two degree shapes of a thin model: (deg F, r) = r or 1."""

    R = "r"
    ONE = "1"


@dataclass(frozen=True)
class FamilySpec:
    field: FieldSpec
    r: int
    g: int

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if self.g < 1:
            raise EmptyFamily("genus must be at least 1")
        if (self.field.q - 1) % self.r:
            raise BadCongruence(f"q = {self.field.q} is not 1 mod r = {self.r}")
        if (2 * self.g) % (self.r - 1):
            raise EmptyFamily(f"2g = {2 * self.g} is not 0 mod r - 1 = {self.r - 1}")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def d(self) -> int:
        return (2 * self.g + 2 * self.r - 2) // (self.r - 1)

    def radical_degree(self, branch: Branch) -> int:
        return self.d if branch is Branch.R else self.d - 1

    def allowed_class(self, branch: Branch, deg_f: int) -> bool:
        k = deg_f % self.r
        return k == 0 if branch is Branch.R else math.gcd(k, self.r) == 1


@dataclass(frozen=True, eq=False)
class ThinModel:
    """y^r = beta^alpha_index * prod_i f_i^i with monic squarefree coprime f_i."""

    field: FieldSpec
    r: int
    alpha_index: int
    parts: Mapping[int, Poly]
    branch: Branch

    @property
    def deg_F(self) -> int:
        return sum(i * f.degree for i, f in self.parts.items())

    @property
    def radical_degree(self) -> int:
        return sum(f.degree for f in self.parts.values())

    @property
    def alpha(self) -> int:
        return self.field.elem(self.alpha_index)

    def part(self, i: int) -> Poly:
        return self.parts.get(i, Poly.one(self.field))

    @cached_property
    def F(self) -> Poly:
        out = Poly.const(self.field, self.alpha)
        for i, f in sorted(self.parts.items()):
            out = out * f**i
        return out

    @cached_property
    def monic_F(self) -> Poly:
        return self.F.monic()

    @property
    def genus(self) -> int:
        return genus_of(self.r, self.parts)

    def key(self) -> tuple:
        return (self.alpha_index, tuple((i, self.part(i).coeffs) for i in units(self.r)))

    def __eq__(self, other):
        return isinstance(other, ThinModel) and self.r == other.r and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        inner = ", ".join(f"f{i}={self.part(i)!r}" for i in units(self.r))
        return f"ThinModel(r={self.r}, alpha=b^{self.alpha_index}, {inner})"


def genus_of(r: int, parts: Mapping[int, Poly]) -> int:
    """Genus from 2g + 2r - 2 = (r-1) sum deg f_i + r - (r, deg F)."""
    rad = sum(f.degree for f in parts.values())
    deg_f = sum(i * f.degree for i, f in parts.items())
    two_g = (r - 1) * rad + r - math.gcd(r, deg_f) - 2 * r + 2
    if two_g % 2 or two_g < 0:
        raise NonIntegralGenus(f"2g = {two_g} is not a nonnegative even integer")
    return two_g // 2


# -- monic leaves: sets of distinct primes with a part label each ----------


class PrimeCatalogue:
    """All monic irreducibles of degree <= max_deg, indexed globally by
    degree and then polynomial order."""

    def __init__(self, field: FieldSpec, max_deg: int):
        self.field = field
        self.max_deg = max_deg
        self.polys: list[Poly] = []
        self.offsets = [0]
        for m in range(1, max_deg + 1):
            polys, _ = irreducibles_with_roots(field, m)
            self.polys.extend(polys)
            self.offsets.append(len(self.polys))
        self.degrees = np.zeros(len(self.polys), dtype=np.int64)
        for m in range(1, max_deg + 1):
            self.degrees[self.offsets[m - 1] : self.offsets[m]] = m
        self.index = {P.coeffs: k for k, P in enumerate(self.polys)}

    def __len__(self):
        return len(self.polys)

    def count(self, m: int) -> int:
        return self.offsets[m] - self.offsets[m - 1]

    def block(self, m: int) -> slice:
        return slice(self.offsets[m - 1], self.offsets[m])


@lru_cache(maxsize=8)
def prime_catalogue(field: FieldSpec, max_deg: int) -> PrimeCatalogue:
    return PrimeCatalogue(field, max_deg)


@dataclass(frozen=True)
class LeafBlock:
    """Monic members sharing a degree pattern.

    Row t of ``sets`` lists the catalogue indices of the distinct primes
    dividing F; row u of ``labels`` gives the part index of each slot.  The
    members are all pairs (set, label row), set-major.
    """

    branch: Branch
    degs: tuple[int, ...]
    sets: np.ndarray
    labels: np.ndarray

    @property
    def size(self) -> int:
        return len(self.sets) * len(self.labels)

    @property
    def deg_F(self) -> np.ndarray:
        return self.labels @ np.asarray(self.degs, dtype=np.int64) if self.degs else np.zeros(len(self.labels), dtype=np.int64)


def _partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for m in range(min(n, largest), 0, -1):
        for rest in _partitions(n - m, m):
            yield (m,) + rest


def _prime_sets(cat: PrimeCatalogue, parts: tuple[int, ...]) -> np.ndarray:
    """All sets of distinct primes with the given multiset of degrees."""
    pieces = []
    for m, group in itertools.groupby(sorted(parts)):
        k = len(list(group))
        if k > cat.count(m):
            return np.zeros((0, len(parts)), dtype=np.int64)
        combos = np.array(list(itertools.combinations(range(cat.count(m)), k)), dtype=np.int64).reshape(-1, k)
        pieces.append(combos + cat.offsets[m - 1])
    if not pieces:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(len(p)) for p in pieces], indexing="ij")
    cols = [p[gr.ravel()] for p, gr in zip(pieces, grids)]
    return np.concatenate(cols, axis=1)


def monic_blocks(cat: PrimeCatalogue, r: int, D: int, classes: Sequence[int], branch: Branch) -> list[LeafBlock]:
    """Monic tuples of radical degree D with deg F mod r in ``classes``."""
    if D > cat.max_deg:
        raise ValueError(f"catalogue only reaches degree {cat.max_deg}")
    unit = units(r)
    wanted = {k % r for k in classes}
    out = []
    for parts in _partitions(D):
        degs = tuple(sorted(parts))
        k = len(degs)
        combos = list(itertools.product(unit, repeat=k))
        labels = np.array(combos, dtype=np.int64).reshape(len(combos), k)
        deg_f = labels @ np.asarray(degs, dtype=np.int64) if k else np.zeros(1, dtype=np.int64)
        labels = labels[np.isin(deg_f % r, list(wanted))]
        if not len(labels):
            continue
        sets = _prime_sets(cat, degs)
        if len(sets):
            out.append(LeafBlock(branch, degs, sets, labels))
    return out


def leaf_blocks(spec: FamilySpec, cat: PrimeCatalogue | None = None) -> list[LeafBlock]:
    """Every monic member of the family, grouped by degree pattern."""
    if cat is None:
        cat = prime_catalogue(spec.field, spec.d)
    r = spec.r
    return monic_blocks(cat, r, spec.d, [0], Branch.R) + monic_blocks(cat, r, spec.d - 1, units(r), Branch.ONE)


def leaf_to_model(spec: FamilySpec, cat: PrimeCatalogue, block: LeafBlock, set_row: int, label_row: int, alpha_index: int) -> ThinModel:
    parts: dict[int, Poly] = {}
    for idx, lab in zip(block.sets[set_row].tolist(), block.labels[label_row].tolist()):
        P = cat.polys[idx]
        parts[lab] = parts[lab] * P if lab in parts else P
    return ThinModel(spec.field, spec.r, alpha_index, parts, block.branch)


def model_to_leaf(cat: PrimeCatalogue, model: ThinModel) -> tuple[list[int], list[int]]:
    """Catalogue indices and labels of the primes dividing a model."""
    idx, lab = [], []
    for i, f in model.parts.items():
        for P, _ in factor(f) if f.degree > 0 else []:
            idx.append(cat.index[P.poly.coeffs])
            lab.append(i)
    return idx, lab


def enumerate_family(spec: FamilySpec) -> Iterator[ThinModel]:
    """Every member exactly once: alpha classes outermost, then branch R
    before branch ONE, then degree pattern, prime set and labelling."""
    size = count_family(spec)
    if size > MAX_ENUMERATION:
        raise FamilyTooLarge(f"family has {size} members")
    cat = prime_catalogue(spec.field, spec.d)
    blocks = leaf_blocks(spec, cat)
    for j in range(spec.r):
        for block in blocks:
            for s in range(len(block.sets)):
                for u in range(len(block.labels)):
                    yield leaf_to_model(spec, cat, block, s, u, j)


def compositions(spec: FamilySpec, branch: Branch) -> list[dict[int, int]]:
    """Degree assignments i -> deg f_i admissible in a branch."""
    idx = units(spec.r)
    D = spec.radical_degree(branch)
    out = []
    for degs in itertools.product(range(D + 1), repeat=len(idx)):
        if sum(degs) == D and spec.allowed_class(branch, sum(i * e for i, e in zip(idx, degs))):
            out.append(dict(zip(idx, degs)))
    return out


def sample_family(spec: FamilySpec, count: int, seed: int) -> list[ThinModel]:
    """Independent uniform draws from the family, reproducible from seed."""
    if count <= 0:
        return []
    rng = np.random.default_rng(seed)
    sizes = {b: sum(monic_count(spec, spec.radical_degree(b), k) for k in range(spec.r) if spec.allowed_class(b, k)) for b in Branch}
    total = sum(sizes.values())
    branches = list(Branch)
    probs = [sizes[b] / total for b in branches]
    comps = {b: compositions(spec, b) for b in branches}
    field = spec.field
    out = []
    while len(out) < count:
        branch = branches[rng.choice(len(branches), p=probs)]
        j = int(rng.integers(spec.r))
        while True:
            comp = comps[branch][int(rng.integers(len(comps[branch])))]
            parts = {}
            for i, e in comp.items():
                low = rng.integers(field.q, size=e).tolist()
                parts[i] = Poly(field, low + [1])
            prod = Poly.one(field)
            for f in parts.values():
                prod = prod * f
            if is_squarefree(prod):
                break
        parts = {i: f for i, f in parts.items() if f.degree > 0}
        out.append(ThinModel(field, spec.r, j, parts, branch))
    return out


# -- generating series ---------------------------------------------------------


class InfinitePrime:
    """Marker for coprimality to the prime at infinity."""

    is_infinite = True
    degree = 1

    def __repr__(self):
        return "P_inf"


P_INF = InfinitePrime()


def _conductor_degrees(G) -> tuple[int, ...]:
    """Degrees of the distinct finite primes dividing G."""
    if G is None or G is P_INF:
        return ()
    if isinstance(G, PrimePoly):
        return () if G.is_infinite else (G.degree,)
    if isinstance(G, Poly):
        if G.is_zero():
            raise ValueError("conductor must be nonzero")
        return tuple(P.degree for P, _ in factor(G)) if G.degree > 0 else ()
    if G == 1:
        return ()
    raise TypeError(f"unsupported conductor {G!r}")


@lru_cache(maxsize=None)
def ramanujan_sum(s: int, m: int) -> int:
    """sum over i in (Z/s)^* of xi_s^(i m), evaluated exactly."""
    total = CycInt.zero(s)
    for i in units(s) if s > 1 else (0,):
        total = total + CycInt.root(s, i * m)
    return total.to_int()


@dataclass(frozen=True)
class SeriesTable:
    r: int
    s: int
    G: object
    coeffs: tuple[int, ...]

    def __getitem__(self, d: int) -> int:
        return self.coeffs[d] if 0 <= d < len(self.coeffs) else 0


def series_coeff(r: int, s: int, G, d_max: int, field: FieldSpec) -> SeriesTable:
    """Coefficients of H_{r;s}(u;G) = prod_{P not | G} (1 + (phi(r)/phi(s)) sum_{(i,s)=1} (xi_s^i u)^deg P).

    The local factor at a prime of degree m is 1 + c_m u^m with c_m an
    integer (a Ramanujan sum), so the coefficients are rational integers.
    """
    if r % s:
        raise ValueError(f"s = {s} does not divide r = {r}")
    if d_max > MAX_SERIES_DEGREE:
        raise ValueError(f"d_max = {d_max} exceeds {MAX_SERIES_DEGREE}")
    return _series(r, s, _conductor_degrees(G), d_max, field.q, G)


def _series(r: int, s: int, excluded: tuple[int, ...], d_max: int, q: int, G) -> SeriesTable:
    ratio = phi(r) // phi(s)
    coeffs = [1] + [0] * d_max
    for m in range(1, d_max + 1):
        n_primes = prime_count(q, m) - excluded.count(m)
        c = ratio * ramanujan_sum(s, m)
        if c == 0 or n_primes == 0:
            continue
        local = [0] * (d_max + 1)
        for a in range(d_max // m + 1):
            local[a * m] = math.comb(n_primes, a) * c**a
        coeffs = [sum(coeffs[k] * local[t - k] for k in range(t + 1) if local[t - k]) for t in range(d_max + 1)]
    return SeriesTable(r, s, G, tuple(coeffs))


def monic_count(spec: FamilySpec, D: int, k: int, G=None) -> int:
    """|monic members with radical degree D, deg F = k mod r, coprime to G|,
    via (1/r) sum_{s|r} sum_{(j,s)=1} xi_s^(-jk) [u^D] H_{r;s}(u;G)."""
    if D < 0:
        return 0
    r = spec.r
    total = CycInt.zero(r)
    for s in divisors(r):
        coeff = series_coeff(r, s, G, max(D, 0), spec.field)[D]
        for j in units(s) if s > 1 else (0,):
            total = total + CycInt.root(r, -(r // s) * j * k) * coeff
    n = total.to_int()
    if n % r:
        raise NonIntegerResult(f"refined count {n}/{r} is not an integer")
    return n // r


def count_family(spec: FamilySpec, G=None) -> int:
    """|family members coprime to G|; G is None, a Poly, a PrimePoly or P_INF."""
    r, d = spec.r, spec.d
    if G is P_INF or (isinstance(G, PrimePoly) and G.is_infinite):
        return r * monic_count(spec, d, 0)
    total = monic_count(spec, d, 0, G)
    total += sum(monic_count(spec, d - 1, k, G) for k in units(r))
    return r * total


def count_from_series(spec: FamilySpec, G=None) -> int:
    """sum_{s|r} phi(s)[u^d]H_s + phi(r) sum_{s|r} mu(s)[u^(d-1)]H_s."""
    r, d = spec.r, spec.d
    if G is P_INF or (isinstance(G, PrimePoly) and G.is_infinite):
        return sum(phi(s) * series_coeff(r, s, None, d, spec.field)[d] for s in divisors(r))
    total = 0
    for s in divisors(r):
        H = series_coeff(r, s, G, d, spec.field)
        total += phi(s) * H[d] + phi(r) * mu(s) * H[d - 1]
    return total


def branch_counts(spec: FamilySpec) -> dict[Branch, dict[int, int]]:
    """Monic counts per branch and residue class of deg F mod r."""
    out = {}
    for b in Branch:
        D = spec.radical_degree(b)
        out[b] = {k: monic_count(spec, D, k) for k in range(spec.r) if spec.allowed_class(b, k)}
    return out


def incexc_coeff(r: int, s: int, P: PrimePoly, d: int, field: FieldSpec) -> CycInt:
    """[u^d]H_{r;s}(u;P) by inclusion-exclusion over multiples of P."""
    if P.is_infinite:
        raise ValueError("P must be finite")
    n = P.degree
    H = series_coeff(r, s, None, d, field)
    inner = CycInt.zero(r)
    for i in units(s) if s > 1 else (0,):
        inner = inner + CycInt.root(r, (r // s) * i * n)
    ratio = phi(r) // phi(s)
    total = CycInt.zero(r)
    for a in range(d // n + 1):
        total = total + inner**a * ((-ratio) ** a * H[d - a * n])
    return total


def unram_formula(spec: FamilySpec, n: int) -> Fraction:
    d, ph, q = spec.d, phi(spec.r), spec.q
    return sum(
        (Fraction(-ph, q**n) ** a * (1 - Fraction(a * n, d)) ** (ph - 1) for a in range(d // n + 1)),
        Fraction(0),
    )


def unram_ratio(spec: FamilySpec, P: PrimePoly) -> tuple[Fraction, Fraction, Fraction]:
    """(exact proportion of members coprime to P, asymptotic formula, |difference|)."""
    exact = Fraction(count_family(spec, P), count_family(spec))
    formula = unram_formula(spec, 1 if P.is_infinite else P.degree)
    return exact, formula, abs(exact - formula)


# -- independent oracles -----------------------------------------------------------


def count_by_leaves(spec: FamilySpec, G=None) -> int:
    """Family size by summing over the explicit prime-set enumeration."""
    cat = prime_catalogue(spec.field, spec.d)
    banned = set()
    if isinstance(G, (Poly, PrimePoly)) and not (isinstance(G, PrimePoly) and G.is_infinite):
        poly = G.poly if isinstance(G, PrimePoly) else G
        banned = {cat.index[P.poly.coeffs] for P, _ in factor(poly) if P.degree <= spec.d}
    total = 0
    for block in leaf_blocks(spec, cat):
        if G is P_INF or (isinstance(G, PrimePoly) and G.is_infinite):
            ok_sets = len(block.sets)
            ok_labels = int(np.sum(block.deg_F % spec.r == 0))
            total += ok_sets * ok_labels
            continue
        if banned:
            ok_sets = int(np.sum(~np.isin(block.sets, list(banned)).any(axis=1)))
        else:
            ok_sets = len(block.sets)
        total += ok_sets * len(block.labels)
    return spec.r * total


def count_naive(spec: FamilySpec, G: Poly | None = None) -> int:
    """Family size by looping over all monic tuples; only for tiny specs."""
    field = spec.field
    total = 0
    for branch in Branch:
        for comp in compositions(spec, branch):
            idx = list(comp)
            pools = [list(monic_polys(field, comp[i])) for i in idx]
            for tup in itertools.product(*pools):
                prod = Poly.one(field)
                for f in tup:
                    prod = prod * f
                if not is_squarefree(prod):
                    continue
                if G is not None and gcd(prod, G).degree > 0:
                    continue
                total += 1
    return spec.r * total

