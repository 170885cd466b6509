"""Vectorised evaluation of residue-symbol data over a whole family.

Every monic member F is a set of distinct primes Q with part labels i, so
log F(x) = sum_i i * log Q(x).  A table of log Q(x) mod r for all catalogue
primes Q and a fixed set of columns x (one root per prime P, or every point
of F_{q^m}) turns each member into a short histogram: for each column group
and each residue v mod r, the number of columns where the r-th power
character of F takes the value xi_r^v.  Traces for every twist alpha and
every aggregate over the family are linear functions of these histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .families import Branch, FamilySpec, LeafBlock, PrimeCatalogue, ThinModel, leaf_blocks, model_to_leaf, prime_catalogue
from .finite_field import ZERO_LOG, extend_field
from .polynomials import irreducibles_with_roots

ZERO_FLAG = 1 << 20
CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ColumnGroup:
    """kind "prime": one root of each prime of this degree.
    kind "point": every element of F_{q^degree}."""

    kind: str
    degree: int
    logs: np.ndarray

    @property
    def size(self) -> int:
        return len(self.logs)


def prime_columns(field, max_deg: int) -> list[ColumnGroup]:
    return [ColumnGroup("prime", m, irreducibles_with_roots(field, m)[1]) for m in range(1, max_deg + 1)]


def point_columns(field, max_deg: int) -> list[ColumnGroup]:
    return [ColumnGroup("point", m, extend_field(field, m).all_logs()) for m in range(1, max_deg + 1)]


def symbol_table(cat: PrimeCatalogue, r: int, groups: Sequence[ColumnGroup]) -> np.ndarray:
    """R[Q, c] = log Q(x_c) mod r in F_{q^deg}, or ZERO_FLAG where Q(x_c) = 0."""
    field = cat.field
    ncol = sum(g.size for g in groups)
    R = np.empty((len(cat), ncol), dtype=np.int32)
    col = 0
    for grp in groups:
        ext = extend_field(field, grp.degree)
        x = grp.logs[None, :]
        base_log = np.array([ext.log[c] if c else ZERO_LOG for c in range(field.q)], dtype=np.int64)
        for m in range(1, cat.max_deg + 1):
            block = cat.block(m)
            coeffs = np.array([P.coeffs for P in cat.polys[block]], dtype=np.int64)
            clog = base_log[coeffs]
            rows = max(1, CHUNK_ELEMENTS // max(grp.size, 1))
            for lo in range(0, len(coeffs), rows):
                c = clog[lo : lo + rows]
                acc = np.zeros((len(c), grp.size), dtype=np.int64)  # leading coefficient 1
                for k in range(m - 1, -1, -1):
                    acc = ext.ladd(ext.lmul(acc, x), c[:, k : k + 1])
                R[block.start + lo : block.start + lo + len(c), col : col + grp.size] = np.where(acc < 0, ZERO_FLAG, acc % r)
        col += grp.size
    return R


@dataclass
class FamilyHistogram:
    """Per monic member: hist[n, g, v] = #columns of group g with symbol xi_r^v."""

    spec: FamilySpec
    groups: list[ColumnGroup]
    hist: np.ndarray
    deg_F: np.ndarray
    branch_r: np.ndarray
    alpha: np.ndarray | None = None  # per-row twist for sampled members

    def __len__(self):
        return len(self.hist)

    def group_index(self, kind: str, degree: int) -> int:
        for k, g in enumerate(self.groups):
            if g.kind == kind and g.degree == degree:
                return k
        raise KeyError((kind, degree))


class FamilyEngine:
    def __init__(self, spec: FamilySpec, groups: Sequence[ColumnGroup]):
        self.spec = spec
        self.groups = list(groups)
        self.cat = prime_catalogue(spec.field, spec.d)
        self.R = symbol_table(self.cat, spec.r, self.groups)
        self.col_group = np.concatenate([np.full(g.size, k, dtype=np.int64) for k, g in enumerate(self.groups)])

    def _hist_rows(self, acc: np.ndarray) -> np.ndarray:
        r, G = self.spec.r, len(self.groups)
        codes = np.where(acc >= ZERO_FLAG, r, acc % r).astype(np.int64)
        flat = (np.arange(len(acc))[:, None] * G + self.col_group[None, :]) * (r + 1) + codes
        counts = np.bincount(flat.ravel(), minlength=len(acc) * G * (r + 1))
        return counts.reshape(len(acc), G, r + 1)[:, :, :r].astype(np.int32)

    def _block(self, block: LeafBlock) -> np.ndarray:
        ncol = self.R.shape[1]
        k = block.sets.shape[1]
        nl = len(block.labels)
        out = np.empty((len(block.sets), nl, len(self.groups), self.spec.r), dtype=np.int32)
        rows = max(1, CHUNK_ELEMENTS // max(ncol * max(k, 1), 1))
        for lo in range(0, len(block.sets), rows):
            S = block.sets[lo : lo + rows]
            gathered = [self.R[S[:, t]] for t in range(k)]
            for u, lab in enumerate(block.labels.tolist()):
                acc = np.zeros((len(S), ncol), dtype=np.int32)
                for t in range(k):
                    acc += lab[t] * gathered[t]
                out[lo : lo + len(S), u] = self._hist_rows(acc)
        return out.reshape(-1, len(self.groups), self.spec.r)

    def run(self) -> FamilyHistogram:
        """Histograms of every monic member, in enumeration order."""
        hists, degs, branch = [], [], []
        for block in leaf_blocks(self.spec, self.cat):
            hists.append(self._block(block))
            degs.append(np.tile(block.deg_F, len(block.sets)))
            branch.append(np.full(block.size, block.branch is Branch.R))
        return FamilyHistogram(self.spec, self.groups, np.concatenate(hists), np.concatenate(degs), np.concatenate(branch))

    def run_models(self, models: Sequence[ThinModel]) -> FamilyHistogram:
        """Histograms of explicit (for example sampled) members."""
        leaves = [model_to_leaf(self.cat, m) for m in models]
        width = max((len(i) for i, _ in leaves), default=0)
        idx = np.zeros((len(models), width), dtype=np.int64)
        lab = np.zeros((len(models), width), dtype=np.int32)
        for n, (i, l) in enumerate(leaves):
            idx[n, : len(i)] = i
            lab[n, : len(l)] = l
        ncol = self.R.shape[1]
        rows = max(1, CHUNK_ELEMENTS // max(ncol, 1))
        hist = np.empty((len(models), len(self.groups), self.spec.r), dtype=np.int32)
        for lo in range(0, len(models), rows):
            acc = np.zeros((min(rows, len(models) - lo), ncol), dtype=np.int32)
            for t in range(width):
                acc += lab[lo : lo + rows, t, None] * self.R[idx[lo : lo + rows, t]]
            hist[lo : lo + len(acc)] = self._hist_rows(acc)
        return FamilyHistogram(
            self.spec,
            self.groups,
            hist,
            np.array([m.deg_F for m in models], dtype=np.int64),
            np.array([m.branch is Branch.R for m in models], dtype=bool),
            np.array([m.alpha_index for m in models], dtype=np.int64),
        )


def _weights(r: int, shift: int, mult: int) -> np.ndarray:
    """w[v] = sum_{i=1}^{r-1} xi_r^{i (v + shift) mult} = r[r | (v+shift) mult] - 1."""
    v = np.arange(r)
    return np.where(((v + shift) * mult) % r == 0, r - 1, -1).astype(np.int64)


def _infinity_term(r: int, j: int, n: int) -> int:
    return r - 1 if (j * n) % r == 0 else -1


def scaled_traces(fh: FamilyHistogram, j: int | None, n_values: Iterable[int], source: str = "prime") -> np.ndarray:
    """t_n = q^n + 1 - #C(F_{q^n}) for every row, twisted by alpha = beta^j.

    With ``source="prime"`` this is the residue-symbol trace formula over
    primes of degree dividing n; with ``source="point"`` it is the
    character sum over the points of F_{q^n}.  When ``j`` is None the
    per-row twists of a sampled histogram are used.
    """
    r = fh.spec.r
    n_values = list(n_values)
    if j is None:
        out = np.empty((len(fh), len(n_values)), dtype=np.int64)
        for jj in np.unique(fh.alpha):
            rows = fh.alpha == jj
            sub = FamilyHistogram(fh.spec, fh.groups, fh.hist[rows], fh.deg_F[rows], fh.branch_r[rows])
            out[rows] = scaled_traces(sub, int(jj), n_values, source)
        return out
    out = np.zeros((len(fh), len(n_values)), dtype=np.int64)
    for col, n in enumerate(n_values):
        acc = np.zeros(len(fh), dtype=np.int64)
        if source == "prime":
            for delta in range(1, n + 1):
                if n % delta:
                    continue
                g = fh.group_index("prime", delta)
                acc += delta * (fh.hist[:, g, :].astype(np.int64) @ _weights(r, j * delta, n // delta))
        elif source == "point":
            g = fh.group_index("point", n)
            acc += fh.hist[:, g, :].astype(np.int64) @ _weights(r, j * n, 1)
        else:
            raise ValueError(source)
        acc += np.where(fh.branch_r, _infinity_term(r, j, n), 0)
        out[:, col] = -acc
    return out


def newton_coefficients(t: np.ndarray, q: int, g: int) -> np.ndarray:
    """L-polynomial coefficients c_0..c_2g from power sums t_1..t_g and the
    functional equation c_{2g-k} = q^{g-k} c_k."""
    n = len(t)
    e = np.zeros((n, 2 * g + 1), dtype=object if q**g * math.comb(2 * g, g) * 4**g > 2**62 else np.int64)
    e[:, 0] = 1
    for k in range(1, g + 1):
        s = sum((-1) ** (i - 1) * e[:, k - i] * t[:, i - 1] for i in range(1, k + 1))
        if np.any(s % k != 0):
            raise ArithmeticError("Newton identity produced a non-integer")
        e[:, k] = s // k
    for k in range(g):
        e[:, 2 * g - k] = q ** (g - k) * e[:, k]
    signs = np.array([(-1) ** k for k in range(2 * g + 1)], dtype=e.dtype)
    return e * signs


def power_sums(coeffs: np.ndarray, n_max: int) -> np.ndarray:
    """p_n = sum of n-th powers of the inverse roots, n = 1..n_max."""
    N, width = coeffs.shape
    signs = np.array([(-1) ** k for k in range(width)], dtype=coeffs.dtype)
    e = coeffs * signs
    dtype = object if coeffs.dtype == object or n_max > 24 else np.int64
    p = np.zeros((N, n_max + 1), dtype=dtype)
    for n in range(1, n_max + 1):
        s = np.zeros(N, dtype=dtype)
        for i in range(1, min(n - 1, width - 1) + 1):
            s = s + (-1) ** (i - 1) * e[:, i] * p[:, n - i]
        if n < width:
            s = s + (-1) ** (n - 1) * n * e[:, n]
        p[:, n] = s
    return p[:, 1:]
