"""Command-line entry point: ``cyclicfrob {count,verify,density}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from sympy import factorint

from .errors import CyclicFrobError, SupportViolation
from .families import (
    P_INF,
    FamilySpec,
    branch_counts,
    count_by_leaves,
    count_family,
    count_from_series,
    incexc_coeff,
    series_coeff,
    unram_ratio,
)
from .finite_field import CycInt, make_field
from .polynomials import enumerate_irreducibles
from .statistics import TestFunction, a0_identity, density_report, verify_theorem_1_5

SCHEMA = 1
LEAF_CHECK_LIMIT = 2 * 10**6


class ConfigError(Exception):
    pass


def _num(x, exact: bool = True):
    """Deterministic text for report values."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        if not exact:
            return _num(float(x))
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, CycInt):
        return str(x.to_int()) if x.is_rational_integer() else repr(x)
    return x


def _check(name: str, ok: bool, lhs=None, rhs=None) -> dict:
    return {"name": name, "status": "PASS" if ok else "FAIL", "lhs": _num(lhs), "rhs": _num(rhs)}


def _field(q: int):
    fac = factorint(q)
    if len(fac) != 1:
        raise ConfigError(f"q = {q} is not a prime power")
    (p, a), = fac.items()
    return make_field(p, a)


def _spec(q: int, r: int, g: int) -> FamilySpec:
    if r < 2:
        raise ConfigError("r must be at least 2")
    if (q - 1) % r:
        raise ConfigError(f"hypothesis q = 1 mod r fails: q = {q}, r = {r}")
    if (2 * g) % (r - 1):
        raise ConfigError(f"hypothesis 2g = 0 mod (r - 1) fails: g = {g}, r = {r}")
    return FamilySpec(_field(q), r, g)


def _genera(args) -> list[int]:
    if args.g_list:
        return [int(x) for x in args.g_list.split(",") if x.strip()]
    if args.g is None:
        raise ConfigError("give --g or --g-list")
    return [args.g]


def _testfn(args) -> TestFunction:
    name = args.testfn
    if name == "zero":
        return TestFunction.zero()
    if name in ("fejer", "fejer-even"):
        if args.alpha is None:
            raise ConfigError("--alpha is required for the Fejer test function")
        return TestFunction.fejer(args.alpha, one_sided=name == "fejer")
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"unknown test function {name!r} (not a built-in name or a file)")
    return TestFunction.from_csv(path)


def _config(args) -> dict:
    keys = ["command", "q", "r", "g", "g_list", "n_max", "mode", "sample", "seed", "testfn", "alpha", "format", "jobs"]
    return {k: _num(getattr(args, k, None)) for k in keys}


# -- commands ------------------------------------------------------------------


def _count_one(q: int, r: int, g: int) -> tuple[list[dict], list[dict]]:
    spec = _spec(q, r, g)
    total = count_family(spec)
    rows = [{"g": g, "branch": "all", "k": None, "count": total}]
    for branch, per_k in branch_counts(spec).items():
        for k, n in per_k.items():
            rows.append({"g": g, "branch": branch.value, "k": k, "count": spec.r * n})
    checks = [_check(f"g={g}: series", count_from_series(spec) == total, count_from_series(spec), total)]
    if total <= LEAF_CHECK_LIMIT:
        leaves = count_by_leaves(spec)
        checks.append(_check(f"g={g}: enumeration", leaves == total, leaves, total))
    return rows, checks


def _verify_one(q: int, r: int, g: int, n_max: int, sample: int | None, seed: int, exact: bool):
    spec = _spec(q, r, g)
    rows, checks = [], []
    mode = "sample" if sample else "exhaustive"
    for rep in verify_theorem_1_5(spec, range(1, n_max + 1), mode, sample or 0, seed):
        rows.append(
            {
                "kind": "trace",
                "g": g,
                "n": rep.n,
                "avg_scaled": _num(rep.avg_scaled, exact),
                "avg_trace": _num(rep.avg_trace),
                "stderr": _num(rep.stderr),
                "mt_scaled": _num(rep.mt_scaled, exact),
                "et_scaled": _num(rep.et_scaled, exact),
                "prediction_main": _num(rep.prediction_main, exact),
                "residual": _num(rep.residual),
                "envelope": _num(rep.bound_envelope),
            }
        )
        for name, ok in rep.checks.items():
            checks.append(_check(f"g={g} n={rep.n}: {name}", ok))
    for n in range(1, n_max + 1):
        lhs, rhs = a0_identity(q, r, n)
        checks.append(_check(f"n={n}: a0 identity", lhs == rhs, lhs, rhs))
    linear = enumerate_irreducibles(spec.field, 1)[0]
    for label, P in (("linear", linear), ("infinity", P_INF)):
        ex, formula, res = unram_ratio(spec, P)
        rows.append({"kind": "unram", "g": g, "prime": label, "exact": _num(ex, exact), "formula": _num(formula, exact), "residual": _num(float(res))})
    for m in (1, 2):
        P = enumerate_irreducibles(spec.field, m)[0]
        for s in sorted(k for k in range(1, r + 1) if r % k == 0):
            lhs = incexc_coeff(r, s, P, spec.d, spec.field)
            rhs = series_coeff(r, s, P, spec.d, spec.field)[spec.d]
            checks.append(_check(f"g={g} deg P={m} s={s}: inclusion-exclusion", lhs == CycInt.integer(r, rhs), lhs, rhs))
    return rows, checks


def _density_one(q: int, r: int, g: int, f: TestFunction, sample: int | None, seed: int):
    spec = _spec(q, r, g)
    rep = density_report(spec, f, "sample" if sample else "exhaustive", sample or 0, seed)
    row = {
        "g": g,
        "lhs": _num(rep.lhs),
        "lhs_eigen": _num(rep.lhs_eigen),
        "rhs_refined": _num(rep.rhs_refined),
        "rhs_ks": _num(rep.rhs_ks),
        "dev_r": _num(rep.dev_r_value),
        "residual_refined": _num(rep.residual_refined),
        "residual_ks": _num(rep.residual_ks),
        "stderr": _num(rep.stderr),
    }
    checks = []
    if rep.route_gap is not None:
        checks.append(_check(f"g={g}: density routes agree", rep.route_gap <= 1e-6, rep.route_gap, 1e-6))
    return [row], checks


def _run(fn, jobs: int, calls: list[tuple]):
    if jobs > 1 and len(calls) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, *zip(*calls)))
    return [fn(*c) for c in calls]


def _dispatch(args) -> dict:
    genera = _genera(args)
    for g in genera:
        _spec(args.q, args.r, g)
    exact = args.mode == "exact"
    if args.command == "count":
        results = _run(_count_one, args.jobs, [(args.q, args.r, g) for g in genera])
    elif args.command == "verify":
        results = _run(_verify_one, args.jobs, [(args.q, args.r, g, args.n_max, args.sample, args.seed, exact) for g in genera])
    else:
        f = _testfn(args)
        for g in genera:
            f.check_grid(g)
        results = _run(_density_one, args.jobs, [(args.q, args.r, g, f, args.sample, args.seed) for g in genera])
    rows = [row for rs, _ in results for row in rs]
    checks = [c for _, cs in results for c in cs]
    return {"schema": SCHEMA, "config": _config(args), "rows": rows, "checks": checks}


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    rows = report["rows"]
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in fields})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclicfrob", description="Frobenius trace statistics for thin cyclic covers of P^1.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("count", "family size with per-branch counts and cross-checks"),
        ("verify", "exact trace averages, main/error terms and identities"),
        ("density", "one-level density against the refined and Katz-Sarnak predictions"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--q", type=int, required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--g", type=int)
        p.add_argument("--g-list", dest="g_list")
        p.add_argument("--n-max", dest="n_max", type=int, default=6)
        p.add_argument("--mode", choices=["exact", "float"], default="exact", help="how rational values are written")
        p.add_argument("--sample", type=int, help="average over this many sampled members instead of the whole family")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--testfn", default="fejer", help='"fejer", "fejer-even", "zero", or a CSV file with header x,fhat')
        p.add_argument("--alpha", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=["json", "csv"], default="csv" if name == "density" else "json")
        p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _dispatch(args)
    except ArithmeticError as exc:
        print(f"cyclicfrob: identity failed: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, SupportViolation, CyclicFrobError, ValueError) as exc:
        print(f"cyclicfrob: {exc}", file=sys.stderr)
        return 2
    text = _render(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    failed = [c["name"] for c in report["checks"] if c["status"] != "PASS"]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
