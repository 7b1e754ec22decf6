"""Command-line entry point: ``banachlab <subcommand> [options]``.

Exit codes: 0 all checks pass, 1 a checked inequality or identity fails,
2 usage error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import building, expander, harness
from .errors import BudgetError, HypothesisError
from .fourier import fft_factorize, fourier_matrix, max_entry_error, product, variant_factorize, variant_operator
from .groups import FiniteAbelianGroup, SubgroupChain, maximal_chains
from .norms import AVERAGED, SUM, CoefficientSpace, type_constant_lower
from .residue import LAURENT, PADIC

SCHEMA = "v1"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
EXACT_TOL = 1e-12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers


def int_list(text: str) -> List[int]:
    """'1..6' or '1,2,5' or '3'."""
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}")


def group_list(text: str) -> List[List[int]]:
    """'4;9;4,9' -> [[4], [9], [4, 9]]."""
    return [int_list(part) for part in text.split(";") if part.strip()]


def chain_steps(text: str) -> List[List[int]]:
    """'2;6' -> generator index lists of the intermediate subgroups."""
    return [int_list(part) for part in text.split(";") if part.strip()]


def _space(q: float, d: int, convention: str = SUM) -> CoefficientSpace:
    return CoefficientSpace(q, d, convention)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


# ---------------------------------------------------------------- commands
# each returns (rows, passed, failures)


def cmd_fft_verify(a) -> tuple:
    G = FiniteAbelianGroup(a.group)
    chains = [SubgroupChain.from_generators(G, chain_steps(a.chain))] if a.chain else maximal_chains(G)
    T = fourier_matrix(G)
    rows, failures = [], []
    for ch in chains:
        err = max_entry_error(product(fft_factorize(ch)), T)
        row = {"group": list(G.factors), "chain_orders": [S.order for S in ch.subgroups], "factors": ch.length, "max_error": err}
        rows.append(row)
        if err > EXACT_TOL:
            failures.append(row)
    return rows, not failures, failures


def cmd_variant_verify(a) -> tuple:
    coc, chain, gbar, I = harness.twisted_setup(a.p, a.n, a.h, a.kind)
    err = max_entry_error(product(variant_factorize(coc, chain, gbar)), variant_operator(coc, validate=False))
    rows = [{"check": "variant-factorization", "p": a.p, "n": a.n, "h": a.h, "kind": a.kind, "max_error": err}]
    failures = [rows[0]] if err > EXACT_TOL else []
    for q in a.q:
        for d in a.d:
            for variant in ("i", "ii"):
                r = harness.check_variant_chain_bound(coc, chain, gbar, I, _space(q, d), seed=a.seed, variant=variant)
                row = {"check": r.name, "space": _space(q, d).label(), "lhs_lower": r.lhs_lower, "rhs_upper": r.rhs_upper,
                       "margin": r.margin, "satisfied": r.satisfied}
                rows.append(row)
                if not r.satisfied:
                    failures.append(row)
    return rows, not failures, failures


def cmd_twisted(a) -> tuple:
    rows, failures = [], []
    for n in a.n:
        r = harness.twisted_hilbert_check(a.p, n, a.h, a.kind)
        r["ok"] = bool(r["holds"] and r["z_invariance_error"] <= EXACT_TOL)
        rows.append(r)
        if not r["ok"]:
            failures.append(r)
    return rows, not failures, failures


def cmd_decay_scan(a) -> tuple:
    E = _space(a.q, a.d, a.convention)
    res = harness.scan_decay(a.p, a.h, a.n, E, seed=a.seed, kind=a.kind, match_group_dim=a.match_group_dim)
    rows = [{"n": r["n"], "p": a.p, "h": a.h, "norm": r["upper"] if r["upper_method"] == "hilbert-exact" else r["lower"], **r,
             "alpha": res["alpha"], "beta": res["beta"], "C": res["C"]} for r in res["rows"]]
    return rows, res["bound_holds"], ([] if res["bound_holds"] else [{"bound_holds": False}])


def cmd_type_probe(a) -> tuple:
    rows, failures = [], []
    for n in a.n:
        d = a.d if a.d else n
        E = _space(a.q, d)
        val = type_constant_lower(E, a.type_p, n, seed=a.seed)
        row = {"space": E.label(), "type_p": a.type_p, "n": n, "lower": val}
        if a.q == 1 and d == n and a.type_p == 2:
            row["reference"] = math.sqrt(n)
            row["ok"] = val >= math.sqrt(n) - 1e-9
        elif a.q == 2 and a.type_p == 2:
            row["reference"] = 1.0
            row["ok"] = abs(val - 1.0) <= 1e-9
        rows.append(row)
        if row.get("ok") is False:
            failures.append(row)
    return rows, not failures, failures


def _affine_rows(reports) -> tuple:
    rows, failures = [], []
    for r in reports:
        row = {**r.parameters, "check": r.name, "lhs_lower": r.lhs_lower, "rhs_upper": r.rhs_upper, "margin": r.margin,
               "satisfied": r.satisfied, "asserted": r.asserted}
        for key in ("alpha", "worst_random", "worst_optimized", "k_reduction_error", "measured_constant", "C2"):
            if key in r.details:
                row[key] = r.details[key]
        rows.append(row)
        if r.asserted and not r.satisfied:
            failures.append(row)
        if r.details.get("k_reduction_error", 0.0) > 1e-9:
            failures.append({**row, "reason": "k-reduction"})
    return rows, not failures, failures


def cmd_lemma47(a) -> tuple:
    reps = []
    for n in a.n:
        for q in a.q:
            for d in a.d:
                reps.append(harness.check_affine_character_average(a.p, a.h, n, _space(q, d), a.trials, a.optimized, a.seed, a.kind))
    return _affine_rows(reps)


def cmd_lemma49(a) -> tuple:
    reps = []
    for n in a.n:
        for k in a.k:
            if k > n:
                continue
            for q in a.q:
                for d in a.d:
                    reps.append(harness.check_affine_difference(a.p, a.h, n, k, _space(q, d), a.trials, a.optimized, a.seed, a.kind,
                                                        weight=a.weight))
    rows, passed, failures = _affine_rows(reps)
    if a.obstruction:
        for n in a.n:
            rows.append({"check": "l1-obstruction", **harness.l1_obstruction(a.p, n, 0, a.h, a.kind)})
    return rows, passed, failures


def cmd_bourgain_probe(a) -> tuple:
    groups = [FiniteAbelianGroup(g) for g in a.groups]
    res = harness.probe_bourgain(groups, _space(a.q, a.d), seed=a.seed, p_grid=a.p_grid)
    rows = []
    for r in res["rows"]:
        for pp, M in r["M"].items():
            rows.append({"group": r["group"], "order": r["order"], "p": float(pp), "M": M, "space": res["space"]})
    return rows, True, []


def cmd_building_check(a) -> tuple:
    params = building.formula_sweep_parameters(a.primes) if a.sweep else [(a.p, m, n) for m in a.m for n in a.n]
    rows, failures = [], []
    for p, m, n in params:
        r = building.verify_relative_position_formula(p, m, n, identity_limit=a.identity_limit, seed=a.seed)
        rows.append(r)
        if not r["passed"]:
            failures.append(r)
    return rows, not failures, failures


def cmd_factorization_check(a) -> tuple:
    params = building.factorization_sweep_parameters() if a.sweep else [(a.p, m, n) for m in a.m for n in a.n]
    rows, failures = [], []
    for p, m, n in params:
        r = building.sweep_house_factorizations(p, m, n)
        rows.append(r)
        if not r["passed"]:
            failures.append(r)
    return rows, not failures, failures


def cmd_expander_scan(a) -> tuple:
    E = _space(a.q, a.d)
    res = expander.embedding_obstruction_scan(a.moduli, E, seed=a.seed, restarts=a.restarts, budget=a.budget)
    failures = [r for r in res["rows"] if r["ratio_oracle"] is not None and r["ratio_lower"] > r["ratio_oracle"] + 1e-6]
    rows = [{**r, "ratios_bounded": res["ratios_bounded"]} for r in res["rows"]]
    return rows, not failures, failures


# ---------------------------------------------------------------- parser


def _common(sp: argparse.ArgumentParser):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="output file (default: stdout)")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to the report")


def _kind(sp):
    sp.add_argument("--kind", choices=[PADIC, LAURENT], default=PADIC)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="banachlab", description="Fourier decay, building and expander verifiers.")
    sub = ap.add_subparsers(dest="command", required=True)
    cmds: Dict[str, Callable] = {}

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        _common(sp)
        sp.set_defaults(func=fn)
        cmds[name] = fn
        return sp

    sp = add("fft-verify", cmd_fft_verify, "check the chain factorization of T_G")
    sp.add_argument("--group", type=int_list, default=[4], help="cyclic factors, e.g. 4,9")
    sp.add_argument("--chain", default=None, help="generator indices of intermediate subgroups, ';'-separated (default: all maximal chains)")

    sp = add("variant-verify", cmd_variant_verify, "variant factorization and product bounds for the twisted cocycle")
    for k, v in (("--p", 2), ("--n", 2), ("--h", 1)):
        sp.add_argument(k, type=int, default=v)
    sp.add_argument("--q", type=float_list, default=[2.0])
    sp.add_argument("--d", type=int_list, default=[1])
    _kind(sp)

    sp = add("twisted", cmd_twisted, "Hilbert norm of the twisted operator")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--n", type=int_list, default=[1, 2, 3])
    sp.add_argument("--h", type=int, default=1)
    _kind(sp)

    sp = add("decay-scan", cmd_decay_scan, "norms of T_(O/pi^n) over a range of n")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--h", type=int, default=1)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n", type=int_list, default=[1, 2, 3, 4])
    sp.add_argument("--convention", choices=[SUM, AVERAGED], default=SUM)
    sp.add_argument("--match-group-dim", action="store_true", help="use d = #O/pi^n at each level")
    _kind(sp)

    sp = add("type-probe", cmd_type_probe, "lower bounds on type constants")
    sp.add_argument("--q", type=float, default=1.0)
    sp.add_argument("--d", type=int, default=0, help="dimension (default: n)")
    sp.add_argument("--n", type=int_list, default=[2, 4, 8])
    sp.add_argument("--type-p", type=float, default=2.0)

    for name, fn in (("lemma47", cmd_lemma47), ("lemma49", cmd_lemma49)):
        sp = add(name, fn, "affine-line average inequality")
        sp.add_argument("--p", type=int, default=2)
        sp.add_argument("--h", type=int, default=1)
        sp.add_argument("--n", type=int_list, default=[2])
        sp.add_argument("--q", type=float_list, default=[2.0])
        sp.add_argument("--d", type=int_list, default=[1])
        sp.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
        sp.add_argument("--optimized", type=int, default=harness.DEFAULT_OPTIMIZED)
        _kind(sp)
        if name == "lemma49":
            sp.add_argument("--k", type=int_list, default=[0])
            sp.add_argument("--weight", type=float_list, default=None, help="mean-zero weight on the residue field")
            sp.add_argument("--obstruction", action="store_true", help="add the l1 delta-family rows")

    sp = add("bourgain-probe", cmd_bourgain_probe, "empirical Hausdorff-Young constants (exploratory)")
    sp.add_argument("--groups", type=group_list, default=[[4], [9], [4, 9]])
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--p-grid", type=float_list, default=[1.25, 1.5, 1.75, 2.0])

    for name, fn in (("building-check", cmd_building_check), ("factorization-check", cmd_factorization_check)):
        sp = add(name, fn, "relative positions in the building" if name == "building-check" else "matrix factorizations")
        sp.add_argument("--p", type=int, default=2)
        sp.add_argument("--m", type=int_list, default=[1])
        sp.add_argument("--n", type=int_list, default=[1])
        sp.add_argument("--sweep", action="store_true", help="run the full budgeted parameter set")
        if name == "building-check":
            sp.add_argument("--primes", type=int_list, default=[2, 3, 5, 7])
            sp.add_argument("--identity-limit", type=int, default=256)

    sp = add("expander-scan", cmd_expander_scan, "spectral gaps and Poincare ratios of SL_3(Z/m)")
    sp.add_argument("--moduli", type=int_list, default=[2, 3])
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--restarts", type=int, default=2)
    sp.add_argument("--budget", type=int, default=expander.VERTEX_BUDGET)
    return ap


def _config(a) -> dict:
    skip = {"func", "out", "format", "timestamp"}
    return _jsonable({k: v for k, v in sorted(vars(a).items()) if k not in skip})


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    rows = _jsonable(report["rows"])
    keys = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def run(argv: Optional[Sequence[str]] = None) -> tuple:
    """Parse, execute and render; returns (exit code, report text)."""
    ap = build_parser()
    a = ap.parse_args(argv)
    report = {"schema": SCHEMA, "command": a.command, "config": _config(a), "seed": a.seed}
    try:
        rows, passed, failures = a.func(a)
        code = EXIT_OK if passed else EXIT_VIOLATION
        report.update({"passed": bool(passed), "rows": rows, "failures": failures})
    except BudgetError as e:
        code = EXIT_RESOURCE
        report.update({"passed": False, "rows": [], "failures": [{"error": "resource", "message": str(e)}]})
    except (HypothesisError, ValueError) as e:
        code = EXIT_USAGE
        report.update({"passed": False, "rows": [], "failures": [{"error": "usage", "message": str(e)}]})
    if a.timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = render(report, a.format)
    if a.format == "csv" and code != EXIT_OK:
        text += render({"rows": report["failures"]}, "csv") if report["failures"] else ""
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code, text


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        code, _ = run(argv)
    except SystemExit as e:  # argparse usage errors
        return EXIT_USAGE if e.code not in (0, None) else 0
    return code


if __name__ == "__main__":
    sys.exit(main())
