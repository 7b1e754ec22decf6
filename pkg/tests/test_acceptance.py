"""The eleven acceptance criteria; each test prints one PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

from banachlab import building, cli, expander, harness
from banachlab.fourier import fft_factorize, fourier_matrix, max_entry_error, product
from banachlab.groups import FiniteAbelianGroup, SubgroupChain, maximal_chains, ring_filtration
from banachlab.norms import CoefficientSpace, delta_witness, l1, l2, tensor_norm_lower, tensor_norm_upper, type_constant_lower
from banachlab.residue import KINDS, RingSpec

CATALOG = [[2 ** k] for k in range(1, 9)] + [[3 ** k] for k in range(1, 6)] + [[4, 9]]
GRID_SPACES = [CoefficientSpace(q, d) for q in (1.5, 2.0) for d in (1, 4)]
GRID = [(p, n) for p in (2, 3) for n in range(1, 5)]


@pytest.fixture
def report(record_property, capsys):
    def _report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        record_property("acceptance", line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return _report


def _label(factors):
    return "x".join(f"Z{m}" for m in factors)


def test_criterion_01_fft_exactness(report):
    t0 = time.perf_counter()
    worst, chains = 0.0, 0
    for factors in CATALOG:
        G = FiniteAbelianGroup(factors)
        T = fourier_matrix(G)
        for ch in maximal_chains(G):
            worst = max(worst, max_entry_error(product(fft_factorize(ch)), T))
            chains += 1
    dt = time.perf_counter() - t0
    report(1, "FFT factorization exact on all maximal chains", worst <= 1e-12 and dt < 10,
           f"{chains} chains, max error {worst:.2e}, {dt:.1f}s")


def test_criterion_02_hilbert_law(report):
    worst = 0.0
    for factors in CATALOG:
        G = FiniteAbelianGroup(factors)
        T = fourier_matrix(G)
        target = G.order ** -0.5
        lo = tensor_norm_lower(T, l2(1), restarts=2, seed=0).lower
        up = tensor_norm_upper(T, l2(1)).upper
        worst = max(worst, abs(lo - target), abs(up - target))
    report(2, "Hilbert norm law ||T_G|| = (#G)^(-1/2)", worst <= 1e-6, f"max deviation {worst:.2e}")


def test_criterion_03_l1_saturation(report):
    worst = math.inf
    for factors in CATALOG:
        G = FiniteAbelianGroup(factors)
        N = G.order
        lo = tensor_norm_lower(fourier_matrix(G), l1(N), restarts=1, iters=2, seed=0, init=[delta_witness(N)]).lower
        worst = min(worst, lo)
    report(3, "l1(#G) delta witness saturates", worst >= 1 - 1e-9, f"min lower {worst:.12f}")


def test_criterion_04_chain_products(report):
    checked, worst, bad = 0, math.inf, []
    for kind in KINDS:
        for p, n in GRID:
            spec = RingSpec(p, n, kind)
            G = FiniteAbelianGroup.from_ring(spec)
            chains = maximal_chains(G) if G.order <= 16 else [SubgroupChain(G, ring_filtration(spec, range(n, -1, -1)))]
            coc, ch, gbar, I = harness.twisted_setup(p, n, 1, kind)
            for E in GRID_SPACES:
                reps = [harness.check_fft_chain_bound(c, E, restarts=2) for c in chains]
                reps += [harness.check_variant_chain_bound(coc, ch, gbar, I, E, variant=v, restarts=2) for v in ("i", "ii")]
                for r in reps:
                    checked += 1
                    worst = min(worst, r.margin)
                    if not r.satisfied:
                        bad.append((kind, p, n, E.label(), r.name))
    report(4, "chain product bounds (Fourier and variant, (i) and (ii))", not bad,
           f"{checked} reports, min margin {worst:.3e}, failures {bad[:3]}")


def test_criterion_05_twisted_norm(report):
    worst_ratio, worst_z = 0.0, 0.0
    ok = True
    for kind in KINDS:
        for p in (2, 3):
            for n in (1, 2, 3):
                r = harness.twisted_hilbert_check(p, n, 1, kind)
                ok &= r["holds"] and r["z_invariance_error"] <= 1e-12
                worst_ratio = max(worst_ratio, r["norm"] / r["bound"])
                worst_z = max(worst_z, r["z_invariance_error"])
    report(5, "twisted operator Hilbert norm and Z independence", ok,
           f"max norm/bound {worst_ratio:.6f}, max Z deviation {worst_z:.1e}")


def test_criterion_06_affine_line_averages(report):
    t0 = time.perf_counter()
    c2 = {p: harness.delta_decomposition(p).C2 for p in (2, 3, 5)}
    c2_ok = c2[2] == pytest.approx(1.0, abs=1e-12) and c2[3] == pytest.approx(4 / 3, abs=1e-12) and c2[5] == pytest.approx(8 / 5, abs=1e-12)
    reps = []
    for kind in KINDS:
        for p, n in GRID:
            for E in GRID_SPACES:
                reps.append(harness.check_affine_character_average(p, 1, n, E, seed=0, kind=kind))
                for k in (0, 1):
                    if k <= n:
                        reps.append(harness.check_affine_difference(p, 1, n, k, E, seed=0, kind=kind))
    dt = time.perf_counter() - t0
    violations = [r.parameters for r in reps if not r.satisfied]
    families = sum(r.trials for r in reps)
    k_err = max(r.details.get("k_reduction_error", 0.0) for r in reps)
    ok = c2_ok and not violations and all(r.trials == 1020 for r in reps) and k_err <= 1e-9 and dt < 300
    report(6, "affine-line average inequalities and C2", ok,
           f"{len(reps)} grid points, {families} families, min margin {min(r.margin for r in reps):.3e}, "
           f"C2 {[round(c2[p], 12) for p in (2, 3, 5)]}, {dt:.0f}s")


def test_criterion_07_relative_position_formula(report):
    params = building.formula_sweep_parameters()
    results = [building.verify_relative_position_formula(p, m, n) for p, m, n in params]
    mism = sum(r["mismatches"] for r in results)
    idf = sum(r["identity_failures"] for r in results)
    inst = sum(r["instances"] for r in results)
    cases = {k: sum(r["identity_cases"][k] for r in results) for k in ("i<min", "i=n", "i=m")}
    ok = mism == 0 and idf == 0 and all(v > 0 for v in cases.values())
    report(7, "relative position formula vs elementary divisors", ok,
           f"{len(params)} configs, {inst} instances, mismatches {mism}, proof-case identities {cases} failures {idf}")


def test_criterion_08_factorizations(report):
    params = building.factorization_sweep_parameters()
    results = [building.sweep_house_factorizations(p, m, n) for p, m, n in params]
    inst = sum(r["instances"] for r in results)
    report(8, "matrix factorizations exact with outer factors in K", all(r["passed"] for r in results),
           f"{len(params)} configs, {inst} instances per case")


def test_criterion_09_expander_oracles(report):
    graphs = [expander.complete_graph(4), expander.cycle_graph(4), expander.congruence_quotient(2)]
    worst_gap, worst_var = 0.0, 0.0
    for g in graphs:
        rep = expander.poincare_ratio(g, l2(1), seed=0)
        worst_gap = max(worst_gap, abs(rep.ratio_lower - rep.ratio_oracle))
        rng = np.random.default_rng(np.random.SeedSequence([9, g.order]))
        for _ in range(100):
            worst_var = max(worst_var, expander.variance_identity_error(rng.standard_normal((g.order, 3))))
    report(9, "Poincare ratio = 1/lambda1 and pair/variance identity", worst_gap <= 1e-4 and worst_var <= 1e-9,
           f"max |ratio - 1/lambda1| {worst_gap:.1e}, max identity error {worst_var:.1e}")


def test_criterion_10_type_probe(report):
    l1_vals = {n: type_constant_lower(l1(n), 2, n) for n in (2, 4, 8)}
    l2_vals = {d: type_constant_lower(l2(d), 2, 4) for d in (1, 2, 4)}
    ok = all(v >= math.sqrt(n) - 1e-9 for n, v in l1_vals.items()) and all(abs(v - 1) <= 1e-9 for v in l2_vals.values())
    report(10, "type constants of l1^n and l2^d", ok,
           f"l1 {[round(v, 9) for v in l1_vals.values()]}, l2 {[round(v, 12) for v in l2_vals.values()]}")


def _strip(text: str) -> str:
    try:
        rep = json.loads(text)
    except json.JSONDecodeError:
        return text
    rep.pop("timestamp", None)
    return json.dumps(rep, sort_keys=True)


def test_criterion_11_cli_determinism(report, tmp_path):
    runs = [
        ["fft-verify", "--group", "4,9"],
        ["decay-scan", "--p", "2", "--h", "1", "--q", "2", "--n", "1..6", "--format", "csv"],
        ["decay-scan", "--p", "3", "--q", "1.5", "--d", "4", "--n", "1..3"],
        ["variant-verify", "--p", "3", "--n", "2", "--q", "1.5", "--d", "4", "--seed", "11"],
        ["twisted", "--p", "3", "--n", "1..3"],
        ["type-probe", "--seed", "5"],
        ["lemma47", "--p", "3", "--n", "2", "--q", "1.5", "--d", "4", "--trials", "100", "--optimized", "3", "--seed", "7"],
        ["lemma49", "--p", "2", "--n", "3", "--k", "0,1", "--trials", "100", "--optimized", "3", "--seed", "7", "--format", "csv"],
        ["bourgain-probe", "--groups", "4;2,2", "--seed", "3"],
        ["building-check", "--p", "2", "--m", "1", "--n", "1"],
        ["factorization-check", "--p", "3", "--m", "2", "--n", "1"],
        ["expander-scan", "--moduli", "2,3", "--seed", "13", "--format", "csv"],
        ["expander-scan", "--moduli", "2", "--q", "1.5", "--d", "2", "--seed", "13", "--timestamp"],
    ]
    differing = []
    for args in runs:
        outs = []
        for i in range(2):
            path = tmp_path / f"{args[0]}-{i}.out"
            cli.main(args + ["--out", str(path)])
            outs.append(path.read_text())
        same = outs[0] == outs[1] if "--timestamp" not in args else _strip(outs[0]) == _strip(outs[1])
        if not same:
            differing.append(args[0])
    report(11, "CLI reports byte-identical across repeated runs", not differing,
           f"{len(runs)} commands, differing {differing}")
