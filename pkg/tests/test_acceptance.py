"""Acceptance suite: one test per criterion, at the stated tolerances.

Each criterion prints one PASS/FAIL line (written through the capture
so it lands in piped output). The Monte Carlo sweeps behind criteria
7 and 8 are session fixtures; set MIXSAT_ACCEPT_CACHE to a directory to
keep their result stores across runs (they resume deterministically)
and MIXSAT_ACCEPT_WORKERS to change parallelism (default 2).

Criterion 7's +-0.03 sub-check is implemented exactly as stated and is
expected to fail honestly: at N = 2000 the P_SAT = 1/2 point sits
0.04-0.11 above alpha_c(beta) (the transition window scales as
N^(-1/3), so the crossing converges only like N^(-1/3); pushing the
discrepancy under 0.03 would need N ~ 1e5). The ladder data shows the
discrepancy shrinking monotonically toward alpha_c for every beta,
which is the physically meaningful reproduction of the boundary.
"""

import math
import os
import sys
import time

import numpy as np
import pytest
import scipy.sparse

from mixsat import ensemble, experiment, motif, snip, solver, theory
from mixsat import rng as mixsat_rng
from mixsat.constructions import (
    cycle_edges,
    dumbbell_edges,
    figure_eight_edges,
    penalized_four_cycle,
    quantum_instance_on_graph,
    random_unsnippable_loop,
    theta_edges,
)
from mixsat.ensemble import GNM, EnsembleParams
from mixsat.solver import Status

WORKERS = int(os.environ.get("MIXSAT_ACCEPT_WORKERS", "2"))
TRIALS = 400
BETAS = (0.0, 0.25, 0.5, 0.75, 1.0)
NS = (250, 500, 1000, 2000)
MASTER_SEED = 20240817


def report(num, name, ok, detail=""):
    line = f"CRITERION {num:>2} {'PASS' if ok else 'FAIL'} {name}"
    if detail:
        line += f" | {detail}"
    print(line)
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return ok


# ---------------------------------------------------------------------------
# criterion 1


def test_criterion_1_formula_endpoints():
    p0 = theory.phase_boundary(0.0)
    p1 = theory.phase_boundary(1.0)
    ok = (
        abs(p0.lambda_plus - 0.5) < 1e-12
        and abs(p0.alpha_c - 1.0) < 1e-12
        and abs(p1.lambda_plus - 1.0) < 1e-12
        and abs(p1.alpha_c - 0.5) < 1e-12
    )
    assert report(1, "formula endpoints", ok,
                  f"beta=0 -> ({p0.lambda_plus}, {p0.alpha_c}); "
                  f"beta=1 -> ({p1.lambda_plus}, {p1.alpha_c})")


# ---------------------------------------------------------------------------
# criterion 2


def test_criterion_2_transfer_matrix_vs_enumeration():
    t0 = time.time()
    worst = 0.0
    for length in range(3, 13):
        for beta in np.arange(0.0, 1.001, 0.1):
            a = theory.p_loop_unsnippable(length, float(beta), "transfer")
            b = theory.p_loop_unsnippable(length, float(beta), "enumerate")
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    ok = worst < 1e-12
    assert report(2, "transfer trace vs exhaustive enumeration", ok,
                  f"worst relative deviation {worst:.2e} in {time.time()-t0:.2f}s")


# ---------------------------------------------------------------------------
# criterion 3


def test_criterion_3_solver_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(MASTER_SEED)
    n_instances = 2000
    unknown = 0
    disagreements = 0
    decided = 0
    for k in range(n_instances):
        n = int(rng.integers(4, 13))
        alpha = float(rng.uniform(0.2, min(2.0, (n - 1) / 2)))
        beta = BETAS[int(rng.integers(0, 5))]
        params = EnsembleParams(n_qubits=n, clause_density=alpha,
                                quantum_fraction=beta, seed=int(rng.integers(2**63)))
        inst = ensemble.generate_instance(params)
        verdict = solver.solve(inst, strategy="product")
        dim = solver.exact_kernel_dimension(inst)
        if verdict.status == Status.UNKNOWN:
            unknown += 1
            continue
        decided += 1
        if (verdict.status == Status.SAT) != (dim > 0):
            disagreements += 1
    unknown_rate = unknown / n_instances
    ok = disagreements == 0 and unknown_rate < 0.01
    assert report(
        3, "solver/oracle equivalence", ok,
        f"{decided} decided, {disagreements} disagreements, "
        f"unknown rate {100*unknown_rate:.2f}% ({time.time()-t0:.0f}s)")


# ---------------------------------------------------------------------------
# criterion 4


def test_criterion_4_snip_core_sat_preservation():
    t0 = time.time()
    rng = np.random.default_rng(MASTER_SEED + 1)
    bad_preserve = 0
    bad_confluence = 0
    for k in range(500):
        n = int(rng.integers(4, 13))
        alpha = float(rng.uniform(0.2, min(2.0, (n - 1) / 2)))
        beta = BETAS[int(rng.integers(0, 5))]
        params = EnsembleParams(n_qubits=n, clause_density=alpha,
                                quantum_fraction=beta, seed=int(rng.integers(2**63)))
        inst = ensemble.generate_instance(params)
        report_ = snip.snip_core(inst)
        full_dim = solver.exact_kernel_dimension(inst)
        core_dim = (solver.exact_kernel_dimension(report_.core)
                    if report_.core.n_qubits else 1)
        if (full_dim > 0) != (core_dim > 0):
            bad_preserve += 1
        base_sites = set(report_.surviving_site_map)
        for order in range(10):
            other = snip.snip_core(inst, order_rng=np.random.default_rng(order))
            if set(other.surviving_site_map) != base_sites or other.core != report_.core:
                bad_confluence += 1
                break
    ok = bad_preserve == 0 and bad_confluence == 0
    assert report(
        4, "snip-core SAT preservation + confluence", ok,
        f"500 instances, {bad_preserve} preservation / {bad_confluence} "
        f"confluence failures ({time.time()-t0:.0f}s)")


# ---------------------------------------------------------------------------
# criterion 5


def test_criterion_5_loop_kernel_dimension():
    t0 = time.time()
    rng = np.random.default_rng(MASTER_SEED + 2)
    bad = 0
    for k in range(200):
        length = int(rng.integers(3, 9))
        loop = random_unsnippable_loop(length, rng)
        if solver.exact_kernel_dimension(loop) != 2:
            bad += 1
    ok = bad == 0
    assert report(5, "unsnippable loops have kernel dimension exactly 2", ok,
                  f"200 loops, {bad} exceptions ({time.time()-t0:.0f}s)")


# ---------------------------------------------------------------------------
# criterion 6


def test_criterion_6_unsat_motif():
    inst = penalized_four_cycle()
    classical = solver.solve_classical(inst)
    dim = solver.exact_kernel_dimension(inst)
    ok = classical.status == Status.UNSAT and dim == 0
    assert report(6, "loop + two cross-links is UNSAT", ok,
                  f"classical verdict {classical.status.value}, kernel dim {dim}")


# ---------------------------------------------------------------------------
# criteria 7 and 8: shared Monte Carlo sweeps


def _grid(beta: float) -> tuple:
    ac = theory.alpha_critical(beta)
    deltas = [round(-0.15 + 0.05 * k, 10) for k in range(7)]
    # The spec grid (width 0.3 around alpha_c) cannot bracket the
    # finite-size crossings, which sit up to alpha_c + 0.27 at N = 250;
    # extend the UNSAT side so every ladder crossing is measurable.
    deltas += [0.20, 0.25]
    if beta < 0.375:
        deltas += [0.30]
    return tuple(round(ac + d, 10) for d in deltas)


def _sweep(cache_dir, tag, betas, ns, trials=TRIALS):
    records = []
    for beta in betas:
        out = os.path.join(cache_dir, f"{tag}_b{beta:.2f}.csv")
        cfg = experiment.SweepConfig(
            betas=(beta,), alphas=_grid(beta), ns=ns, trials=trials,
            seed=MASTER_SEED, graph_model=GNM, out=out,
            resume=os.path.exists(out), workers=WORKERS,
        )
        for _ in experiment.run_sweep(cfg):
            pass
        records.extend(experiment.read_records(out))
    return records


@pytest.fixture(scope="session")
def sweep_store(tmp_path_factory):
    cache = os.environ.get("MIXSAT_ACCEPT_CACHE")
    if cache:
        os.makedirs(cache, exist_ok=True)
    else:
        cache = str(tmp_path_factory.mktemp("acceptance_sweeps"))
    return cache


@pytest.fixture(scope="session")
def boundary_records(sweep_store):
    t0 = time.time()
    records = _sweep(sweep_store, "boundary", BETAS, NS)
    sys.__stdout__.write(
        f"[acceptance] boundary sweep ready ({time.time()-t0:.0f}s)\n")
    return records


@pytest.fixture(scope="session")
def collapse_records(sweep_store, boundary_records):
    t0 = time.time()
    extra = _sweep(sweep_store, "collapse4000", (0.0, 1.0), (4000,))
    sys.__stdout__.write(
        f"[acceptance] N=4000 sweep ready ({time.time()-t0:.0f}s)\n")
    return boundary_records + extra


def _crossings(records, beta):
    out = {}
    for n in NS:
        cell = [r for r in records if r.beta == beta and r.n == n]
        ests = experiment.estimate_p_sat(cell)
        out[n] = experiment.find_crossing(ests)
    return out


def test_criterion_7_phase_boundary_reproduction(boundary_records):
    lines = []
    shrink_ok = 0
    worst_2000 = 0.0
    discrepancy_2000 = {}
    for beta in BETAS:
        ac = theory.alpha_critical(beta)
        crossings = _crossings(boundary_records, beta)
        discs = [abs(crossings[n].alpha_half - ac) for n in NS]
        monotone = all(a > b for a, b in zip(discs, discs[1:]))
        shrink_ok += monotone
        discrepancy_2000[beta] = crossings[2000].alpha_half - ac
        worst_2000 = max(worst_2000, abs(discrepancy_2000[beta]))
        lines.append(
            f"beta={beta:.2f}: crossings "
            + " ".join(f"{crossings[n].alpha_half:.4f}" for n in NS)
            + f" vs alpha_c={ac:.4f}; discrepancies "
            + " ".join(f"{d:+.4f}" for d in
                       [crossings[n].alpha_half - ac for n in NS])
            + f" monotone={monotone}"
        )
    for line in lines:
        sys.__stdout__.write("[criterion 7] " + line + "\n")

    ok_shrink = shrink_ok >= 4
    report(7, "boundary ladder: discrepancy shrinks monotonically",
           ok_shrink, f"{shrink_ok}/5 beta values monotone")
    ok_tol = worst_2000 <= 0.03
    report(7, "N=2000 crossing within +-0.03 of alpha_c", ok_tol,
           "; ".join(f"beta={b:.2f}: {d:+.4f}"
                     for b, d in discrepancy_2000.items()))
    assert ok_shrink, "ladder discrepancies must shrink for >= 4 of 5 betas"
    assert ok_tol, (
        "spec defect, failing honestly: the N=2000 half-crossing sits "
        f"{worst_2000:.3f} above alpha_c (worst beta); the window scales as "
        "N^(-1/3) so +-0.03 is reachable only near N ~ 1e5. See the ladder "
        "lines above for the monotone convergence toward Eq. (7)."
    )


def test_criterion_8_scaling_window(collapse_records):
    results = {}
    for beta in (0.0, 1.0):
        recs = [r for r in collapse_records
                if r.beta == beta and r.n in (500, 1000, 2000, 4000)]
        objs = experiment.scan_exponents(recs, beta, (0.25, 1.0 / 3.0, 0.5))
        results[beta] = objs
    ok = all(
        objs[1.0 / 3.0] < objs[0.25] and objs[1.0 / 3.0] < objs[0.5]
        for objs in results.values()
    )
    detail = "; ".join(
        f"beta={b:.0f}: obj(1/4)={o[0.25]:.4g} obj(1/3)={o[1/3]:.4g} "
        f"obj(1/2)={o[0.5]:.4g}" for b, o in results.items())
    assert report(8, "collapse objective minimized at exponent 1/3", ok, detail)


# ---------------------------------------------------------------------------
# criterion 9


def _fixed_graphs():
    graphs = []
    for length in range(3, 9):
        graphs.append((f"cycle{length}", length, cycle_edges(length)))
    for spec in ((1, 2, 2), (2, 2, 2), (1, 3, 3), (2, 3, 4)):
        n, edges = theta_edges(*spec)
        graphs.append((f"theta{spec}", n, edges))
    for spec in ((3, 3), (3, 4), (4, 4)):
        n, edges = figure_eight_edges(*spec)
        graphs.append((f"figure8{spec}", n, edges))
    for spec in ((3, 3, 1), (3, 4, 2), (4, 4, 1)):
        n, edges = dumbbell_edges(*spec)
        graphs.append((f"dumbbell{spec}", n, edges))
    import itertools

    graphs.append(("K4", 4, list(itertools.combinations(range(4), 2))))
    prism = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    graphs.append(("prism", 6, prism))
    cube = [(0, 1), (1, 2), (2, 3), (0, 3), (4, 5), (5, 6), (6, 7), (4, 7),
            (0, 4), (1, 5), (2, 6), (3, 7)]
    graphs.append(("cube", 8, cube))
    wheel = cycle_edges(5) + [(k, 5) for k in range(5)]
    graphs.append(("wheel5", 6, wheel))
    return graphs


def test_criterion_9_geometrization():
    t0 = time.time()
    graphs = _fixed_graphs()
    assert len(graphs) == 20
    rng = np.random.default_rng(MASTER_SEED + 3)
    constant = 0
    detail = []
    for name, n, edges in graphs:
        dims = {
            solver.exact_kernel_dimension(quantum_instance_on_graph(n, edges, rng))
            for _ in range(100)
        }
        if len(dims) == 1:
            constant += 1
        detail.append(f"{name}:{sorted(dims)}")
    ok = constant / len(graphs) >= 0.99
    assert report(
        9, "geometrization: kernel dimension graph-determined", ok,
        f"{constant}/20 graphs constant over 100 Haar draws "
        f"({time.time()-t0:.0f}s)")


# ---------------------------------------------------------------------------
# criterion 10


def _gnp_via_edge_count(n, alpha, beta, seed, rng):
    """Exact GNP draw: binomial edge count, then a uniform M-subset."""
    pairs = n * (n - 1) // 2
    p = 2.0 * alpha / (n - 1)
    m = int(rng.binomial(pairs, p))
    params = EnsembleParams(n_qubits=n, clause_density=m / n,
                            quantum_fraction=beta, graph_model=GNM, seed=seed)
    return ensemble.generate_instance(params)


def test_criterion_10_subgraph_count_checks():
    t0 = time.time()
    # (a) triangles and unsnippable triangles at N=3000, 1000 samples
    n, alpha, beta, samples = 3000, 0.4, 0.5, 1000
    rng = np.random.default_rng(MASTER_SEED + 4)
    tri = np.zeros(samples)
    uns = np.zeros(samples)
    for k in range(samples):
        inst = _gnp_via_edge_count(n, alpha, beta, int(rng.integers(2**63)), rng)
        tri[k] = motif.count_short_cycles(inst, 3)
        uns[k] = motif.count_unsnippable_cycles(inst, 3)
    exp_tri = theory.expected_loop_count(n, 3, alpha)
    exp_uns = theory.expected_unsnippable_loops(n, 3, alpha, beta)
    se_tri = tri.std(ddof=1) / math.sqrt(samples)
    se_uns = uns.std(ddof=1) / math.sqrt(samples)
    ok_tri = abs(tri.mean() - exp_tri) < 3 * se_tri
    ok_uns = abs(uns.mean() - exp_uns) < 3 * se_uns
    report(10, "Eq.(1) triangle count", ok_tri,
           f"mean {tri.mean():.4f} vs {exp_tri:.4f} (3se={3*se_tri:.4f})")
    report(10, "Eq.(2) unsnippable-triangle count", ok_uns,
           f"mean {uns.mean():.4f} vs {exp_uns:.4f} (3se={3*se_uns:.4f})")

    # (b) fixed cyclomatic-2 motif (the diamond) halves when N doubles
    alpha2 = 2.0
    ladder = [64 * 2**k for k in range(8)]
    target_events = 1200
    means = []
    for nn in ladder:
        expect = theory.expected_subgraph_count(nn, 4, 5, 4, alpha2)
        n_samples = max(40, int(math.ceil(target_events / expect)))
        total = 0
        for k in range(n_samples):
            inst_rng = np.random.default_rng(
                (MASTER_SEED + 5) * 1000003 + nn * 131 + k)
            pairs = nn * (nn - 1) // 2
            m = int(inst_rng.binomial(pairs, 2 * alpha2 / (nn - 1)))
            params = EnsembleParams(n_qubits=nn, clause_density=m / nn,
                                    quantum_fraction=0.0, graph_model=GNM,
                                    seed=int(inst_rng.integers(2**63)))
            edges = ensemble.sample_graph(params, mixsat_rng.InstanceRandom(params.seed))
            if not edges:
                continue
            rows = np.array([e[0] for e in edges])
            cols = np.array([e[1] for e in edges])
            data = np.ones(len(edges))
            a = scipy.sparse.csr_matrix(
                (np.concatenate([data, data]),
                 (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                shape=(nn, nn))
            t2 = a @ a
            common = np.asarray(t2[rows, cols]).ravel()
            total += int((common * (common - 1) // 2).sum())
        means.append(total / n_samples)
    slope = np.polyfit(np.log(ladder), np.log(means), 1)[0]
    ok_slope = abs(slope + 1.0) <= 0.05
    report(10, "cyclomatic-2 motif frequency ~ 1/N", ok_slope,
           f"log-log slope {slope:.4f} over ladder {ladder} "
           f"({time.time()-t0:.0f}s)")
    assert ok_tri and ok_uns and ok_slope
