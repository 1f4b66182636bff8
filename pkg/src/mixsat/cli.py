"""mixsat command line.

Subcommands: gen, solve, snip, census, theory, sweep, collapse,
selftest. Every command is deterministic given its flags and --seed;
without --seed one is drawn from system entropy and printed so the run
can be reproduced. Exit codes: 0 success (an UNSAT verdict is data,
not an error), 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys

import numpy as np

from . import constructions, ensemble, experiment, motif, snip, solver, theory


class DomainError(Exception):
    pass


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed} (drawn from entropy; pass --seed to reproduce)",
          file=sys.stderr)
    return seed


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _emit_rows(args, header, rows, payload_name):
    out = _open_out(args.output)
    try:
        if args.format == "json":
            doc = [dict(zip(header, row)) for row in rows]
            json.dump({payload_name: doc}, out, indent=1)
            out.write("\n")
        else:
            w = csv.writer(out)
            w.writerow(header)
            w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _load_instance(path) -> ensemble.Instance:
    try:
        return ensemble.read_instance(path)
    except FileNotFoundError:
        raise DomainError(f"no such file: {path}")
    except ensemble.InstanceIOError as exc:
        raise DomainError(str(exc))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    seed = _resolve_seed(args)
    params = ensemble.EnsembleParams(
        n_qubits=args.n_qubits,
        clause_density=args.alpha,
        quantum_fraction=args.beta,
        graph_model=args.model,
        seed=seed,
    )
    try:
        instance = ensemble.generate_instance(params)
    except ValueError as exc:
        raise DomainError(str(exc))
    if args.output:
        ensemble.write_instance(instance, args.output)
    else:
        sys.stdout.write(ensemble.instance_to_text(instance) + "\n")
    print(
        f"generated N={instance.n_qubits} M={instance.n_clauses} "
        f"(alpha={args.alpha}, beta={args.beta}, model={args.model}, seed={seed})",
        file=sys.stderr,
    )
    return 0


def cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    seed = _resolve_seed(args)
    try:
        verdict = solver.solve(
            instance, strategy=args.strategy, oracle_cap=args.oracle_cap, seed=seed
        )
    except (solver.NotClassicalError, solver.OracleCapError, ValueError) as exc:
        raise DomainError(str(exc))
    witness_file = None
    if verdict.witness is not None and args.witness_out:
        _write_witness(instance, verdict, args.witness_out)
        witness_file = args.witness_out
    payload = {
        "status": verdict.status.value,
        "solver_path": verdict.solver_path,
        "certificate": verdict.certificate.value if verdict.certificate else None,
        "residual": verdict.residual,
        "unknown_reason": verdict.unknown_reason,
        "witness_file": witness_file,
    }
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        res = "-" if verdict.residual is None else f"{verdict.residual:.3g}"
        print(
            f"status={payload['status']} path={payload['solver_path']} "
            f"certificate={payload['certificate'] or '-'} residual={res}"
            + (f" witness={witness_file}" if witness_file else "")
            + (f" reason={payload['unknown_reason']}" if verdict.unknown_reason else "")
        )
    return 0


def _write_witness(instance, verdict, path) -> None:
    states = verdict.witness.states
    doc = {
        "format_version": ensemble.FORMAT_VERSION,
        "n_qubits": instance.n_qubits,
        "states": [
            {"re": [float(x) for x in row.real], "im": [float(x) for x in row.imag]}
            for row in states
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def cmd_snip(args) -> int:
    instance = _load_instance(args.instance)
    report = snip.snip_core(instance)
    core = report.core
    comps = []
    if core.n_qubits:
        comps = motif.classify_components(core)
    if args.core_out:
        ensemble.write_instance(core, args.core_out)
    payload = {
        "n_qubits": instance.n_qubits,
        "core_sites": core.n_qubits,
        "core_clauses": core.n_clauses,
        "snipped": len(report.snip_sequence),
        "components": [
            {
                "id": c.component_id,
                "sites": len(c.sites),
                "edges": c.n_edges,
                "cyclomatic": c.cyclomatic_number,
                "class": c.label.value,
            }
            for c in comps
        ],
    }
    if args.sequence:
        payload["snip_sequence"] = [
            {"site": s.site, "removed_clauses": len(s.clauses)}
            for s in report.snip_sequence
        ]
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        print(
            f"core: {core.n_qubits} sites, {core.n_clauses} clauses "
            f"({len(report.snip_sequence)} snipped)"
        )
        for c in payload["components"]:
            print(
                f"  component {c['id']}: {c['sites']} sites, "
                f"cyclomatic {c['cyclomatic']}, class {c['class']}"
            )
        if args.sequence:
            for step in payload["snip_sequence"]:
                print(f"  snip site {step['site']} ({step['removed_clauses']} clauses)")
    return 0


def cmd_census(args) -> int:
    instance = _load_instance(args.instance)
    report = snip.snip_core(instance)
    census = motif.motif_census(report.core)
    header = ["component", "class", "sites", "edges", "cyclomatic", "candidate_unsat"]
    rows = [
        [
            c.component_id, c.label.value, len(c.sites), c.n_edges,
            c.cyclomatic_number,
            int(c.component_id in census.candidate_unsat_components),
        ]
        for c in census.components
    ]
    _emit_rows(args, header, rows, "components")
    print(
        f"components={census.n_components} "
        f"loop_fraction={census.loop_fraction:.4f} "
        f"candidate_unsat={len(census.candidate_unsat_components)}",
        file=sys.stderr,
    )
    return 0


def cmd_theory(args) -> int:
    if args.boundary:
        betas = np.linspace(0.0, 1.0, args.beta_steps)
        header = ["beta", "lambda_plus", "alpha_c"]
        rows = [
            [f"{b:.12g}", f"{theory.lambda_plus(b):.15g}", f"{theory.alpha_critical(b):.15g}"]
            for b in betas
        ]
        _emit_rows(args, header, rows, "boundary")
        return 0
    if args.entropy:
        if args.alpha is None or args.beta is None:
            raise DomainError("--entropy requires --alpha and --beta")
        ls = np.linspace(args.l_min, args.l_max, args.l_steps)
        header = ["l", "entropy_per_site", "proliferating"]
        rows = []
        for l in ls:
            pt = theory.entropy_unsnippable(float(l), args.alpha, args.beta)
            rows.append([f"{l:.12g}", f"{pt.per_site:.15g}", int(pt.proliferating)])
        _emit_rows(args, header, rows, "entropy")
        return 0
    if args.point is not None:
        pp = theory.phase_boundary(args.point)
        payload = {
            "beta": pp.beta,
            "lambda_plus": pp.lambda_plus,
            "lambda_plus_numeric": pp.lambda_plus_numeric,
            "alpha_c": pp.alpha_c,
        }
        if args.format == "json":
            json.dump(payload, sys.stdout, indent=1)
            sys.stdout.write("\n")
        else:
            print(
                f"beta={pp.beta} lambda_plus={pp.lambda_plus:.12g} "
                f"alpha_c={pp.alpha_c:.12g}"
            )
        return 0
    raise DomainError("choose one of --boundary, --entropy, --point BETA")


def cmd_sweep(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DomainError(f"no such file: {args.config}")
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed sweep config: {exc}")
    overrides = {"resume": args.resume}
    if args.output:
        overrides["out"] = args.output
    elif "out" in doc:
        overrides["out"] = doc["out"]
    if args.workers:
        overrides["workers"] = args.workers
    try:
        config = experiment.SweepConfig.from_doc(doc, **overrides)
        config.validate()
    except (KeyError, ValueError, experiment.SweepError) as exc:
        raise DomainError(f"bad sweep config: {exc}")

    n_cells = len(config.betas) * len(config.ns) * len(config.alphas)
    count = 0
    try:
        for record in experiment.run_sweep(config):
            count += 1
            print(
                f"[{count}/{n_cells}] N={record.n} alpha={record.alpha:.4g} "
                f"beta={record.beta:.4g}: sat={record.n_sat}/{record.trials} "
                f"unknown={record.n_unknown} core~{record.mean_core_sites:.1f}",
                file=sys.stderr,
            )
    except experiment.SweepError as exc:
        raise DomainError(str(exc))
    print(f"sweep complete: {count} new cells"
          + (f" -> {config.out}" if config.out else ""), file=sys.stderr)
    return 0


def cmd_collapse(args) -> int:
    try:
        records = experiment.read_records(args.input)
    except FileNotFoundError:
        raise DomainError(f"no such file: {args.input}")
    exponents = args.exponent or [1.0 / 3.0]
    results = []
    try:
        for e in exponents:
            results.append(
                experiment.scaling_collapse(
                    records, args.beta, e, alpha_c=args.alpha_c
                )
            )
    except ValueError as exc:
        raise DomainError(str(exc))
    best = min(results, key=lambda r: r.objective)
    header = ["exponent", "x", "p_sat", "N"]
    rows = []
    for r in results:
        for x, p, n in r.points:
            rows.append([f"{r.exponent:.6g}", f"{x:.12g}", f"{p:.12g}", n])
    _emit_rows(args, header, rows, "collapse")
    for r in results:
        print(f"exponent={r.exponent:.6g} objective={r.objective:.6g}", file=sys.stderr)
    print(f"best exponent: {best.exponent:.6g}", file=sys.stderr)
    return 0


def cmd_selftest(args) -> int:
    """Fast acceptance subset: formula endpoints, transfer traces, loop
    kernels, the classical UNSAT motif, and a pipeline smoke test."""
    failures = []

    def check(name, ok):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)

    pp0, pp1 = theory.phase_boundary(0.0), theory.phase_boundary(1.0)
    check("boundary endpoints",
          abs(pp0.lambda_plus - 0.5) < 1e-12 and abs(pp0.alpha_c - 1.0) < 1e-12
          and abs(pp1.lambda_plus - 1.0) < 1e-12 and abs(pp1.alpha_c - 0.5) < 1e-12)

    ok = True
    for length in range(3, 9):
        for b in (0.0, 0.3, 0.7, 1.0):
            t = theory.p_loop_unsnippable(length, b, "transfer")
            e = theory.p_loop_unsnippable(length, b, "enumerate")
            ok = ok and abs(t - e) <= 1e-12 * max(1.0, abs(e))
    check("transfer trace vs enumeration", ok)

    rng = np.random.default_rng(7)
    ok = True
    for _ in range(20):
        length = int(rng.integers(3, 7))
        inst = constructions.random_unsnippable_loop(length, rng)
        ok = ok and solver.exact_kernel_dimension(inst) == 2
    check("unsnippable loops have kernel dimension 2", ok)

    unsat = constructions.penalized_four_cycle()
    ok = (
        solver.solve_classical(unsat).status == solver.Status.UNSAT
        and solver.exact_kernel_dimension(unsat) == 0
    )
    check("penalized 4-cycle UNSAT", ok)

    params = ensemble.EnsembleParams(
        n_qubits=40, clause_density=0.7, quantum_fraction=0.5, seed=20240501
    )
    inst = ensemble.generate_instance(params)
    text = ensemble.instance_to_text(inst)
    verdict = solver.solve(ensemble.read_instance(text))
    ok = verdict.status in (solver.Status.SAT, solver.Status.UNSAT)
    if verdict.status == solver.Status.SAT:
        passed, _ = solver.verify_witness(inst, verdict.witness)
        ok = ok and passed
    check("generate/serialize/solve pipeline", ok)

    if failures:
        print(f"selftest: {len(failures)} failure(s)", file=sys.stderr)
        return 1
    print("selftest: all checks passed", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixsat",
        description="mixed classical-quantum random 2-SAT toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, output=True):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: drawn from entropy and printed)")
        if output:
            p.add_argument("-o", "--output", default=None, help="output file")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="machine-readable output format")

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("-N", "--n-qubits", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True, help="clause density")
    p.add_argument("--beta", type=float, required=True, help="quantum fraction")
    p.add_argument("--model", choices=(ensemble.GNP, ensemble.GNM),
                   default=ensemble.GNP)
    add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="decide SAT/UNSAT of an instance file")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=("auto", "classical", "product", "oracle"),
                   default="auto")
    p.add_argument("--oracle-cap", type=int, default=14)
    p.add_argument("--witness-out", default=None,
                   help="write the SAT witness rays to this file")
    add_common(p, output=False)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("snip", help="compute the snip-core of an instance")
    p.add_argument("instance")
    p.add_argument("--core-out", default=None, help="write the core instance")
    p.add_argument("--sequence", action="store_true", help="print the snip sequence")
    add_common(p, output=False)
    p.set_defaults(func=cmd_snip)

    p = sub.add_parser("census", help="motif census of the snip-core")
    p.add_argument("instance")
    add_common(p)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("theory", help="closed-form curves and points")
    p.add_argument("--boundary", action="store_true",
                   help="tabulate alpha_c(beta) and lambda_plus(beta)")
    p.add_argument("--beta-steps", type=int, default=101)
    p.add_argument("--entropy", action="store_true",
                   help="tabulate the giant-loop entropy density s(l)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--l-min", type=float, default=0.01)
    p.add_argument("--l-max", type=float, default=0.99)
    p.add_argument("--l-steps", type=int, default=50)
    p.add_argument("--point", type=float, default=None, metavar="BETA",
                   help="print one boundary point")
    add_common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("sweep", help="run a Monte Carlo P_SAT sweep")
    p.add_argument("--config", required=True, help="sweep config JSON")
    p.add_argument("--resume", action="store_true",
                   help="continue an existing result store")
    p.add_argument("--workers", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("collapse", help="finite-size scaling collapse")
    p.add_argument("--input", required=True, help="sweep CSV")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--exponent", type=float, action="append",
                   help="scaling exponent(s); default 1/3, sign selects the reading")
    p.add_argument("--alpha-c", type=float, default=None,
                   help="override the closed-form critical density")
    add_common(p)
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("selftest", help="fast acceptance subset")
    add_common(p, output=False)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
