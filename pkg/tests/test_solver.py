import numpy as np
import pytest

from mixsat import ensemble, snip, solver
from mixsat.constructions import (
    cycle_edges,
    oriented_cycle,
    penalized_four_cycle,
    quantum_instance_on_graph,
    random_unsnippable_loop,
    theta_edges,
)
from mixsat.ensemble import EnsembleParams, Instance, classical_clause, quantum_clause
from mixsat.qalgebra import haar_ray, transfer_matrix
from mixsat.solver import Certificate, Status

from helpers import brute_classical_count, naive_kernel_dimension, random_mixed_params


class TestClassical:
    def test_oriented_cycle_has_two_states(self):
        inst = oriented_cycle(4)
        verdict = solver.solve_classical(inst)
        assert verdict.status == Status.SAT
        bits = verdict.detail["assignment"]
        assert bits in ([0, 0, 0, 0], [1, 1, 1, 1])
        assert brute_classical_count(inst) == 2
        assert solver.exact_kernel_dimension(inst) == 2

    def test_penalized_cycle_unsat(self):
        inst = penalized_four_cycle()
        verdict = solver.solve_classical(inst)
        assert verdict.status == Status.UNSAT
        assert verdict.certificate == Certificate.CLASSICAL_IMPLICATION_CYCLE
        assert "variable" in verdict.detail
        assert brute_classical_count(inst) == 0
        assert solver.exact_kernel_dimension(inst) == 0

    def test_brute_force_agreement(self):
        for seed in range(400):
            n = 3 + seed % 8
            alpha = min(0.3 + (seed % 12) * 0.25, (n - 1) / 2)
            params = EnsembleParams(n_qubits=n, clause_density=alpha,
                                    quantum_fraction=0.0, seed=seed + 29)
            inst = ensemble.generate_instance(params)
            verdict = solver.solve_classical(inst)
            count = brute_classical_count(inst)
            assert (verdict.status == Status.SAT) == (count > 0), seed
            if verdict.status == Status.SAT:
                ok, res = solver.verify_witness(inst, verdict.witness)
                assert ok

    def test_rejects_quantum(self):
        rng = np.random.default_rng(0)
        inst = Instance(2, (quantum_clause(0, 1, haar_ray(4, rng)),))
        with pytest.raises(solver.NotClassicalError, match="not classical"):
            solver.solve_classical(inst)


class TestVerifyWitness:
    def test_contract_cases(self):
        inst = Instance(2, (classical_clause(0, 1, 0, 0),))
        all_zero = solver.ProductState.from_bits([0, 0])
        ok, res = solver.verify_witness(inst, all_zero)
        assert not ok and abs(res - 1.0) < 1e-12
        good = solver.ProductState.from_bits([1, 0])
        ok, res = solver.verify_witness(inst, good)
        assert ok and res == 0.0

    def test_transfer_pair_annihilates(self):
        rng = np.random.default_rng(1)
        phi = haar_ray(4, rng)
        inst = Instance(2, (quantum_clause(0, 1, phi),))
        psi_j = haar_ray(2, rng)
        psi_i = transfer_matrix(phi) @ psi_j
        psi_i /= np.linalg.norm(psi_i)
        ok, res = solver.verify_witness(inst, np.array([psi_i, psi_j]))
        assert ok and res < 1e-12

    def test_arity_mismatch(self):
        inst = Instance(3, (classical_clause(0, 1, 0, 0),))
        with pytest.raises(ValueError, match="sites"):
            solver.verify_witness(inst, np.zeros((2, 2), dtype=complex))


class TestOracle:
    def test_single_quantum_clause(self):
        rng = np.random.default_rng(2)
        inst = Instance(2, (quantum_clause(0, 1, haar_ray(4, rng)),))
        assert solver.exact_kernel_dimension(inst) == 3

    def test_haar_triangle(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            inst = quantum_instance_on_graph(3, cycle_edges(3), rng)
            assert solver.exact_kernel_dimension(inst) == 2

    def test_classical_counts_assignments(self):
        for seed in range(120):
            n = 3 + seed % 7
            params = EnsembleParams(n_qubits=n, clause_density=min(1.0, (n - 1) / 2),
                                    quantum_fraction=0.0, seed=seed)
            inst = ensemble.generate_instance(params)
            assert solver.exact_kernel_dimension(inst) == brute_classical_count(inst)

    def test_matches_naive_stacked_svd(self):
        for seed in range(60):
            params = random_mixed_params(seed, n_lo=4, n_hi=7)
            inst = ensemble.generate_instance(params)
            assert solver.exact_kernel_dimension(inst) == naive_kernel_dimension(inst)

    def test_cap(self):
        inst = Instance(20, ())
        with pytest.raises(solver.OracleCapError):
            solver.exact_kernel_dimension(inst)
        assert solver.exact_kernel_dimension(inst, n_cap=20) == 2**20

    def test_empty_instance(self):
        assert solver.exact_kernel_dimension(Instance(3, ())) == 8


class TestProductState:
    def test_trees_are_sat(self):
        rng = np.random.default_rng(3)
        edges = [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]
        inst = quantum_instance_on_graph(6, edges, rng)
        verdict = solver.solve_product_state(inst)
        assert verdict.status == Status.SAT
        ok, _ = solver.verify_witness(inst, verdict.witness)
        assert ok

    def test_mixed_loops_sat_with_kernel_two(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            length = int(rng.integers(3, 9))
            inst = random_unsnippable_loop(length, rng)
            verdict = solver.solve_product_state(inst)
            assert verdict.status == Status.SAT, length
            assert solver.exact_kernel_dimension(inst) == 2

    def test_oracle_cross_validation(self):
        unknown = 0
        for seed in range(400):
            params = random_mixed_params(seed + 2000)
            inst = ensemble.generate_instance(params)
            verdict = solver.solve(inst, strategy="product")
            dim = solver.exact_kernel_dimension(inst)
            if verdict.status == Status.UNKNOWN:
                unknown += 1
                continue
            assert (verdict.status == Status.SAT) == (dim > 0), seed
            if verdict.status == Status.SAT:
                ok, res = solver.verify_witness(inst, verdict.witness)
                assert ok and res < 1e-9
        assert unknown <= 4  # < 1%

    def test_quantum_theta_unsat(self):
        # a loop with one generic quantum cross-link kills both loop states
        rng = np.random.default_rng(5)
        n, edges = theta_edges(2, 2, 3)
        inst = quantum_instance_on_graph(n, edges, rng)
        assert solver.exact_kernel_dimension(inst) == 0
        verdict = solver.solve_product_state(inst)
        assert verdict.status == Status.UNSAT
        assert verdict.certificate == Certificate.PENALIZED_LOOP


class TestSolveDispatcher:
    def test_empty_instance(self):
        verdict = solver.solve(Instance(3, ()))
        assert verdict.status == Status.SAT
        assert verdict.solver_path == "snip"
        assert np.allclose(verdict.witness.states, [[1, 0]] * 3)

    def test_classical_core_routing(self):
        inst = oriented_cycle(5)
        verdict = solver.solve(inst)
        assert verdict.status == Status.SAT
        assert verdict.solver_path == "snip+classical"

    def test_oracle_strategy(self):
        inst = penalized_four_cycle()
        verdict = solver.solve(inst, strategy="oracle")
        assert verdict.status == Status.UNSAT
        assert verdict.certificate == Certificate.ORACLE_KERNEL_ZERO
        sat = solver.solve(oriented_cycle(4), strategy="oracle")
        assert sat.status == Status.SAT
        ok, _ = solver.verify_witness(oriented_cycle(4), sat.witness)
        assert ok

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            solver.solve(Instance(1, ()), strategy="quantum-annealing")

    def test_deep_sat_side_classical(self):
        params = EnsembleParams(n_qubits=1000, clause_density=0.5,
                                quantum_fraction=0.0, seed=11)
        sat = sum(
            solver.solve(ensemble.generate_instance(
                EnsembleParams(1000, 0.5, 0.0, seed=s)
            )).status == Status.SAT
            for s in range(20)
        )
        assert sat >= 19

    def test_deep_unsat_side_classical(self):
        unsat = sum(
            solver.solve(ensemble.generate_instance(
                EnsembleParams(1000, 2.0, 0.0, seed=s)
            )).status == Status.UNSAT
            for s in range(20)
        )
        assert unsat >= 19

    def test_deep_sat_side_quantum(self):
        sat = sum(
            solver.solve(ensemble.generate_instance(
                EnsembleParams(1000, 0.25, 1.0, seed=s)
            )).status == Status.SAT
            for s in range(20)
        )
        assert sat >= 19

    def test_snip_invariance(self):
        for seed in range(60):
            inst = ensemble.generate_instance(random_mixed_params(seed + 4000))
            report = snip.snip_core(inst)
            full = solver.solve(inst)
            if report.core.n_qubits == 0:
                assert full.status == Status.SAT
                continue
            core_verdict = solver.solve(report.core)
            assert full.status == core_verdict.status, seed

    def test_monotone_in_alpha_on_coupled_instances(self):
        # GNP instances from one seed are nested in alpha, so adding
        # clauses can only remove satisfiability
        alphas = (0.3, 0.7, 1.1, 1.5, 1.9)
        for seed in range(25):
            n = 8 + seed % 5
            sat_flags = []
            for alpha in alphas:
                if alpha > (n - 1) / 2:
                    break
                params = EnsembleParams(n_qubits=n, clause_density=alpha,
                                        quantum_fraction=0.5, seed=seed + 1)
                verdict = solver.solve(ensemble.generate_instance(params))
                assert verdict.status != Status.UNKNOWN
                sat_flags.append(verdict.status == Status.SAT)
            assert all(a >= b for a, b in zip(sat_flags, sat_flags[1:])), seed

    def test_geometrization_small(self):
        rng = np.random.default_rng(6)
        n, edges = theta_edges(2, 2, 2)
        dims = {
            solver.exact_kernel_dimension(quantum_instance_on_graph(n, edges, rng))
            for _ in range(20)
        }
        assert len(dims) == 1

    def test_sat_verdicts_always_carry_verified_witnesses(self):
        for seed in range(80):
            inst = ensemble.generate_instance(random_mixed_params(seed + 7000))
            verdict = solver.solve(inst)
            if verdict.status == Status.SAT:
                ok, res = solver.verify_witness(inst, verdict.witness)
                assert ok and res < 1e-9
            elif verdict.status == Status.UNSAT:
                assert verdict.certificate is not None


class TestVerdictInvariants:
    def test_sat_requires_witness(self):
        with pytest.raises(ValueError):
            solver.Verdict(status=Status.SAT)

    def test_unsat_requires_certificate(self):
        with pytest.raises(ValueError):
            solver.Verdict(status=Status.UNSAT)
