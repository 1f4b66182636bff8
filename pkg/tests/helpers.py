"""Independent reference oracles used to cross-check the package.

Everything here is deliberately naive: bit enumeration for classical
instances and the literal stacked constraint matrix for kernels. These
stay independent of the production code paths they referee.
"""

import numpy as np

from mixsat.ensemble import ClauseKind


def brute_classical_count(instance) -> int:
    """Number of satisfying assignments by full enumeration."""
    n = instance.n_qubits
    assign = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(assign.shape, dtype=bool)
    for c in instance.clauses:
        assert c.kind == ClauseKind.CLASSICAL
        b_i, b_j = c.forbidden
        ok &= ~((((assign >> c.i) & 1) == b_i) & (((assign >> c.j) & 1) == b_j))
    return int(ok.sum())


def naive_kernel_dimension(instance, tol: float = 1e-9) -> int:
    """Nullity of the literally stacked matrix with rows <phi| (x) I.

    Builds all M * 2^(N-2) rows densely and takes one SVD; exponential,
    fine for N <= ~10 in tests.
    """
    n = instance.n_qubits
    if not instance.clauses:
        return 2**n
    ops = []
    idx = np.arange(2**n)
    for c in instance.clauses:
        proj = c.projector_ray().conj()
        op = np.zeros((2 ** (n - 2), 2**n), dtype=complex)
        for b_i in range(2):
            for b_j in range(2):
                amp = proj[2 * b_i + b_j]
                if amp == 0:
                    continue
                sel = (((idx >> (n - 1 - c.i)) & 1) == b_i) & (
                    ((idx >> (n - 1 - c.j)) & 1) == b_j
                )
                op[np.arange(2 ** (n - 2)), idx[sel]] += amp
        ops.append(op)
    stacked = np.vstack(ops)
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return 2**n - rank


def random_mixed_params(seed: int, n_lo: int = 4, n_hi: int = 12):
    """Deterministic scatter of (n, alpha, beta) over the test ranges,
    clamped to admissible GNP densities."""
    from mixsat.ensemble import EnsembleParams

    n = n_lo + seed % (n_hi - n_lo + 1)
    alpha = min(0.2 + (seed % 10) * 0.2, (n - 1) / 2)
    beta = (seed % 5) * 0.25
    return EnsembleParams(
        n_qubits=n, clause_density=alpha, quantum_fraction=beta, seed=seed * 1009 + 7
    )
