"""Closed forms for the mixed-ensemble phase boundary and motif counts.

The central object is the 2x2 edge-label transfer matrix

    M[e, e'] = p(e') * (1 - delta_{e,C} delta_{e',C} / 2),

with label order (Q, C) and p(Q) = beta, p(C) = 1 - beta: tr(M^L) is
the exact probability that a length-L loop is unsnippable (a site is
unsnippable with certainty next to a quantum edge, with probability 1/2
between two classical edges that must then disagree). Its dominant
eigenvalue

    lambda_plus = (1 + beta + sqrt(-7 beta^2 + 10 beta + 1)) / 4

controls giant-loop proliferation: the per-site loop entropy goes
positive exactly when 2 * alpha * lambda_plus > 1, i.e. above

    alpha_c(beta) = 2 / (1 + beta + sqrt(-7 beta^2 + 10 beta + 1)),

which interpolates between the classical transition alpha_c(0) = 1 and
the quantum one alpha_c(1) = 1/2.

Combinatorial prefactors are evaluated through log-gamma, so expected
counts stay finite-time well past N ~ 1e6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .motif import MotifSpec, motif_spec


def _check_beta(beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    return float(beta)


def edge_transfer_matrix(beta: float) -> np.ndarray:
    """M[e, e'] in label order (Q, C)."""
    b = _check_beta(beta)
    return np.array([[b, 1.0 - b], [b, (1.0 - b) / 2.0]])


def lambda_plus(beta: float) -> float:
    b = _check_beta(beta)
    return (1.0 + b + math.sqrt(-7.0 * b * b + 10.0 * b + 1.0)) / 4.0


def alpha_critical(beta: float) -> float:
    b = _check_beta(beta)
    return 2.0 / (1.0 + b + math.sqrt(-7.0 * b * b + 10.0 * b + 1.0))


@dataclass(frozen=True)
class PhasePoint:
    beta: float
    lambda_plus: float
    alpha_c: float
    lambda_plus_numeric: float


def phase_boundary(beta: float) -> PhasePoint:
    """Closed-form boundary point, cross-checked against the numeric
    dominant eigenvalue of the edge transfer matrix (< 1e-12 apart)."""
    lam = lambda_plus(beta)
    numeric = float(np.max(np.linalg.eigvals(edge_transfer_matrix(beta)).real))
    if abs(lam - numeric) >= 1e-12:
        raise AssertionError(
            f"closed-form/numeric eigenvalue mismatch at beta={beta}: "
            f"{lam} vs {numeric}"
        )
    return PhasePoint(
        beta=float(beta),
        lambda_plus=lam,
        alpha_c=alpha_critical(beta),
        lambda_plus_numeric=numeric,
    )


def p_loop_unsnippable(length: int, beta: float, method: str = "transfer") -> float:
    """Probability that a random length-L loop is unsnippable.

    ``transfer`` evaluates tr(M^L) exactly; ``enumerate`` sums all 2^L
    edge-label sequences explicitly (L <= 20) and exists as the
    independent check of the transfer construction.
    """
    if length < 3:
        raise ValueError("loop length must be >= 3")
    b = _check_beta(beta)
    if method == "transfer":
        m = edge_transfer_matrix(b)
        return float(np.trace(np.linalg.matrix_power(m, length)))
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    if length > 20:
        raise ValueError("enumerate supports L <= 20")
    labels = np.arange(1 << length, dtype=np.uint32)
    # bit k set  <=>  edge k classical
    bits = (labels[:, None] >> np.arange(length, dtype=np.uint32)) & 1
    n_classical = bits.sum(axis=1)
    cc_pairs = (bits & np.roll(bits, -1, axis=1)).sum(axis=1)
    weight = (1.0 - b) ** n_classical * b ** (length - n_classical)
    return float(np.sum(weight * 0.5**cc_pairs))


def _log_falling_factorial(n: int, k: int) -> float:
    """log(n! / (n-k)!) via log-gamma."""
    if k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(n - k + 1)


def expected_loop_count(n: int, length: int, alpha: float) -> float:
    """ER expectation of bare length-L loops: N!/((N-L)! 2L) p^L."""
    if not 3 <= length <= n:
        raise ValueError("need 3 <= L <= N")
    if alpha <= 0.0:
        return 0.0
    p = 2.0 * alpha / (n - 1)
    log_e = _log_falling_factorial(n, length) - math.log(2 * length) + length * math.log(p)
    return math.exp(log_e)


def expected_unsnippable_loops(n: int, length: int, alpha: float, beta: float) -> float:
    """Expected number of unsnippable length-L loops (exact trace form)."""
    if not 3 <= length <= n:
        raise ValueError("need 3 <= L <= N")
    if alpha <= 0.0:
        return 0.0
    p_uns = p_loop_unsnippable(length, beta, method="transfer")
    if p_uns <= 0.0:
        return 0.0
    log_e = (
        _log_falling_factorial(n, length)
        - math.log(2 * length)
        + length * math.log(2.0 * alpha / (n - 1))
        + math.log(p_uns)
    )
    return math.exp(log_e)


def expected_subgraph_count(
    n: int, vertices: int, edges: int, automorphisms: int, alpha: float
) -> float:
    """General ER subgraph expectation N!/((N-|A|)! Aut(A)) p^e(A)."""
    if vertices > n:
        return 0.0
    if alpha <= 0.0:
        return 0.0 if edges else 1.0
    p = 2.0 * alpha / (n - 1)
    log_e = (
        _log_falling_factorial(n, vertices)
        - math.log(automorphisms)
        + edges * math.log(p)
    )
    return math.exp(log_e)


def expected_motif_count(spec, n: int, length: int | None = None,
                         alpha: float = 0.0, beta: float = 0.0,
                         c: float | None = None) -> float:
    """Expected number of decorated giant-walk motifs.

    ``spec`` is a MotifSpec or one of {"loop_with_crosslink",
    "figure_eight", "dumbbell"} with ``length`` the edge count L;
    the count is c * C(N, L-1) (L-1)!/a * (2 alpha/(N-1))^L *
    lambda_plus^L, which is O(1/N) at fixed L and decays like
    exp(-O(N^gamma)) for L = l N^gamma below the boundary.
    """
    if isinstance(spec, str):
        if length is None:
            raise ValueError("string spec requires an edge count")
        spec = motif_spec(spec, length, c=1.0 if c is None else c)
    elif not isinstance(spec, MotifSpec):
        raise ValueError(f"invalid spec {spec!r}")
    if length is not None and length != spec.edges:
        raise ValueError("length disagrees with spec edge count")
    const = spec.c if c is None else c
    if spec.vertices > n or alpha <= 0.0:
        return 0.0
    lam = lambda_plus(beta)
    log_e = (
        _log_falling_factorial(n, spec.vertices)
        - math.log(spec.automorphisms)
        + spec.edges * (math.log(2.0 * alpha / (n - 1)) + math.log(lam))
    )
    return const * math.exp(log_e)


@dataclass(frozen=True)
class EntropyPoint:
    l: float
    per_site: float          # s(l) = S_uns(l) / N
    total: float             # S_uns(l) for the given N
    proliferating: bool      # 2 alpha lambda_plus > 1


def entropy_unsnippable(l: float, alpha: float, beta: float, n: int = 1) -> EntropyPoint:
    """Extensive giant-loop entropy density
    s(l) = l (log(2 alpha lambda_plus) - 1) - (1 - l) log(1 - l)."""
    if not 0.0 < l <= 1.0:
        raise ValueError("l must lie in (0, 1]")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    lam = lambda_plus(beta)
    x = 1.0 - l
    mix_term = 0.0 if x == 0.0 else -x * math.log(x)
    s = l * (math.log(2.0 * alpha * lam) - 1.0) + mix_term
    return EntropyPoint(
        l=float(l),
        per_site=s,
        total=n * s,
        proliferating=2.0 * alpha * lam > 1.0,
    )


def entropy_curve(alpha: float, beta: float, ls, n: int = 1) -> list:
    return [entropy_unsnippable(l, alpha, beta, n) for l in ls]


def motif_entropy(l: float, n: int, gamma: float, alpha: float, beta: float) -> float:
    """O(N^gamma) part of log E[# motifs] at motif size L = l N^gamma:
    l N^g log(2 a lam) - l N^g - N (1 - l N^{g-1}) log(1 - l N^{g-1})."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    lam = lambda_plus(beta)
    scale = l * n**gamma
    frac = l * n ** (gamma - 1.0)
    if frac >= 1.0:
        raise ValueError("motif size exceeds N")
    mix = -n * (1.0 - frac) * math.log(1.0 - frac)
    return scale * math.log(2.0 * alpha * lam) - scale + mix


def proliferation_verdict(alpha: float, beta: float) -> bool:
    """Giant unsnippable loops proliferate iff 2 alpha lambda_plus > 1,
    equivalently alpha > alpha_c(beta)."""
    return 2.0 * alpha * lambda_plus(beta) > 1.0
