"""Snippability and the maximal core under iterative peeling.

A site is snippable when its incident clauses can all be satisfied by a
local choice at that site alone:

* degree 0 or 1 (a lone quantum clause is killed through the transfer
  matrix; a lone classical clause by the complement bit),
* degree >= 2 with all incident clauses classical and agreeing on the
  locally disfavored bit.

Any site of degree >= 2 touching a quantum clause is unsnippable.

Peeling snippable sites (with their clauses) until none remain yields a
core that is independent of removal order; the removal sequence records
enough to rebuild a satisfying state for the peeled sites afterwards by
replaying it in reverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qalgebra
from .ensemble import Clause, ClauseKind, Instance

_KET = (
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
)


def _site_state(deg: int, n_quantum: int, forbid: list) -> bool:
    if deg <= 1:
        return True
    if n_quantum > 0:
        return False
    return forbid[0] == deg or forbid[1] == deg


def is_snippable(instance: Instance, site: int) -> bool:
    """Direct evaluation of the snippability predicate at one site."""
    if not 0 <= site < instance.n_qubits:
        raise ValueError(f"site {site} out of range")
    deg = 0
    n_quantum = 0
    forbid = [0, 0]
    for c in instance.clauses:
        if site in c.sites:
            deg += 1
            if c.kind == ClauseKind.QUANTUM:
                n_quantum += 1
            else:
                forbid[c.local_forbidden_bit(site)] += 1
    return _site_state(deg, n_quantum, forbid)


@dataclass(frozen=True)
class SnipStep:
    """One peel: the removed site and the clauses it took with it."""

    site: int
    clauses: tuple


@dataclass(frozen=True)
class CoreReport:
    core: Instance
    snip_sequence: tuple
    surviving_site_map: dict  # original index -> core index

    @property
    def is_empty(self) -> bool:
        return self.core.n_qubits == 0

    def core_site_of(self, original: int) -> int | None:
        return self.surviving_site_map.get(original)


def snip_core(instance: Instance, order_rng=None) -> CoreReport:
    """Peel snippable sites until none remain.

    The worklist is processed in ascending-site order unless
    ``order_rng`` is given, which randomizes pop order (used by the
    confluence tests; the resulting core is the same either way).
    Runs in O(N + M) with per-site incremental counters.
    """
    n = instance.n_qubits
    adj: list[dict] = [dict() for _ in range(n)]  # site -> {clause_id: clause}
    for cid, c in enumerate(instance.clauses):
        adj[c.i][cid] = c
        adj[c.j][cid] = c

    deg = [0] * n
    n_quantum = [0] * n
    forbid = [[0, 0] for _ in range(n)]
    for s in range(n):
        for c in adj[s].values():
            deg[s] += 1
            if c.kind == ClauseKind.QUANTUM:
                n_quantum[s] += 1
            else:
                forbid[s][c.local_forbidden_bit(s)] += 1

    alive = [True] * n
    queued = [False] * n
    worklist = []
    for s in range(n):
        if _site_state(deg[s], n_quantum[s], forbid[s]):
            worklist.append(s)
            queued[s] = True

    sequence = []
    while worklist:
        if order_rng is None:
            s = worklist.pop()
        else:
            k = int(order_rng.integers(0, len(worklist)))
            worklist[k], worklist[-1] = worklist[-1], worklist[k]
            s = worklist.pop()
        queued[s] = False
        if not alive[s]:
            continue
        if not _site_state(deg[s], n_quantum[s], forbid[s]):
            continue  # stale entry; counters changed since queueing
        removed = tuple(adj[s].values())
        removed_ids = list(adj[s].keys())
        for cid, c in zip(removed_ids, removed):
            other = c.j if c.i == s else c.i
            del adj[other][cid]
            deg[other] -= 1
            if c.kind == ClauseKind.QUANTUM:
                n_quantum[other] -= 1
            else:
                forbid[other][c.local_forbidden_bit(other)] -= 1
            if alive[other] and not queued[other] and _site_state(
                deg[other], n_quantum[other], forbid[other]
            ):
                worklist.append(other)
                queued[other] = True
        adj[s].clear()
        alive[s] = False
        sequence.append(SnipStep(site=s, clauses=removed))

    survivors = [s for s in range(n) if alive[s]]
    site_map = {orig: k for k, orig in enumerate(survivors)}
    core_clauses = []
    seen = set()
    for s in survivors:
        for cid, c in adj[s].items():
            if cid in seen:
                continue
            seen.add(cid)
            # payload already validated on the input instance
            core_clauses.append(
                Clause._trusted(site_map[c.i], site_map[c.j], c.kind, c.forbidden, c.ray)
            )
    core_clauses.sort(key=lambda c: (c.i, c.j))
    core = Instance(len(survivors), tuple(core_clauses), params=None)
    return CoreReport(core=core, snip_sequence=tuple(sequence), surviving_site_map=site_map)


def replay_witness(instance: Instance, report: CoreReport, core_states) -> np.ndarray:
    """Extend a satisfying product state of the core to the full instance.

    ``core_states`` holds one dim-2 ray per core site (array of shape
    (n_core, 2)). Snips are undone in reverse order; each reconstructed
    site kills its removed clauses exactly:

    * classical groups agree on a disfavored bit b -> assign |1-b>,
    * a lone quantum clause propagates the neighbor state through the
      transfer matrix (free |0> when the neighbor already annihilates),
    * isolated sites get |0>.
    """
    states = np.zeros((instance.n_qubits, 2), dtype=complex)
    assigned = [False] * instance.n_qubits
    core_states = np.asarray(core_states, dtype=complex)
    for orig, k in report.surviving_site_map.items():
        states[orig] = core_states[k]
        assigned[orig] = True

    for step in reversed(report.snip_sequence):
        s = step.site
        if not step.clauses:
            states[s] = _KET[0]
        elif len(step.clauses) == 1 and step.clauses[0].kind == ClauseKind.QUANTUM:
            c = step.clauses[0]
            other = c.j if c.i == s else c.i
            if not assigned[other]:
                raise RuntimeError("snip replay out of order")
            phi = qalgebra.clause_matrix(c.ray).conj()
            if c.j == s:  # propagate i -> j
                v = qalgebra.EPS @ (phi.T @ states[other])
            else:  # propagate j -> i
                v = qalgebra.EPS @ (phi @ states[other])
            norm = np.linalg.norm(v)
            states[s] = _KET[0] if norm < qalgebra.NORM_TOL else v / norm
        else:
            # All classical (degree 1 classical included): complement the
            # agreed disfavored bit at s.
            b = step.clauses[0].local_forbidden_bit(s)
            states[s] = _KET[1 - b]
        assigned[s] = True
    return states
