"""Handcrafted instances and small graph families used across tests,
the selftest, and the acceptance suite."""

from __future__ import annotations

import numpy as np

from . import snip
from .ensemble import Instance, classical_clause, quantum_clause
from .qalgebra import haar_ray


def cycle_edges(length: int) -> list:
    return [(e, (e + 1) % length) for e in range(length)]


def theta_edges(a: int, b: int, c: int) -> tuple:
    """Two junction vertices joined by three internally disjoint paths
    of a, b, c edges (a loop with one cross-link). Returns (n, edges)."""
    if min(a, b, c) < 1 or sorted((a, b, c))[:2] == [1, 1]:
        raise ValueError("paths need >= 1 edge and at most one direct edge")
    edges = []
    n = 2
    for length in (a, b, c):
        prev = 0
        for k in range(length - 1):
            edges.append((prev, n))
            prev = n
            n += 1
        edges.append((prev, 1))
    return n, edges


def figure_eight_edges(a: int, b: int) -> tuple:
    """Two cycles of a and b edges sharing exactly one vertex."""
    if min(a, b) < 3:
        raise ValueError("cycles need >= 3 edges")
    edges = []
    n = 1
    for length in (a, b):
        prev = 0
        for k in range(length - 1):
            edges.append((prev, n))
            prev = n
            n += 1
        edges.append((prev, 0))
    return n, edges


def dumbbell_edges(a: int, b: int, bridge: int = 1) -> tuple:
    """Two disjoint cycles joined by a path of ``bridge`` edges."""
    if min(a, b) < 3 or bridge < 1:
        raise ValueError("cycles need >= 3 edges and a nontrivial bridge")
    edges = []
    # first cycle on 0..a-1
    for k in range(a):
        edges.append((k, (k + 1) % a))
    # second cycle on a..a+b-1
    for k in range(b):
        edges.append((a + k, a + (k + 1) % b))
    # bridge from 0 to a
    n = a + b
    prev = 0
    for k in range(bridge - 1):
        edges.append((prev, n))
        prev = n
        n += 1
    edges.append((prev, a))
    return n, edges


def _normalize_edge(i: int, j: int):
    return (i, j, False) if i < j else (j, i, True)


def quantum_instance_on_graph(n: int, edges, rng) -> Instance:
    """Haar-random projector on every edge of a fixed graph."""
    clauses = []
    for i, j in edges:
        a, b, flipped = _normalize_edge(i, j)
        ray = haar_ray(4, rng)
        clauses.append(quantum_clause(a, b, ray))
    return Instance(n, tuple(clauses))


def oriented_cycle(length: int, forbidden=(0, 1)) -> Instance:
    """Cycle forbidding ``forbidden`` along a fixed orientation; its only
    satisfying assignments are all-0 and all-1 for forbidden=(0,1)."""
    clauses = []
    for e in range(length):
        i, j = e, (e + 1) % length
        a, b, flipped = _normalize_edge(i, j)
        bi, bj = forbidden
        if flipped:
            bi, bj = bj, bi
        clauses.append(classical_clause(a, b, bi, bj))
    return Instance(length, tuple(clauses))


def penalized_four_cycle() -> Instance:
    """The classical UNSAT motif: an oriented 4-cycle (satisfied only by
    all-0 and all-1) plus two chords penalizing exactly those."""
    base = oriented_cycle(4)
    clauses = list(base.clauses) + [
        classical_clause(0, 2, 0, 0),
        classical_clause(1, 3, 1, 1),
    ]
    return Instance(4, tuple(clauses))


def random_unsnippable_loop(length: int, rng, quantum_prob: float = 0.5) -> Instance:
    """Random mixed cycle with every site unsnippable.

    Consecutive classical clauses are drawn to disagree on their shared
    bit; any quantum edge makes its endpoints unsnippable for free.
    """
    while True:
        kinds = [bool(rng.random() < quantum_prob) for _ in range(length)]
        left = [None] * length
        right = [None] * length
        for e in range(length):
            if kinds[e]:
                continue
            prev = (e - 1) % length
            if not kinds[prev] and right[prev] is not None:
                left[e] = 1 - right[prev]
            else:
                left[e] = int(rng.integers(0, 2))
            right[e] = int(rng.integers(0, 2))
        # wrap seam: the first classical edge may have been drawn before
        # its classical predecessor's bit existed
        first = next((e for e in range(length) if not kinds[e]), None)
        if first is not None:
            prev = (first - 1) % length
            if not kinds[prev] and left[first] == right[prev]:
                left[first] = 1 - right[prev]
        clauses = []
        for e in range(length):
            i, j = e, (e + 1) % length
            a, b, flipped = _normalize_edge(i, j)
            if kinds[e]:
                ray = haar_ray(4, rng)
                if flipped:
                    ray = ray.reshape(2, 2).T.reshape(4)
                clauses.append(quantum_clause(a, b, ray))
            else:
                bi, bj = left[e], right[e]
                if flipped:
                    bi, bj = bj, bi
                clauses.append(classical_clause(a, b, bi, bj))
        inst = Instance(length, tuple(clauses))
        if not any(snip.is_snippable(inst, s) for s in range(length)):
            return inst
