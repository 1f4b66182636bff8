"""Random mixed 2-SAT / 2-QSAT instances.

An instance is an N-site simple interaction graph whose edges carry
either a classical clause (one forbidden bit pair) or a quantum clause
(a Haar-random two-qubit projector ray). The graph measure is
Erdos-Renyi: GNP includes each of the C(N,2) pairs independently with
p = alpha*N / C(N,2) = 2*alpha/(N-1); GNM draws a uniform subset of
exactly round(alpha*N) pairs (a variance-reduced convenience, not part
of the defining measure).

Randomness is addressed, not streamed: edge membership, the
quantum/classical label, and the payload of a clause on pair (i, j)
each come from counter-based streams keyed by the pair index. Hence

* identical (params, seed) regenerate the instance bit-exactly,
* any single clause can be rederived without generating the rest,
* instances generated from one seed at increasing alpha are nested
  (supergraphs) with identical payloads on shared edges.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import qalgebra, rng

FORMAT_VERSION = 1

GNP = "gnp"
GNM = "gnm"


class ClauseKind(str, Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


class InstanceIOError(Exception):
    """Base class for instance-document failures."""


class MalformedDocumentError(InstanceIOError):
    pass


class VersionMismatchError(InstanceIOError):
    pass


class InvariantViolationError(InstanceIOError):
    pass


@dataclass(frozen=True)
class EnsembleParams:
    """Defining parameters of one random draw."""

    n_qubits: int
    clause_density: float
    quantum_fraction: float
    graph_model: str = GNP
    seed: int = 0

    def validate(self) -> None:
        n = self.n_qubits
        if n < 1:
            raise ValueError("n_qubits must be positive")
        if self.clause_density < 0:
            raise ValueError("clause_density must be non-negative")
        if not 0.0 <= self.quantum_fraction <= 1.0:
            raise ValueError("quantum_fraction must lie in [0, 1]")
        if self.graph_model not in (GNP, GNM):
            raise ValueError(f"unknown graph_model {self.graph_model!r}")
        pairs = n * (n - 1) // 2
        if self.graph_model == GNP:
            if self.clause_density > 0 and pairs == 0:
                raise ValueError("no admissible edges for n_qubits < 2")
            if pairs > 0:
                p = self.clause_density * n / pairs
                if p > 1.0:
                    alpha_max = pairs / n
                    raise ValueError(
                        f"edge probability p = {p:.6g} > 1; maximal admissible "
                        f"clause_density for N={n} is {alpha_max:.6g}"
                    )
        else:
            m = int(round(self.clause_density * n))
            if m > pairs:
                raise ValueError(
                    f"GNM edge count M = {m} exceeds C(N,2) = {pairs}"
                )

    @property
    def edge_probability(self) -> float:
        pairs = self.n_qubits * (self.n_qubits - 1) // 2
        return self.clause_density * self.n_qubits / pairs if pairs else 0.0


@dataclass(frozen=True, eq=False)
class Clause:
    """One interaction: endpoints i < j plus classical or quantum payload.

    Quantum amplitudes are ordered |b_i b_j> with b_i the major index.
    Rays are kept normalized (rejected beyond 1e-12) and phase-canonical.
    """

    i: int
    j: int
    kind: ClauseKind
    forbidden: tuple | None = None
    ray: np.ndarray | None = None

    def __post_init__(self):
        if not (0 <= self.i < self.j):
            raise ValueError("endpoints must be distinct with i < j")
        if self.kind == ClauseKind.CLASSICAL:
            if self.ray is not None or self.forbidden is None:
                raise ValueError("classical clause carries exactly a forbidden pair")
            b_i, b_j = self.forbidden
            if b_i not in (0, 1) or b_j not in (0, 1):
                raise ValueError("forbidden bits must be 0 or 1")
            object.__setattr__(self, "forbidden", (int(b_i), int(b_j)))
        else:
            if self.forbidden is not None or self.ray is None:
                raise ValueError("quantum clause carries exactly a ray")
            ray = np.asarray(self.ray, dtype=complex)
            if ray.shape != (4,):
                raise ValueError("quantum ray must have dimension 4")
            if abs(np.linalg.norm(ray) - 1.0) > qalgebra.NORM_TOL:
                raise ValueError("non-normalized ray")
            ray = qalgebra.canonical_ray(ray)
            ray.setflags(write=False)
            object.__setattr__(self, "ray", ray)

    @classmethod
    def _trusted(cls, i, j, kind, forbidden, ray):
        """Construct without revalidation; payload must come from an
        already-validated Clause (internal hot paths only)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "i", i)
        object.__setattr__(obj, "j", j)
        object.__setattr__(obj, "kind", kind)
        object.__setattr__(obj, "forbidden", forbidden)
        object.__setattr__(obj, "ray", ray)
        return obj

    @property
    def sites(self) -> tuple:
        return (self.i, self.j)

    def local_forbidden_bit(self, site: int) -> int:
        """Classical clauses only: the disfavored bit at ``site``."""
        if self.kind != ClauseKind.CLASSICAL:
            raise ValueError("quantum clause has no local forbidden bit")
        if site == self.i:
            return self.forbidden[0]
        if site == self.j:
            return self.forbidden[1]
        raise ValueError(f"site {site} not on clause ({self.i},{self.j})")

    def projector_ray(self) -> np.ndarray:
        """The penalized two-qubit ray (basis ray for classical clauses)."""
        if self.kind == ClauseKind.QUANTUM:
            return self.ray
        b_i, b_j = self.forbidden
        ray = np.zeros(4, dtype=complex)
        ray[2 * b_i + b_j] = 1.0
        return ray

    def __eq__(self, other):
        if not isinstance(other, Clause):
            return NotImplemented
        if (self.i, self.j, self.kind) != (other.i, other.j, other.kind):
            return False
        if self.kind == ClauseKind.CLASSICAL:
            return self.forbidden == other.forbidden
        return np.array_equal(self.ray, other.ray)

    def __repr__(self):
        payload = self.forbidden if self.kind == ClauseKind.CLASSICAL else "ray"
        return f"Clause({self.i},{self.j},{self.kind.value},{payload})"


def classical_clause(i: int, j: int, b_i: int, b_j: int) -> Clause:
    return Clause(i, j, ClauseKind.CLASSICAL, forbidden=(b_i, b_j))


def quantum_clause(i: int, j: int, ray) -> Clause:
    return Clause(i, j, ClauseKind.QUANTUM, ray=ray)


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable N-site instance; safe to share across workers."""

    n_qubits: int
    clauses: tuple
    params: EnsembleParams | None = None  # None marks handcrafted input

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        seen = set()
        for c in self.clauses:
            if c.j >= self.n_qubits:
                raise ValueError(
                    f"clause endpoint {c.j} out of range for N={self.n_qubits}"
                )
            if (c.i, c.j) in seen:
                raise ValueError("simple graph violated")
            seen.add((c.i, c.j))

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def edges(self) -> list:
        return [(c.i, c.j) for c in self.clauses]

    def is_classical(self) -> bool:
        return all(c.kind == ClauseKind.CLASSICAL for c in self.clauses)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.params == other.params
            and self.clauses == other.clauses
        )


# ---------------------------------------------------------------------------
# pair indexing: (i, j) with i < j  <->  k in [0, C(N,2))


def pair_index(i: int, j: int, n: int) -> int:
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def pairs_from_indices(k: np.ndarray, n: int) -> tuple:
    """Vectorized inverse of ``pair_index``; exact for n up to ~1e8."""
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i = ((b - np.sqrt(b * b - 8.0 * k)) // 2).astype(np.int64)
    # float sqrt can land one row off; clamp exactly.
    base = i * (2 * n - i - 1) // 2
    i = np.where(base > k, i - 1, i)
    base = i * (2 * n - i - 1) // 2
    over = base + (n - 1 - i) <= k
    i = np.where(over, i + 1, i)
    base = i * (2 * n - i - 1) // 2
    j = k - base + i + 1
    return i, j


# ---------------------------------------------------------------------------
# sampling

_GNP_CHUNK = 1 << 20


def sample_graph(params: EnsembleParams, rand: rng.InstanceRandom) -> list:
    """Edge list of the random graph, sorted by pair index.

    GNP uses one inclusion uniform per pair, addressed by pair index:
    rerunning with larger alpha keeps every previously included edge
    (monotone coupling). GNM takes the first M distinct pairs of a
    keyed draw sequence, which is likewise nested in M.
    """
    params.validate()
    n = params.n_qubits
    total = n * (n - 1) // 2
    if total == 0:
        return []
    if params.graph_model == GNP:
        p = params.edge_probability
        if p <= 0.0:
            return []
        hits = []
        for lo in range(0, total, _GNP_CHUNK):
            idx = np.arange(lo, min(lo + _GNP_CHUNK, total), dtype=np.int64)
            u = rand.pair_uniforms(idx)
            hits.append(idx[u < p])
        chosen = np.concatenate(hits)
    else:
        m = int(round(params.clause_density * n))
        if m == 0:
            return []
        stream = rand.graph_stream()
        # first m distinct values of the draw sequence (nested in m)
        drawn = np.empty(0, dtype=np.int64)
        while True:
            batch = stream.integers(0, total, size=max(2 * m, 64))
            drawn = np.concatenate([drawn, batch])
            uniq, first = np.unique(drawn, return_index=True)
            if len(uniq) >= m:
                chosen = drawn[np.sort(first)[:m]]
                break
        chosen = np.sort(chosen)
    ii, jj = pairs_from_indices(chosen, n)
    return list(zip(ii.tolist(), jj.tolist()))


def sample_clause(kind: ClauseKind, stream):
    """Payload draw: forbidden pair (classical) or Haar ray (quantum).

    ``stream`` is a per-edge keyed stream (or any numpy-like generator);
    classical consumes one integer lane, quantum eight normal lanes.
    """
    if kind == ClauseKind.CLASSICAL:
        pattern = int(stream.integers(0, 4))
        return (pattern >> 1, pattern & 1)
    return qalgebra.haar_ray(4, stream)


def generate_instance(params: EnsembleParams) -> Instance:
    """Sample graph, labels, and payloads for one seed.

    Vectorized over edges but draw-for-draw identical to calling
    ``sample_clause`` with ``InstanceRandom.edge_stream(pair_index)``
    for each edge separately.
    """
    params.validate()
    rand = rng.InstanceRandom(params.seed)
    edges = sample_graph(params, rand)
    n = params.n_qubits
    if not edges:
        return Instance(n, (), params)

    k = np.array([pair_index(i, j, n) for i, j in edges], dtype=np.int64)
    quantum = rand.label_uniforms(k) < params.quantum_fraction
    keys = rng.derive_keys(params.seed, rng.DOMAIN_PAYLOAD, k)

    clauses = []
    q_idx = np.nonzero(quantum)[0]
    c_idx = np.nonzero(~quantum)[0]
    patterns = np.empty(len(edges), dtype=np.int64)
    if c_idx.size:
        patterns[c_idx] = (rng.hash_u64_keys(keys[c_idx], 0) % np.uint64(4)).astype(
            np.int64
        )
    rays = None
    if q_idx.size:
        z = rng.hash_normals_keys(keys[q_idx], 8)
        rays = qalgebra.canonical_rays(z[:, 0::2] + 1j * z[:, 1::2])
    q_pos = {int(e): t for t, e in enumerate(q_idx)}
    for e, (i, j) in enumerate(edges):
        if quantum[e]:
            clauses.append(quantum_clause(i, j, rays[q_pos[e]]))
        else:
            pat = int(patterns[e])
            clauses.append(classical_clause(i, j, pat >> 1, pat & 1))
    return Instance(n, tuple(clauses), params)


def rederive_clause(params: EnsembleParams, i: int, j: int) -> Clause:
    """Rebuild the clause on pair (i, j) from lineage alone.

    The pair must be an edge of the realized graph for the result to be
    meaningful; membership itself is checked by the caller if needed.
    """
    rand = rng.InstanceRandom(params.seed)
    k = pair_index(i, j, params.n_qubits)
    is_quantum = float(rand.label_uniforms(np.array([k]))[0]) < params.quantum_fraction
    stream = rand.edge_stream(k)
    kind = ClauseKind.QUANTUM if is_quantum else ClauseKind.CLASSICAL
    payload = sample_clause(kind, stream)
    if kind == ClauseKind.CLASSICAL:
        return classical_clause(i, j, *payload)
    return quantum_clause(i, j, payload)


# ---------------------------------------------------------------------------
# serialization


def _params_to_doc(params: EnsembleParams | None):
    if params is None:
        return None
    return {
        "n_qubits": params.n_qubits,
        "clause_density": params.clause_density,
        "quantum_fraction": params.quantum_fraction,
        "graph_model": params.graph_model,
        "seed": params.seed,
    }


def _clause_to_doc(c: Clause) -> dict:
    doc = {"i": c.i, "j": c.j, "kind": c.kind.value}
    if c.kind == ClauseKind.CLASSICAL:
        doc["forbidden"] = list(c.forbidden)
    else:
        doc["ray_re"] = [float(x) for x in c.ray.real]
        doc["ray_im"] = [float(x) for x in c.ray.imag]
    return doc


def instance_to_doc(instance: Instance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n_qubits": instance.n_qubits,
        "params": _params_to_doc(instance.params),
        "seed": instance.params.seed if instance.params else None,
        "clauses": [_clause_to_doc(c) for c in instance.clauses],
    }


def write_instance(instance: Instance, sink) -> None:
    """Serialize to JSON. Floats use shortest round-trip decimal form,
    so read(write(x)) == x bit-exactly and re-serialization is stable."""
    text = json.dumps(instance_to_doc(instance), indent=1)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def _require(doc: dict, key: str):
    if key not in doc:
        raise MalformedDocumentError(f"malformed document: missing key {key!r}")
    return doc[key]


def instance_from_doc(doc) -> Instance:
    if not isinstance(doc, dict):
        raise MalformedDocumentError("malformed document: expected an object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"version mismatch: file has {version!r}, reader supports {FORMAT_VERSION}"
        )
    n = _require(doc, "n_qubits")
    if not isinstance(n, int) or n < 0:
        raise MalformedDocumentError("malformed document: bad n_qubits")
    pdoc = doc.get("params")
    params = None
    if pdoc is not None:
        try:
            params = EnsembleParams(
                n_qubits=int(pdoc["n_qubits"]),
                clause_density=float(pdoc["clause_density"]),
                quantum_fraction=float(pdoc["quantum_fraction"]),
                graph_model=str(pdoc["graph_model"]),
                seed=int(pdoc["seed"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocumentError(f"malformed document: bad params ({exc})")
    clauses = []
    for cdoc in _require(doc, "clauses"):
        try:
            i, j = int(cdoc["i"]), int(cdoc["j"])
            kind = ClauseKind(cdoc["kind"])
            if kind == ClauseKind.CLASSICAL:
                b = cdoc["forbidden"]
                clause = classical_clause(i, j, int(b[0]), int(b[1]))
            else:
                ray = np.asarray(cdoc["ray_re"], dtype=float) + 1j * np.asarray(
                    cdoc["ray_im"], dtype=float
                )
                clause = quantum_clause(i, j, ray)
        except (KeyError, TypeError, IndexError) as exc:
            raise MalformedDocumentError(f"malformed document: bad clause ({exc})")
        except ValueError as exc:
            raise InvariantViolationError(str(exc))
        clauses.append(clause)
    try:
        return Instance(n, tuple(clauses), params)
    except ValueError as exc:
        raise InvariantViolationError(str(exc))


def read_instance(source) -> Instance:
    """Parse an instance document from a path, file object, or JSON text."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"malformed document: {exc}")
    return instance_from_doc(doc)


def instance_to_text(instance: Instance) -> str:
    buf = io.StringIO()
    write_instance(instance, buf)
    return buf.getvalue()


def edge_count_stats(params: EnsembleParams) -> tuple:
    """(mean, variance) of the GNP edge count: Binomial(C(N,2), p)."""
    pairs = params.n_qubits * (params.n_qubits - 1) // 2
    p = params.edge_probability
    return pairs * p, pairs * p * (1.0 - p)


def max_clause_density(n: int) -> float:
    """Largest alpha with a valid GNP probability for N sites."""
    return (n - 1) / 2.0 if n >= 2 else 0.0
