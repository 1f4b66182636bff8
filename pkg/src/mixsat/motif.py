"""Core-component taxonomy, the unsnippable walk, and cycle counting.

Components of a snip-core have minimum degree 2, so the cyclomatic
number m_edges - n_sites + 1 classifies the low ones completely:

* 1: a bare cycle (an unsnippable loop; every site has degree 2),
* 2: exactly two degree-3 sites or one degree-4 site. Two degree-3
  sites joined by three internally disjoint paths is the "theta"
  (a loop with one cross-link); a degree-4 site carrying two cycles is
  the figure eight; two cycles joined by a nontrivial bridge is the
  dumbbell.
* >= 3: lumped as multi-cyclic; such components can host a loop with
  two cross-links, the candidate UNSAT motif. A component is flagged as
  a candidate when some biconnected block has cyclomatic number >= 3
  (base cycle plus at least two open ears).

Finer sub-classification by which loops through the high-degree sites
are unsnippable is recorded nowhere; it only shifts O(1) prefactors in
the expected counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import graphs
from .ensemble import ClauseKind, Instance
from .snip import is_snippable


class MotifClass(str, Enum):
    TREE = "tree"
    UNSNIPPABLE_LOOP = "unsnippable_loop"
    LOOP_WITH_CROSS_LINK = "loop_with_cross_link"
    FIGURE_EIGHT = "figure_eight"
    DUMBBELL = "dumbbell"
    MULTI_CYCLIC_OTHER = "multi_cyclic_other"


class NotACoreError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentClass:
    component_id: int
    sites: tuple
    n_edges: int
    cyclomatic_number: int
    label: MotifClass


@dataclass(frozen=True)
class MotifSpec:
    """Subgraph-count bookkeeping: |A|, e(A), Aut(A), and the O(1)
    unsnippability constant c (beta-dependent, not derived here)."""

    name: str
    vertices: int
    edges: int
    automorphisms: int
    c: float = 1.0

    def __post_init__(self):
        if self.automorphisms < 1:
            raise ValueError("Aut(A) >= 1 required")
        if self.cross_links < 0:
            raise ValueError("cross-link count e(A) - |A| must be >= 0")

    @property
    def cross_links(self) -> int:
        return self.edges - self.vertices


def loop_spec(length: int, c: float = 1.0) -> MotifSpec:
    return MotifSpec("loop", length, length, 2 * length, c)


def motif_spec(kind: str, n_edges: int, c: float = 1.0) -> MotifSpec:
    """Built-in cyclomatic-2 specs keyed by edge count L (|A| = L - 1)."""
    table = {
        "loop_with_crosslink": 2,
        "figure_eight": 4,
        "dumbbell": 4,
    }
    if kind not in table:
        raise ValueError(f"invalid spec {kind!r}")
    return MotifSpec(kind, n_edges - 1, n_edges, table[kind], c)


def _require_core(core: Instance) -> None:
    for s in range(core.n_qubits):
        if is_snippable(core, s):
            raise NotACoreError(f"not a core: site {s} is snippable")


def classify_components(core: Instance) -> list:
    """Label every connected component of a snip-core."""
    _require_core(core)
    edges = core.edges()
    comps = graphs.connected_components(core.n_qubits, edges)
    site_comp = {}
    for cid, comp in enumerate(comps):
        for s in comp:
            site_comp[s] = cid
    edge_count = [0] * len(comps)
    deg: dict = {}
    for i, j in edges:
        edge_count[site_comp[i]] += 1
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1

    out = []
    for cid, comp in enumerate(comps):
        m = edge_count[cid]
        n = len(comp)
        cyclo = graphs.cyclomatic_number(n, m)
        degs = sorted(deg.get(s, 0) for s in comp)
        if cyclo == 0:
            label = MotifClass.TREE
        elif cyclo == 1:
            label = MotifClass.UNSNIPPABLE_LOOP
        elif cyclo == 2:
            if degs[-1] == 4:
                label = MotifClass.FIGURE_EIGHT
            else:
                comp_set = set(comp)
                comp_edge_ids = [
                    eid for eid, (i, j) in enumerate(edges) if i in comp_set
                ]
                has_bridge = bool(
                    graphs.bridges(core.n_qubits, edges) & set(comp_edge_ids)
                )
                label = (
                    MotifClass.DUMBBELL if has_bridge else MotifClass.LOOP_WITH_CROSS_LINK
                )
        else:
            label = MotifClass.MULTI_CYCLIC_OTHER
        out.append(
            ComponentClass(
                component_id=cid,
                sites=tuple(comp),
                n_edges=m,
                cyclomatic_number=cyclo,
                label=label,
            )
        )
    return out


# ---------------------------------------------------------------------------
# the unsnippable walk


def pair_unsnippable(c1, c2, site: int) -> bool:
    """Is ``site`` unsnippable with respect to an entry/exit clause pair?"""
    if c1.kind == ClauseKind.QUANTUM or c2.kind == ClauseKind.QUANTUM:
        return True
    return c1.local_forbidden_bit(site) != c2.local_forbidden_bit(site)


@dataclass(frozen=True)
class WalkTrace:
    sites: tuple          # visited sites, in order (repeat excluded)
    clause_ids: tuple     # traversed clause ids
    outcome: str          # "closed_loop" | "lasso" | "stuck"
    repeated_site: int | None
    case: str | None      # "1a" | "1b" | "2" for the two stop scenarios


def walk_unsnippable(core: Instance, start_site: int, rng) -> WalkTrace:
    """Walk along unsnippability-preserving edges until a site repeats.

    Each step leaves the current site along a clause distinct from the
    entry clause such that the site stays unsnippable for that
    entry/exit pair (always possible on a genuine core). Ties are
    broken with ``rng``. Stop cases: back at the start with all loop
    sites of degree 2 -> closed unsnippable loop (1a); back at the
    start otherwise (1b) or self-crossing elsewhere (2) -> lasso.
    On handcrafted near-cores the walk may be stuck instead.
    """
    adj = graphs.adjacency(core.n_qubits, core.edges())
    comps = graphs.connected_components(core.n_qubits, core.edges())
    comp = next((c for c in comps if start_site in c), None)
    if comp is None or not adj[start_site]:
        raise ValueError("start site has no edges")
    n_edges_comp = len({eid for s in comp for _, eid in adj[s]})
    if graphs.cyclomatic_number(len(comp), n_edges_comp) < 1:
        raise ValueError("start site not in a cyclic component")

    visited = [start_site]
    position = {start_site: 0}
    clause_ids: list[int] = []
    entry = None
    u = start_site
    while True:
        options = []
        for v, eid in adj[u]:
            if entry is not None and eid == entry:
                continue
            c = core.clauses[eid]
            if entry is None or pair_unsnippable(core.clauses[entry], c, u):
                options.append((v, eid))
        if not options:
            return WalkTrace(
                sites=tuple(visited),
                clause_ids=tuple(clause_ids),
                outcome="stuck",
                repeated_site=None,
                case=None,
            )
        v, eid = options[int(rng.integers(0, len(options)))]
        clause_ids.append(eid)
        if v in position:
            if v == start_site:
                loop_sites = visited[position[v]:]
                all_deg2 = all(len(adj[s]) == 2 for s in loop_sites)
                case = "1a" if all_deg2 else "1b"
                outcome = "closed_loop" if all_deg2 else "lasso"
            else:
                case = "2"
                outcome = "lasso"
            return WalkTrace(
                sites=tuple(visited),
                clause_ids=tuple(clause_ids),
                outcome=outcome,
                repeated_site=v,
                case=case,
            )
        position[v] = len(visited)
        visited.append(v)
        entry = eid
        u = v


# ---------------------------------------------------------------------------
# cycle counting


def _as_graph(graph) -> tuple:
    if isinstance(graph, Instance):
        return graph.n_qubits, graph.edges()
    n, edges = graph
    return n, list(edges)


def count_short_cycles(graph, length: int) -> int:
    """Exact number of simple cycles of the given length (3..8).

    Exhaustive DFS anchored at each cycle's minimum vertex; every cycle
    is found twice (once per direction) and the total halved.
    """
    if not 3 <= length <= 8:
        raise ValueError("cycle length must be in 3..8")
    n, edges = _as_graph(graph)
    nbr: list[list[int]] = [[] for _ in range(n)]
    nbr_set: list[set] = [set() for _ in range(n)]
    for i, j in edges:
        nbr[i].append(j)
        nbr[j].append(i)
        nbr_set[i].add(j)
        nbr_set[j].add(i)

    total = 0
    for anchor in range(n):
        if len(nbr[anchor]) < 2:
            continue
        # DFS over paths anchor -> ... of length-1 edges using vertices > anchor
        stack = [(anchor, 0, {anchor})]
        path: list[tuple] = []
        while stack:
            u, depth, used = stack.pop()
            if depth == length - 1:
                if anchor in nbr_set[u]:
                    total += 1
                continue
            for w in nbr[u]:
                if w > anchor and w not in used:
                    stack.append((w, depth + 1, used | {w}))
    return total // 2


def count_unsnippable_cycles(instance: Instance, length: int) -> int:
    """Cycles of the given length whose sites are all unsnippable with
    respect to the two cycle clauses through them (the intrinsic loop
    condition entering the expected-count formulas)."""
    if not 3 <= length <= 8:
        raise ValueError("cycle length must be in 3..8")
    n = instance.n_qubits
    nbr: list[list[tuple]] = [[] for _ in range(n)]
    clause_of = {}
    for eid, c in enumerate(instance.clauses):
        nbr[c.i].append((c.j, eid))
        nbr[c.j].append((c.i, eid))
        clause_of[(c.i, c.j)] = c
        clause_of[(c.j, c.i)] = c

    def cl(a, b):
        return clause_of[(a, b)]

    total = 0
    for anchor in range(n):
        if len(nbr[anchor]) < 2:
            continue
        stack = [((anchor,), frozenset((anchor,)))]
        while stack:
            path, used = stack.pop()
            u = path[-1]
            if len(path) == length:
                if (u, anchor) not in clause_of:
                    continue
                cyc = path + (anchor,)
                # cyc[length] == anchor == cyc[0]; check every slot's pair
                ok = all(
                    pair_unsnippable(
                        cl(cyc[t - 1], cyc[t]),
                        cl(cyc[t], cyc[(t + 1) % length]),
                        cyc[t],
                    )
                    for t in range(1, length + 1)
                )
                if ok:
                    total += 1
                continue
            for w, _eid in nbr[u]:
                if w > anchor and w not in used:
                    stack.append((path + (w,), used | {w}))
    return total // 2


# ---------------------------------------------------------------------------
# census


@dataclass
class MotifCensus:
    components: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    loop_fraction: float = 0.0
    candidate_unsat_components: tuple = ()

    @property
    def n_components(self) -> int:
        return len(self.components)


def motif_census(core: Instance) -> MotifCensus:
    """Aggregate component classes; flag candidate UNSAT components.

    The flag marks components with a biconnected block of cyclomatic
    number >= 3: by open-ear decomposition such a block carries a cycle
    with at least two cross-link strings, the only motif that can
    penalize both loop states.
    """
    classes = classify_components(core)
    counts = {label: 0 for label in MotifClass}
    for comp in classes:
        counts[comp.label] += 1
    n_comp = len(classes)
    loop_frac = counts[MotifClass.UNSNIPPABLE_LOOP] / n_comp if n_comp else 0.0

    edges = core.edges()
    flagged = []
    if any(comp.cyclomatic_number >= 3 for comp in classes):
        site_comp = {}
        for comp in classes:
            for s in comp.sites:
                site_comp[s] = comp.component_id
        for block in graphs.biconnected_blocks(core.n_qubits, edges):
            verts = set()
            for eid in block:
                verts.update(edges[eid])
            if graphs.cyclomatic_number(len(verts), len(block)) >= 3:
                flagged.append(site_comp[edges[block[0]][0]])
    return MotifCensus(
        components=classes,
        counts=counts,
        loop_fraction=loop_frac,
        candidate_unsat_components=tuple(sorted(set(flagged))),
    )
