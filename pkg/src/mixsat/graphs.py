"""Small undirected-graph helpers shared by snip, motif, and solver.

Graphs are given as ``n`` plus an edge list of (i, j) pairs (parallel
edge ids are the list positions). Everything here is iterative; no
recursion limits bite on sweep-sized instances.
"""

from __future__ import annotations

from collections import deque


def adjacency(n: int, edges) -> list[list[tuple[int, int]]]:
    """Per-site list of (neighbor, edge_id)."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for eid, (i, j) in enumerate(edges):
        adj[i].append((j, eid))
        adj[j].append((i, eid))
    return adj


def connected_components(n: int, edges) -> list[list[int]]:
    """Components as sorted site lists, ordered by smallest member."""
    adj = adjacency(n, edges)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def bfs_tree(adj, root: int):
    """BFS spanning tree of root's component.

    Returns (order, parent, parent_edge, tree_edge_ids): ``order`` is
    the BFS visit order starting at root; non-tree edges of the
    component are the incident edge ids absent from tree_edge_ids.
    """
    parent = {root: -1}
    parent_edge = {root: -1}
    order = [root]
    tree_edges = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, eid in adj[u]:
            if v not in parent:
                parent[v] = u
                parent_edge[v] = eid
                tree_edges.add(eid)
                order.append(v)
                queue.append(v)
    return order, parent, parent_edge, tree_edges


def cyclomatic_number(n_sites: int, n_edges: int, n_components: int = 1) -> int:
    return n_edges - n_sites + n_components


def bridges(n: int, edges) -> set:
    """Edge ids whose removal disconnects their component (iterative lowlink)."""
    adj = adjacency(n, edges)
    visited = [False] * n
    disc = [0] * n
    low = [0] * n
    out: set[int] = set()
    timer = 0
    for start in range(n):
        if visited[start]:
            continue
        stack = [(start, -1, iter(adj[start]))]
        visited[start] = True
        disc[start] = low[start] = timer
        timer += 1
        while stack:
            u, in_edge, it = stack[-1]
            advanced = False
            for v, eid in it:
                if eid == in_edge:
                    continue
                if not visited[v]:
                    visited[v] = True
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, eid, iter(adj[v])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if advanced:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                low[p] = min(low[p], low[u])
                if low[u] > disc[p]:
                    out.add(in_edge)
    return out


def biconnected_blocks(n: int, edges) -> list[list[int]]:
    """Blocks (2-vertex-connected pieces) as lists of edge ids.

    Standard Hopcroft-Tarjan with an explicit stack; every edge lands
    in exactly one block.
    """
    adj = adjacency(n, edges)
    visited = [False] * n
    disc = [0] * n
    low = [0] * n
    timer = 0
    blocks: list[list[int]] = []
    edge_stack: list[int] = []
    for start in range(n):
        if visited[start]:
            continue
        stack = [(start, -1, iter(adj[start]))]
        visited[start] = True
        disc[start] = low[start] = timer
        timer += 1
        while stack:
            u, in_edge, it = stack[-1]
            advanced = False
            for v, eid in it:
                if eid == in_edge:
                    continue
                if not visited[v]:
                    visited[v] = True
                    disc[v] = low[v] = timer
                    timer += 1
                    edge_stack.append(eid)
                    stack.append((v, eid, iter(adj[v])))
                    advanced = True
                    break
                if disc[v] < disc[u]:
                    edge_stack.append(eid)
                    low[u] = min(low[u], disc[v])
            if advanced:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                low[p] = min(low[p], low[u])
                if low[u] >= disc[p]:
                    block = []
                    while edge_stack:
                        eid = edge_stack.pop()
                        block.append(eid)
                        if eid == in_edge:
                            break
                    if block:
                        blocks.append(block)
    return blocks
