"""Graph primitives: max-flow/min-cut, capacitated min-cost assignment,
minimum spanning trees, metric closure and connectivity queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import Infeasible

EPS = 1e-12


@dataclass
class FlowNetwork:
    n_nodes: int
    source: int
    sink: int
    arcs: list = field(default_factory=list)  # (tail, head, capacity, cost)

    def add_arc(self, tail: int, head: int, capacity: float, cost: float = 0.0) -> None:
        if tail == head:
            raise ValueError("self-loops are not allowed")
        if capacity < 0:
            raise ValueError("capacities must be nonnegative")
        self.arcs.append((tail, head, float(capacity), float(cost)))

    def add_edge(self, a: int, b: int, capacity: float) -> None:
        """Undirected edge, modeled as two opposed arcs of equal capacity."""
        self.add_arc(a, b, capacity)
        self.add_arc(b, a, capacity)


@dataclass(frozen=True)
class Cut:
    source_side: frozenset
    value: float


def max_flow(net: FlowNetwork) -> tuple[float, Cut]:
    """Edmonds-Karp. Returns the flow value and a minimum cut certifying it."""
    n, s, t = net.n_nodes, net.source, net.sink
    # residual arcs stored pairwise: arc 2k forward, 2k+1 backward
    head, res = [], []
    adj = [[] for _ in range(n)]
    for (a, b, cap, _cost) in net.arcs:
        adj[a].append(len(head)); head.append(b); res.append(cap)
        adj[b].append(len(head)); head.append(a); res.append(0.0)
    value = 0.0
    if s != t:
        while True:
            pred = [-1] * n
            pred[s] = -2
            q = deque([s])
            while q and pred[t] == -1:
                u = q.popleft()
                for e in adj[u]:
                    h = head[e]
                    if pred[h] == -1 and res[e] > EPS:
                        pred[h] = e
                        q.append(h)
            if pred[t] == -1:
                break
            push, v = float("inf"), t
            while v != s:
                e = pred[v]
                push = min(push, res[e])
                v = head[e ^ 1]
            v = t
            while v != s:
                e = pred[v]
                res[e] -= push
                res[e ^ 1] += push
                v = head[e ^ 1]
            value += push
    side = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for e in adj[u]:
            h = head[e]
            if h not in side and res[e] > EPS:
                side.add(h)
                q.append(h)
    cut_value = sum(cap for (a, b, cap, _c) in net.arcs if a in side and b not in side)
    return value, Cut(frozenset(side), cut_value)


# ---------------------------------------------------------------------------
# assignment


@dataclass
class AssignmentResult:
    assignment: dict  # client -> facility
    cost: float
    penalized: frozenset = frozenset()


def min_cost_assignment(open_facilities: Iterable[int], capacities, clients: Iterable[int],
                        dist: np.ndarray, penalties: Optional[Sequence[float]] = None) -> AssignmentResult:
    """Optimal capacitated assignment of ``clients`` to ``open_facilities``.

    ``dist`` is the facility-by-client cost block. ``capacities`` maps facility
    index to capacity (array, mapping, or None for uncapacitated). When
    ``penalties`` is given, a client may instead pay ``penalties[j]``.

    Successive shortest paths over the facility transfer graph: clients are
    inserted in index order and each insertion follows a cheapest chain of
    reassignments ending at a facility with spare capacity.
    """
    fac = sorted(set(open_facilities))
    cl = sorted(set(clients))
    if capacities is None:
        cap = [len(cl)] * len(fac)
    else:
        cap = [min(int(capacities[i]), len(cl)) for i in fac]
    if penalties is None:
        if sum(cap) < len(cl):
            raise Infeasible(f"capacity {sum(cap)} < {len(cl)} clients")
    if not cl:
        return AssignmentResult({}, 0.0)
    nf = len(fac)
    # columns: open facilities, then one unit-capacity penalty slot per client
    cost = np.full((len(cl), nf + (len(cl) if penalties is not None else 0)), np.inf)
    if nf:
        cost[:, :nf] = dist[np.ix_(fac, cl)].T
    if penalties is not None:
        for r, j in enumerate(cl):
            cost[r, nf + r] = penalties[j]
        cap = cap + [1] * len(cl)
    ncol = cost.shape[1]

    if penalties is None and capacities is None:
        cols = np.argmin(cost, axis=1)
    else:
        cols = _ssp(cost, np.array(cap))
    assignment, penalized, total = {}, set(), 0.0
    for r, j in enumerate(cl):
        c = int(cols[r])
        total += float(cost[r, c])
        if c < nf:
            assignment[j] = fac[c]
        else:
            penalized.add(j)
    return AssignmentResult(assignment, total, frozenset(penalized))


def _ssp(cost: np.ndarray, cap: np.ndarray) -> np.ndarray:
    nrow, ncol = cost.shape
    col_of = np.full(nrow, -1)
    load = np.zeros(ncol, dtype=int)
    rows_at = [[] for _ in range(ncol)]
    for r in range(nrow):
        # transfer[a, b]: cheapest cost change of moving one row from column a to b
        transfer = np.full((ncol, ncol), np.inf)
        mover = np.full((ncol, ncol), -1)
        for a in range(ncol):
            if rows_at[a]:
                rr = np.array(rows_at[a])
                delta = cost[rr, :] - cost[rr, a][:, None]
                best = np.argmin(delta, axis=0)
                transfer[a] = delta[best, np.arange(ncol)]
                mover[a] = rr[best]
        label = cost[r].copy()
        pred = np.full(ncol, -1)
        for _ in range(ncol):
            cand = label[:, None] + transfer
            src = np.argmin(cand, axis=0)
            val = cand[src, np.arange(ncol)]
            better = val < label - 1e-12
            if not better.any():
                break
            label = np.where(better, val, label)
            pred = np.where(better, src, pred)
        free = np.where(load < cap, label, np.inf)
        end = int(np.argmin(free))
        if not np.isfinite(free[end]):
            raise Infeasible("no augmenting path")
        # walk back: the row moved into `b` comes from column pred[b]
        b = end
        load[end] += 1
        seen = 0
        while pred[b] != -1:
            a = int(pred[b])
            moved = int(mover[a, b])
            rows_at[a].remove(moved)
            rows_at[b].append(moved)
            col_of[moved] = b
            b = a
            seen += 1
            if seen > ncol:
                raise RuntimeError("cycle in augmenting path")
        rows_at[b].append(r)
        col_of[r] = b
    return col_of


# ---------------------------------------------------------------------------
# trees and connectivity


def mst(nodes: Iterable, weights) -> tuple[set, float]:
    """Prim's algorithm over the complete graph on ``nodes``.

    ``weights`` is indexable as ``weights[a][b]`` (an array or nested mapping).
    Edges are returned as sorted ``(min, max)`` tuples of node labels.
    """
    nodes = sorted(set(nodes))
    n = len(nodes)
    if n <= 1:
        return set(), 0.0
    w = np.array([[weights[a][b] if a != b else 0.0 for b in nodes] for a in nodes], dtype=float)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = w[0].copy()
    parent = np.zeros(n, dtype=int)
    edges, total = set(), 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        a, b = nodes[parent[v]], nodes[v]
        edges.add((min(a, b), max(a, b)))
        total += float(w[parent[v], v])
        in_tree[v] = True
        closer = (~in_tree) & (w[v] < best)
        best = np.where(closer, w[v], best)
        parent = np.where(closer, v, parent)
    return edges, total


def kruskal_forest(edges: Iterable[tuple], weight) -> set:
    """Minimum spanning forest of the graph formed by ``edges``."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    keep = set()
    for (a, b) in sorted(set(edges), key=lambda e: (weight(*e), e)):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            keep.add((a, b))
    return keep


def is_connected(nodes: Iterable, edges: Iterable[tuple]) -> tuple[bool, list]:
    """Whether ``nodes`` share one component of the graph (nodes + edge endpoints, edges).

    Returns the flag and the component partition (each a sorted list).
    """
    nodes = set(nodes)
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in nodes:
        find(x)
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict = {}
    for x in list(parent):
        groups.setdefault(find(x), []).append(x)
    comps = sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])
    roots = {find(x) for x in nodes}
    return len(roots) <= 1, comps


def shortest_paths(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Floyd-Warshall; returns the distance matrix and next-hop table."""
    w = np.array(weights, dtype=float)
    n = w.shape[0]
    nxt = np.tile(np.arange(n), (n, 1))
    for m in range(n):
        via = w[:, m:m + 1] + w[m:m + 1, :]
        better = via < w - 1e-15
        w = np.where(better, via, w)
        nxt = np.where(better, nxt[:, m:m + 1], nxt)
    return w, nxt


def expand_path(nxt: np.ndarray, a: int, b: int) -> list:
    path = [a]
    while a != b:
        a = int(nxt[a, b])
        path.append(a)
    return path


def prune_tree(edges: Iterable[tuple], terminals: Iterable) -> set:
    """Strip non-terminal leaves repeatedly."""
    edges = set(edges)
    terminals = set(terminals)
    while True:
        deg: dict = {}
        for a, b in edges:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        leaves = {x for x, c in deg.items() if c == 1 and x not in terminals}
        if not leaves:
            return edges
        edges = {e for e in edges if e[0] not in leaves and e[1] not in leaves}
