"""Exhaustive optimum for every problem kind at desk scale.

Open sets are enumerated; assignments come from ``scipy``'s
``linear_sum_assignment`` on a slot-expanded cost matrix (one slot per unit of
capacity, plus one penalty slot per client), keeping this oracle independent
of the in-house assignment code it is used to check. Steiner trees are exact:
the cheapest tree over an open set ``O`` is the minimum over facility
supersets of ``O`` of their spanning tree weight.
"""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import Infeasible, TooLarge
from ..graphalg import mst, prune_tree
from ..instance import Base, Instance, ProblemKind
from ..solution import Solution

MAX_FACILITIES = 8
MAX_CLIENTS = 12


def _assign(inst: Instance, open_list, capacitated: bool, penalized: bool, limit: Optional[float] = None):
    """Optimal (or, with ``limit``, radius-feasible) assignment; None if infeasible."""
    nc = inst.n_clients
    d = inst.d
    p = inst.penalties if penalized else None
    if nc == 0:
        return 0.0, {}, frozenset()
    if not capacitated and limit is None:
        if not open_list:
            if p is None:
                return None
            return float(p.sum()), {}, frozenset(range(nc))
        sub = d[open_list, :]
        best = np.argmin(sub, axis=0)
        dist = sub[best, np.arange(nc)]
        assign, pen, total = {}, set(), 0.0
        for j in range(nc):
            if p is not None and p[j] < dist[j]:
                pen.add(j)
                total += p[j]
            else:
                assign[j] = open_list[best[j]]
                total += dist[j]
        return total, assign, frozenset(pen)
    slots = []
    for i in open_list:
        u = nc if not capacitated else min(inst.facilities[i].capacity, nc)
        slots.extend([i] * u)
    if p is None and len(slots) < nc:
        return None
    big = 1e12
    cost = np.full((nc, len(slots) + (nc if p is not None else 0)), big)
    if slots:
        block = d[np.array(slots), :].T
        if limit is not None:
            block = np.where(block <= limit + 1e-12, 0.0, big)
        cost[:, :len(slots)] = block
    if p is not None:
        cost[np.arange(nc), len(slots) + np.arange(nc)] = p
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].max() >= big:
        return None
    assign, pen = {}, set()
    for j, c in zip(rows, cols):
        if c < len(slots):
            assign[int(j)] = slots[c]
        else:
            pen.add(int(j))
    total = float(sum(d[i, j] for j, i in assign.items())) + (float(sum(p[j] for j in pen)) if pen else 0.0)
    return total, assign, frozenset(pen)


class _Trees:
    """Exact Steiner trees (sum and bottleneck) over facility subsets."""

    def __init__(self, inst: Instance):
        nf = inst.n_facilities
        self.nf = nf
        w = inst.connection_scale * inst.edge_cost
        self.w = w
        full = 1 << nf
        self.mst_cost = np.zeros(full)
        self.mst_edges = [set() for _ in range(full)]
        for mask in range(1, full):
            nodes = [i for i in range(nf) if mask >> i & 1]
            self.mst_edges[mask], self.mst_cost[mask] = mst(nodes, w)
        # superset minimum, processed from large masks to small
        self.best = self.mst_cost.copy()
        self.arg = np.arange(full)
        for mask in range(full - 1, 0, -1):
            for i in range(nf):
                if not mask >> i & 1:
                    sup = mask | (1 << i)
                    if self.best[sup] < self.best[mask] - 1e-15:
                        self.best[mask] = self.best[sup]
                        self.arg[mask] = self.arg[sup]
        self.sorted_edges = sorted(itertools.combinations(range(nf), 2), key=lambda e: (w[e], e))

    def steiner(self, mask: int):
        if bin(mask).count("1") <= 1:
            return 0.0, set()
        return float(self.best[mask]), set(self.mst_edges[self.arg[mask]])

    def bottleneck(self, terminals):
        """Minimum over trees spanning ``terminals`` of the longest edge."""
        terminals = list(terminals)
        if len(terminals) <= 1:
            return 0.0, set()
        parent = list(range(self.nf))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        used = set()
        for a, b in self.sorted_edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                used.add((a, b))
                if len({find(t) for t in terminals}) == 1:
                    tree = prune_tree(used, terminals)
                    return float(self.w[a, b]), tree
        raise AssertionError("complete graph must connect")


def _check_size(inst: Instance) -> None:
    if inst.n_facilities > MAX_FACILITIES or inst.n_clients > MAX_CLIENTS:
        raise TooLarge(f"exact oracle limited to {MAX_FACILITIES} facilities and {MAX_CLIENTS} clients")


def _radius(inst, open_list, capacitated):
    """Smallest radius admitting a (capacity-feasible) assignment."""
    d = inst.d
    if not capacitated:
        res = _assign(inst, open_list, False, False)
        if res is None:
            return None
        return float(max((d[i, j] for j, i in res[1].items()), default=0.0)), res[1]
    values = np.unique(d[open_list, :])
    lo, hi = 0, len(values) - 1
    if _assign(inst, open_list, True, False, limit=values[hi]) is None:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if _assign(inst, open_list, True, False, limit=values[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    res = _assign(inst, open_list, True, False, limit=values[lo])
    return float(values[lo]), res[1]


def solve_exact(inst: Instance, kind: ProblemKind) -> Solution:
    """True optimum of ``kind`` on ``inst`` by enumeration.

    ``metadata['objective']`` holds the optimal value (sum cost, radius, or
    connected-center bottleneck as appropriate).
    """
    _check_size(inst)
    kind.check(inst)
    nf, nc = inst.n_facilities, inst.n_clients
    f = np.zeros(nf) if kind.base is Base.KM else inst.open_costs
    k = inst.k if kind.has_cardinality else None
    trees = _Trees(inst) if kind.connected else None
    best_val, best = np.inf, None
    for mask in range(0 if kind.prize_collecting or nc == 0 else 1, 1 << nf):
        open_list = [i for i in range(nf) if mask >> i & 1]
        if k is not None and len(open_list) > k:
            continue
        if kind.is_center:
            if not open_list:
                continue
            rad = _radius(inst, open_list, kind.capacitated)
            if rad is None:
                continue
            val, assign = rad
            pen, edges = frozenset(), set()
            if kind.connected:
                b, edges = trees.bottleneck(open_list)
                val = max(val, b)
        else:
            res = _assign(inst, open_list, kind.capacitated, kind.prize_collecting)
            if res is None:
                continue
            serve, assign, pen = res
            val = float(f[open_list].sum()) + serve
            edges = set()
            if kind.connected:
                conn, edges = trees.steiner(mask)
                val += conn
        if val < best_val - 1e-12:
            best_val = val
            best = Solution(frozenset(open_list), assign, pen, frozenset(edges))
    if best is None:
        raise Infeasible(f"no feasible {kind.name} solution")
    return best.with_metadata(objective=best_val)


def solve_ckc_exact(inst: Instance, k: Optional[int] = None) -> Solution:
    """Capacitated k-center optimum (uncapacitated if the instance has no capacities)."""
    from dataclasses import replace
    inst = inst if k is None else replace(inst, k=k)
    return solve_exact(inst, ProblemKind(Base.KC, capacitated=inst.has_capacities))


def solve_conkc_exact(inst: Instance, k: Optional[int] = None) -> Solution:
    """Connected k-center optimum under the bottleneck objective."""
    from dataclasses import replace
    inst = inst if k is None else replace(inst, k=k)
    return solve_exact(inst, ProblemKind(Base.KC, connected=True))
