"""Add/drop/swap local search for capacitated facility location."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..errors import Infeasible
from ..graphalg import min_cost_assignment
from ..instance import Instance
from ..solution import Solution

MAX_MOVES = 10_000
REL_IMPROVEMENT = 1e-6


def solve_cfl_local_search(inst: Instance, seed: int = 0, *, k: Optional[int] = None,
                           counted: Optional[Sequence[bool]] = None, zero_open_costs: bool = False,
                           max_moves: int = MAX_MOVES) -> Solution:
    """Local optimum of the CFL objective under open, close and swap moves.

    Every candidate open set is priced with an optimal capacitated
    assignment. ``k`` bounds the number of open facilities flagged in
    ``counted`` (all facilities by default). The seed fixes the initial open
    set and the order in which moves are scanned.
    """
    nf, nc = inst.n_facilities, inst.n_clients
    caps = inst.capacities
    cap_arr = np.full(nf, nc) if caps is None else np.minimum(caps, nc)
    counted = np.ones(nf, dtype=bool) if counted is None else np.asarray(counted, dtype=bool)
    f = np.zeros(nf) if zero_open_costs else inst.open_costs
    if cap_arr.sum() < nc:
        raise Infeasible(f"total capacity {cap_arr.sum()} < {nc} clients")
    rng = np.random.default_rng(seed)
    order = [int(i) for i in rng.permutation(nf)]
    clients = range(nc)
    cache: dict = {}

    def price(open_set: frozenset):
        if open_set not in cache:
            if cap_arr[list(open_set)].sum() < nc or (k is not None and counted[list(open_set)].sum() > k):
                cache[open_set] = (np.inf, None)
            else:
                res = min_cost_assignment(open_set, caps, clients, inst.d)
                cache[open_set] = (float(f[list(open_set)].sum()) + res.cost, res.assignment)
        return cache[open_set]

    current = _initial(order, cap_arr, counted, k, nc)
    cur_cost, cur_assign = price(current)
    if not np.isfinite(cur_cost):
        raise Infeasible("no feasible starting open set under the cardinality bound")
    moves = 0
    improved = True
    while improved and moves < max_moves:
        improved = False
        for cand in _neighbors(current, order):
            cost, assign = price(cand)
            if cost < cur_cost - REL_IMPROVEMENT * cur_cost:
                current, cur_cost, cur_assign = cand, cost, assign
                moves += 1
                improved = True
                break
    return Solution(current, cur_assign, metadata={"moves": moves, "seed": seed})


def _initial(order, cap_arr, counted, k, nc) -> frozenset:
    if nc == 0:
        return frozenset(order[:1])
    chosen, total = [], 0
    for i in order:
        if total >= nc:
            break
        chosen.append(i)
        total += cap_arr[i]
    if k is None or counted[chosen].sum() <= k:
        return frozenset(chosen)
    # largest capacities among counted facilities, uncounted ones are free
    free = [i for i in order if not counted[i]]
    ranked = sorted((i for i in order if counted[i]), key=lambda i: -cap_arr[i])
    return frozenset(free + ranked[:k])


def _neighbors(current: frozenset, order):
    opened = [i for i in order if i in current]
    closed = [i for i in order if i not in current]
    for i in opened:
        if len(current) > 1:
            yield current - {i}
    for i in closed:
        yield current | {i}
    for i in opened:
        for j in closed:
            yield (current - {i}) | {j}
