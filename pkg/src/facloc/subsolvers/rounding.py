"""Threshold rounding of the rooted ConFL relaxation."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from ..errors import NotFeasibleFractional
from ..graphalg import expand_path, kruskal_forest, mst, prune_tree, shortest_paths
from ..instance import Instance
from ..lp import CutPool, FractionalSolution, build_confl_lp, separation_sweep, solve_with_cuts
from ..lp.model import from_fractional
from ..solution import Solution
from ..verify import evaluate

SUPPORT_TOL = 1e-9


def confl_infeasibility(inst: Instance, frac: FractionalSolution, residual, v: int,
                        tol: float = 1e-7) -> tuple[float, list]:
    """Worst explicit-row violation and violated cuts of ``frac`` in the ConFL model."""
    model = build_confl_lp(inst, residual, v)
    vec = from_fractional(model.layout, frac)
    worst = model.max_violation(vec)
    cuts = separation_sweep(inst, frac, v, model.layout.clients, tol)
    return worst, cuts


def steiner_over(inst: Instance, terminals: Iterable[int]) -> set:
    """Metric-closure MST over ``terminals`` expanded to facility edges."""
    terminals = sorted(set(terminals))
    if len(terminals) <= 1:
        return set()
    closure, nxt = shortest_paths(inst.edge_cost)
    tree, _ = mst(terminals, closure)
    edges = set()
    for a, b in tree:
        path = expand_path(nxt, a, b)
        edges.update((min(p, q), max(p, q)) for p, q in zip(path, path[1:]))
    edges = kruskal_forest(edges, lambda a, b: inst.edge_cost[a, b])
    return prune_tree(edges, terminals)


def round_confl(frac: FractionalSolution, inst: Instance, residual_clients, v: int,
                theta: float = 0.5, check: bool = True) -> Solution:
    """Open ``v`` and every facility with opening at least ``theta``; make sure
    each residual client has an open facility in its support, serve clients
    by their nearest open facility and connect the open set."""
    residual = sorted(set(residual_clients))
    if check:
        worst, cuts = confl_infeasibility(inst, frac, residual, v)
        if worst > 1e-7 or cuts:
            raise NotFeasibleFractional(
                f"fractional point violates the ConFL relaxation (row {worst:.3g}, {len(cuts)} cuts)")
    d = inst.d
    opened = {v} | {int(i) for i in np.flatnonzero(frac.w >= theta - 1e-12)}
    for j in residual:
        support = np.flatnonzero(frac.x[:, j] > SUPPORT_TOL)
        if not any(int(i) in opened for i in support):
            opened.add(int(support[np.argmin(d[support, j])]))
    order = sorted(opened)
    assignment = {j: order[int(np.argmin(d[order, j]))] for j in residual}
    sol = Solution(frozenset(opened), assignment, steiner_edges=steiner_over(inst, opened))
    return sol


def solve_confl(inst: Instance, residual_clients=None, *, v: Optional[int] = None,
                pool: Optional[CutPool] = None, theta: float = 0.5) -> Solution:
    """Best rounded solution over all root guesses (or the single root ``v``).

    ``metadata['lp_value']`` carries the minimum relaxation value over the
    roots tried, a lower bound on the rooted ConFL optimum.
    """
    residual = list(range(inst.n_clients)) if residual_clients is None else sorted(set(residual_clients))
    pool = CutPool() if pool is None else pool
    roots = range(inst.n_facilities) if v is None else [v]
    best, best_cost, lp_values = None, np.inf, {}
    for root in roots:
        model = build_confl_lp(inst, residual, root)
        frac = solve_with_cuts(model, pool=pool)
        lp_values[root] = frac.objective
        sol = round_confl(frac, inst, residual, root, theta, check=False)
        cost = evaluate(inst, sol).total
        if cost < best_cost - 1e-12:
            best, best_cost = sol, cost
    return best.with_metadata(lp_value=min(lp_values.values()), lp_values=lp_values)
