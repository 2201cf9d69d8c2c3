"""Connectivity cuts: max-flow separation and the cutting-plane loop.

For root ``v`` and client ``j`` the family reads
``sum_{i in S} x_ij <= sum_{e in delta(S)} y_e`` for every facility set ``S``
not containing ``v``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..errors import IterationLimit
from ..graphalg import FlowNetwork, max_flow
from ..instance import Instance
from .model import Constraint, FlLayout, FractionalSolution, LpModel, solve_lp, to_fractional

SEPARATION_TOL = 1e-7
# cuts are added below the certification tolerance so the final point has margin
ADD_TOL = 1e-9


@dataclass(frozen=True)
class ConnectivityCut:
    S: frozenset
    j: int
    violation: float = 0.0

    @property
    def key(self):
        return (self.S, self.j)


def separate_cuts(inst: Instance, x: np.ndarray, y: np.ndarray, v: int, j: int,
                  tol: float = SEPARATION_TOL) -> list:
    """Most violated connectivity cut for client ``j`` (empty list if none).

    ``x`` is facility-by-client, ``y`` a symmetric facility-by-facility matrix.
    """
    nf = inst.n_facilities
    s = nf
    net = FlowNetwork(nf + 1, s, v)
    demand = 0.0
    for i in range(nf):
        if x[i, j] > 0:
            net.add_arc(s, i, x[i, j])
            demand += x[i, j]
    for a, b in itertools.combinations(range(nf), 2):
        if y[a, b] > 0:
            net.add_edge(a, b, y[a, b])
    value, cut = max_flow(net)
    if value >= demand - tol:
        return []
    S = frozenset(cut.source_side - {s})
    lhs = sum(x[i, j] for i in S)
    rhs = sum(y[a, b] for a in S for b in range(nf) if b not in S)
    return [ConnectivityCut(S, j, lhs - rhs)]


def separation_sweep(inst: Instance, frac: FractionalSolution, v: Optional[int] = None,
                     clients: Optional[Iterable[int]] = None, tol: float = SEPARATION_TOL) -> list:
    v = frac.v if v is None else v
    clients = frac.clients if clients is None else clients
    out = []
    for j in clients:
        out.extend(separate_cuts(inst, frac.x, frac.y, v, j, tol))
    return out


def cut_constraint(layout: FlLayout, cut: ConnectivityCut) -> Constraint:
    nf = layout.inst.n_facilities
    coeffs = {layout.x[i, cut.j]: 1.0 for i in cut.S}
    for a in cut.S:
        for b in range(nf):
            if b not in cut.S:
                coeffs[layout.y[min(a, b), max(a, b)]] = -1.0
    name = "cut_" + "_".join(map(str, sorted(cut.S))) + f"__{cut.j}"
    return Constraint(coeffs, "<=", 0.0, name)


def lazy_callback(layout: FlLayout):
    def callback(xvec: np.ndarray, tol: float = SEPARATION_TOL) -> list:
        frac = to_fractional(layout, xvec)
        return [cut_constraint(layout, c) for c in separation_sweep(layout.inst, frac, layout.v,
                                                                   layout.clients, tol)]
    return callback


def all_cuts(layout: FlLayout) -> list:
    """Every member of the connectivity family for this model's root and clients."""
    nf, v = layout.inst.n_facilities, layout.v
    others = [i for i in range(nf) if i != v]
    cuts = []
    for size in range(1, len(others) + 1):
        for S in itertools.combinations(others, size):
            for j in layout.clients:
                cuts.append(ConnectivityCut(frozenset(S), j))
    return cuts


def add_all_cuts(model: LpModel) -> LpModel:
    """Copy of ``model`` with the whole connectivity family made explicit."""
    out = model.copy()
    for cut in all_cuts(model.layout):
        out.constraints.append(cut_constraint(model.layout, cut))
    out.lazy = None
    return out


class CutPool:
    """Cuts found for one instance, shared across root guesses.

    A cut ``(S, j)`` belongs to the family of every root outside ``S``.
    """

    def __init__(self):
        self._cuts: dict = {}

    def __len__(self):
        return len(self._cuts)

    def add(self, cut: ConnectivityCut) -> None:
        self._cuts.setdefault(cut.key, ConnectivityCut(cut.S, cut.j))

    def for_root(self, v: int, clients: Iterable[int]) -> list:
        clients = set(clients)
        return [c for key, c in sorted(self._cuts.items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1]))
                if v not in c.S and c.j in clients]


def solve_with_cuts(model: LpModel, inst: Optional[Instance] = None, v: Optional[int] = None,
                    pool: Optional[CutPool] = None, max_rounds: int = 10_000,
                    tol: float = SEPARATION_TOL) -> FractionalSolution:
    """Optimize ``model`` over its full connectivity family by row generation.

    Each round solves the explicit LP, separates every client, and adds the
    violated cuts. Stops when a sweep at ``ADD_TOL`` finds nothing; the result
    is then re-certified with a sweep at ``tol``.
    """
    layout = model.layout
    inst = layout.inst if inst is None else inst
    v = layout.v if v is None else v
    work = model.copy()
    seen = set()
    if pool is not None:
        for cut in pool.for_root(v, layout.clients):
            seen.add(cut.key)
            work.constraints.append(cut_constraint(layout, cut))
    last = -np.inf
    for rounds in range(1, max_rounds + 1):
        res = solve_lp(work)
        scale = max(1.0, abs(res.objective))
        if res.objective < last - 1e-7 * scale:
            raise RuntimeError("LP value decreased after adding cuts")
        last = res.objective
        frac = to_fractional(layout, res.x, res.objective)
        found = [c for c in separation_sweep(inst, frac, v, layout.clients, ADD_TOL)
                 if c.key not in seen]
        if not found:
            leftover = separation_sweep(inst, frac, v, layout.clients, tol)
            if leftover:
                raise RuntimeError(f"certification sweep found {len(leftover)} violated cuts")
            frac.info.update(rounds=rounds, cuts=len(work.constraints) - len(model.constraints),
                             iterations=res.iterations)
            return frac
        for cut in found:
            seen.add(cut.key)
            work.constraints.append(cut_constraint(layout, cut))
            if pool is not None:
                pool.add(cut)
    raise IterationLimit(f"no convergence after {max_rounds} cut rounds")
