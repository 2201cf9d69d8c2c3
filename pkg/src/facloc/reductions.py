"""Penalty reductions.

* CPFL to CFL: one collocated dummy facility per client whose opening cost is
  the client's penalty and whose capacity is one.
* ConPFL to ConFL: solve the rooted relaxation, send clients paying penalty
  to extent at least 1/2 to the penalty set, rescale the rest into a
  fractional ConFL point and round it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (InvalidSolution, MissingCapacity, MissingPenalty, NotFeasibleFractional, Overlap,
                     ScalePreconditionViolated)
from .instance import ClientSpec, FacilitySpec, Instance, make_instance
from .lp import CutPool, FractionalSolution, build_conpfl_lp, solve_with_cuts
from .solution import Solution
from .subsolvers.rounding import confl_infeasibility, round_confl, solve_confl
from .verify import evaluate

THRESHOLD = 0.5


# ---------------------------------------------------------------------------
# CPFL -> CFL


@dataclass(frozen=True)
class DummyMap:
    original: Instance
    dummy_of: dict  # client index -> facility index in the reduced instance

    @property
    def n_true(self) -> int:
        return self.original.n_facilities

    def client_of(self, facility: int) -> Optional[int]:
        if facility < self.n_true:
            return None
        return facility - self.n_true


def cpfl_to_cfl(inst: Instance) -> tuple[Instance, DummyMap]:
    if not inst.has_penalties:
        raise MissingPenalty("CPFL reduction needs a penalty on every client")
    if not inst.has_capacities:
        raise MissingCapacity("CPFL reduction needs a capacity on every facility")
    nf, nc = inst.n_facilities, inst.n_clients
    # node order of the reduced instance: true facilities, dummies, clients
    order = list(range(nf)) + [nf + j for j in range(nc)] + [nf + j for j in range(nc)]
    dist = inst.dist[np.ix_(order, order)].copy()
    ec = dist[:nf + nc, :nf + nc].copy()
    ec[:nf, :nf] = inst.edge_cost
    dummies = [FacilitySpec(f"dummy:{c.id}", float(c.penalty), 1) for c in inst.clients]
    while any(d.id in {f.id for f in inst.facilities} for d in dummies):
        dummies = [replace(d, id="_" + d.id) for d in dummies]
    reduced = make_instance(inst.name + "/cfl", list(inst.facilities) + dummies,
                            [ClientSpec(c.id) for c in inst.clients], dist=dist, edge_cost=ec,
                            connection_scale=inst.connection_scale, k=inst.k)
    if inst.connectivity_dropped:
        reduced = replace(reduced, connectivity_dropped=True)
    return reduced, DummyMap(inst, {j: nf + j for j in range(nc)})


def normalize_dummy_assignments(sol: Solution, dmap: DummyMap) -> Solution:
    """Make every open dummy serve its own client; never increases cost."""
    assign = dict(sol.assignment)
    for j, dj in sorted(dmap.dummy_of.items()):
        if dj not in sol.open or assign.get(j) == dj:
            continue
        other = [c for c, f in assign.items() if f == dj]
        prev = assign.get(j)
        if other:
            if prev is None:
                raise InvalidSolution(f"client {j} unassigned in reduced solution")
            assign[other[0]] = prev
        assign[j] = dj
    return Solution(sol.open, assign, sol.penalty_set, sol.steiner_edges, dict(sol.metadata))


def lift_cfl_solution(sol: Solution, dmap: DummyMap) -> Solution:
    """Map a reduced CFL solution back to the CPFL instance."""
    orig = dmap.original
    nc = orig.n_clients
    if set(sol.assignment) != set(range(nc)):
        raise InvalidSolution("reduced solution must serve every client")
    if any(i not in sol.open for i in sol.assignment.values()):
        raise InvalidSolution("reduced solution assigns to a closed facility")
    norm = normalize_dummy_assignments(sol, dmap)
    penalty = {j for j, dj in dmap.dummy_of.items() if dj in norm.open}
    opened = {i for i in norm.open if i < dmap.n_true}
    assign = {j: i for j, i in norm.assignment.items() if j not in penalty}
    return Solution(frozenset(opened), assign, frozenset(penalty),
                    frozenset(e for e in norm.steiner_edges if max(e) < dmap.n_true))


# ---------------------------------------------------------------------------
# ConPFL -> ConFL


@dataclass
class ThresholdResult:
    penalized: frozenset
    residual: tuple
    penalty_paid: float
    lp_penalty_mass: float


def threshold_penalties(rho_star: FractionalSolution, penalties) -> ThresholdResult:
    if rho_star.z is None:
        raise ValueError("fractional solution carries no penalty variables")
    z = rho_star.z
    p = np.asarray(penalties, dtype=float)
    clients = rho_star.clients or tuple(range(len(z)))
    pen = frozenset(j for j in clients if z[j] >= THRESHOLD)
    residual = tuple(j for j in clients if j not in pen)
    paid = float(sum(p[j] for j in pen))
    mass = float(sum(p[j] * z[j] for j in pen))
    return ThresholdResult(pen, residual, paid, mass)


def scale_fractional(rho_star: FractionalSolution, residual) -> FractionalSolution:
    """Rescale the residual clients' service to one and raise w, y to match."""
    residual = tuple(sorted(set(residual)))
    nf = len(rho_star.w)
    x = np.zeros_like(rho_star.x)
    mult = np.ones(nf)
    for j in residual:
        served = float(rho_star.x[:, j].sum())
        if served < THRESHOLD - 1e-9:
            raise ScalePreconditionViolated(f"client {j} served to extent {served:.6g} < 1/2")
        x[:, j] = rho_star.x[:, j] / served
        support = rho_star.x[:, j] > 0
        mult[support] = np.maximum(mult[support], 1.0 / served)
    w = np.minimum(1.0, rho_star.w * mult)
    y = np.minimum(1.0, 2.0 * rho_star.y)
    out = FractionalSolution(w, x, y, None, 0.0, rho_star.v, residual)
    return out


def scaled_cost_report(inst: Instance, rho_star: FractionalSolution, rho_prime: FractionalSolution,
                       residual) -> dict:
    """Per-component ratio data for the factor-two scaling bound."""
    before = rho_star.components(inst, residual)
    after = rho_prime.components(inst, residual)
    return {key: (after[key], before[key]) for key in ("facility", "service", "connection")}


def assemble_conpfl(confl_sol: Solution, thr: ThresholdResult) -> Solution:
    clash = thr.penalized & set(confl_sol.assignment)
    if clash:
        raise Overlap(f"penalized clients {sorted(clash)} also served")
    return Solution(confl_sol.open, confl_sol.assignment, thr.penalized, confl_sol.steiner_edges)


@dataclass
class RootRun:
    """Every intermediate object of the ConPFL algorithm for one root guess."""
    v: int
    rho_star: FractionalSolution
    threshold: ThresholdResult
    rho_prime: FractionalSolution
    confl: Solution
    solution: Solution
    total: float
    info: dict = field(default_factory=dict)

    @property
    def lp_value(self) -> float:
        return self.rho_star.objective


def conpfl_for_root(inst: Instance, v: int, pool: Optional[CutPool] = None, resolve: bool = False,
                    certify: bool = True) -> RootRun:
    model = build_conpfl_lp(inst, v)
    rho = solve_with_cuts(model, pool=pool)
    thr = threshold_penalties(rho, inst.penalties)
    rho_p = scale_fractional(rho, thr.residual)
    info = {}
    if certify:
        worst, cuts = confl_infeasibility(inst, rho_p, thr.residual, v)
        if worst > 1e-7 or cuts:
            raise NotFeasibleFractional(f"scaled point infeasible (row {worst:.3g}, {len(cuts)} cuts)")
        report = scaled_cost_report(inst, rho, rho_p, thr.residual)
        for key, (after, before) in report.items():
            if after > 2 * before + 1e-9:
                raise AssertionError(f"scaled {key} cost {after} exceeds twice {before}")
        info["scaled"] = report
    if resolve:
        confl = solve_confl(inst, thr.residual, v=v, pool=pool)
    else:
        confl = round_confl(rho_p, inst, thr.residual, v, check=False)
    sol = assemble_conpfl(confl, thr)
    return RootRun(v, rho, thr, rho_p, confl, sol, evaluate(inst, sol).total, info)


def solve_conpfl(inst: Instance, v: Optional[int] = None, pool: Optional[CutPool] = None,
                 resolve: bool = False) -> Solution:
    """Best assembled solution over root guesses.

    ``metadata['lp_value']`` is the minimum relaxation value over the roots.
    """
    pool = CutPool() if pool is None else pool
    roots = range(inst.n_facilities) if v is None else [v]
    runs = [conpfl_for_root(inst, r, pool, resolve) for r in roots]
    best = min(runs, key=lambda r: (r.total, r.v))
    return best.solution.with_metadata(lp_value=min(r.lp_value for r in runs), root=best.v)
