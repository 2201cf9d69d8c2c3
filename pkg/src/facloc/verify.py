"""Cost accounting, feasibility validation and bound certification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import UnknownId
from .graphalg import is_connected
from .instance import Base, Instance, ProblemKind
from .solution import CostBreakdown, Solution

CODES = ("UNSERVED_CLIENT", "CLOSED_ASSIGNMENT", "CAPACITY_EXCEEDED", "CARDINALITY_EXCEEDED",
         "DISCONNECTED_OPEN_SET", "PENALTY_OVERLAP", "COST_MISMATCH")


@dataclass(frozen=True)
class ValidationPolicy:
    capacity_violation_gamma: float = 1.0
    cardinality_violation: float = 1.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.capacity_violation_gamma < 1 or self.cardinality_violation < 1:
            raise ValueError("violation factors must be >= 1")


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)  # (code, detail)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> set:
        return {c for c, _ in self.violations}

    def add(self, code: str, detail: str) -> None:
        self.violations.append((code, detail))

    def as_dict(self) -> dict:
        return {"ok": self.ok, "violations": [list(v) for v in self.violations]}


def _check_ids(inst: Instance, sol: Solution) -> None:
    nf, nc = inst.n_facilities, inst.n_clients
    fac = set(sol.open) | set(sol.assignment.values()) | {x for e in sol.steiner_edges for x in e}
    if any(not 0 <= i < nf for i in fac):
        raise UnknownId("solution references an unknown facility")
    if any(not 0 <= j < nc for j in set(sol.assignment) | set(sol.penalty_set)):
        raise UnknownId("solution references an unknown client")


def evaluate(inst: Instance, sol: Solution, kind: Optional[ProblemKind] = None) -> CostBreakdown:
    _check_ids(inst, sol)
    f = inst.open_costs
    d = inst.d
    facility = 0.0 if kind is not None and kind.base is Base.KM else float(sum(f[i] for i in sol.open))
    dists = [float(d[i, j]) for j, i in sol.assignment.items()]
    service = float(sum(dists))
    conn_edges = [inst.connection_scale * float(inst.edge_cost[a, b]) for a, b in sol.steiner_edges]
    connection = float(sum(conn_edges))
    penalty = 0.0
    if sol.penalty_set:
        p = inst.penalties
        if p is None:
            p = [c.penalty or 0.0 for c in inst.clients]
        penalty = float(sum(p[j] for j in sol.penalty_set))
    return CostBreakdown(facility, service, connection, penalty, facility + service + connection + penalty,
                         max(dists, default=0.0), max(conn_edges, default=0.0))


def objective(inst: Instance, sol: Solution, kind: ProblemKind) -> float:
    """The value a solver of ``kind`` minimizes.

    Sum objective for median/location kinds; service radius for k-center,
    and ``max(radius, longest tree edge)`` for connected k-center.
    """
    cb = evaluate(inst, sol, kind)
    if kind.is_center:
        return max(cb.radius, cb.max_edge) if kind.connected else cb.radius
    return cb.total


def validate(inst: Instance, sol: Solution, kind: ProblemKind,
             policy: ValidationPolicy = ValidationPolicy()) -> ValidationReport:
    report = ValidationReport()
    _check_ids(inst, sol)
    for j in range(inst.n_clients):
        served = j in sol.assignment
        pays = j in sol.penalty_set
        if served and pays:
            report.add("PENALTY_OVERLAP", f"client {inst.clients[j].id} is served and pays penalty")
        elif not served and not (pays and kind.prize_collecting):
            report.add("UNSERVED_CLIENT", f"client {inst.clients[j].id} is not served")
    for j, i in sorted(sol.assignment.items()):
        if i not in sol.open:
            report.add("CLOSED_ASSIGNMENT",
                       f"client {inst.clients[j].id} assigned to closed {inst.facilities[i].id}")
    if kind.capacitated:
        loads = sol.loads()
        for i in sorted(loads):
            u = inst.facilities[i].capacity
            if u is not None and loads[i] > policy.capacity_violation_gamma * u + policy.tolerance:
                report.add("CAPACITY_EXCEEDED", f"{inst.facilities[i].id} serves {loads[i]} > {u}")
    if kind.has_cardinality and inst.k is not None:
        if len(sol.open) > policy.cardinality_violation * inst.k + policy.tolerance:
            report.add("CARDINALITY_EXCEEDED", f"{len(sol.open)} open > k={inst.k}")
    if kind.connected and len(sol.open) > 1:
        ok, comps = is_connected(sol.open, sol.steiner_edges)
        if not ok:
            report.add("DISCONNECTED_OPEN_SET", f"open facilities split into {_open_parts(sol, comps)}")
    claimed = sol.metadata.get("claimed_total")
    if claimed is not None:
        actual = objective(inst, sol, kind)
        if abs(float(claimed) - actual) > policy.tolerance * max(1.0, abs(actual)):
            report.add("COST_MISMATCH", f"claimed {claimed} but recomputed {actual}")
    return report


def _open_parts(sol: Solution, comps: list) -> int:
    return sum(1 for comp in comps if sol.open.intersection(comp))


def certify_bound(cert, tolerance: float = 1e-9) -> bool:
    return cert.inequality_slack >= -tolerance
