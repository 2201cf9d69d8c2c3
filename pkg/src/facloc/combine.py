"""Merge a capacitated-side and a connected-side solution.

The capacitated solution supplies openings and assignment; the connected
solution supplies a tree. Each opened facility ``i`` is hooked to the tree
through a witness client ``j`` served by ``i`` on the capacitated side and by
``i'`` on the connected side, at edge cost at most ``d(i,j) + d(j,i')``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

from .errors import CardinalityExceeded, InfeasibleInput
from .graphalg import kruskal_forest, prune_tree
from .instance import Base, Instance, ProblemKind
from .solution import Solution, edge
from .verify import ValidationPolicy, evaluate, objective, validate


@dataclass(frozen=True)
class WitnessEdge:
    cap_facility: int
    witness_client: int
    con_facility: int
    bound: float
    actual: float


@dataclass
class BoundCertificate:
    combined_total: float
    con_total: float
    cap_total: float
    inequality_slack: float
    combined: dict = field(default_factory=dict)
    con: dict = field(default_factory=dict)
    cap: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    objective: str = "sum"

    def as_dict(self) -> dict:
        out = asdict(self)
        out["witnesses"] = [list(asdict(w).values()) for w in self.witnesses]
        return out


def _require(inst, sol, kind, side, policy=ValidationPolicy()):
    rep = validate(inst, sol, kind, policy)
    if not rep.ok:
        raise InfeasibleInput(f"{side} solution infeasible as {kind.name}: {rep.violations[0]}")


def _merge(con: Solution, cap: Solution, inst: Instance, penalized: frozenset):
    """Shared construction; returns the merged solution and its witness edges."""
    d = inst.d
    assignment = {j: i for j, i in cap.assignment.items() if j not in penalized}
    opened = frozenset(assignment.values())
    witnesses = []
    hooks = set()
    for i in sorted(opened):
        best = None
        for j in sorted(c for c, f in assignment.items() if f == i):
            ip = con.assignment.get(j)
            if ip is None:
                continue
            bound = float(d[i, j] + d[ip, j])
            if best is None or bound < best[0]:
                best = (bound, j, ip)
        if best is None:
            raise InfeasibleInput(f"facility {i} has no client served on both sides")
        bound, j, ip = best
        witnesses.append(WitnessEdge(i, j, ip, bound, float(inst.connection_scale * inst.edge_cost[i, ip])))
        if i != ip:
            hooks.add(edge(i, ip))
    edges = set(con.steiner_edges) | hooks
    edges = kruskal_forest(edges, lambda a, b: inst.edge_cost[a, b])
    edges = prune_tree(edges, opened) if len(opened) > 1 else set()
    return Solution(opened, assignment, penalized, frozenset(edges)), witnesses


def _certificate(inst, kind, merged, con, cap, witnesses) -> BoundCertificate:
    cb, cc, kc = evaluate(inst, merged, kind), evaluate(inst, con, kind), evaluate(inst, cap, kind)
    if kind.is_center:
        tot, con_t, cap_t = objective(inst, merged, kind), max(cc.radius, cc.max_edge), kc.radius
        obj = "bottleneck"
    else:
        tot, con_t, cap_t = cb.total, cc.total, kc.total
        obj = "sum"
    return BoundCertificate(tot, con_t, cap_t, con_t + 2 * cap_t - tot, cb.as_dict(), cc.as_dict(),
                            kc.as_dict(), witnesses, obj)


def combine_connected_capacitated(con: Solution, cap: Solution, inst: Instance,
                                  kind: Optional[ProblemKind] = None, check: bool = True,
                                  policy: ValidationPolicy = ValidationPolicy()):
    """Combine ConFL-side ``con`` with CFL-side ``cap`` into a ConCFL solution.

    ``kind`` is the combined kind (ConCFL by default; ConCkM/ConCkFL also work).
    ``policy`` applies to the capacitated side, whose capacity violation the
    result inherits unchanged. Returns ``(solution, certificate)``.
    """
    kind = kind or ProblemKind(Base.FL, capacitated=True, connected=True)
    if check:
        _require(inst, con, ProblemKind(Base.FL, connected=True), "connected-side")
        _require(inst, cap, ProblemKind(kind.base, capacitated=True), "capacitated-side", policy)
    merged, wit = _merge(con, cap, inst, frozenset())
    return merged, _certificate(inst, kind, merged, con, cap, wit)


def combine_penalty(con: Solution, cap: Solution, inst: Instance,
                    kind: Optional[ProblemKind] = None, check: bool = True,
                    policy: ValidationPolicy = ValidationPolicy()):
    """Combine ConPFL-side ``con`` with CPFL-side ``cap`` into a ConCPFL solution.

    Clients penalized on either side are penalized in the result.
    """
    kind = kind or ProblemKind(Base.FL, capacitated=True, connected=True, prize_collecting=True)
    if check:
        _require(inst, con, ProblemKind(Base.FL, connected=True, prize_collecting=True), "connected-side")
        _require(inst, cap, ProblemKind(kind.base, capacitated=True, prize_collecting=True),
                 "capacitated-side", policy)
    penalized = frozenset(con.penalty_set | cap.penalty_set)
    merged, wit = _merge(con, cap, inst, penalized)
    return merged, _certificate(inst, kind, merged, con, cap, wit)


def combine_kcenter(con: Solution, cap: Solution, inst: Instance, k: Optional[int] = None,
                    check: bool = True):
    """Combine a connected k-center and a capacitated k-center solution.

    The certificate uses bottleneck objectives: radius for the capacitated
    side, ``max(radius, longest edge)`` for the connected side and the result.
    """
    k = inst.k if k is None else k
    kind = ProblemKind(Base.KC, capacitated=True, connected=True)
    for side, sol in (("connected-side", con), ("capacitated-side", cap)):
        if k is not None and len(sol.open) > k:
            raise CardinalityExceeded(f"{side} opens {len(sol.open)} > k={k}")
    if check:
        _require(inst, con, ProblemKind(Base.KC, connected=True), "connected-side")
        _require(inst, cap, ProblemKind(Base.KC, capacitated=True), "capacitated-side")
    merged, wit = _merge(con, cap, inst, frozenset())
    cert = _certificate(inst, kind, merged, con, cap, wit)
    cc, kc = evaluate(inst, con, kind), evaluate(inst, cap, kind)
    cert.combined["bottleneck_bound"] = max(kc.radius, cc.max_edge, kc.radius + cc.radius)
    return merged, cert


class Rule(str, Enum):
    CON_PLUS_2CAP = "con_plus_2cap"
    TWO_CAP_PLUS_CON = "two_cap_plus_con"
    DOUBLE = "double"


def compose_guarantee(alpha: float, beta: Optional[float] = None, rule="con_plus_2cap") -> float:
    """Approximation factor obtained by composing sub-solver factors.

    ``con_plus_2cap`` gives alpha + 2*beta, ``two_cap_plus_con`` gives
    2*alpha + beta and ``double`` gives 2*alpha.
    """
    rule = Rule(rule)
    if rule is Rule.DOUBLE:
        return round(2 * alpha, 10)
    if beta is None:
        raise ValueError(f"rule {rule.value} needs beta")
    if rule is Rule.CON_PLUS_2CAP:
        return round(alpha + 2 * beta, 10)
    return round(2 * alpha + beta, 10)


# factor of each black box plugged into the composition
SUBSOLVER_FACTORS = {
    "confl": 3.19,        # connected FL, best known
    "confl_lp": 10.66,    # connected FL via LP rounding
    "ucfl": 3.0,          # uniform capacitated FL
    "nucfl": 5.0,         # non-uniform capacitated FL
    "conkc": 6.0,
    "uckc": 6.0,
    "nuckc": 9.0,
}


def guarantee_table() -> list:
    """Rows ``(problem, connected factor, capacitated factor, composed factor)``."""
    s = SUBSOLVER_FACTORS
    conpfl = compose_guarantee(s["confl_lp"], rule="double")
    rows = [
        ("(U)ConCFL", s["confl"], s["ucfl"], compose_guarantee(s["confl"], s["ucfl"])),
        ("(NU)ConCFL", s["confl"], s["nucfl"], compose_guarantee(s["confl"], s["nucfl"])),
        ("ConPFL", s["confl_lp"], None, conpfl),
        ("(NU)CPFL", None, s["nucfl"], s["nucfl"]),
        ("(U)ConCPFL", conpfl, s["ucfl"], compose_guarantee(conpfl, s["ucfl"])),
        ("(NU)ConCPFL", conpfl, s["nucfl"], compose_guarantee(conpfl, s["nucfl"])),
        ("(U)ConCkC", s["conkc"], s["uckc"], compose_guarantee(s["conkc"], s["uckc"])),
        ("(NU)ConCkC", s["conkc"], s["nuckc"], compose_guarantee(s["conkc"], s["nuckc"])),
    ]
    return rows


GATES = {row[0]: row[3] for row in guarantee_table()}
