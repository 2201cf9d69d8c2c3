"""End-to-end solvers for each problem kind.

Single-constraint kinds call a sub-solver directly. Kinds that are both
connected and capacitated solve the two relaxed views separately and merge
the results with :mod:`facloc.combine`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .combine import BoundCertificate, combine_connected_capacitated, combine_kcenter, combine_penalty
from .errors import InvalidConfig
from .instance import Base, Instance, ProblemKind, drop_capacities, drop_connectivity, drop_penalties
from .reductions import cpfl_to_cfl, lift_cfl_solution, solve_conpfl
from .solution import Solution
from .subsolvers import solve_cfl_local_search, solve_confl, solve_exact
from .verify import objective


@dataclass
class PipelineResult:
    kind: ProblemKind
    pipeline: str
    solution: Solution
    objective: float
    certificate: Optional[BoundCertificate] = None
    parts: dict = field(default_factory=dict)


def _zero_open_costs(inst: Instance) -> Instance:
    return replace(inst, facilities=tuple(replace(f, open_cost=0.0) for f in inst.facilities))


def _saturate(inst: Instance) -> Instance:
    """Give capacity |C| to facilities without one."""
    nc = max(inst.n_clients, 1)
    return replace(inst, facilities=tuple(f if f.capacity is not None else replace(f, capacity=nc)
                                          for f in inst.facilities))


def _facility_side(inst: Instance, kind: ProblemKind, seed: int, exact: bool) -> tuple[Solution, str]:
    """Non-connected kinds other than k-center."""
    if exact:
        return solve_exact(inst, kind), "exact"
    k = inst.k if kind.has_cardinality else None
    km = kind.base is Base.KM
    if not kind.capacitated:
        inst = drop_capacities(inst)
    if not kind.prize_collecting:
        view = _zero_open_costs(inst) if km else inst
        return solve_cfl_local_search(view, seed, k=k), "local-search"
    view = inst if kind.capacitated else _saturate(inst)
    if km:
        view = _zero_open_costs(view)
    reduced, dmap = cpfl_to_cfl(view)
    counted = np.arange(reduced.n_facilities) < inst.n_facilities
    sol = solve_cfl_local_search(reduced, seed, k=k, counted=counted)
    return lift_cfl_solution(sol, dmap), "dummy-reduction+local-search"


def _connected_side(inst: Instance, kind: ProblemKind, exact: bool, v: Optional[int]) -> tuple[Solution, str]:
    """Uncapacitated connected kinds without cardinality."""
    if exact:
        return solve_exact(inst, kind), "exact"
    if kind.prize_collecting:
        return solve_conpfl(inst, v=v), "lp-threshold-scale-round"
    return solve_confl(inst, v=v), "lp-round"


def solve(inst: Instance, kind: ProblemKind, *, seed: int = 0, exact: bool = False,
          v: Optional[int] = None) -> PipelineResult:
    """Solve ``inst`` as ``kind``.

    ``exact`` swaps every sub-solver for the exhaustive oracle; ``v`` fixes
    the root guess of the LP-based connected solvers instead of trying all.
    """
    kind.check(inst)
    if kind.is_center:
        return _solve_center(inst, kind)
    if kind.connected and kind.capacitated:
        return _solve_combined(inst, kind, seed, exact, v)
    if kind.connected:
        if kind.has_cardinality:
            if not exact:
                raise InvalidConfig(f"{kind.name} has no heuristic pipeline; use the exact oracle")
            sol, name = solve_exact(inst, kind), "exact"
        else:
            sol, name = _connected_side(inst, kind, exact, v)
    else:
        sol, name = _facility_side(inst, kind, seed, exact)
    return _finish(inst, kind, name, sol)


def _finish(inst, kind, name, sol, cert=None, parts=None) -> PipelineResult:
    val = objective(inst, sol, kind)
    sol = sol.with_metadata(kind=kind.name, claimed_total=val)
    return PipelineResult(kind, name, sol, val, cert, parts or {})


def _solve_combined(inst, kind, seed, exact, v) -> PipelineResult:
    pc = kind.prize_collecting
    con_kind = ProblemKind(Base.FL, connected=True, prize_collecting=pc)
    cap_kind = ProblemKind(kind.base, capacitated=True, prize_collecting=pc)
    con_view = drop_capacities(inst if pc else drop_penalties(inst))
    if kind.base is Base.KM:
        con_view = _zero_open_costs(con_view)
    cap_view = drop_connectivity(inst if pc else drop_penalties(inst))
    con, con_name = _connected_side(con_view, con_kind, exact, v)
    cap, cap_name = _facility_side(cap_view, cap_kind, seed, exact)
    merge = combine_penalty if pc else combine_connected_capacitated
    sol, cert = merge(con, cap, inst, kind)
    name = f"combine({con_name},{cap_name})"
    return _finish(inst, kind, name, sol, cert, {"con": con, "cap": cap})


def _solve_center(inst, kind) -> PipelineResult:
    if kind.prize_collecting:
        raise InvalidConfig(f"{kind.name} is not supported")
    if not (kind.connected and kind.capacitated):
        return _finish(inst, kind, "exact", solve_exact(inst, kind))
    con = solve_exact(inst, ProblemKind(Base.KC, connected=True))
    cap = solve_exact(inst, ProblemKind(Base.KC, capacitated=True))
    sol, cert = combine_kcenter(con, cap, inst)
    return _finish(inst, kind, "combine(exact,exact)", sol, cert, {"con": con, "cap": cap})
