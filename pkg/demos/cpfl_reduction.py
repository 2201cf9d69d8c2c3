"""Capacitated prize-collecting FL through its dummy-facility reduction.

Each client gets a private facility of capacity 1 whose opening cost is the
client's penalty. Solving the reduced capacitated instance and lifting back
turns open dummies into paid penalties.

Run: python3 demos/cpfl_reduction.py [instance.json]
"""

from __future__ import annotations

import sys
from pathlib import Path

from facloc import ProblemKind, cpfl_to_cfl, drop_connectivity, evaluate, lift_cfl_solution, load_instance
from facloc.subsolvers import solve_cfl_local_search, solve_exact

ROOT = Path(__file__).resolve().parents[1]


def main(path):
    inst = drop_connectivity(load_instance(path))
    reduced, dmap = cpfl_to_cfl(inst)
    print(f"original: {inst.n_facilities} facilities; reduced: {reduced.n_facilities} "
          f"({dmap.n_true} true + {reduced.n_facilities - dmap.n_true} dummies)")

    sol = solve_cfl_local_search(reduced, seed=0)
    dummies = sorted(i for i in sol.open if dmap.client_of(i) is not None)
    print(f"reduced solution cost {evaluate(reduced, sol).total:.3f}, dummies open: "
          f"{[reduced.facilities[i].id for i in dummies]}")

    lifted = lift_cfl_solution(sol, dmap)
    kind = ProblemKind.parse("cpfl")
    cost = evaluate(inst, lifted, kind)
    best = solve_exact(inst, kind).metadata["objective"]
    print(f"lifted: open {sorted(inst.facilities[i].id for i in lifted.open)}, "
          f"penalized {sorted(inst.clients[j].id for j in lifted.penalty_set)}")
    print(f"cost {cost.total:.3f} (penalties {cost.penalty:.3f}); exact optimum {best:.3f}; "
          f"ratio {cost.total / best:.4f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ROOT / "corpus" / "euclid-5x8-s3.json")
