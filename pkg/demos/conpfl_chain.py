"""Trace the prize-collecting connected pipeline for every root guess.

For each root: LP value, clients whose penalty variable crosses the
threshold, the scaled point fed to rounding, and the final cost.

Run: python3 demos/conpfl_chain.py [instance.json]
"""

from __future__ import annotations

import sys
from pathlib import Path

from facloc import drop_capacities, load_instance
from facloc.reductions import conpfl_for_root

ROOT = Path(__file__).resolve().parents[1]


def main(path):
    inst = drop_capacities(load_instance(path))
    print(f"{inst.name}: {inst.n_facilities} facilities, {inst.n_clients} clients, M={inst.connection_scale:g}")
    print(f"{'root':>6s} {'LP':>9s} {'penalized':>10s} {'paid':>8s} {'2*mass':>8s} {'cost':>9s} {'cost/LP':>8s}")
    best = None
    for v in range(inst.n_facilities):
        run = conpfl_for_root(inst, v)
        thr = run.threshold
        print(f"{inst.facilities[v].id:>6s} {run.lp_value:9.3f} {len(thr.penalized):10d} {thr.penalty_paid:8.3f} "
              f"{2 * thr.lp_penalty_mass:8.3f} {run.total:9.3f} {run.total / run.lp_value:8.3f}")
        if best is None or run.total < best.total:
            best = run
    sol = best.solution
    print(f"best root {inst.facilities[best.v].id}: open {sorted(inst.facilities[i].id for i in sol.open)}, "
          f"penalized {sorted(inst.clients[j].id for j in sol.penalty_set)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ROOT / "corpus" / "line4.json")
