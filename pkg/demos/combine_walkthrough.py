"""Solve the two relaxed views of a small instance and merge them.

Run: python3 demos/combine_walkthrough.py [instance.json]
"""

from __future__ import annotations

import sys
from pathlib import Path

from facloc import (ProblemKind, certify_bound, combine_connected_capacitated, drop_capacities,
                    drop_connectivity, drop_penalties, evaluate, load_instance, solve, validate)

ROOT = Path(__file__).resolve().parents[1]


def show(label, inst, sol, kind):
    cost = evaluate(inst, sol, kind)
    ids = sorted(inst.facilities[i].id for i in sol.open)
    print(f"{label:12s} open={ids} edges={len(sol.steiner_edges)} total={cost.total:.3f} "
          f"(open {cost.facility:.3f}, service {cost.service:.3f}, tree {cost.connection:.3f})")


def main(path):
    inst = drop_penalties(load_instance(path))
    con_kind, cap_kind = ProblemKind.parse("confl"), ProblemKind.parse("cfl")
    both = ProblemKind.parse("concfl")

    con = solve(drop_capacities(inst), con_kind).solution
    cap = solve(drop_connectivity(inst), cap_kind).solution
    show("connected", inst, con, con_kind)
    show("capacitated", inst, cap, cap_kind)

    merged, cert = combine_connected_capacitated(con, cap, inst, both)
    show("combined", inst, merged, both)
    print(f"valid as {both.name}: {validate(inst, merged, both).ok}")

    print("witness hooks (opened facility -> client -> tree facility):")
    for w in cert.witnesses:
        f, c = inst.facilities, inst.clients
        print(f"  {f[w.cap_facility].id} -> {c[w.witness_client].id} -> {f[w.con_facility].id}  "
              f"edge {w.actual:.3f} <= {w.bound:.3f}")
    print(f"con + 2*cap - combined = {cert.con_total:.3f} + 2*{cert.cap_total:.3f} - "
          f"{cert.combined_total:.3f} = {cert.inequality_slack:.3f}  certified={certify_bound(cert)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ROOT / "corpus" / "euclid-5x8-s2.json")
