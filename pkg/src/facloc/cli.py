"""Command-line driver: ``facloc {generate,solve,verify,bench,factors}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bench import BenchConfig, format_summary, run_bench, run_one, summarize, write_results
from .combine import guarantee_table
from .errors import FaclocError, UnknownFacility
from .instance import GeneratorConfig, Instance, ProblemKind, generate_euclidean, load_instance, save_instance
from .solution import load_solution, save_solution
from .verify import ValidationPolicy, validate

EXIT_OK, EXIT_INVALID, EXIT_ERROR = 0, 1, 2


def _kind(text: str) -> ProblemKind:
    try:
        return ProblemKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _root(inst: Instance, text):
    if text is None:
        return None
    try:
        return inst.facility_index(text)
    except KeyError:
        if text.isdigit() and int(text) < inst.n_facilities:
            return int(text)
        raise UnknownFacility(f"no facility {text!r}") from None


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(uniform_capacity=args.uniform, connection_scale=args.connection_scale, k=args.k)
    inst = generate_euclidean(args.facilities, args.clients, args.seed, cfg, name=args.name)
    save_instance(inst, args.out)
    print(args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    rec, result = run_one(inst, args.kind, seed=args.seed, oracle=args.oracle, exact=args.exact,
                          v=_root(inst, args.v))
    if rec.error:
        print(f"error: {rec.error}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        save_solution(inst, result.solution, args.out, args.kind, result.objective)
    text = rec.to_json(timing=True)
    if args.record:
        Path(args.record).write_text(text + "\n", encoding="utf-8")
    print(text)
    if not rec.valid:
        print(f"invalid: {rec.violations[0][0]} {rec.violations[0][1]}", file=sys.stderr)
        return EXIT_INVALID
    if rec.certified is False:
        print("invalid: bound certificate has negative slack", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    sol = load_solution(inst, args.solution)
    text = args.kind or sol.metadata.get("kind")
    if not text:
        print("error: no --kind given and the solution names none", file=sys.stderr)
        return EXIT_ERROR
    kind = _kind(text) if isinstance(text, str) else text
    policy = ValidationPolicy(capacity_violation_gamma=args.gamma, cardinality_violation=args.cardinality_gamma)
    report = validate(inst, sol, kind, policy)
    print(json.dumps({"kind": kind.name, **report.as_dict()}))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_bench(args) -> int:
    cfg = BenchConfig.load(args.config) if args.config else BenchConfig()
    overrides = {k: v for k, v in (("count", args.count), ("seed", args.seed),
                                   ("kinds", args.kinds.split(",") if args.kinds else None)) if v is not None}
    if args.no_oracle:
        overrides["oracle"] = False
    cfg = dataclasses.replace(cfg, **overrides)
    records = run_bench(cfg, jobs=args.jobs)
    write_results(records, args.out)
    print(format_summary(summarize(records)))
    failed = [r for r in records if not r.passed]
    print(f"{len(records)} runs, {len(failed)} failed; results in {args.out}")
    for r in failed[:10]:
        print(f"  FAIL {r.instance} {r.kind}: {r.error or r.violations or 'gate/certificate'}")
    return EXIT_OK if not failed else EXIT_INVALID


def cmd_factors(args) -> int:
    def cell(x):
        return "-" if x is None else f"{x:g}"

    print(f"{'problem':13s} {'connected':>10s} {'capacitated':>12s} {'composed':>9s}")
    for name, a, b, total in guarantee_table():
        print(f"{name:13s} {cell(a):>10s} {cell(b):>12s} {total:9g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="facloc", description="Facility location with connectivity, capacity and "
                                "penalty constraints.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random Euclidean instance")
    g.add_argument("--facilities", type=int, required=True)
    g.add_argument("--clients", type=int, required=True)
    g.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    g.add_argument("--uniform", action="store_true", help="same capacity on every facility")
    g.add_argument("--k", type=int, default=None, help="cardinality bound stored in the instance")
    g.add_argument("--connection-scale", type=float, default=1.0, help="multiplier M on tree edges (default 1)")
    g.add_argument("--name", default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance as the given kind")
    s.add_argument("instance")
    s.add_argument("--kind", required=True, type=_kind, help="e.g. concfl, concpfl, conpfl, cpfl, conckc")
    s.add_argument("--seed", type=int, default=0, help="local search seed (default 0)")
    s.add_argument("--exact", action="store_true", help="use exhaustive oracles as sub-solvers")
    s.add_argument("--v", default=None, help="fix the root facility (id or index) instead of trying all")
    s.add_argument("--oracle", action="store_true", help="also compute the exact optimum and ratio")
    s.add_argument("--out", default=None, help="solution file to write")
    s.add_argument("--record", default=None, help="run record file to write")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="validate a solution file")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--kind", default=None, help="defaults to the kind stored in the solution")
    v.add_argument("--gamma", type=float, default=1.0, help="allowed capacity violation factor (default 1)")
    v.add_argument("--cardinality-gamma", type=float, default=1.0,
                   help="allowed cardinality violation factor (default 1)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run the seeded corpus and report ratios against the gates")
    b.add_argument("--config", default=None, help="JSON file with BenchConfig fields")
    b.add_argument("--count", type=int, default=None, help="number of instances (default 200)")
    b.add_argument("--seed", type=int, default=None, help="corpus seed (default 2024)")
    b.add_argument("--kinds", default=None, help="comma-separated kinds")
    b.add_argument("--no-oracle", action="store_true", help="skip exact optima")
    b.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    b.add_argument("--out", default="results.jsonl", help="JSON-lines results file (default results.jsonl)")
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("factors", help="print the composed approximation factors")
    f.set_defaults(func=cmd_factors)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FaclocError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
