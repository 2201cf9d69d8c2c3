"""Seeded benchmark corpus, per-run records and gate summaries."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .combine import GATES, SUBSOLVER_FACTORS
from .errors import FaclocError, InvalidConfig
from .instance import GeneratorConfig, Instance, ProblemKind, generate_euclidean, with_k
from .pipelines import solve
from .subsolvers.exact import MAX_CLIENTS, MAX_FACILITIES, solve_exact
from .verify import certify_bound, evaluate, validate

DEFAULT_KINDS = ("cfl", "cpfl", "confl", "conpfl", "concfl", "concpfl", "conckc")


@dataclass(frozen=True)
class BenchConfig:
    seed: int = 2024
    count: int = 200
    facilities: tuple = (3, 6)
    clients: tuple = (4, 12)
    kinds: tuple = DEFAULT_KINDS
    solver_seed: int = 0
    oracle: bool = True

    def __post_init__(self):
        object.__setattr__(self, "facilities", tuple(self.facilities))
        object.__setattr__(self, "clients", tuple(self.clients))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if self.count < 0:
            raise InvalidConfig("count must be nonnegative")
        for lo, hi in (self.facilities, self.clients):
            if not 1 <= lo <= hi:
                raise InvalidConfig("size ranges must satisfy 1 <= lo <= hi")
        for k in self.kinds:
            ProblemKind.parse(k)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidConfig(f"unknown bench config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "BenchConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def center_k(inst: Instance) -> int:
    """Smallest k >= 2 whose k largest capacities cover every client."""
    caps = sorted((f.capacity or inst.n_clients for f in inst.facilities), reverse=True)
    total = 0
    for k, u in enumerate(caps, start=1):
        total += u
        if total >= inst.n_clients and k >= 2:
            return k
    return len(caps)


def bench_corpus(cfg: BenchConfig) -> list:
    """Alternates uniform and non-uniform capacities; fully determined by ``cfg.seed``."""
    out = []
    for i in range(cfg.count):
        rng = np.random.default_rng([cfg.seed, i])
        nf = int(rng.integers(cfg.facilities[0], cfg.facilities[1] + 1))
        nc = int(rng.integers(cfg.clients[0], cfg.clients[1] + 1))
        uniform = i % 2 == 0
        name = f"b{cfg.seed}-{i:04d}-{'u' if uniform else 'nu'}"
        inst = generate_euclidean(nf, nc, int(rng.integers(2**31)),
                                  GeneratorConfig(uniform_capacity=uniform), name=name)
        out.append(with_k(inst, center_k(inst)))
    return out


@dataclass
class RunRecord:
    instance: str
    kind: str
    pipeline: str = ""
    seed: int = 0
    uniform: bool = True
    breakdown: dict = field(default_factory=dict)
    objective: Optional[float] = None
    certificate: Optional[dict] = None
    certified: Optional[bool] = None
    oracle: Optional[float] = None
    ratio: Optional[float] = None
    lp_value: Optional[float] = None
    lp_ratio: Optional[float] = None
    gate: Optional[float] = None
    gate_metric: Optional[str] = None
    gate_ok: Optional[bool] = None
    valid: bool = False
    violations: list = field(default_factory=list)
    error: Optional[str] = None
    wall_ms: float = field(default=0.0, compare=False)

    def to_json(self, timing: bool = False) -> str:
        data = asdict(self)
        if not timing:
            data.pop("wall_ms")
        return json.dumps(data, sort_keys=True)

    @property
    def passed(self) -> bool:
        return self.valid and self.certified is not False and self.gate_ok is not False


def gate_for(kind: ProblemKind, uniform: bool) -> tuple:
    """``(gate, metric)`` where metric is ``ratio`` (vs. oracle) or ``lp_ratio``."""
    name = kind.name
    prefix = "(U)" if uniform else "(NU)"
    if name == "concfl":
        return GATES[prefix + "ConCFL"], "ratio"
    if name == "concpfl":
        # one CPFL solver serves both capacity regimes, so the 5-factor row applies
        return GATES["(NU)ConCPFL"], "ratio"
    if name == "conckc":
        return GATES[prefix + "ConCkC"], "ratio"
    if name == "conpfl":
        return GATES["ConPFL"], "lp_ratio"
    if name == "confl":
        return SUBSOLVER_FACTORS["confl_lp"], "lp_ratio"
    if name in ("cfl", "cpfl"):
        return SUBSOLVER_FACTORS["nucfl"], "ratio"
    return None, None


def _ratio(value: float, ref: Optional[float]) -> Optional[float]:
    if ref is None:
        return None
    if ref <= 0:
        return 1.0 if value <= 1e-12 else float("inf")
    return value / ref


def run_one(inst: Instance, kind: ProblemKind | str, seed: int = 0, oracle: bool = True,
            exact: bool = False, v: Optional[int] = None) -> tuple:
    """Solve, validate, certify and compare one (instance, kind); returns ``(record, result)``."""
    kind = ProblemKind.parse(kind) if isinstance(kind, str) else kind
    rec = RunRecord(inst.name, kind.name, seed=seed, uniform=bool(inst.uniform_capacities))
    t0 = time.perf_counter()
    result = None
    try:
        result = solve(inst, kind, seed=seed, exact=exact, v=v)
        sol = result.solution
        rec.pipeline = result.pipeline
        rec.breakdown = evaluate(inst, sol, kind).as_dict()
        rec.objective = result.objective
        report = validate(inst, sol, kind)
        rec.valid = report.ok
        rec.violations = [list(x) for x in report.violations]
        if result.certificate is not None:
            rec.certificate = result.certificate.as_dict()
            rec.certified = certify_bound(result.certificate)
        lp = sol.metadata.get("lp_value")
        if lp is not None:
            rec.lp_value = float(lp)
            rec.lp_ratio = _ratio(result.objective, rec.lp_value)
        if oracle and inst.n_facilities <= MAX_FACILITIES and inst.n_clients <= MAX_CLIENTS:
            rec.oracle = float(solve_exact(inst, kind).metadata["objective"])
            rec.ratio = _ratio(result.objective, rec.oracle)
        rec.gate, rec.gate_metric = gate_for(kind, rec.uniform)
        if rec.gate is not None:
            value = getattr(rec, rec.gate_metric)
            rec.gate_ok = None if value is None else bool(value <= rec.gate + 1e-9)
    except FaclocError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.valid = False
    rec.wall_ms = round(1000 * (time.perf_counter() - t0), 3)
    return rec, result


def _task(args):
    inst, kind, seed, oracle = args
    return run_one(inst, kind, seed, oracle)[0]


def run_bench(cfg: BenchConfig, jobs: int = 1) -> list:
    tasks = [(inst, k, cfg.solver_seed, cfg.oracle) for inst in bench_corpus(cfg) for k in cfg.kinds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_task, tasks, chunksize=4))
    else:
        records = [_task(t) for t in tasks]
    return sorted(records, key=lambda r: (r.instance, r.kind))


def write_results(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def summarize(records) -> list:
    """One row per (kind, uniformity) with ratio statistics and pass counts."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.kind, rec.uniform), []).append(rec)
    rows = []
    for (kind, uniform), recs in sorted(groups.items()):
        certs = [r.certified for r in recs if r.certified is not None]
        ratios = [r.ratio for r in recs if r.ratio is not None]
        gated = [getattr(r, r.gate_metric) for r in recs if r.gate_metric and getattr(r, r.gate_metric) is not None]
        rows.append({
            "kind": kind,
            "capacities": "uniform" if uniform else "non-uniform",
            "runs": len(recs),
            "valid": sum(r.valid for r in recs),
            "certified": f"{sum(certs)}/{len(certs)}" if certs else "-",
            "max_ratio": max(ratios) if ratios else None,
            "mean_ratio": float(np.mean(ratios)) if ratios else None,
            "gate": recs[0].gate,
            "gate_metric": recs[0].gate_metric,
            "max_gated": max(gated) if gated else None,
            "gate_failures": sum(r.gate_ok is False for r in recs),
            "wall_ms": round(sum(r.wall_ms for r in recs), 1),
        })
    return rows


def format_summary(rows) -> str:
    def num(x):
        return "-" if x is None else f"{x:.4f}"

    head = f"{'kind':9s} {'caps':12s} {'runs':>5s} {'valid':>5s} {'cert':>9s} {'max':>8s} {'mean':>8s} " \
           f"{'gate':>6s} {'on':9s} {'max@gate':>8s} {'fail':>4s}"
    lines = [head]
    for r in rows:
        gate = "-" if r["gate"] is None else f"{r['gate']:g}"
        lines.append(f"{r['kind']:9s} {r['capacities']:12s} {r['runs']:5d} {r['valid']:5d} {r['certified']:>9s} "
                     f"{num(r['max_ratio']):>8s} {num(r['mean_ratio']):>8s} {gate:>6s} "
                     f"{r['gate_metric'] or '-':9s} {num(r['max_gated']):>8s} {r['gate_failures']:4d}")
    return "\n".join(lines)
