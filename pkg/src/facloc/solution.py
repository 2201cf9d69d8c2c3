"""Integral solutions and their cost breakdown, plus the JSON solution file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import ParseError, UnknownId
from .instance import Instance


def edge(a: int, b: int) -> tuple:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Solution:
    """Open facilities, client assignment, penalized clients and Steiner edges.

    Facilities and clients are referred to by index; edges are ``(a, b)`` with
    ``a < b`` over facility indices.
    """
    open: frozenset = frozenset()
    assignment: Mapping = field(default_factory=dict)
    penalty_set: frozenset = frozenset()
    steiner_edges: frozenset = frozenset()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "open", frozenset(self.open))
        object.__setattr__(self, "assignment", dict(self.assignment))
        object.__setattr__(self, "penalty_set", frozenset(self.penalty_set))
        object.__setattr__(self, "steiner_edges", frozenset(edge(a, b) for a, b in self.steiner_edges
                                                            if a != b))

    def loads(self) -> dict:
        out = {i: 0 for i in self.open}
        for i in self.assignment.values():
            out[i] = out.get(i, 0) + 1
        return out

    def clients_of(self, i: int) -> list:
        return sorted(j for j, f in self.assignment.items() if f == i)

    def with_metadata(self, **kw) -> "Solution":
        md = dict(self.metadata)
        md.update(kw)
        return Solution(self.open, self.assignment, self.penalty_set, self.steiner_edges, md)


@dataclass
class CostBreakdown:
    facility: float = 0.0
    service: float = 0.0
    connection: float = 0.0
    penalty: float = 0.0
    total: float = 0.0
    radius: float = 0.0
    max_edge: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def solution_to_dict(inst: Instance, sol: Solution, kind=None, claimed_total: Optional[float] = None) -> dict:
    fid = [f.id for f in inst.facilities]
    cid = [c.id for c in inst.clients]
    meta = {"kind": None if kind is None else str(kind)}
    if claimed_total is not None:
        meta["claimed_total"] = claimed_total
    return {
        "open": [fid[i] for i in sorted(sol.open)],
        "assignment": [[cid[j], fid[i]] for j, i in sorted(sol.assignment.items())],
        "penalty_set": [cid[j] for j in sorted(sol.penalty_set)],
        "steiner_edges": [[fid[a], fid[b]] for a, b in sorted(sol.steiner_edges)],
        "metadata": meta,
    }


def solution_from_dict(inst: Instance, data: dict) -> Solution:
    fidx = {f.id: i for i, f in enumerate(inst.facilities)}
    cidx = {c.id: j for j, c in enumerate(inst.clients)}

    def f(x):
        try:
            return fidx[str(x)]
        except KeyError:
            raise UnknownId(f"unknown facility {x!r}") from None

    def c(x):
        try:
            return cidx[str(x)]
        except KeyError:
            raise UnknownId(f"unknown client {x!r}") from None

    try:
        return Solution(
            open=frozenset(f(x) for x in data.get("open", [])),
            assignment={c(j): f(i) for j, i in data.get("assignment", [])},
            penalty_set=frozenset(c(j) for j in data.get("penalty_set", [])),
            steiner_edges=frozenset((f(a), f(b)) for a, b in data.get("steiner_edges", [])),
            metadata=dict(data.get("metadata", {})),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed solution: {exc}") from exc


def save_solution(inst: Instance, sol: Solution, path, kind=None, claimed_total=None) -> None:
    data = solution_to_dict(inst, sol, kind, claimed_total)
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def load_solution(inst: Instance, path) -> Solution:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return solution_from_dict(inst, data)
