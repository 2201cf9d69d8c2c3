"""Problem instances: data model, JSON format, metric checks, generators and
the constraint-dropping views used to build sub-problem instances.

Node indexing follows declaration order: facilities occupy ``0..nF-1`` of the
distance matrix and clients ``nF..nF+nC-1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, MetricViolation, ParseError

METRIC_TOL = 1e-9


@dataclass(frozen=True)
class FacilitySpec:
    id: str
    open_cost: float
    capacity: Optional[int] = None

    def __post_init__(self):
        if self.open_cost < 0:
            raise ValueError(f"facility {self.id}: negative open_cost")
        if self.capacity is not None and self.capacity < 1:
            raise ValueError(f"facility {self.id}: capacity must be >= 1")


@dataclass(frozen=True)
class ClientSpec:
    id: str
    penalty: Optional[float] = None

    def __post_init__(self):
        if self.penalty is not None and self.penalty < 0:
            raise ValueError(f"client {self.id}: negative penalty")


class Base(str, Enum):
    FL = "fl"
    KM = "km"
    KFL = "kfl"
    KC = "kc"


@dataclass(frozen=True)
class ProblemKind:
    base: Base = Base.FL
    capacitated: bool = False
    connected: bool = False
    prize_collecting: bool = False

    @classmethod
    def parse(cls, text: str) -> "ProblemKind":
        """Parse names such as ``concpfl``, ``ckc``, ``conckm`` or ``pfl``."""
        s = text.strip().lower()
        connected = s.startswith("con")
        if connected:
            s = s[3:]
        capacitated = s.startswith("c")
        if capacitated:
            s = s[1:]
        prize = s.startswith("p")
        if prize:
            s = s[1:]
        try:
            base = Base(s)
        except ValueError:
            raise ValueError(f"unknown problem kind {text!r}") from None
        return cls(base, capacitated, connected, prize)

    @property
    def name(self) -> str:
        return (("con" if self.connected else "") + ("c" if self.capacitated else "")
                + ("p" if self.prize_collecting else "") + self.base.value)

    @property
    def has_cardinality(self) -> bool:
        return self.base is not Base.FL

    @property
    def is_center(self) -> bool:
        return self.base is Base.KC

    def __str__(self):
        return self.name

    def check(self, inst: "Instance") -> None:
        """Raise if ``inst`` lacks fields this kind requires."""
        from .errors import MissingCapacity, MissingPenalty
        if self.has_cardinality and inst.k is None:
            raise InvalidConfig(f"kind {self.name} requires k")
        if self.prize_collecting and not inst.has_penalties:
            raise MissingPenalty(f"kind {self.name} requires a penalty on every client")
        if self.capacitated and not inst.has_capacities:
            raise MissingCapacity(f"kind {self.name} requires a capacity on every facility")


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    facilities: tuple
    clients: tuple
    dist: np.ndarray
    edge_cost: np.ndarray
    connection_scale: float = 1.0
    k: Optional[int] = None
    points: Optional[np.ndarray] = None
    connectivity_dropped: bool = False

    def __post_init__(self):
        for arr in (self.dist, self.edge_cost, self.points):
            if arr is not None:
                arr.setflags(write=False)

    # sizes and views -------------------------------------------------------
    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    @property
    def d(self) -> np.ndarray:
        """Facility-by-client service cost block, shape (nF, nC)."""
        nf = self.n_facilities
        return self.dist[:nf, nf:]

    @property
    def open_costs(self) -> np.ndarray:
        return np.array([f.open_cost for f in self.facilities], dtype=float)

    @property
    def capacities(self) -> Optional[np.ndarray]:
        if not self.has_capacities:
            return None
        return np.array([f.capacity for f in self.facilities], dtype=int)

    @property
    def penalties(self) -> Optional[np.ndarray]:
        if not self.has_penalties:
            return None
        return np.array([c.penalty for c in self.clients], dtype=float)

    @property
    def has_capacities(self) -> bool:
        return all(f.capacity is not None for f in self.facilities)

    @property
    def has_penalties(self) -> bool:
        return all(c.penalty is not None for c in self.clients)

    @property
    def uniform_capacities(self) -> bool:
        caps = {f.capacity for f in self.facilities}
        return len(caps) == 1 and None not in caps

    def facility_index(self, fid: str) -> int:
        for i, f in enumerate(self.facilities):
            if f.id == fid:
                return i
        raise KeyError(fid)

    def client_index(self, cid: str) -> int:
        for j, c in enumerate(self.clients):
            if c.id == cid:
                return j
        raise KeyError(cid)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name == other.name and self.facilities == other.facilities
                and self.clients == other.clients
                and self.connection_scale == other.connection_scale
                and self.k == other.k
                and self.connectivity_dropped == other.connectivity_dropped
                and np.array_equal(self.dist, other.dist)
                and np.array_equal(self.edge_cost, other.edge_cost)
                and _opt_equal(self.points, other.points))

    __hash__ = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "name": self.name,
            "facilities": [_drop_none({"id": f.id, "open_cost": f.open_cost, "capacity": f.capacity})
                           for f in self.facilities],
            "clients": [_drop_none({"id": c.id, "penalty": c.penalty}) for c in self.clients],
        }
        if self.points is not None:
            out["points"] = self.points.tolist()
        else:
            out["dist"] = self.dist.tolist()
        nf = self.n_facilities
        if not np.array_equal(self.edge_cost, self.dist[:nf, :nf]):
            out["edge_cost"] = self.edge_cost.tolist()
        out["connection_scale"] = self.connection_scale
        if self.k is not None:
            out["k"] = self.k
        return out


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def _opt_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


# ---------------------------------------------------------------------------
# validation


def check_metric(dist: np.ndarray, tol: float = METRIC_TOL) -> None:
    """Raise :class:`MetricViolation` unless ``dist`` is a metric within ``tol``."""
    n = dist.shape[0]
    if dist.ndim != 2 or dist.shape[1] != n:
        raise DimensionMismatch(f"distance matrix must be square, got {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise MetricViolation("distance matrix has non-finite entries")
    if np.any(dist < -tol):
        raise MetricViolation("distance matrix has negative entries")
    asym = np.abs(dist - dist.T)
    if asym.max(initial=0.0) > tol:
        a, b = np.unravel_index(np.argmax(asym), asym.shape)
        raise MetricViolation(f"distance matrix not symmetric at ({a}, {b})", (int(a), int(b), int(a)),
                              float(asym[a, b]))
    if np.abs(np.diag(dist)).max(initial=0.0) > tol:
        raise MetricViolation("distance matrix has nonzero diagonal")
    worst, triple = 0.0, None
    for b in range(n):
        # excess[a, c] = d(a,c) - d(a,b) - d(b,c)
        excess = dist - dist[:, b:b + 1] - dist[b:b + 1, :]
        idx = np.argmax(excess)
        if excess.flat[idx] > worst:
            worst = float(excess.flat[idx])
            a, c = np.unravel_index(idx, excess.shape)
            triple = (int(a), b, int(c))
    if worst > tol:
        raise MetricViolation(f"triangle inequality broken by {worst:.3g} at {triple}", triple, worst)


def _check_edge_cost(ec: np.ndarray, nf: int, tol: float = METRIC_TOL) -> None:
    if ec.shape != (nf, nf):
        raise DimensionMismatch(f"edge_cost must be {nf}x{nf}, got {ec.shape}")
    if np.any(ec < -tol) or not np.all(np.isfinite(ec)):
        raise MetricViolation("edge_cost has negative or non-finite entries")
    if np.abs(ec - ec.T).max(initial=0.0) > tol or np.abs(np.diag(ec)).max(initial=0.0) > tol:
        raise MetricViolation("edge_cost must be symmetric with zero diagonal")


def euclidean_dist(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def make_instance(name: str, facilities: Sequence[FacilitySpec], clients: Sequence[ClientSpec], *,
                  dist=None, points=None, edge_cost=None, connection_scale: float = 1.0,
                  k: Optional[int] = None) -> Instance:
    """Build and validate an :class:`Instance` from either ``points`` or ``dist``."""
    facilities, clients = tuple(facilities), tuple(clients)
    n = len(facilities) + len(clients)
    for kind, specs in (("facility", facilities), ("client", clients)):
        ids = [s.id for s in specs]
        if len(set(ids)) != len(ids):
            raise ParseError(f"duplicate {kind} id")
    pts = None
    if points is not None:
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] != n:
            raise DimensionMismatch(f"expected {n} points, got shape {pts.shape}")
        derived = euclidean_dist(pts)
        if dist is not None:
            given = np.array(dist, dtype=float)
            if given.shape != derived.shape:
                raise DimensionMismatch(f"dist shape {given.shape} != {derived.shape}")
            if np.abs(given - derived).max(initial=0.0) > METRIC_TOL:
                raise MetricViolation("supplied dist disagrees with points")
        dist = derived
    elif dist is None:
        raise ParseError("instance needs either points or dist")
    dist = np.array(dist, dtype=float)
    if dist.ndim != 2 or dist.shape != (n, n):
        raise DimensionMismatch(f"dist must be {n}x{n}, got {dist.shape}")
    check_metric(dist)
    nf = len(facilities)
    ec = dist[:nf, :nf].copy() if edge_cost is None else np.array(edge_cost, dtype=float)
    _check_edge_cost(ec, nf)
    if connection_scale < 0:
        raise InvalidConfig("connection_scale must be nonnegative")
    if k is not None and k < 1:
        raise InvalidConfig("k must be a positive integer")
    return Instance(name, facilities, clients, dist, ec, float(connection_scale), k, pts)


# ---------------------------------------------------------------------------
# file format


def instance_from_dict(data: dict) -> Instance:
    try:
        facilities = [FacilitySpec(str(f["id"]), float(f["open_cost"]),
                                   _as_int(f.get("capacity")))
                      for f in data["facilities"]]
        clients = [ClientSpec(str(c["id"]), None if c.get("penalty") is None else float(c["penalty"]))
                   for c in data["clients"]]
        name = str(data.get("name", "instance"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed instance: {exc}") from exc
    if "points" not in data and "dist" not in data:
        raise ParseError("instance needs either points or dist")
    k = data.get("k")
    return make_instance(name, facilities, clients, dist=data.get("dist"), points=data.get("points"),
                         edge_cost=data.get("edge_cost"),
                         connection_scale=float(data.get("connection_scale", 1.0)),
                         k=None if k is None else _as_int(k))


def _as_int(v):
    if v is None:
        return None
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError(f"expected integer, got {v!r}")
    return int(v)


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return instance_from_dict(data)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class GeneratorConfig:
    open_cost: tuple = (0.2, 1.0)
    capacity: Optional[tuple] = (2, 4)
    uniform_capacity: bool = False
    penalty: Optional[tuple] = (0.2, 1.2)
    ensure_feasible: bool = True
    connection_scale: float = 1.0
    k: Optional[int] = None

    def validate(self, n_facilities: int, n_clients: int) -> None:
        lo, hi = self.open_cost
        if not 0 <= lo <= hi:
            raise InvalidConfig(f"bad open_cost range {self.open_cost}")
        if self.penalty is not None and not 0 <= self.penalty[0] <= self.penalty[1]:
            raise InvalidConfig(f"bad penalty range {self.penalty}")
        if self.capacity is not None:
            clo, chi = self.capacity
            if not 1 <= clo <= chi:
                raise InvalidConfig(f"bad capacity range {self.capacity}")
            if self.ensure_feasible and chi * n_facilities < n_clients:
                raise InvalidConfig("capacity range cannot cover all clients")


def generate_euclidean(n_facilities: int, n_clients: int, seed: int,
                       params: GeneratorConfig = GeneratorConfig(), name: Optional[str] = None) -> Instance:
    """Random instance with points uniform in the unit square."""
    if n_facilities < 1 or n_clients < 1:
        raise InvalidConfig("need at least one facility and one client")
    params.validate(n_facilities, n_clients)
    rng = np.random.default_rng(seed)
    pts = rng.random((n_facilities + n_clients, 2))
    open_costs = rng.uniform(*params.open_cost, size=n_facilities)
    caps = None
    if params.capacity is not None:
        lo, hi = params.capacity
        if params.uniform_capacity:
            caps = np.full(n_facilities, int(rng.integers(lo, hi + 1)))
            if params.ensure_feasible and caps.sum() < n_clients:
                caps[:] = math.ceil(n_clients / n_facilities)
        else:
            caps = rng.integers(lo, hi + 1, size=n_facilities)
            i = 0
            while params.ensure_feasible and caps.sum() < n_clients:
                if caps[i % n_facilities] < hi:
                    caps[i % n_facilities] += 1
                i += 1
    pens = None if params.penalty is None else rng.uniform(*params.penalty, size=n_clients)
    facilities = [FacilitySpec(f"F{i}", float(open_costs[i]), None if caps is None else int(caps[i]))
                  for i in range(n_facilities)]
    clients = [ClientSpec(f"C{j}", None if pens is None else float(pens[j])) for j in range(n_clients)]
    return make_instance(name or f"euclid-{n_facilities}x{n_clients}-s{seed}", facilities, clients,
                         points=pts, connection_scale=params.connection_scale, k=params.k)


# ---------------------------------------------------------------------------
# constraint-dropping views


def drop_capacities(inst: Instance) -> Instance:
    if all(f.capacity is None for f in inst.facilities):
        return inst
    return replace(inst, facilities=tuple(replace(f, capacity=None) for f in inst.facilities))


def drop_connectivity(inst: Instance) -> Instance:
    if inst.connectivity_dropped and inst.connection_scale == 0:
        return inst
    return replace(inst, connection_scale=0.0, connectivity_dropped=True)


def drop_penalties(inst: Instance) -> Instance:
    if all(c.penalty is None for c in inst.clients):
        return inst
    return replace(inst, clients=tuple(replace(c, penalty=None) for c in inst.clients))


def with_k(inst: Instance, k: Optional[int]) -> Instance:
    return replace(inst, k=k)
