"""LP models for the connected (prize-collecting) facility location relaxations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import MissingPenalty, UnknownFacility
from ..instance import Instance
from .simplex import LpResult, simplex


@dataclass
class Constraint:
    coeffs: dict  # variable index -> coefficient
    sense: str    # "<=", "=", ">="
    rhs: float
    name: str = ""

    def activity(self, x: np.ndarray) -> float:
        return float(sum(a * x[k] for k, a in self.coeffs.items()))

    def violation(self, x: np.ndarray) -> float:
        lhs = self.activity(x)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass
class FlLayout:
    """Where each facility-location variable lives in an :class:`LpModel`."""
    inst: Instance
    v: int
    clients: tuple      # client indices carried by the model
    w: np.ndarray       # facility -> var
    x: dict             # (i, j) -> var
    y: dict             # (a, b), a < b -> var
    z: Optional[dict]   # client -> var, or None for ConFL-shaped models


@dataclass
class LpModel:
    names: list = field(default_factory=list)
    lb: list = field(default_factory=list)
    ub: list = field(default_factory=list)
    obj: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    lazy: Optional[Callable] = None
    layout: Optional[FlLayout] = None

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def add_var(self, name: str, lb: float = 0.0, ub: float = 1.0, obj: float = 0.0) -> int:
        if lb > ub:
            raise ValueError(f"{name}: lb > ub")
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        return len(self.names) - 1

    def add_constraint(self, coeffs: dict, sense: str, rhs: float, name: str = "") -> Constraint:
        if any(k < 0 or k >= self.n_vars for k in coeffs):
            raise IndexError("constraint references unknown variable")
        con = Constraint(dict(coeffs), sense, float(rhs), name)
        self.constraints.append(con)
        return con

    def copy(self) -> "LpModel":
        return LpModel(list(self.names), list(self.lb), list(self.ub), list(self.obj),
                       list(self.constraints), self.lazy, self.layout)

    def dense(self):
        n = self.n_vars
        A = np.zeros((len(self.constraints), n))
        for r, con in enumerate(self.constraints):
            for k, a in con.coeffs.items():
                A[r, k] += a
        return (np.array(self.obj), A, [c.sense for c in self.constraints],
                np.array([c.rhs for c in self.constraints]), np.array(self.lb), np.array(self.ub))

    def objective(self, x: np.ndarray) -> float:
        return float(np.dot(self.obj, x))

    def max_violation(self, x: np.ndarray) -> float:
        lb, ub = np.array(self.lb), np.array(self.ub)
        worst = float(max(np.max(lb - x, initial=0.0), np.max(x - ub, initial=0.0)))
        for con in self.constraints:
            worst = max(worst, con.violation(x))
        return worst


def solve_lp(model: LpModel) -> LpResult:
    """Solve the explicit constraints of ``model`` (lazy family ignored)."""
    return simplex(*model.dense())


@dataclass
class FractionalSolution:
    """Relaxed (w, x, y, z) point with its objective value.

    ``x`` is facility-by-client over the whole instance (zero outside the
    model's client set); ``y`` is a symmetric facility-by-facility matrix;
    ``z`` is None for ConFL-shaped solutions.
    """
    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray]
    objective: float
    v: int = 0
    clients: tuple = ()
    info: dict = field(default_factory=dict)

    def components(self, inst: Instance, clients=None) -> dict:
        cl = list(self.clients if clients is None else clients)
        iu = np.triu_indices(inst.n_facilities, 1)
        parts = {
            "facility": float(inst.open_costs @ self.w),
            "service": float((inst.d[:, cl] * self.x[:, cl]).sum()) if cl else 0.0,
            "connection": float(inst.connection_scale * (inst.edge_cost[iu] * self.y[iu]).sum()),
            "penalty": 0.0,
        }
        if self.z is not None:
            parts["penalty"] = float(inst.penalties[cl] @ self.z[cl]) if cl else 0.0
        return parts

    def cost(self, inst: Instance, clients=None) -> float:
        return sum(self.components(inst, clients).values())


def facility_pairs(nf: int):
    return list(itertools.combinations(range(nf), 2))


def _resolve_facility(inst: Instance, v: Union[int, str]) -> int:
    if isinstance(v, str):
        try:
            return inst.facility_index(v)
        except KeyError:
            raise UnknownFacility(f"no facility {v!r}") from None
    if not 0 <= int(v) < inst.n_facilities:
        raise UnknownFacility(f"facility index {v} out of range")
    return int(v)


def _build(inst: Instance, clients: Sequence[int], v: int, with_penalty: bool) -> LpModel:
    nf = inst.n_facilities
    d, f, M = inst.d, inst.open_costs, inst.connection_scale
    model = LpModel()
    w = np.array([model.add_var(f"w_{i}", obj=f[i]) for i in range(nf)])
    xs = {}
    for j in clients:
        for i in range(nf):
            xs[i, j] = model.add_var(f"x_{i}_{j}", obj=d[i, j])
    ys = {}
    for a, b in facility_pairs(nf):
        ys[a, b] = model.add_var(f"y_{a}_{b}", obj=M * inst.edge_cost[a, b])
    zs = None
    if with_penalty:
        p = inst.penalties
        zs = {j: model.add_var(f"z_{j}", obj=p[j]) for j in clients}
    for j in clients:
        coeffs = {xs[i, j]: 1.0 for i in range(nf)}
        if zs is not None:
            coeffs[zs[j]] = 1.0
        model.add_constraint(coeffs, "=", 1.0, f"serve_{j}")
    for j in clients:
        for i in range(nf):
            model.add_constraint({xs[i, j]: 1.0, w[i]: -1.0}, "<=", 0.0, f"open_{i}_{j}")
    model.add_constraint({w[v]: 1.0}, "=", 1.0, "root")
    model.layout = FlLayout(inst, v, tuple(clients), w, xs, ys, zs)
    return model


def build_conpfl_lp(inst: Instance, v: Union[int, str]) -> LpModel:
    """Relaxation of the rooted ConPFL integer program for guessed root ``v``.

    The exponential connectivity family is not materialized here; see
    :func:`facloc.lp.cuts.solve_with_cuts`.
    """
    if not inst.has_penalties:
        raise MissingPenalty("every client needs a penalty")
    v = _resolve_facility(inst, v)
    model = _build(inst, range(inst.n_clients), v, with_penalty=True)
    _install_lazy(model)
    return model


def build_confl_lp(inst: Instance, residual_clients: Sequence[int], v: Union[int, str]) -> LpModel:
    """Rooted ConFL relaxation over ``residual_clients`` only."""
    v = _resolve_facility(inst, v)
    res = sorted(set(residual_clients))
    if any(not 0 <= j < inst.n_clients for j in res):
        raise ValueError("residual client out of range")
    model = _build(inst, res, v, with_penalty=False)
    _install_lazy(model)
    return model


def _install_lazy(model: LpModel) -> None:
    from .cuts import lazy_callback
    model.lazy = lazy_callback(model.layout)


def to_fractional(layout: FlLayout, xvec: np.ndarray, objective: Optional[float] = None) -> FractionalSolution:
    inst = layout.inst
    nf, nc = inst.n_facilities, inst.n_clients
    w = xvec[layout.w].copy()
    x = np.zeros((nf, nc))
    for (i, j), k in layout.x.items():
        x[i, j] = xvec[k]
    y = np.zeros((nf, nf))
    for (a, b), k in layout.y.items():
        y[a, b] = y[b, a] = xvec[k]
    z = None
    if layout.z is not None:
        z = np.zeros(nc)
        for j, k in layout.z.items():
            z[j] = xvec[k]
    sol = FractionalSolution(w, x, y, z, 0.0, layout.v, layout.clients)
    sol.objective = sol.cost(inst) if objective is None else float(objective)
    return sol


def from_fractional(layout: FlLayout, frac: FractionalSolution) -> np.ndarray:
    """Inverse of :func:`to_fractional` for this layout's variable order."""
    n = len(layout.w) + len(layout.x) + len(layout.y) + (len(layout.z) if layout.z else 0)
    out = np.zeros(n)
    out[layout.w] = frac.w
    for (i, j), k in layout.x.items():
        out[k] = frac.x[i, j]
    for (a, b), k in layout.y.items():
        out[k] = frac.y[a, b]
    if layout.z is not None:
        for j, k in layout.z.items():
            out[k] = 0.0 if frac.z is None else frac.z[j]
    return out


def write_lp(model: LpModel, path) -> None:
    """Dump ``model`` (explicit rows only) in CPLEX LP text format."""
    def term_list(pairs):
        out = []
        for k, a in pairs:
            if a == 0:
                continue
            sign = "-" if a < 0 else "+"
            out.append(f"{sign} {abs(a):.17g} {model.names[k]}")
        text = " ".join(out) or "0 " + model.names[0]
        return text[2:] if text.startswith("+ ") else text

    lines = ["\\ facloc LP model", "Minimize", " obj: " + term_list(enumerate(model.obj)), "Subject To"]
    for r, con in enumerate(model.constraints):
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        name = con.name or f"c{r}"
        lines.append(f" {name}: {term_list(sorted(con.coeffs.items()))} {sense} {con.rhs:.17g}")
    lines.append("Bounds")
    for name, lo, hi in zip(model.names, model.lb, model.ub):
        hi_s = "+inf" if np.isinf(hi) else f"{hi:.17g}"
        lines.append(f" {lo:.17g} <= {name} <= {hi_s}")
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
