from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from facloc.errors import Infeasible, IterationLimit, Unbounded
from facloc.instance import ProblemKind, drop_capacities, drop_penalties
from facloc.lp import (CutPool, FractionalSolution, add_all_cuts, build_confl_lp, build_conpfl_lp,
                       separate_cuts, separation_sweep, simplex, solve_lp, solve_with_cuts, write_lp)
from facloc.lp.cuts import ConnectivityCut, all_cuts
from facloc.lp.model import from_fractional, to_fractional
from facloc.subsolvers import solve_exact

from conftest import small_instances


def _random_lp(rng, m, n):
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    senses = list(rng.choice(["<=", "=", ">="], size=m, p=[0.5, 0.2, 0.3]))
    x0 = rng.random(n) * 2
    b = A @ x0 + np.where(np.array(senses) == "<=", 1.0, np.where(np.array(senses) == ">=", -1.0, 0.0))
    if rng.random() < 0.3:
        b = b + rng.normal(size=m) * 3  # sometimes infeasible
    c = rng.normal(size=n)
    lb = np.zeros(n)
    ub = np.where(rng.random(n) < 0.6, 3.0, np.inf)
    return c, A, senses, b, lb, ub


def _highs(c, A, senses, b, lb, ub):
    senses = np.array(senses)
    le, ge, eq = senses == "<=", senses == ">=", senses == "="
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([b[le], -b[ge]])
    return linprog(c, A_ub=A_ub if len(b_ub) else None, b_ub=b_ub if len(b_ub) else None,
                   A_eq=A[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
                   bounds=list(zip(lb, [None if np.isinf(u) else u for u in ub])), method="highs")


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**7), m=st.integers(1, 7), n=st.integers(1, 7))
def test_simplex_agrees_with_highs(seed, m, n):
    rng = np.random.default_rng(seed)
    c, A, senses, b, lb, ub = _random_lp(rng, m, n)
    ref = _highs(c, A, senses, b, lb, ub)
    if ref.status == 2:
        with pytest.raises(Infeasible):
            simplex(c, A, senses, b, lb, ub)
    elif ref.status == 3:
        with pytest.raises(Unbounded):
            simplex(c, A, senses, b, lb, ub)
    else:
        assert ref.status == 0
        res = simplex(c, A, senses, b, lb, ub)
        assert res.objective == pytest.approx(ref.fun, abs=1e-7, rel=1e-7)
        x = res.x
        assert (x >= lb - 1e-8).all() and (x <= ub + 1e-8).all()
        act = A @ x
        for s, a, r in zip(senses, act, b):
            if s == "<=":
                assert a <= r + 1e-7
            elif s == ">=":
                assert a >= r - 1e-7
            else:
                assert a == pytest.approx(r, abs=1e-7)


def _vertex_enumeration(c, A_ub, b_ub, lb, ub):
    """Brute-force optimum of min c x, A_ub x <= b_ub, lb <= x <= ub (bounded)."""
    n = len(c)
    rows = [(A_ub[i], b_ub[i]) for i in range(len(b_ub))]
    for k in range(n):
        e = np.zeros(n); e[k] = 1
        rows += [(e, ub[k]), (-e, -lb[k])]
    best = np.inf
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[r][0] for r in combo])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, np.array([rows[r][1] for r in combo]))
        if all(a @ x <= r + 1e-9 for a, r in rows):
            best = min(best, c @ x)
    return best


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**7), m=st.integers(1, 4), n=st.integers(1, 3))
def test_simplex_matches_vertex_enumeration(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    b = rng.integers(0, 6, size=m).astype(float)  # x = 0 feasible
    c = rng.normal(size=n)
    lb, ub = np.zeros(n), np.full(n, 4.0)
    best = _vertex_enumeration(c, A, b, lb, ub)
    res = simplex(c, A, ["<="] * m, b, lb, ub)
    assert res.objective == pytest.approx(best, abs=1e-9)


def test_simplex_small_known():
    # min -x - y  s.t. x + 2y <= 4, 3x + y <= 6 -> (1.6, 1.2), value -2.8
    res = simplex([-1, -1], [[1, 2], [3, 1]], ["<=", "<="], [4, 6], [0, 0], [np.inf, np.inf])
    assert res.objective == pytest.approx(-2.8)
    assert res.x == pytest.approx([1.6, 1.2])


def test_simplex_errors():
    with pytest.raises(Infeasible):
        simplex([1], [[1]], [">="], [5], [0], [2])
    with pytest.raises(Unbounded):
        simplex([-1, 0], [[0, 1]], ["<="], [1], [0, 0], [np.inf, 1])
    with pytest.raises(ValueError):
        simplex([1], [[1]], ["<="], [1], [-np.inf], [1])
    rng = np.random.default_rng(5)
    A = rng.random((8, 10))
    with pytest.raises(IterationLimit):
        simplex(-np.ones(10), A, ["<="] * 8, np.ones(8), np.zeros(10), np.ones(10), max_iter=1)


def test_cut_family_enumeration_count(line4):
    model = build_conpfl_lp(line4, 0)
    cuts = all_cuts(model.layout)
    # S ranges over the non-empty subsets of F \ {v}: one per client here
    assert len(cuts) == line4.n_clients


def test_separation_finds_handmade_violation(line4):
    # client c3 fully served by B while the tree gives y = 0: the set {B} is violated by 1
    x = np.zeros((2, 4)); x[1, 2] = 1.0
    y = np.zeros((2, 2))
    cuts = separate_cuts(line4, x, y, 0, 2)
    assert cuts == [ConnectivityCut(frozenset({1}), 2, 1.0)]
    y[0, 1] = y[1, 0] = 1.0
    assert separate_cuts(line4, x, y, 0, 2) == []


@pytest.mark.parametrize("inst", small_instances(8, nf=(3, 6), nc=(4, 8), seed=31), ids=lambda i: i.name)
def test_cutting_planes_equal_full_enumeration(inst):
    for v in range(inst.n_facilities):
        lazy = solve_with_cuts(build_conpfl_lp(inst, v))
        full = solve_lp(add_all_cuts(build_conpfl_lp(inst, v)))
        assert lazy.objective == pytest.approx(full.objective, abs=1e-7)
        assert separation_sweep(inst, lazy, v) == []
        assert lazy.info["rounds"] >= 1


def test_cut_pool_reuse_and_root_filter():
    inst = small_instances(1, nf=(5, 5), nc=(6, 6), seed=3)[0]
    pool = CutPool()
    a = solve_with_cuts(build_conpfl_lp(inst, 0), pool=pool)
    assert all(0 not in c.S for c in pool.for_root(0, range(inst.n_clients)))
    assert all(1 not in c.S for c in pool.for_root(1, range(inst.n_clients)))
    again = solve_with_cuts(build_conpfl_lp(inst, 0), pool=pool)
    assert again.objective == pytest.approx(a.objective, abs=1e-9)


@pytest.mark.parametrize("inst", small_instances(6, nf=(3, 5), nc=(4, 7), seed=41), ids=lambda i: i.name)
def test_lp_bounds_exact_optimum(inst):
    """Relaxations never exceed the integral optimum, and integral optima are LP-feasible."""
    nf = inst.n_facilities
    conpfl = solve_exact(drop_capacities(inst), ProblemKind.parse("conpfl"))
    lp_min = min(solve_with_cuts(build_conpfl_lp(inst, v)).objective for v in range(nf))
    if conpfl.open:
        assert lp_min <= conpfl.metadata["objective"] + 1e-7
    view = drop_capacities(drop_penalties(inst))
    confl = solve_exact(view, ProblemKind.parse("confl"))
    v = min(confl.open)
    model = build_confl_lp(view, range(inst.n_clients), v)
    assert solve_with_cuts(model).objective <= confl.metadata["objective"] + 1e-7
    # the optimum itself, written as an LP point, satisfies every row and cut
    frac = FractionalSolution(np.array([1.0 if i in confl.open else 0.0 for i in range(nf)]),
                              np.zeros((nf, inst.n_clients)), np.zeros((nf, nf)), None, 0.0, v,
                              tuple(range(inst.n_clients)))
    for j, i in confl.assignment.items():
        frac.x[i, j] = 1.0
    for a, b in confl.steiner_edges:
        frac.y[a, b] = frac.y[b, a] = 1.0
    assert model.max_violation(from_fractional(model.layout, frac)) <= 1e-12
    assert separation_sweep(view, frac, v) == []
    assert frac.cost(view) == pytest.approx(confl.metadata["objective"])


def test_fractional_roundtrip(line4):
    model = build_conpfl_lp(line4, "B")
    rng = np.random.default_rng(0)
    vec = rng.random(model.n_vars)
    frac = to_fractional(model.layout, vec)
    assert np.allclose(from_fractional(model.layout, frac), vec)
    assert frac.v == 1
    assert frac.objective == pytest.approx(model.objective(vec))


def test_write_lp(tmp_path, line4):
    model = add_all_cuts(build_conpfl_lp(line4, 0))
    path = tmp_path / "m.lp"
    write_lp(model, path)
    text = path.read_text()
    assert text.splitlines()[1] == "Minimize"
    assert "Subject To" in text and "Bounds" in text and text.rstrip().endswith("End")
    assert "z_3" in text and "root:" in text
