from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall, maximum_flow

from facloc.errors import Infeasible
from facloc.graphalg import (FlowNetwork, is_connected, kruskal_forest, max_flow, min_cost_assignment, mst,
                             prune_tree, shortest_paths)


def _random_network(rng, n, density=0.5, cap_hi=9):
    net = FlowNetwork(n, 0, n - 1)
    caps = np.zeros((n, n), dtype=np.int32)
    for a in range(n):
        for b in range(n):
            if a != b and rng.random() < density:
                c = int(rng.integers(1, cap_hi + 1))
                net.add_arc(a, b, c)
                caps[a, b] += c
    return net, caps


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 8))
def test_max_flow_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    net, caps = _random_network(rng, n)
    value, cut = max_flow(net)
    ref = maximum_flow(csr_matrix(caps), 0, n - 1).flow_value
    assert value == pytest.approx(ref)
    # the returned cut certifies optimality
    assert cut.value == pytest.approx(value)
    assert 0 in cut.source_side and (n - 1) not in cut.source_side


def test_max_flow_undirected_edge():
    net = FlowNetwork(3, 0, 2)
    net.add_edge(0, 1, 2.5)
    net.add_edge(2, 1, 1.0)
    value, cut = max_flow(net)
    assert value == pytest.approx(1.0)
    assert cut.source_side == frozenset({0, 1})


def test_flow_network_rejects_bad_arcs():
    net = FlowNetwork(2, 0, 1)
    with pytest.raises(ValueError):
        net.add_arc(0, 0, 1)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, -1)


def _transport_lp(fac, caps, clients, d, penalties=None):
    """Assignment as a transportation LP (integral by total unimodularity)."""
    nf, nc = len(fac), len(clients)
    cost = [d[i, j] for i in fac for j in clients]
    if penalties is not None:
        cost += [penalties[j] for j in clients]
    nv = len(cost)
    a_eq = np.zeros((nc, nv))
    for jj in range(nc):
        for ii in range(nf):
            a_eq[jj, ii * nc + jj] = 1
        if penalties is not None:
            a_eq[jj, nf * nc + jj] = 1
    a_ub = np.zeros((nf, nv))
    for ii in range(nf):
        a_ub[ii, ii * nc:(ii + 1) * nc] = 1
    res = linprog(cost, A_ub=a_ub, b_ub=[caps[i] for i in fac], A_eq=a_eq, b_eq=np.ones(nc),
                  bounds=(0, None), method="highs")
    return res


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), nf=st.integers(1, 5), nc=st.integers(1, 9), pen=st.booleans())
def test_assignment_matches_transport_lp(seed, nf, nc, pen):
    rng = np.random.default_rng(seed)
    d = rng.random((nf, nc)) * 10
    caps = rng.integers(1, 4, size=nf)
    p = rng.random(nc) * 8 if pen else None
    fac, clients = list(range(nf)), list(range(nc))
    ref = _transport_lp(fac, caps, clients, d, p)
    if not ref.success:
        with pytest.raises(Infeasible):
            min_cost_assignment(fac, caps, clients, d, p)
        return
    res = min_cost_assignment(fac, caps, clients, d, p)
    assert res.cost == pytest.approx(ref.fun, abs=1e-9)
    loads = np.bincount(list(res.assignment.values()), minlength=nf)
    assert (loads <= caps).all()
    assert set(res.assignment) | set(res.penalized) == set(clients)
    assert not set(res.assignment) & set(res.penalized)
    recomputed = sum(d[i, j] for j, i in res.assignment.items()) + sum(p[j] for j in res.penalized) if pen \
        else sum(d[i, j] for j, i in res.assignment.items())
    assert recomputed == pytest.approx(res.cost)


def test_assignment_uncapacitated_is_nearest():
    d = np.array([[1.0, 5.0, 2.0], [3.0, 1.0, 2.5]])
    res = min_cost_assignment([0, 1], None, [0, 1, 2], d)
    assert res.assignment == {0: 0, 1: 1, 2: 0}
    assert res.cost == pytest.approx(4.0)


def _all_spanning_trees(n):
    edges = list(itertools.combinations(range(n), 2))
    for combo in itertools.combinations(edges, n - 1):
        if is_connected(range(n), combo)[0]:
            yield combo


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6))
def test_mst_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    w = rng.random((n, n))
    w = w + w.T
    edges, total = mst(range(n), w)
    if n == 1:
        assert edges == set() and total == 0
        return
    best = min(sum(w[a, b] for a, b in t) for t in _all_spanning_trees(n))
    assert total == pytest.approx(best)
    assert len(edges) == n - 1 and is_connected(range(n), edges)[0]
    # Kruskal on the complete graph finds a tree of the same weight
    forest = kruskal_forest(itertools.combinations(range(n), 2), lambda a, b: w[a, b])
    assert sum(w[a, b] for a, b in forest) == pytest.approx(best)


def test_mst_node_labels_preserved():
    w = np.array([[0, 1, 9, 9], [1, 0, 9, 2], [9, 9, 0, 9], [9, 2, 9, 0]], float)
    edges, total = mst([3, 1], w)
    assert edges == {(1, 3)} and total == 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 8))
def test_shortest_paths_match_scipy(seed, n):
    rng = np.random.default_rng(seed)
    w = rng.random((n, n)) * 10
    w = w + w.T
    np.fill_diagonal(w, 0)
    dist, nxt = shortest_paths(w)
    assert np.allclose(dist, floyd_warshall(w, directed=False))
    from facloc.graphalg import expand_path
    for a in range(n):
        for b in range(n):
            path = expand_path(nxt, a, b)
            assert path[0] == a and path[-1] == b
            assert sum(w[p, q] for p, q in zip(path, path[1:])) == pytest.approx(dist[a, b])


def test_is_connected_components():
    ok, comps = is_connected([0, 1, 4], [(0, 1), (2, 3)])
    assert not ok
    assert comps == [[0, 1], [2, 3], [4]]
    ok, _ = is_connected([0, 3], [(0, 1), (1, 2), (2, 3)])
    assert ok
    assert is_connected([], [])[0]


def test_prune_tree_strips_steiner_leaves():
    tree = {(0, 1), (1, 2), (2, 3), (1, 4)}
    assert prune_tree(tree, {0, 2}) == {(0, 1), (1, 2)}
    assert prune_tree(tree, {0, 1, 2, 3, 4}) == tree
