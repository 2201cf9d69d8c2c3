from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from facloc.combine import BoundCertificate
from facloc.errors import UnknownId
from facloc.instance import ClientSpec, FacilitySpec, ProblemKind, generate_euclidean, make_instance, with_k
from facloc.pipelines import solve
from facloc.solution import Solution
from facloc.verify import CODES, ValidationPolicy, certify_bound, evaluate, objective, validate

from conftest import shipped_corpus
from mutations import mutate

K = ProblemKind.parse
CLEAN_KINDS = ["cfl", "cpfl", "confl", "conpfl", "concfl", "concpfl", "conckc", "ckm", "conckfl"]


def test_evaluate_empty():
    inst = make_instance("e", [FacilitySpec("f", 1.0)], [], points=np.zeros((1, 2)))
    cb = evaluate(inst, Solution())
    assert cb.total == cb.facility == cb.service == cb.connection == cb.penalty == 0


def test_evaluate_single():
    inst = make_instance("s", [FacilitySpec("f", 1.0)], [ClientSpec("c")], points=np.array([[0, 0], [2, 0.0]]))
    assert evaluate(inst, Solution({0}, {0: 0})).total == pytest.approx(3.0)


def test_evaluate_components(line4):
    sol = Solution({0, 1}, {0: 0, 1: 0, 2: 1}, {3}, {(0, 1)})
    cb = evaluate(line4, sol)
    assert (cb.facility, cb.service, cb.connection, cb.penalty) == (2.0, 4.0, 10.0, 3.0)
    assert cb.total == 19.0 and cb.radius == 2.0 and cb.max_edge == 10.0
    assert evaluate(line4, sol, K("km")).facility == 0.0
    scaled = replace(line4, connection_scale=0.5)
    assert evaluate(scaled, sol).connection == 5.0


def test_objective_variants(line4):
    sol = Solution({0, 1}, {0: 0, 1: 0, 2: 1, 3: 1}, steiner_edges={(0, 1)})
    assert objective(line4, sol, K("ckc")) == 2.0
    assert objective(line4, sol, K("conckc")) == 10.0
    assert objective(line4, sol, K("concfl")) == 17.0


def test_unknown_ids(line4):
    with pytest.raises(UnknownId):
        evaluate(line4, Solution({5}, {}))
    with pytest.raises(UnknownId):
        validate(line4, Solution({0}, {9: 0}), K("fl"))


def test_certify_bound_boundary():
    def cert(s):
        return BoundCertificate(1.0, 1.0, 1.0, s)
    assert certify_bound(cert(0.0))
    assert not certify_bound(cert(-1e-6))
    assert certify_bound(cert(-1e-10))


def test_policy_rejects_gamma_below_one():
    with pytest.raises(ValueError):
        ValidationPolicy(capacity_violation_gamma=0.5)


def test_gamma_allows_bounded_violation(line4):
    sol = Solution({0}, {0: 0, 1: 0, 2: 0})
    assert validate(line4, sol, K("pfl")).codes == {"UNSERVED_CLIENT"}
    sol = Solution({0}, {0: 0, 1: 0, 2: 0}, {3})
    assert validate(line4, sol, K("cpfl")).codes == {"CAPACITY_EXCEEDED"}
    assert validate(line4, sol, K("cpfl"), ValidationPolicy(capacity_violation_gamma=1.5)).ok


def test_steiner_nodes_are_pass_through(line4):
    three = make_instance("3", [FacilitySpec(f"f{i}", 1.0) for i in range(3)], [ClientSpec("a"), ClientSpec("b")],
                          points=np.array([[0, 0], [1, 0], [2, 0], [0, 1], [2, 1]], float))
    sol = Solution({0, 2}, {0: 0, 1: 2}, steiner_edges={(0, 1), (1, 2)})
    assert validate(three, sol, K("confl")).ok


def _clean_solutions():
    for inst in shipped_corpus():
        inst = inst if inst.k is not None else with_k(inst, inst.n_facilities)
        for name in CLEAN_KINDS:
            try:
                res = solve(inst, K(name))
            except Exception as exc:  # infeasible kinds for this instance are skipped
                if type(exc).__name__ in ("Infeasible", "InfeasibleInput"):
                    continue
                raise
            yield inst, K(name), res.solution


CLEAN = list(_clean_solutions())


@pytest.mark.parametrize("case", CLEAN, ids=lambda c: f"{c[0].name}-{c[1].name}")
def test_clean_output_passes(case):
    inst, kind, sol = case
    assert validate(inst, sol, kind).ok


@pytest.mark.parametrize("code", CODES)
def test_mutation_triggers_code(code):
    fired = 0
    for inst, kind, sol in CLEAN:
        m = mutate(inst, sol, code, kind)
        if m is None:
            continue
        minst, msol = m
        assert code in validate(minst, msol, kind).codes, (inst.name, kind.name)
        fired += 1
    assert fired > 0, f"no applicable mutation for {code}"


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), lam=st.floats(0.01, 100))
def test_evaluate_homogeneous(seed, lam):
    inst = generate_euclidean(4, 6, seed)
    rng = np.random.default_rng(seed)
    opened = {0, 1 + int(rng.integers(3))}
    sol = Solution(opened, {j: min(opened) for j in range(4)}, {4, 5}, {tuple(sorted(opened))})
    scaled = make_instance(inst.name,
                           [replace(f, open_cost=lam * f.open_cost) for f in inst.facilities],
                           [replace(c, penalty=lam * c.penalty) for c in inst.clients],
                           dist=lam * inst.dist, edge_cost=lam * inst.edge_cost,
                           connection_scale=inst.connection_scale)
    a, b = evaluate(inst, sol).as_dict(), evaluate(scaled, sol).as_dict()
    for key in a:
        assert b[key] == pytest.approx(lam * a[key], rel=1e-9, abs=1e-12)
