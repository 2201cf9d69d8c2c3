from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from facloc.errors import (DimensionMismatch, InvalidConfig, MetricViolation, MissingCapacity, MissingPenalty,
                           ParseError)
from facloc.instance import (Base, ClientSpec, FacilitySpec, GeneratorConfig, ProblemKind, check_metric,
                             drop_capacities, drop_connectivity, drop_penalties, generate_euclidean,
                             instance_from_dict, load_instance, make_instance, save_instance)


def test_line4_distances(line4):
    assert line4.dist[0].tolist() == [0.0, 10.0, 1.0, 2.0, 9.0, 11.0]
    assert line4.d.shape == (2, 4)
    assert line4.edge_cost[0, 1] == 10.0
    assert line4.uniform_capacities and line4.has_penalties and line4.k == 2


@pytest.mark.parametrize("text,flags", [
    ("fl", (Base.FL, False, False, False)),
    ("cfl", (Base.FL, True, False, False)),
    ("concpfl", (Base.FL, True, True, True)),
    ("conpfl", (Base.FL, False, True, True)),
    ("ckc", (Base.KC, True, False, False)),
    ("conckm", (Base.KM, True, True, False)),
    ("cpkfl", (Base.KFL, True, False, True)),
])
def test_kind_parse_roundtrip(text, flags):
    kind = ProblemKind.parse(text)
    assert (kind.base, kind.capacitated, kind.connected, kind.prize_collecting) == flags
    assert kind.name == text


def test_kind_parse_rejects_garbage():
    with pytest.raises(ValueError):
        ProblemKind.parse("conxyz")


def test_kind_check_requirements(line4):
    with pytest.raises(MissingPenalty):
        ProblemKind.parse("cpfl").check(drop_penalties(line4))
    with pytest.raises(MissingCapacity):
        ProblemKind.parse("cfl").check(drop_capacities(line4))
    from dataclasses import replace
    with pytest.raises(InvalidConfig):
        ProblemKind.parse("ckc").check(replace(line4, k=None))


def test_metric_violation_reports_triple():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    with pytest.raises(MetricViolation) as info:
        check_metric(d)
    assert info.value.excess == pytest.approx(3.0)
    assert set(info.value.triple) == {0, 1, 2}


def test_asymmetric_rejected():
    d = np.array([[0, 1], [2, 0]], float)
    with pytest.raises(MetricViolation):
        check_metric(d)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        make_instance("x", [FacilitySpec("a", 1.0)], [ClientSpec("b")], dist=np.zeros((3, 3)))


def test_spec_validation():
    with pytest.raises(Exception):
        FacilitySpec("a", -1.0)
    with pytest.raises(Exception):
        ClientSpec("b", penalty=-2.0)


def test_save_load_roundtrip(tmp_path, line4):
    save_instance(line4, tmp_path / "i.json")
    again = load_instance(tmp_path / "i.json")
    assert again == line4


def test_parse_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_instance(p)
    with pytest.raises(ParseError):
        instance_from_dict({"facilities": [{"id": "a", "open_cost": 1}], "clients": []})
    with pytest.raises(ParseError):
        instance_from_dict({"facilities": [{"id": "a"}], "clients": [], "points": [[0, 0]]})


def test_generator_deterministic():
    a = generate_euclidean(4, 7, 11, GeneratorConfig())
    b = generate_euclidean(4, 7, 11, GeneratorConfig())
    c = generate_euclidean(4, 7, 12, GeneratorConfig())
    assert a == b
    assert a != c


@settings(max_examples=40, deadline=None)
@given(nf=st.integers(1, 6), nc=st.integers(1, 12), seed=st.integers(0, 10_000), uniform=st.booleans())
def test_generator_feasible_and_metric(nf, nc, seed, uniform):
    if nc > 4 * nf:
        with pytest.raises(InvalidConfig):
            generate_euclidean(nf, nc, seed, GeneratorConfig(uniform_capacity=uniform))
        return
    inst = generate_euclidean(nf, nc, seed, GeneratorConfig(uniform_capacity=uniform))
    check_metric(inst.dist)
    assert inst.capacities.sum() >= nc
    if uniform:
        assert inst.uniform_capacities
    lo, hi = GeneratorConfig().penalty
    assert all(lo <= p <= hi for p in inst.penalties)


def test_generator_config_validation():
    with pytest.raises(InvalidConfig):
        GeneratorConfig(open_cost=(2.0, 1.0)).validate(2, 2)
    with pytest.raises(InvalidConfig):
        generate_euclidean(0, 3, 0)


def test_views_drop_fields(line4):
    assert not drop_capacities(line4).has_capacities
    assert not drop_penalties(line4).has_penalties
    dc = drop_connectivity(line4)
    assert dc.connection_scale == 0.0 and dc.connectivity_dropped
    # views leave the source untouched
    assert line4.has_capacities and line4.connection_scale == 1.0


def test_to_dict_is_json(line4):
    json.dumps(line4.to_dict())
