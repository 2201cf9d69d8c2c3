from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest

from facloc.instance import GeneratorConfig, generate_euclidean, load_instance, with_k

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def line4():
    return load_instance(CORPUS / "line4.json")


@pytest.fixture(scope="session")
def line4_optima():
    return json.loads((GOLDEN / "line4_optima.json").read_text())["optima"]


def small_instances(count, nf=(3, 5), nc=(4, 8), seed=0, **gen):
    """Seeded desk-scale instances, alternating uniform and non-uniform capacities."""
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        f = int(rng.integers(nf[0], nf[1] + 1))
        c = int(rng.integers(nc[0], nc[1] + 1))
        cfg = GeneratorConfig(uniform_capacity=i % 2 == 0, **gen)
        out.append(generate_euclidean(f, c, int(rng.integers(2**31)), cfg, name=f"t{seed}-{i}"))
    return out


def shipped_corpus():
    return [load_instance(p) for p in sorted(CORPUS.glob("*.json"))]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
