from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ergopt import oracle, pipeline
from ergopt.potential import LocallyConstantPotential
from ergopt.sft import build_system

ROOT = Path(__file__).resolve().parent.parent
SYSTEMS = ROOT / "systems"

FULL2 = [[1, 1], [1, 1]]
FULL3 = [[1] * 3 for _ in range(3)]
GOLDEN = [[1, 1], [1, 0]]

E2_VALUES = {(0,): 0, (1,): -1}
E3_VALUES = {(0, 0): 0, (0, 1): -1, (1, 0): -2, (1, 1): 0}
E4_VALUES = {(a, b): 0 if (a == 2) == (b == 2) else -1 for a in range(3) for b in range(3)}


def make(D, table, k, values):
    return build_system(D, table), LocallyConstantPotential(k, values)


@pytest.fixture(scope="session")
def e2():
    return pipeline.analyze(*make(2, FULL2, 1, E2_VALUES))


@pytest.fixture(scope="session")
def e3():
    return pipeline.analyze(*make(2, FULL2, 2, E3_VALUES))


@pytest.fixture(scope="session")
def e4():
    return pipeline.analyze(*make(3, FULL3, 2, E4_VALUES))


def planted_corpus(n=100, seed=2024):
    """Deterministic random planted instances; every other one is twisted by a coboundary."""
    rng = np.random.default_rng(seed)
    return [oracle.random_planted_instance(rng, twist=bool(i % 2)) for i in range(n)]


@pytest.fixture(scope="session")
def corpus():
    return [pipeline.analyze(s, p) for s, p in planted_corpus()]


def F(x):
    return Fraction(x)
