import sys
from pathlib import Path
from random import Random

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rankone.params import ParamSpec, SpacerMap, builtin_spec


@pytest.fixture
def chacon2():
    return builtin_spec("chacon2")


@pytest.fixture
def chacon3():
    return builtin_spec("chacon3")


@pytest.fixture
def odometer():
    return builtin_spec("odometer:2")


def random_bounded_spec(rng: Random, max_r=5, max_sigma=3, max_cycle=3, max_prefix=2):
    """One seeded bounded cyclic spec (r <= 5, sigma <= 3, cycle <= 3)."""

    def stage():
        r = rng.randint(2, max_r)
        return SpacerMap.of(r, tuple(rng.randint(0, max_sigma) for _ in range(r)))

    prefix = tuple(stage() for _ in range(rng.randint(0, max_prefix)))
    cycle = tuple(stage() for _ in range(rng.randint(1, max_cycle)))
    return ParamSpec(prefix, cycle)


def spec_corpus(count=200, seed=0):
    rng = Random(seed)
    return [random_bounded_spec(rng) for _ in range(count)]
