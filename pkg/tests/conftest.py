import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from risp import IngestConfig, SpaceConfig, build
from risp.cohort import load_gram_fixture

FIXTURES = Path(__file__).parent / "fixtures"

# A small, fully deterministic corpus shared by space and CLI tests. Two
# topical strands (lab glassware, fruit trade) with enough repetition that
# every interesting term clears the default significance filter.
GLASS_DOCS = [
    "the mantle heats the flask while the stirrer turns slowly",
    "attach the condenser to the flask and start the stirrer",
    "the heating mantle warms the round flask near the condenser",
    "a stirrer keeps the solution moving under the mantle",
    "clamp the condenser above the flask and check the mantle",
    "the flask sits on the mantle beside a magnetic stirrer",
]
FRUIT_DOCS = [
    "the market sells apples and oranges every morning",
    "fresh apples arrive at the market with ripe oranges",
    "oranges and apples fill the crates at the market",
    "the morning market stocks apples next to oranges",
    "crates of oranges reach the market before the apples",
    "apples from the orchard join oranges at the market",
]
TINY_DOCS = GLASS_DOCS + FRUIT_DOCS


@pytest.fixture(scope="session")
def tiny_config():
    return IngestConfig(min_count=3, max_doc_frequency=1.0)


@pytest.fixture(scope="session")
def tiny_space(tiny_config):
    return build(TINY_DOCS, tiny_config, SpaceConfig.create(dim=64))


@pytest.fixture(scope="session")
def mantle_fixture():
    """(labels, gram) for the canned 18-term cohort matrix."""
    return load_gram_fixture(FIXTURES / "mantle_gram.txt")


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


def random_units(rng, n, dim):
    """n random unit vectors, rows of an (n, dim) array."""
    vecs = rng.standard_normal((n, dim))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
