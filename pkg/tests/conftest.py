import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dsplan.geomsim import build_dataset, generate_synthetic


def make_tower(layers, screws, manual=0.0, priority=0, seed=0):
    assembly, catalog = generate_synthetic(
        n_layers=layers, screws_per_layer=screws, manual_fraction=manual,
        priority_count=priority, seed=seed)
    return build_dataset(assembly, catalog)


@pytest.fixture(scope="session")
def tower5():
    """Two layers, one screw each: the smallest interesting screw tower."""
    return make_tower(2, 1, seed=7)


@pytest.fixture(scope="session")
def tower7():
    """Seven parts with a manual+value block: every objective is live."""
    return make_tower(2, 2, manual=0.5, priority=1, seed=5)


@pytest.fixture(scope="session")
def tower10():
    """The benchmark screw tower: three layers, two screws per layer."""
    return make_tower(3, 2, seed=3)


@pytest.fixture(scope="session")
def tower10_labeled():
    """Benchmark tower with two manual blocks and one value label."""
    return make_tower(3, 2, manual=0.67, priority=1, seed=3)


@pytest.fixture(scope="session")
def plain_tower4():
    """Screwless four-part stack (base plus three resting blocks)."""
    return make_tower(3, 0, seed=1)
