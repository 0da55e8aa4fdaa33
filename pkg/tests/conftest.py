import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import make_dataset  # noqa: E402


@pytest.fixture
def mixed_data():
    rng = np.random.default_rng(7)
    n = 60
    x1 = rng.normal(0, 1, n)
    x2 = rng.uniform(0, 10, n)
    colour = rng.choice(["red", "green", "blue"], n)
    group = rng.choice(["A", "B"], n)
    labels = np.where(x1 + 0.3 * rng.normal(size=n) > 0, "yes", "no")
    d = make_dataset({"x1": x1, "x2": x2, "colour": list(colour), "group": list(group)})
    return d, labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
