import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rosterlearn import DimensionSchema, ScheduleTensor, load_schedule  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def roster() -> ScheduleTensor:
    return load_schedule(DATA / "roster.json")


@pytest.fixture
def roster_path() -> Path:
    return DATA / "roster.json"


def random_tensor(rng: np.random.Generator, schema: DimensionSchema, density=None):
    p = rng.random() if density is None else density
    return ScheduleTensor(schema, (rng.random(schema.shape) < p).astype(np.uint8))
