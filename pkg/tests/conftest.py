import pathlib

import numpy as np
import pytest

from blendkit.embedding import Embedding
from blendkit.registry import ModelSpec, Registry

DATA_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "blendkit" / "data"


@pytest.fixture
def toy_spec():
    return ModelSpec(
        name="toy", endpoint="mock", n_params=1, n_layer=1, d_model=1, max_ctx=8
    )


@pytest.fixture
def toy_registry():
    return Registry(models=(
        ModelSpec("m1", "mock", 1.0e6, 4, 128, 512),
        ModelSpec("m2", "mock", 3.0e6, 6, 256, 512),
        ModelSpec("m3", "mock", 1.0e7, 8, 512, 1024),
    ))


@pytest.fixture
def fixture_registry_path():
    return str(DATA_DIR / "fixture_registry.yaml")


@pytest.fixture
def fixture_dataset_path():
    return str(DATA_DIR / "fixture.jsonl")


def make_embedding(vec, qid="q"):
    return Embedding(query_id=qid, vector=np.asarray(vec, dtype=float))
