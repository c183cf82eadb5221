import json

import numpy as np
import pytest

from blendkit.embedding import FileEncoder, HashedNgramEncoder, embed
from blendkit.errors import DatasetError, DimensionError


def test_hashed_ngram_deterministic():
    enc = HashedNgramEncoder(d=64, seed=3)
    a = embed("hello world", enc)
    b = embed("hello world", enc)
    assert np.array_equal(a.vector, b.vector)


def test_hashed_ngram_empty_text_zero_vector():
    enc = HashedNgramEncoder(d=32)
    assert np.allclose(embed("", enc).vector, 0.0)
    assert np.allclose(embed("ab", enc).vector, 0.0)  # shorter than a 3-gram


def test_hashed_ngram_unit_norm():
    enc = HashedNgramEncoder(d=128, seed=1)
    v = embed("the quick brown fox", enc).vector
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_hashed_ngram_seed_changes_features():
    a = HashedNgramEncoder(d=64, seed=0).encode("q", "some text here")
    b = HashedNgramEncoder(d=64, seed=1).encode("q", "some text here")
    assert not np.array_equal(a.vector, b.vector)


def test_file_encoder_roundtrip(tmp_path):
    path = tmp_path / "emb.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"query_id": "a", "vector": [1.0, 2.0]}) + "\n")
        fh.write(json.dumps({"query_id": "b", "vector": [3.0, 4.0]}) + "\n")
    enc = FileEncoder(str(path))
    assert enc.d == 2
    assert np.array_equal(enc.encode("b", "ignored").vector, [3.0, 4.0])


def test_file_encoder_missing_query(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text(json.dumps({"query_id": "a", "vector": [1.0]}) + "\n")
    enc = FileEncoder(str(path))
    with pytest.raises(DatasetError):
        enc.encode("missing", "")


def test_file_encoder_dim_mismatch(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text(
        json.dumps({"query_id": "a", "vector": [1.0, 2.0]}) + "\n"
        + json.dumps({"query_id": "b", "vector": [1.0]}) + "\n"
    )
    with pytest.raises(DimensionError):
        FileEncoder(str(path))


def test_file_encoder_bad_record(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text("{not json\n")
    with pytest.raises(DatasetError, match=":1"):
        FileEncoder(str(path))
