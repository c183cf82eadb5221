"""Query embeddings feeding the quality predictor.

Two encoders: a deterministic hashed character 3-gram featurizer (no
model downloads, good enough for desk-scale experiments) and a file
encoder returning precomputed vectors verbatim. The embedding file is
JSONL, one record per line: {"query_id": ..., "vector": [...]}.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError, DimensionError


@dataclass(frozen=True)
class Embedding:
    query_id: str
    vector: np.ndarray

    @property
    def d(self) -> int:
        return int(self.vector.shape[0])


class HashedNgramEncoder:
    """Character 3-grams hashed into d buckets, counts L2-normalized."""

    def __init__(self, d: int = 256, seed: int = 0):
        if d < 1:
            raise DimensionError("embedding dimension must be >= 1")
        self.d = d
        self.seed = seed

    def _bucket(self, gram: str) -> int:
        h = hashlib.blake2b(
            f"{self.seed}:{gram}".encode("utf-8"), digest_size=8
        ).digest()
        return int.from_bytes(h, "big") % self.d

    def encode(self, query_id: str, text: str) -> Embedding:
        vec = np.zeros(self.d)
        for i in range(len(text) - 2):
            vec[self._bucket(text[i : i + 3])] += 1.0
        # short/empty text may produce the zero vector; leave it unnormalized
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return Embedding(query_id=query_id, vector=vec)


class FileEncoder:
    """Returns precomputed per-query vectors from a JSONL embedding file."""

    def __init__(self, path: str):
        self.path = path
        self._table: dict[str, np.ndarray] = {}
        self.d: int | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    qid = rec["query_id"]
                    vec = np.asarray(rec["vector"], dtype=float)
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DatasetError(
                        f"{path}:{lineno}: bad embedding record: {exc}"
                    ) from exc
                if not np.all(np.isfinite(vec)):
                    raise DatasetError(f"{path}:{lineno}: non-finite embedding")
                if self.d is None:
                    self.d = int(vec.shape[0])
                elif vec.shape[0] != self.d:
                    raise DimensionError(
                        f"{path}:{lineno}: dimension {vec.shape[0]} != {self.d}"
                    )
                self._table[qid] = vec

    def encode(self, query_id: str, text: str) -> Embedding:
        try:
            return Embedding(query_id=query_id, vector=self._table[query_id])
        except KeyError:
            raise DatasetError(
                f"query_id {query_id!r} not in embedding file {self.path}"
            ) from None


def embed(text: str, encoder, query_id: str = "") -> Embedding:
    """Encode one query with the given encoder."""
    return encoder.encode(query_id, text)
