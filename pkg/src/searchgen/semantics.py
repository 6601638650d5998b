"""Static word embeddings and the semantic similarity scorer."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Sequence

import numpy as np

EPS = 1e-6


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Token -> row of ``matrix``.  Rows all have length ``dim``."""

    index: dict[str, int]
    matrix: np.ndarray

    def __post_init__(self):
        if not self.index:
            raise ValueError("embedding table is empty")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.index):
            raise ValueError("matrix shape does not match index")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_dict(cls, vectors: dict[str, Sequence[float]]) -> "EmbeddingTable":
        tokens = list(vectors)
        return cls({t: i for i, t in enumerate(tokens)},
                   np.array([vectors[t] for t in tokens], dtype=np.float64))

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def vector(self, token: str) -> np.ndarray | None:
        i = self.index.get(token)
        return None if i is None else self.matrix[i]


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse ``token f1 ... fd`` lines; a leading ``count dim`` header is skipped."""
    index: dict[str, int] = {}
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and len(fields) == 2 and all(f.isdigit() for f in fields):
                continue
            token, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise ValueError(f"{path}:{lineno}: no vector values")
            elif len(values) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(values)}")
            try:
                vec = [float(v) for v in values]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if token in index:
                rows[index[token]] = vec
            else:
                index[token] = len(rows)
                rows.append(vec)
    if not rows:
        raise ValueError(f"{path}: empty embedding file")
    return EmbeddingTable(index, np.array(rows, dtype=np.float64))


def sentence_embedding(table: EmbeddingTable, sentence: Sequence[str]) -> np.ndarray:
    rows = [table.index[t] for t in sentence if t in table.index]
    if not rows:
        return np.zeros(table.dim)
    return table.matrix[rows].mean(axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def keyword_coverage(table: EmbeddingTable, sentence: Sequence[str], keywords: Collection[str]) -> float:
    """Min over keywords of the best cosine against any word of ``sentence``.

    A keyword present verbatim counts as cosine 1 even without a vector.
    """
    worst = 1.0
    for k in keywords:
        if k in sentence:
            continue
        kv = table.vector(k)
        best = 0.0
        if kv is not None:
            for w in set(sentence):
                wv = table.vector(w)
                if wv is not None:
                    best = max(best, cosine(kv, wv))
        worst = min(worst, best)
    return worst


def semantic_score(table: EmbeddingTable, y: Sequence[str], x: Sequence[str],
                   keywords: Collection[str] = (), beta: float = 1.0, gamma: float = 1.0) -> float:
    """sent_part**beta * kw_part**gamma, each part clamped into [EPS, 1]."""
    sent = cosine(sentence_embedding(table, y), sentence_embedding(table, x))
    sent_part = min(max(sent, EPS), 1.0)
    kw_part = 1.0
    if keywords:
        kw_part = min(max(keyword_coverage(table, y, keywords), EPS), 1.0)
    return sent_part ** beta * kw_part ** gamma
