"""Count-based n-gram language model used as the fluency scorer.

Smoothing is stupid backoff normalised per context: the raw score of ``w``
after history ``h`` is the maximum-likelihood estimate at the longest
suffix of ``h`` that has seen ``w``, multiplied by ``backoff`` once per level
skipped, bottoming out at an add-one unigram.  Dividing by the context's
total raw score makes every conditional a proper distribution, and the
totals can be computed exactly from the observed successors alone.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .text import BOS_ID, EOS_ID, Sentence, Vocabulary

MAX_ORDER = 5
DEFAULT_BACKOFF = 0.4


@dataclass(frozen=True, eq=False)
class NGramModel:
    order: int
    vocab: Vocabulary
    backoff: float
    unigram_counts: np.ndarray
    p1: np.ndarray
    ng_keys: np.ndarray
    ng_counts: np.ndarray
    ng_off: np.ndarray
    cx_keys: np.ndarray
    cx_tot: np.ndarray
    cx_norm: np.ndarray
    cx_off: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def base(self) -> int:
        return len(self.vocab)

    # -- low level -------------------------------------------------------

    def _tables(self):
        return (self.p1, self.ng_keys, self.ng_counts, self.ng_off, self.cx_keys,
                self.cx_tot, self.cx_norm, self.cx_off, self.base, self.backoff)

    def token_probs(self, hist: np.ndarray, words: np.ndarray) -> np.ndarray:
        """P(words[i] | hist[i]) for a batch of (order - 1)-wide histories."""
        hist = np.ascontiguousarray(hist, dtype=np.int64).reshape(len(words), self.order - 1)
        words = np.ascontiguousarray(words, dtype=np.int64)
        return kernels.token_probs(hist, words, *self._tables())

    def _history(self, context_ids: Sequence[int]) -> list[int]:
        width = self.order - 1
        if width == 0:
            return []
        padded = [BOS_ID] * width + list(context_ids)
        return padded[-width:]

    def _positions(self, ids: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        width = self.order - 1
        seq = np.array([BOS_ID] * width + list(ids) + [EOS_ID], dtype=np.int64)
        n = len(ids) + 1
        if width == 0:
            return np.empty((n, 0), dtype=np.int64), seq
        hist = np.lib.stride_tricks.sliding_window_view(seq[:-1], width)
        return hist, seq[width:]

    # -- scoring -----------------------------------------------------------

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        hist = np.array([self._history(self.vocab.ids(context))])
        return float(self.token_probs(hist, np.array([self.vocab.id(word)]))[0])

    def next_distribution(self, context: Sequence[str] = ()) -> np.ndarray:
        """P(. | context) over the whole vocabulary (BOS gets zero)."""
        hist = self._history(self.vocab.ids(context))
        V = self.base
        return self.token_probs(np.tile(np.array(hist, dtype=np.int64), (V, 1)), np.arange(V))

    def log_prob(self, sentence: Sequence[str]) -> float:
        hist, words = self._positions(self.vocab.ids(sentence))
        return float(np.log(self.token_probs(hist, words)).sum())

    def log_prob_many(self, sentences: Sequence[Sequence[str]]) -> np.ndarray:
        """Sentence log-probabilities for a batch, scored in one kernel call."""
        if not sentences:
            return np.empty(0)
        parts = [self._positions(self.vocab.ids(s)) for s in sentences]
        hist = np.concatenate([p[0] for p in parts])
        words = np.concatenate([p[1] for p in parts])
        logp = np.log(self.token_probs(hist, words))
        bounds = np.cumsum([0] + [len(p[1]) for p in parts])
        return np.add.reduceat(logp, bounds[:-1])

    def fluency(self, sentence: Sequence[str]) -> float:
        return math.exp(self.log_prob(sentence) / (len(sentence) + 1))

    def candidate_words(self, left: Sequence[str], right: Sequence[str], k: int) -> list[int]:
        """Top-``k`` ids ranked by P(w | left) * P(next right token | ..., w).

        The next right token is EOS when ``right`` is empty.  Ties go to the
        smaller id; BOS is never returned.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        hist = tuple(self._history(self.vocab.ids(left)))
        nxt = self.vocab.id(right[0]) if right else EOS_ID
        key = ("cand", hist, nxt, k)
        hit = self._cache.get(key)
        if hit is not None:
            return list(hit)
        V = self.base
        ids = np.arange(V, dtype=np.int64)
        h = np.tile(np.array(hist, dtype=np.int64), (V, 1))
        score = self.token_probs(h, ids)
        if self.order > 1:
            h_right = np.concatenate([h[:, 1:], ids[:, None]], axis=1)
            score = score * self.token_probs(h_right, np.full(V, nxt, dtype=np.int64))
        ranked = np.lexsort((ids, -score))
        ranked = ranked[ranked != BOS_ID][:k]
        out = tuple(int(i) for i in ranked)
        self._cache[key] = out
        return list(out)

    def ngram_count(self, tokens: Sequence[str]) -> int:
        """Raw training count of an n-gram given as surface tokens."""
        ids = self.vocab.ids(tokens)
        if len(ids) == 1:
            return int(self.unigram_counts[ids[0]])
        j = len(ids) - 1
        if j >= self.order:
            return 0
        key = 0
        for t in ids:
            key = key * self.base + t
        lo, hi = self.ng_off[j], self.ng_off[j + 1]
        seg = self.ng_keys[lo:hi]
        i = int(np.searchsorted(seg, key))
        if i < len(seg) and seg[i] == key:
            return int(self.ng_counts[lo + i])
        return 0

    def stats(self) -> dict:
        out = {
            "order": self.order,
            "vocab_size": len(self.vocab),
            "tokens": int(self.unigram_counts.sum()),
            "ngrams_1": int(np.count_nonzero(self.unigram_counts)),
        }
        for j in range(1, self.order):
            out[f"ngrams_{j + 1}"] = int(self.ng_off[j + 1] - self.ng_off[j])
        return out

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                order=self.order, backoff=self.backoff, vocab=np.array(self.vocab.tokens),
                unigram_counts=self.unigram_counts, p1=self.p1,
                ng_keys=self.ng_keys, ng_counts=self.ng_counts, ng_off=self.ng_off,
                cx_keys=self.cx_keys, cx_tot=self.cx_tot, cx_norm=self.cx_norm, cx_off=self.cx_off,
            )

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        with np.load(path, allow_pickle=False) as z:
            return cls(
                order=int(z["order"]), vocab=Vocabulary(tuple(str(t) for t in z["vocab"])),
                backoff=float(z["backoff"]), unigram_counts=z["unigram_counts"], p1=z["p1"],
                ng_keys=z["ng_keys"], ng_counts=z["ng_counts"], ng_off=z["ng_off"],
                cx_keys=z["cx_keys"], cx_tot=z["cx_tot"], cx_norm=z["cx_norm"], cx_off=z["cx_off"],
            )


def train_lm(corpus: Sequence[Sentence], order: int = 3, min_count: int = 1,
             backoff: float = DEFAULT_BACKOFF) -> NGramModel:
    """Count all k-grams (k <= order) over BOS-padded, EOS-terminated sentences."""
    if not corpus:
        raise ValueError("empty corpus")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"unsupported order: {order}")
    if not 0.0 < backoff < 1.0:
        raise ValueError("backoff must be in (0, 1)")

    freq = Counter(t for s in corpus for t in s)
    vocab = Vocabulary.build(t for t, c in freq.items() if c >= min_count)
    V = len(vocab)
    if V ** order >= 2 ** 62:
        raise ValueError(f"vocabulary of {V} too large for order {order}")

    width = order - 1
    unigram = np.zeros(V, dtype=np.int64)
    ngrams: list[Counter] = [Counter() for _ in range(order)]
    totals: list[Counter] = [Counter() for _ in range(order)]
    for sent in corpus:
        seq = [BOS_ID] * width + vocab.ids(sent) + [EOS_ID]
        for p in range(width, len(seq)):
            w = seq[p]
            unigram[w] += 1
            for j in range(1, width + 1):
                h = tuple(seq[p - j:p])
                ngrams[j][h + (w,)] += 1
                totals[j][h] += 1

    predictable = np.ones(V, dtype=bool)
    predictable[BOS_ID] = False
    p1 = np.where(predictable, unigram + 1.0, 0.0)
    p1 /= p1.sum()

    # unnormalised backoff score of w after a seen context h
    def raw_score(h: tuple, w: int) -> float:
        scale = 1.0
        while h:
            c = ngrams[len(h)].get(h + (w,))
            if c:
                return scale * c / totals[len(h)][h]
            scale *= backoff
            h = h[1:]
        return scale * p1[w]

    norms: list[dict] = [dict() for _ in range(order)]
    successors: list[dict] = [dict() for _ in range(order)]
    for j in range(1, order):
        for gram in ngrams[j]:
            successors[j].setdefault(gram[:-1], []).append(gram[-1])
    for j in range(1, order):
        for h in totals[j]:
            shorter = h[1:]
            t_short = norms[j - 1][shorter] if j > 1 else 1.0
            seen_mass = sum(raw_score(shorter, w) for w in successors[j][h])
            norms[j][h] = 1.0 + backoff * (t_short - seen_mass)

    def flatten(tables, value_fns):
        keys, off, cols = [], [0, 0], [[] for _ in value_fns]
        for j in range(1, order):
            items = sorted((_encode(g, V), g) for g in tables[j])
            keys.extend(k for k, _ in items)
            for col, fn in zip(cols, value_fns):
                col.extend(fn(j, g) for _, g in items)
            off.append(len(keys))
        return (np.array(keys, dtype=np.int64), np.array(off, dtype=np.int64),
                [np.array(c, dtype=np.float64) for c in cols])

    ng_keys, ng_off, (ng_counts,) = flatten(ngrams, [lambda j, g: ngrams[j][g]])
    cx_keys, cx_off, (cx_tot, cx_norm) = flatten(
        totals, [lambda j, h: totals[j][h], lambda j, h: norms[j][h]])

    return NGramModel(
        order=order, vocab=vocab, backoff=backoff, unigram_counts=unigram, p1=p1,
        ng_keys=ng_keys, ng_counts=ng_counts, ng_off=ng_off,
        cx_keys=cx_keys, cx_tot=cx_tot, cx_norm=cx_norm, cx_off=cx_off,
    )


def _encode(ids: tuple, base: int) -> int:
    key = 0
    for t in ids:
        key = key * base + t
    return key


def sentence_log_prob(model: NGramModel, sentence: Sequence[str]) -> float:
    return model.log_prob(sentence)


def fluency_score(model: NGramModel, sentence: Sequence[str]) -> float:
    """Per-token geometric-mean probability, EOS included."""
    return model.fluency(sentence)


def candidate_words(model: NGramModel, left: Sequence[str], right: Sequence[str], k: int) -> list[int]:
    return model.candidate_words(left, right, k)
