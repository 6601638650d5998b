"""Local edits: word replace / insert / delete and selection swaps.

Replacement and insertion words are drawn from a Gibbs distribution over a
language-model shortlist: each shortlisted word is placed in the slot and
the word is sampled with probability proportional to exp(log-score) of the
resulting sentence.  Every proposal carries the log-probability of itself
and of its exact reverse move, which is what Metropolis-Hastings needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lm import NGramModel
from .objective import Objective
from .text import RESERVED, Sentence

REPLACE = "replace"
INSERT = "insert"
DELETE = "delete"
SWAP = "swap"
WORD_OPS = (REPLACE, INSERT, DELETE)

# proposal probability used for a reverse move that the scheme cannot make
REVERSE_FLOOR = 1e-12
LOG_REVERSE_FLOOR = math.log(REVERSE_FLOOR)


@dataclass(frozen=True)
class EditProposal:
    kind: str
    position: int | tuple[int, int]
    word: str | None = None
    forward_log_prob: float = 0.0
    backward_log_prob: float = 0.0

    def __post_init__(self):
        if self.kind in (REPLACE, INSERT) and self.word is None:
            raise ValueError(f"{self.kind} needs a word")
        if self.kind == DELETE and self.word is not None:
            raise ValueError("delete carries no word")

    def describe(self) -> str:
        if self.kind in (REPLACE, INSERT):
            return f"{self.kind}:{self.position}:{self.word}"
        if self.kind == SWAP:
            return f"swap:{self.position[0]}:{self.position[1]}"
        return f"{self.kind}:{self.position}"


def apply_edit(y: Sequence[str], e: EditProposal) -> Sentence:
    y = tuple(y)
    n = len(y)
    i = e.position
    if e.kind == REPLACE:
        if not 0 <= i < n:
            raise IndexError(f"replace position {i} out of range for length {n}")
        return y[:i] + (e.word,) + y[i + 1:]
    if e.kind == INSERT:
        if not 0 <= i <= n:
            raise IndexError(f"insert position {i} out of range for length {n}")
        return y[:i] + (e.word,) + y[i:]
    if e.kind == DELETE:
        if not 0 <= i < n:
            raise IndexError(f"delete position {i} out of range for length {n}")
        return y[:i] + y[i + 1:]
    raise ValueError(f"cannot apply {e.kind} to a sentence")


def _fill(y: Sentence, position: int, mode: str, words: Sequence[str]) -> list[Sentence]:
    if mode == REPLACE:
        return [y[:position] + (w,) + y[position + 1:] for w in words]
    if mode == INSERT:
        return [y[:position] + (w,) + y[position:] for w in words]
    raise ValueError(f"mode must be {REPLACE} or {INSERT}")


def softmax(log_scores: np.ndarray) -> np.ndarray:
    z = np.asarray(log_scores, dtype=np.float64)
    z = np.exp(z - z.max())
    return z / z.sum()


def gibbs_word_distribution(objective: Objective, y: Sequence[str], x: Sequence[str], position: int,
                            mode: str, shortlist: Sequence[str]) -> np.ndarray:
    """P(w) proportional to exp(log-score of y with w at ``position``)."""
    if not shortlist:
        raise ValueError("empty shortlist")
    y = tuple(y)
    limit = len(y) if mode == REPLACE else len(y) + 1
    if not 0 <= position < limit:
        raise IndexError(f"position {position} invalid for {mode} on length {len(y)}")
    return softmax(objective.evaluate_many(_fill(y, position, mode, shortlist), x))


class BoundScore:
    """Memoised log-score of candidate sentences against one fixed input.

    ``evaluations`` counts distinct sentences actually sent to the objective.
    """

    def __init__(self, objective, x: Sequence[str]):
        self.objective = objective
        self.x = tuple(x)
        self._memo: dict[Sentence, float] = {}
        self.evaluations = 0

    def __call__(self, y: Sequence[str]) -> float:
        y = tuple(y)
        v = self._memo.get(y)
        if v is None:
            v = float(self.objective.evaluate(y, self.x))
            self._memo[y] = v
            self.evaluations += 1
        return v

    def many(self, ys: Sequence[Sentence]) -> np.ndarray:
        missing = [y for y in dict.fromkeys(ys) if y not in self._memo]
        if missing:
            values = self.objective.evaluate_many(missing, self.x)
            self._memo.update(zip(missing, map(float, values)))
            self.evaluations += len(missing)
        return np.array([self._memo[y] for y in ys])


@dataclass
class WordEditProposer:
    """Draws an op uniformly, a slot uniformly, and a word from the Gibbs shortlist."""

    score: BoundScore
    lm: NGramModel
    shortlist_k: int = 50
    enabled_ops: tuple[str, ...] = WORD_OPS
    min_length: int = 1
    _shortlists: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        unknown = set(self.enabled_ops) - set(WORD_OPS)
        if unknown:
            raise ValueError(f"unknown edit ops: {sorted(unknown)}")
        if not self.enabled_ops:
            raise ValueError("at least one edit op must be enabled")
        # canonical order keeps draws independent of how the ops were listed
        self.enabled_ops = tuple(op for op in WORD_OPS if op in self.enabled_ops)

    def applicable_ops(self, length: int) -> tuple[str, ...]:
        ops = []
        for op in self.enabled_ops:
            if op == INSERT or (op == REPLACE and length >= 1) or (op == DELETE and length > self.min_length):
                ops.append(op)
        return tuple(ops)

    def shortlist(self, left: Sentence, right: Sentence) -> list[str]:
        key = (left[-(self.lm.order - 1):] if self.lm.order > 1 else (), right[:1])
        words = self._shortlists.get(key)
        if words is None:
            ids = self.lm.candidate_words(left, right, self.shortlist_k + len(RESERVED))
            words = [self.lm.vocab.token(i) for i in ids if self.lm.vocab.token(i) not in RESERVED]
            words = words[:self.shortlist_k]
            self._shortlists[key] = words
        return words

    def word_distribution(self, y: Sentence, position: int, mode: str) -> tuple[list[str], np.ndarray]:
        left = y[:position]
        right = y[position + 1:] if mode == REPLACE else y[position:]
        words = self.shortlist(left, right)
        if not words:
            raise ValueError("language model has no candidate words")
        return words, softmax(self.score.many(_fill(y, position, mode, words)))

    def _word_log_prob(self, y: Sentence, position: int, mode: str, word: str) -> float:
        words, probs = self.word_distribution(y, position, mode)
        try:
            return math.log(probs[words.index(word)])
        except ValueError:
            return LOG_REVERSE_FLOOR

    def _op_log_prob(self, op: str, length: int) -> float | None:
        ops = self.applicable_ops(length)
        if op not in ops:
            return None
        slots = length + 1 if op == INSERT else length
        return -math.log(len(ops)) - math.log(slots)

    def __call__(self, y: Sequence[str], rng: np.random.Generator) -> tuple[EditProposal, Sentence]:
        y = tuple(y)
        n = len(y)
        ops = self.applicable_ops(n)
        if not ops:
            raise ValueError("no applicable edit")
        op = ops[int(rng.integers(len(ops)))]
        slots = n + 1 if op == INSERT else n
        pos = int(rng.integers(slots))
        fwd = -math.log(len(ops)) - math.log(slots)

        if op == DELETE:
            cand = y[:pos] + y[pos + 1:]
            back_op = self._op_log_prob(INSERT, n - 1)
            if back_op is None:
                bwd = LOG_REVERSE_FLOOR
            else:
                bwd = back_op + self._word_log_prob(cand, pos, INSERT, y[pos])
            return EditProposal(DELETE, pos, None, fwd, bwd), cand

        words, probs = self.word_distribution(y, pos, op)
        k = int(rng.choice(len(words), p=probs))
        word = words[k]
        fwd += math.log(probs[k])
        if op == REPLACE:
            cand = y[:pos] + (word,) + y[pos + 1:]
            # same slot, same shortlist: the reverse draw uses this distribution
            try:
                back_word = math.log(probs[words.index(y[pos])])
            except ValueError:
                back_word = LOG_REVERSE_FLOOR
            bwd = -math.log(len(ops)) - math.log(n) + back_word
        else:
            cand = y[:pos] + (word,) + y[pos:]
            back_op = self._op_log_prob(DELETE, n + 1)
            bwd = LOG_REVERSE_FLOOR if back_op is None else back_op
        return EditProposal(op, pos, word, fwd, bwd), cand


def propose_edit(objective: Objective, y: Sequence[str], x: Sequence[str], lm: NGramModel,
                 rng: np.random.Generator, shortlist_k: int = 50,
                 enabled_ops: Sequence[str] = WORD_OPS) -> tuple[EditProposal, Sentence]:
    proposer = WordEditProposer(BoundScore(objective, x), lm, shortlist_k, tuple(enabled_ops))
    return proposer(tuple(y), rng)


# -- word selection (summarization) -------------------------------------------


@dataclass(frozen=True)
class SelectionMask:
    source: Sentence
    selected: tuple[bool, ...]
    budget_k: int

    def __post_init__(self):
        if len(self.selected) != len(self.source):
            raise ValueError("mask length differs from source length")
        if sum(self.selected) != self.budget_k:
            raise ValueError("number of selected positions must equal budget_k")

    @classmethod
    def first_k(cls, source: Sequence[str], budget_k: int) -> "SelectionMask":
        source = tuple(source)
        return cls(source, tuple(i < budget_k for i in range(len(source))), budget_k)

    def realized(self) -> Sentence:
        return tuple(t for t, s in zip(self.source, self.selected) if s)


def propose_swap(mask: SelectionMask, rng: np.random.Generator) -> tuple[EditProposal, SelectionMask]:
    """Unselect one selected word and select one unselected word."""
    n, k = len(mask.source), mask.budget_k
    if not 0 < k < n:
        raise ValueError("degenerate mask")
    on = [i for i, s in enumerate(mask.selected) if s]
    off = [i for i, s in enumerate(mask.selected) if not s]
    i = on[int(rng.integers(len(on)))]
    j = off[int(rng.integers(len(off)))]
    flags = list(mask.selected)
    flags[i], flags[j] = False, True
    logp = -math.log(k) - math.log(n - k)
    return EditProposal(SWAP, (i, j), None, logp, logp), SelectionMask(mask.source, tuple(flags), k)


class SwapProposer:
    """Proposer over :class:`SelectionMask` states."""

    def realize(self, mask: SelectionMask) -> Sentence:
        return mask.realized()

    def __call__(self, mask: SelectionMask, rng: np.random.Generator):
        return propose_swap(mask, rng)
