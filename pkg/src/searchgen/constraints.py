"""Task-specific scorers: hard indicators and soft scores."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Hashable, Sequence

import numpy as np

from .evaluation import precision_geomean
from .text import Sentence, Vocabulary, is_punct, tokenize

EPS = 1e-6
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


def keyword_indicator(y: Sequence[str], keywords: Collection[str]) -> int:
    present = set(y)
    return int(all(k in present for k in keywords))


def length_indicator(y: Sequence[str], budget_k: int) -> int:
    """1 iff ``y`` has at most ``budget_k`` non-punctuation tokens."""
    if budget_k < 1:
        raise ValueError("budget_k must be >= 1")
    return int(sum(not is_punct(t) for t in y) <= budget_k)


def diversity_score(y: Sequence[str], x: Sequence[str], max_n: int = 2) -> float:
    """1 minus the BLEU-style overlap of ``y`` against ``x`` (no brevity penalty)."""
    overlap = precision_geomean(y, [x], max_n)
    return max(1.0 - overlap, EPS)


def syllable_count(word: str) -> int:
    groups = len(_VOWEL_GROUP.findall(word.lower()))
    if word.endswith("e") and not word.endswith("le") and groups >= 2:
        groups -= 1
    return max(groups, 1)


def flesch_raw(y: Sequence[str]) -> float:
    alpha = [t for t in y if t.isalpha()]
    if not alpha:
        raise ValueError("unreadable input")
    w = len(alpha)
    s = sum(syllable_count(t) for t in alpha)
    return 206.835 - 1.015 * w - 84.6 * (s / w)


def flesch_score(y: Sequence[str]) -> float:
    """Reading ease of a single sentence mapped to [EPS, 1]."""
    return max(min(max(flesch_raw(y), 0.0), 100.0) / 100.0, EPS)


@dataclass(frozen=True, eq=False)
class StyleClassifier:
    """Multinomial naive Bayes over bag-of-tokens with add-alpha smoothing."""

    labels: tuple[Hashable, ...]
    class_log_priors: np.ndarray
    token_log_likelihoods: np.ndarray  # (n_labels, |vocab|)
    vocab: Vocabulary
    smoothing_alpha: float

    def log_posteriors(self, y: Sequence[str]) -> np.ndarray:
        ids = self.vocab.ids(y)
        joint = self.class_log_priors + self.token_log_likelihoods[:, ids].sum(axis=1)
        joint = joint - joint.max()
        return joint - np.log(np.exp(joint).sum())

    def posteriors(self, y: Sequence[str]) -> dict:
        return dict(zip(self.labels, np.exp(self.log_posteriors(y)).tolist()))

    def score(self, y: Sequence[str], target: Hashable) -> float:
        try:
            i = self.labels.index(target)
        except ValueError:
            raise KeyError(f"unknown style label: {target!r}") from None
        return float(np.exp(self.log_posteriors(y)[i]))


def train_style_classifier(labeled: Sequence[tuple[Sentence, Hashable]], alpha: float = 1.0) -> StyleClassifier:
    if not labeled:
        raise ValueError("empty training set")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    labels = tuple(sorted(set(lab for _, lab in labeled), key=str))
    if len(labels) < 2:
        raise ValueError("need at least two styles")
    vocab = Vocabulary.build(t for s, _ in labeled for t in s)
    counts = np.zeros((len(labels), len(vocab)))
    docs = Counter(lab for _, lab in labeled)
    for sent, lab in labeled:
        row = labels.index(lab)
        np.add.at(counts[row], vocab.ids(sent), 1.0)
    priors = np.log(np.array([docs[lab] for lab in labels], dtype=np.float64) / len(labeled))
    smoothed = counts + alpha
    likelihoods = np.log(smoothed / smoothed.sum(axis=1, keepdims=True))
    return StyleClassifier(labels, priors, likelihoods, vocab, alpha)


def style_score(clf: StyleClassifier, y: Sequence[str], target: Hashable) -> float:
    return clf.score(y, target)


def read_labeled_corpus(path: str | Path) -> list[tuple[Sentence, str]]:
    """Read ``label<TAB>sentence`` lines."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected label<TAB>sentence")
            out.append((tokenize(text), label))
    return out

