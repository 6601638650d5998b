"""Tokenization, detokenization and vocabularies.

A sentence is a plain tuple of lowercase token strings; every other module
operates on that representation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Sentence = tuple[str, ...]

PUNCT_CHARS = ".,!?;:\"'()-"
_PUNCT_CLASS = re.escape(PUNCT_CHARS)
_TOKEN_RE = re.compile(rf"[{_PUNCT_CLASS}]+|[^\s{_PUNCT_CLASS}]+")
_PUNCT_ONLY_RE = re.compile(rf"[{_PUNCT_CLASS}]+")

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)
BOS_ID, EOS_ID, UNK_ID = 0, 1, 2


def tokenize(text: str) -> Sentence:
    """Lowercase ``text`` and split it into word and punctuation-run tokens."""
    return tuple(_TOKEN_RE.findall(text.lower()))


def is_punct(token: str) -> bool:
    return _PUNCT_ONLY_RE.fullmatch(token) is not None


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with single spaces, gluing punctuation to the previous token.

    Two consecutive punctuation tokens keep their separating space, otherwise
    re-tokenizing the string would merge them into one run.
    """
    parts: list[str] = []
    prev_punct = False
    for i, tok in enumerate(tokens):
        punct = is_punct(tok)
        if i > 0 and not (punct and not prev_punct):
            parts.append(" ")
        parts.append(tok)
        prev_punct = punct
    return "".join(parts)


def words(sentence: Sequence[str]) -> list[str]:
    """Tokens of ``sentence`` that are not punctuation-only."""
    return [t for t in sentence if not is_punct(t)]


def read_corpus(path: str | Path) -> list[Sentence]:
    """Read a one-sentence-per-line UTF-8 file; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        return [tokenize(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class Vocabulary:
    """Dense token <-> id mapping with BOS, EOS and UNK at ids 0, 1, 2."""

    tokens: tuple[str, ...]
    token_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tokens[:3] != RESERVED:
            raise ValueError("vocabulary must start with the reserved symbols")
        mapping = {t: i for i, t in enumerate(self.tokens)}
        if len(mapping) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "token_to_id", mapping)

    @classmethod
    def build(cls, tokens: Iterable[str]) -> "Vocabulary":
        extra = sorted(set(tokens) - set(RESERVED))
        return cls(RESERVED + tuple(extra))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def ids(self, tokens: Iterable[str]) -> list[int]:
        get = self.token_to_id.get
        return [get(t, UNK_ID) for t in tokens]

    def token(self, idx: int) -> str:
        return self.tokens[idx]
