"""Learning from search outputs.

A :class:`SubstitutionModel` collects the token-level edits that search made
across many inputs, keeps the ones seen at least ``min_support`` times, and
replays them on new inputs.  Replaying costs no objective evaluations, so
it serves both as a better initial candidate for the next search round and
as a search-free fast path.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .search import BatchJob, SearchConfig, SearchResult, search_batch
from .text import BOS, EOS, Sentence

KEEP, REPLACE, INSERT, DELETE = "keep", "replace", "insert", "delete"


def edit_script(source: Sequence[str], target: Sequence[str]) -> list[tuple[str, int, str | None]]:
    """Minimal unit-cost edit script turning ``source`` into ``target``.

    Entries are ``(REPLACE, i, word)``, ``(DELETE, i, None)`` or
    ``(INSERT, gap, word)`` where ``gap`` is the source index the word goes
    in front of.  On ties a substitution wins over a delete/insert pair.
    """
    src, tgt = list(source), list(target)
    ids = {t: k for k, t in enumerate(dict.fromkeys(src + tgt))}
    a = np.array([ids[t] for t in src], dtype=np.int64)
    b = np.array([ids[t] for t in tgt], dtype=np.int64)
    d = kernels.edit_table(a, b)
    i, j = len(src), len(tgt)
    script = []
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + (src[i - 1] != tgt[j - 1]):
            if src[i - 1] != tgt[j - 1]:
                script.append((REPLACE, i - 1, tgt[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            script.append((DELETE, i - 1, None))
            i -= 1
        else:
            script.append((INSERT, i, tgt[j - 1]))
            j -= 1
    script.reverse()
    return script


def apply_script(source: Sequence[str], script) -> Sentence:
    inserts = defaultdict(list)
    replaced, deleted = {}, set()
    for kind, pos, word in script:
        if kind == INSERT:
            inserts[pos].append(word)
        elif kind == REPLACE:
            replaced[pos] = word
        elif kind == DELETE:
            deleted.add(pos)
        else:
            raise ValueError(f"unknown script op {kind!r}")
    out: list[str] = []
    for i in range(len(source) + 1):
        out.extend(inserts.get(i, ()))
        if i < len(source) and i not in deleted:
            out.append(replaced.get(i, source[i]))
    return tuple(out)


@dataclass(frozen=True)
class AlignedPair:
    input: Sentence
    output: Sentence
    script: tuple = field(default=None)

    def __post_init__(self):
        if self.script is None:
            object.__setattr__(self, "script", tuple(edit_script(self.input, self.output)))


def _ranked(counter: Counter, min_support: int) -> list[tuple[str, int]]:
    kept = [(w, c) for w, c in counter.items() if c >= min_support]
    return sorted(kept, key=lambda wc: (-wc[1], wc[0]))


@dataclass(frozen=True)
class SubstitutionModel:
    """Replace rules keyed by (source token, previous input token) and insert
    rules keyed by the (left, right) input tokens around the gap."""

    rules: dict
    insertion_rules: dict
    min_support: int = 2

    def __len__(self) -> int:
        return len(self.rules) + len(self.insertion_rules)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for (src, ctx), targets in sorted(self.rules.items()):
                for tgt, count in targets:
                    fh.write(f"REPL\t{ctx}\t{src}\t{tgt}\t{count}\n")
            for (left, right), words in sorted(self.insertion_rules.items()):
                for word, count in words:
                    fh.write(f"INS\t{left}\t{right}\t{word}\t{count}\n")

    @classmethod
    def load(cls, path: str | Path, min_support: int = 1) -> "SubstitutionModel":
        rules, ins = defaultdict(Counter), defaultdict(Counter)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                fields = line.rstrip("\n").split("\t")
                if fields == [""]:
                    continue
                if len(fields) != 5 or fields[0] not in ("REPL", "INS"):
                    raise ValueError(f"{path}:{lineno}: malformed rule line")
                tag, a, b, word, count = fields
                if tag == "REPL":
                    rules[(b, a)][word] += int(count)
                else:
                    ins[(a, b)][word] += int(count)
        return cls({k: _ranked(v, min_support) for k, v in rules.items()},
                   {k: _ranked(v, min_support) for k, v in ins.items()}, min_support)


def learn_from_search(pairs: Sequence[tuple[Sequence[str], Sequence[str]]], min_support: int = 2) -> SubstitutionModel:
    if not pairs:
        raise ValueError("no (input, output) pairs to learn from")
    rules, ins = defaultdict(Counter), defaultdict(Counter)
    for source, target in pairs:
        source = tuple(source)
        for kind, pos, word in edit_script(source, target):
            if kind == REPLACE:
                ctx = source[pos - 1] if pos > 0 else BOS
                rules[(source[pos], ctx)][word] += 1
            elif kind == INSERT:
                left = source[pos - 1] if pos > 0 else BOS
                right = source[pos] if pos < len(source) else EOS
                ins[(left, right)][word] += 1
    rules = {k: r for k, v in rules.items() if (r := _ranked(v, min_support))}
    ins = {k: r for k, v in ins.items() if (r := _ranked(v, min_support))}
    return SubstitutionModel(rules, ins, min_support)


def initial_candidate(model: SubstitutionModel, x: Sequence[str]) -> Sentence:
    """Apply the top replace rule per position and the top insert rule per gap."""
    x = tuple(x)
    out: list[str] = []
    for i in range(len(x) + 1):
        left = x[i - 1] if i > 0 else BOS
        right = x[i] if i < len(x) else EOS
        inserted = model.insertion_rules.get((left, right))
        if inserted:
            out.append(inserted[0][0])
        if i < len(x):
            replaced = model.rules.get((x[i], left))
            out.append(replaced[0][0] if replaced else x[i])
    return tuple(out)


infer = initial_candidate


@dataclass
class RoundResult:
    inits: list[Sentence]
    results: list[SearchResult]

    @property
    def outputs(self) -> list[Sentence]:
        return [r.output for r in self.results]

    @property
    def mean_log_score(self) -> float:
        return float(np.mean([r.output_log_score for r in self.results]))


@dataclass
class AlternationResult:
    model: SubstitutionModel | None
    rounds: list[RoundResult]


def alternate(corpus: Sequence[Sentence], objective, cfg: SearchConfig, rounds: int = 2, lm=None,
              min_support: int = 2, workers: int = 1) -> AlternationResult:
    """Alternate batch search and learning.

    Round 1 starts every search from a copy of its input; each later round
    learns from the previous round's (input, best output) pairs and starts
    from the learned model's candidates.  Seeds are identical across rounds.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    corpus = [tuple(x) for x in corpus]
    model = None
    history: list[RoundResult] = []
    inits = list(corpus)
    for r in range(rounds):
        if r > 0:
            model = learn_from_search(list(zip(corpus, history[-1].outputs)), min_support)
            inits = [initial_candidate(model, x) for x in corpus]
        jobs = [BatchJob(x, init) for x, init in zip(corpus, inits)]
        history.append(RoundResult(inits, search_batch(objective, jobs, lm, cfg, workers)))
    return AlternationResult(model, history)
