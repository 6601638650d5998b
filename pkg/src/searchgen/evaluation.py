"""BLEU and iBLEU."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

DEFAULT_SMOOTHING = 1e-9


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def clipped_precision(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int) -> float:
    """Modified n-gram precision; clipping takes the max count over references."""
    counts = ngrams(candidate, n)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    max_ref: Counter = Counter()
    for ref in references:
        max_ref |= ngrams(ref, n)
    matched = sum(min(c, max_ref[g]) for g, c in counts.items())
    return matched / total


def precision_geomean(candidate: Sequence[str], references: Sequence[Sequence[str]],
                      max_n: int, smoothing_eps: float = DEFAULT_SMOOTHING) -> float:
    """Geometric mean of clipped precisions for n = 1..min(max_n, len(candidate)).

    Orders longer than the candidate have no n-grams and are left out rather
    than counted as zero.
    """
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be in [1, 4]")
    top = min(max_n, len(candidate))
    if top == 0:
        return 0.0
    logs = []
    for n in range(1, top + 1):
        p = clipped_precision(candidate, references, n)
        logs.append(math.log(p if p > 0 else smoothing_eps))
    return math.exp(sum(logs) / top)


def brevity_penalty(candidate_len: int, references: Sequence[Sequence[str]]) -> float:
    ref_len = min((len(r) for r in references), key=lambda r: (abs(r - candidate_len), r))
    if candidate_len > ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / candidate_len)


def bleu(candidate: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4,
         smoothing_eps: float = DEFAULT_SMOOTHING) -> float:
    if not references:
        raise ValueError("need at least one reference")
    if not candidate:
        return 0.0
    return brevity_penalty(len(candidate), references) * precision_geomean(
        candidate, references, max_n, smoothing_eps)


def ibleu(output: Sequence[str], reference: Sequence[str], source: Sequence[str],
          alpha: float = 0.9, max_n: int = 4) -> float:
    """Reference BLEU rewarded, input BLEU penalised: alpha*B(ref) - (1-alpha)*B(input)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    return alpha * bleu(output, [reference], max_n) - (1.0 - alpha) * bleu(output, [source], max_n)


def corpus_scores(outputs, references, inputs, alpha: float = 0.9, max_n: int = 4) -> dict:
    """Mean sentence-level BLEU and iBLEU over parallel lists."""
    if not len(outputs) == len(references) == len(inputs):
        raise ValueError("outputs, references and inputs differ in length")
    n = len(outputs)
    if n == 0:
        return {"bleu": 0.0, "ibleu": 0.0, "n": 0}
    b = sum(bleu(o, [r], max_n) for o, r in zip(outputs, references)) / n
    ib = sum(ibleu(o, r, s, alpha, max_n) for o, r, s in zip(outputs, references, inputs)) / n
    return {"bleu": b, "ibleu": ib, "n": n}
