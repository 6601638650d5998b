"""The search objective: a weighted product of positive scorers, in log space.

Each scorer is a callable ``scorer(y, x) -> float`` returning a value in
[0, 1].  A scorer may also expose ``many(ys, x)`` to score a batch at once;
the Gibbs proposal uses it to score a whole shortlist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Collection, Hashable, Sequence

import numpy as np

from . import constraints
from .lm import NGramModel
from .semantics import EmbeddingTable, semantic_score

Scorer = Callable[[Sequence[str], Sequence[str]], float]

HARD_FLOOR_LOG = math.log(1e-8)


class ScorerError(RuntimeError):
    """A component scorer raised; ``component`` names it."""

    def __init__(self, component: str, cause: BaseException):
        super().__init__(f"scorer {component!r} failed: {cause}")
        self.component = component


@dataclass(frozen=True)
class Component:
    name: str
    scorer: Scorer
    weight: float = 1.0


@dataclass(frozen=True)
class Objective:
    components: tuple[Component, ...]
    hard_floor_log: float = HARD_FLOOR_LOG

    def __post_init__(self):
        if not self.components:
            raise ValueError("objective needs at least one component")
        for c in self.components:
            if not math.isfinite(c.weight) or c.weight < 0:
                raise ValueError(f"component {c.name!r}: weight must be finite and >= 0")
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def of(cls, *parts, hard_floor_log: float = HARD_FLOOR_LOG) -> "Objective":
        """Build from ``(name, scorer[, weight])`` tuples."""
        return cls(tuple(Component(*p) for p in parts), hard_floor_log)

    def component_scores(self, y: Sequence[str], x: Sequence[str]) -> dict[str, float]:
        out = {}
        for c in self.components:
            try:
                out[c.name] = float(c.scorer(y, x))
            except Exception as exc:
                raise ScorerError(c.name, exc) from exc
        return out

    def evaluate(self, y: Sequence[str], x: Sequence[str]) -> float:
        """Sum of weight * log(score); a zero score contributes weight * floor."""
        total = 0.0
        for c in self.components:
            if c.weight == 0.0:
                continue
            try:
                value = float(c.scorer(y, x))
            except Exception as exc:
                raise ScorerError(c.name, exc) from exc
            total += c.weight * (math.log(value) if value > 0.0 else self.hard_floor_log)
        return total

    def evaluate_many(self, ys: Sequence[Sequence[str]], x: Sequence[str]) -> np.ndarray:
        total = np.zeros(len(ys))
        for c in self.components:
            if c.weight == 0.0:
                continue
            try:
                many = getattr(c.scorer, "many", None)
                if many is not None:
                    values = np.asarray(many(ys, x), dtype=np.float64)
                else:
                    values = np.array([float(c.scorer(y, x)) for y in ys])
            except Exception as exc:
                raise ScorerError(c.name, exc) from exc
            with np.errstate(divide="ignore"):
                logs = np.where(values > 0.0, np.log(np.maximum(values, 1e-300)), self.hard_floor_log)
            total += c.weight * logs
        return total


def evaluate_log_score(objective: Objective, y: Sequence[str], x: Sequence[str]) -> float:
    return objective.evaluate(y, x)


# -- scorers ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FluencyScorer:
    lm: NGramModel

    def __call__(self, y, x):
        return self.lm.fluency(y)

    def many(self, ys, x):
        lengths = np.array([len(y) + 1 for y in ys], dtype=np.float64)
        return np.exp(self.lm.log_prob_many(ys) / lengths)


@dataclass(frozen=True, eq=False)
class SemanticScorer:
    """Embedding similarity to the input.

    With ``keywords_from_input`` every input token is a keyword, which suits
    the keywords-to-sentence task where the input is the keyword list.
    """

    table: EmbeddingTable
    keywords: Collection[str] = ()
    keywords_from_input: bool = False
    beta: float = 1.0
    gamma: float = 1.0

    def __call__(self, y, x):
        keywords = set(x) if self.keywords_from_input else self.keywords
        return semantic_score(self.table, y, x, keywords, self.beta, self.gamma)


@dataclass(frozen=True)
class DiversityScorer:
    max_n: int = 2

    def __call__(self, y, x):
        return constraints.diversity_score(y, x, self.max_n)


@dataclass(frozen=True)
class KeywordScorer:
    """Hard keyword constraint; ``keywords=None`` takes them from the input."""

    keywords: frozenset | None = None

    def __call__(self, y, x):
        return constraints.keyword_indicator(y, set(x) if self.keywords is None else self.keywords)


@dataclass(frozen=True)
class LengthScorer:
    budget_k: int

    def __call__(self, y, x):
        return constraints.length_indicator(y, self.budget_k)


@dataclass(frozen=True)
class FleschScorer:
    def __call__(self, y, x):
        return constraints.flesch_score(y)


@dataclass(frozen=True, eq=False)
class StyleScorer:
    classifier: constraints.StyleClassifier
    target: Hashable

    def __post_init__(self):
        if self.target not in self.classifier.labels:
            raise KeyError(f"unknown style label: {self.target!r}")

    def __call__(self, y, x):
        return self.classifier.score(y, self.target)


@dataclass
class CountingObjective:
    """Wraps an objective and counts scorer evaluations (for speed checks)."""

    objective: Objective
    calls: int = field(default=0)

    def evaluate(self, y, x):
        self.calls += 1
        return self.objective.evaluate(y, x)

    def evaluate_many(self, ys, x):
        self.calls += len(ys)
        return self.objective.evaluate_many(ys, x)
