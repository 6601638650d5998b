"""Propose-and-accept search drivers: simulated annealing, hill climbing and
Metropolis-Hastings, with best-so-far tracking and per-step traces.

All three share one loop; they differ only in the acceptance rule.  A
uniform draw is consumed at every step regardless of the rule so the random
stream, and therefore the proposal sequence, lines up across algorithms.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .editing import WORD_OPS, BoundScore, WordEditProposer
from .text import Sentence, detokenize

SA, MH, HILL = "sa", "mh", "hill"
ALGORITHMS = (SA, MH, HILL)


@dataclass(frozen=True)
class SearchConfig:
    algorithm: str = SA
    iterations: int = 200
    T0: float = 1.0
    cooling_rate: float | None = None  # None -> T0 / iterations
    T_min: float = 1e-3
    seed: int = 0
    shortlist_k: int = 50
    enabled_ops: tuple[str, ...] = WORD_OPS

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (self.T0 > 0 and self.T_min > 0):
            raise ValueError("temperatures must be positive")
        if self.T_min > self.T0:
            raise ValueError("T_min must not exceed T0")
        if self.cooling_rate is not None and self.cooling_rate < 0:
            raise ValueError("cooling_rate must be >= 0")
        if self.shortlist_k < 1:
            raise ValueError("shortlist_k must be >= 1")

    @property
    def cooling(self) -> float:
        return self.T0 / self.iterations if self.cooling_rate is None else self.cooling_rate

    def temperature(self, step: int) -> float:
        """Linear cooling with a floor: max(T0 - C * step, T_min)."""
        return max(self.T0 - self.cooling * step, self.T_min)


def acceptance_probability(delta, temperature=1.0):
    """min(1, exp(delta / T)); works elementwise on arrays."""
    r = np.asarray(delta, dtype=np.float64) / np.asarray(temperature, dtype=np.float64)
    p = np.exp(np.minimum(r, 0.0))
    return p if p.ndim else float(p)


def accept(delta, temperature, u):
    """Accept iff u < min(1, exp(delta / T)); u is uniform on [0, 1)."""
    return np.asarray(u) < acceptance_probability(delta, temperature)


@dataclass(frozen=True, slots=True)
class StepRecord:
    step: int
    op: str
    accepted: bool
    log_score: float
    temperature: float
    candidate: str
    candidate_log_score: float

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "op": self.op, "accepted": self.accepted,
                           "log_score": self.log_score, "temperature": self.temperature,
                           "candidate": self.candidate})


@dataclass
class SearchResult:
    output: Sentence
    output_log_score: float
    init_log_score: float
    trace: list[StepRecord]
    state: object = None
    evaluations: int = 0
    best_step: int = 0  # steps taken before the best state was first reached

    def steps_to_reach(self, target: float, tol: float = 1e-12) -> int:
        """Number of steps until best-so-far first reaches ``target``.

        Returns ``len(trace) + 1`` when the target is never reached.
        """
        best = self.init_log_score
        if best >= target - tol:
            return 0
        for rec in self.trace:
            if rec.accepted:
                best = max(best, rec.log_score)
                if best >= target - tol:
                    return rec.step + 1
        return len(self.trace) + 1

    def accepted_scores(self) -> list[float]:
        return [self.init_log_score] + [r.log_score for r in self.trace if r.accepted]


def _identity(state):
    return state


def run_search(score: Callable, init, proposer: Callable, cfg: SearchConfig,
               rng: np.random.Generator, realize: Callable | None = None,
               keep_trace: bool = True) -> SearchResult:
    """Core loop shared by all algorithms.

    ``score`` maps a realized sentence to its log-score, ``proposer(state, rng)``
    returns ``(EditProposal, new_state)`` and ``realize`` turns a state into
    a sentence (identity for word editing).
    """
    realize = realize or getattr(proposer, "realize", None) or _identity
    algo = cfg.algorithm
    state = init
    current = score(realize(state))
    init_score = current
    best_state, best_score, best_step = state, current, 0
    trace: list[StepRecord] = []

    for t in range(cfg.iterations):
        proposal, cand_state = proposer(state, rng)
        cand = realize(cand_state)
        cand_score = score(cand)
        delta = cand_score - current
        u = rng.random()
        if algo == HILL:
            temp = 0.0
            ok = delta > 0.0
        elif algo == SA:
            temp = cfg.temperature(t)
            ok = u < acceptance_probability(delta, temp)
        else:
            temp = 1.0
            log_ratio = delta + proposal.backward_log_prob - proposal.forward_log_prob
            ok = log_ratio >= 0.0 or u < math.exp(log_ratio)
        if ok:
            state, current = cand_state, cand_score
            if current > best_score:
                best_state, best_score, best_step = state, current, t + 1
        if keep_trace:
            trace.append(StepRecord(t, proposal.describe(), bool(ok), current, temp,
                                    detokenize(cand), cand_score))

    evaluations = getattr(score, "evaluations", 0)
    return SearchResult(tuple(realize(best_state)), best_score, init_score, trace,
                        best_state, evaluations, best_step)


def _run_algorithm(algorithm, objective, init, x, lm, cfg, rng, proposer, make_proposer) -> SearchResult:
    cfg = replace(cfg or SearchConfig(), algorithm=algorithm)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    score = BoundScore(objective, x)
    if proposer is None and make_proposer is not None:
        proposer = make_proposer(score)
    if proposer is None:
        if lm is None:
            raise ValueError("word-edit search needs a language model")
        proposer = WordEditProposer(score, lm, cfg.shortlist_k, tuple(cfg.enabled_ops))
    if not hasattr(init, "realized"):
        init = tuple(init)
    return run_search(score, init, proposer, cfg, rng)


def simulated_annealing(objective, init, x, lm=None, cfg: SearchConfig | None = None,
                        rng: np.random.Generator | None = None, proposer=None,
                        make_proposer: Callable | None = None) -> SearchResult:
    """Accept with probability min(1, exp(delta / T_t)) under linear cooling."""
    return _run_algorithm(SA, objective, init, x, lm, cfg, rng, proposer, make_proposer)


def hill_climb(objective, init, x, lm=None, cfg: SearchConfig | None = None,
               rng: np.random.Generator | None = None, proposer=None,
               make_proposer: Callable | None = None) -> SearchResult:
    return _run_algorithm(HILL, objective, init, x, lm, cfg, rng, proposer, make_proposer)


def metropolis_hastings(objective, init, x, lm=None, cfg: SearchConfig | None = None,
                        rng: np.random.Generator | None = None, proposer=None,
                        make_proposer: Callable | None = None) -> SearchResult:
    """Hastings-corrected acceptance; the chain samples states in proportion
    to exp(log-score).  The result still reports the best state visited."""
    return _run_algorithm(MH, objective, init, x, lm, cfg, rng, proposer, make_proposer)


_DRIVERS = {SA: simulated_annealing, HILL: hill_climb, MH: metropolis_hastings}


def search(objective, init, x, lm=None, cfg: SearchConfig | None = None, rng=None, proposer=None,
           make_proposer: Callable | None = None) -> SearchResult:
    cfg = cfg or SearchConfig()
    return _DRIVERS[cfg.algorithm](objective, init, x, lm, cfg, rng, proposer, make_proposer)


@dataclass
class BatchJob:
    """One input of a batch: the input sentence, its initial state and an
    optional proposer factory ``make_proposer(score) -> proposer``."""

    x: Sentence
    init: object
    make_proposer: Callable | None = field(default=None, repr=False)


def search_batch(objective, jobs: Sequence[BatchJob], lm, cfg: SearchConfig, workers: int = 1) -> list[SearchResult]:
    """Run one search per job with seed ``cfg.seed + index``.

    Results come back in job order whatever the completion order.
    """

    def one(index: int) -> SearchResult:
        job = jobs[index]
        job_cfg = replace(cfg, seed=cfg.seed + index)
        return search(objective, job.init, job.x, lm, job_cfg, np.random.default_rng(job_cfg.seed),
                      make_proposer=job.make_proposer)

    if workers <= 1:
        return [one(i) for i in range(len(jobs))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(jobs))))
