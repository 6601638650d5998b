import json
import math

import numpy as np
import pytest

from searchgen.objective import DiversityScorer, FluencyScorer, Objective
from searchgen.lm import train_lm
from searchgen.search import (
    HILL, MH, SA, BatchJob, SearchConfig, accept, acceptance_probability, run_search, search, search_batch,
    simulated_annealing,
)
from searchgen.text import tokenize

from .scripted import LOG_SCORES, STATES, ScriptedProposer, ScriptedRng, UniformProposer, toy_score
from .toy import paraphrase_corpus, paraphrase_inputs


def test_config_defaults_and_validation():
    cfg = SearchConfig()
    assert (cfg.iterations, cfg.T0, cfg.T_min, cfg.cooling) == (200, 1.0, 1e-3, 1.0 / 200)
    assert cfg.temperature(0) == 1.0 and cfg.temperature(10_000) == 1e-3
    assert SearchConfig(T0=2.0, cooling_rate=0.5, T_min=0.1).temperature(3) == pytest.approx(0.5)
    for bad in (dict(algorithm="beam"), dict(iterations=0), dict(T0=0.1, T_min=1.0), dict(T_min=0.0),
                dict(cooling_rate=-1.0)):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


def test_acceptance_law():
    assert acceptance_probability(0.0, 0.3) == 1.0
    assert acceptance_probability(2.0, 0.3) == 1.0
    T = 0.7
    assert acceptance_probability(-T * math.log(2), T) == pytest.approx(0.5, abs=1e-15)
    assert acceptance_probability(-1.0, 1e9) == pytest.approx(1.0, abs=1e-8)
    assert bool(accept(0.0, 1e-9, 0.999999))


def test_sa_hand_stepped():
    # T_t = max(1 - 0.5 t, 0.1): 1.0, 0.5, 0.1
    cfg = SearchConfig(SA, iterations=3, T0=1.0, cooling_rate=0.5, T_min=0.1)
    res = run_search(toy_score, STATES[0], ScriptedProposer([2, 1, 0]), cfg, ScriptedRng([0.99, 0.3, 0.5]))
    # step 0: delta = ln 3 > 0, accepted
    # step 1: delta = ln(2/3), p = exp(2 ln(2/3)) = 4/9 > 0.3, accepted
    # step 2: delta = -ln 2, p = exp(-10 ln 2) ~ 1e-3 < 0.5, rejected
    assert [r.accepted for r in res.trace] == [True, True, False]
    assert [r.temperature for r in res.trace] == [1.0, 0.5, 0.1]
    assert [r.log_score for r in res.trace] == [math.log(3), math.log(2), math.log(2)]
    assert res.output == STATES[2] and res.best_step == 1
    assert res.output_log_score == math.log(3) and res.init_log_score == 0.0


def test_sa_at_tiny_temperature_matches_hill_climbing_decisions():
    targets = [1, 0, 2, 2, 1, 0, 2, 1, 1, 2]
    us = list(np.random.default_rng(5).random(len(targets)))
    sa = run_search(toy_score, STATES[0], ScriptedProposer(targets),
                    SearchConfig(SA, iterations=10, T0=1e-9, T_min=1e-9), ScriptedRng(us))
    hc = run_search(toy_score, STATES[0], ScriptedProposer(targets),
                    SearchConfig(HILL, iterations=10), ScriptedRng(us))
    # the trajectories coincide; decisions agree wherever the move is not a no-op
    assert [r.log_score for r in sa.trace] == [r.log_score for r in hc.trace]
    prev = [0.0] + [r.log_score for r in hc.trace[:-1]]
    moves = [i for i, r in enumerate(hc.trace) if r.candidate_log_score != prev[i]]
    assert len(moves) >= 5
    assert [sa.trace[i].accepted for i in moves] == [hc.trace[i].accepted for i in moves]


def test_sa_huge_temperature_accepts_everything():
    cfg = SearchConfig(SA, iterations=50, T0=1e12, T_min=1e12)
    res = run_search(toy_score, STATES[2], UniformProposer(), cfg, np.random.default_rng(0))
    assert all(r.accepted for r in res.trace)


def test_hill_climb_strict_and_reaches_optimum():
    cfg = SearchConfig(HILL, iterations=4)
    res = run_search(toy_score, STATES[1], ScriptedProposer([1, 0, 2, 1]), cfg, ScriptedRng([0.0] * 4))
    assert [r.accepted for r in res.trace] == [False, False, True, False]
    assert res.output == STATES[2]
    res = run_search(toy_score, STATES[0], UniformProposer(), cfg, np.random.default_rng(1))
    scores = [r.log_score for r in res.trace]
    assert scores == sorted(scores)


def test_mh_hastings_ratio_and_noop():
    # asymmetric proposal: forward 0.9, backward 0.1 -> ratio 3 * 0.1 / 0.9 = 1/3
    prop = ScriptedProposer([2], fwd=math.log(0.9), bwd=math.log(0.1))
    res = run_search(toy_score, STATES[0], prop, SearchConfig(MH, iterations=1), ScriptedRng([0.34]))
    assert not res.trace[0].accepted
    prop = ScriptedProposer([2], fwd=math.log(0.9), bwd=math.log(0.1))
    res = run_search(toy_score, STATES[0], prop, SearchConfig(MH, iterations=1), ScriptedRng([0.33]))
    assert res.trace[0].accepted
    res = run_search(toy_score, STATES[1], ScriptedProposer([1]), SearchConfig(MH, iterations=1), ScriptedRng([0.999]))
    assert res.trace[0].accepted


def test_mh_detailed_balance_flows():
    rng = np.random.default_rng(11)
    res = run_search(toy_score, STATES[0], UniformProposer(), SearchConfig(MH, iterations=60_000), rng)
    inv = {v: i for i, v in enumerate(LOG_SCORES.values())}
    path = [0] + [inv[r.log_score] for r in res.trace]
    flow = np.zeros((3, 3))
    for a, b in zip(path, path[1:]):
        if a != b:
            flow[a, b] += 1
    n = len(path) - 1
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(flow[i, j] - flow[j, i]) / n < 0.01


@pytest.fixture(scope="module")
def paraphrase_setup():
    lm = train_lm(paraphrase_corpus(), order=3)
    o = Objective.of(("fluency", FluencyScorer(lm)), ("diversity", DiversityScorer(), 0.5))
    return lm, o


@pytest.mark.parametrize("algorithm", [SA, HILL, MH])
def test_best_so_far_and_trace_invariants(paraphrase_setup, algorithm):
    lm, o = paraphrase_setup
    x = tokenize("what movie do you like most ?")
    cfg = SearchConfig(algorithm, iterations=40, shortlist_k=10, seed=3)
    res = search(o, x, x, lm, cfg)
    assert len(res.trace) == 40
    visited = [res.init_log_score] + [r.log_score for r in res.trace]
    assert res.output_log_score == max(visited)
    assert res.output_log_score >= res.init_log_score
    assert res.output_log_score == pytest.approx(o.evaluate(res.output, x), abs=1e-12)
    # earliest tie wins
    assert visited.index(max(visited)) == res.best_step
    for rec in res.trace:
        assert rec.candidate_log_score == pytest.approx(o.evaluate(tokenize(rec.candidate), x), abs=1e-9)
        keys = set(json.loads(rec.to_json()))
        assert keys == {"step", "op", "accepted", "log_score", "temperature", "candidate"}


def test_determinism(paraphrase_setup):
    lm, o = paraphrase_setup
    x = tokenize("what book do you love most ?")
    cfg = SearchConfig(SA, iterations=30, shortlist_k=10, seed=9)
    a, b = search(o, x, x, lm, cfg), search(o, x, x, lm, cfg)
    assert a.output == b.output
    assert [r.to_json() for r in a.trace] == [r.to_json() for r in b.trace]


def test_paraphrase_improves_on_what_question(paraphrase_setup):
    lm, o = paraphrase_setup
    x = tokenize("what car do you love most ?")
    res = simulated_annealing(o, x, x, lm, SearchConfig(iterations=100, shortlist_k=10, seed=0))
    assert res.output_log_score > res.init_log_score


def test_batch_seeds_and_order(paraphrase_setup):
    lm, o = paraphrase_setup
    inputs = paraphrase_inputs()[:4]
    cfg = SearchConfig(SA, iterations=15, shortlist_k=8, seed=100)
    jobs = [BatchJob(x, x) for x in inputs]
    serial = search_batch(o, jobs, lm, cfg, workers=1)
    threaded = search_batch(o, jobs, lm, cfg, workers=3)
    assert [r.output for r in serial] == [r.output for r in threaded]
    for i, x in enumerate(inputs):
        alone = search(o, x, x, lm, SearchConfig(SA, iterations=15, shortlist_k=8, seed=100 + i))
        assert alone.output == serial[i].output
        assert [r.to_json() for r in alone.trace] == [r.to_json() for r in serial[i].trace]


def test_steps_to_reach():
    cfg = SearchConfig(HILL, iterations=3)
    res = run_search(toy_score, STATES[0], ScriptedProposer([1, 0, 2]), cfg, ScriptedRng([0.0] * 3))
    assert res.steps_to_reach(math.log(2)) == 1
    assert res.steps_to_reach(math.log(3)) == 3
    assert res.steps_to_reach(0.0) == 0
    assert res.steps_to_reach(5.0) == 4
