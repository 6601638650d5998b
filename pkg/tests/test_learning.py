import pytest
from hypothesis import given, strategies as st

from searchgen.learning import (
    DELETE, INSERT, REPLACE, SubstitutionModel, AlignedPair, alternate, apply_script, edit_script, initial_candidate,
    learn_from_search,
)
from searchgen.lm import train_lm
from searchgen.objective import DiversityScorer, FluencyScorer, Objective
from searchgen.search import HILL, SA, BatchJob, SearchConfig, run_search, search_batch
from searchgen.text import BOS, EOS, tokenize

from .scripted import STATES, ScriptedProposer, ScriptedRng, toy_score
from .toy import paraphrase_corpus, paraphrase_inputs

WHAT = tokenize("what movie do you like most ?")
WHICH = tokenize("which movie do you like most ?")


def test_edit_script_basic():
    assert edit_script(WHAT, WHICH) == [(REPLACE, 0, "which")]
    assert edit_script(("a", "b"), ("a", "b")) == []
    assert edit_script(("a",), ("a", "b")) == [(INSERT, 1, "b")]
    assert edit_script(("a", "b"), ("b",)) == [(DELETE, 0, None)]
    # substitution preferred over a delete + insert pair
    assert edit_script(("x",), ("y",)) == [(REPLACE, 0, "y")]


@given(st.lists(st.sampled_from("abcd"), max_size=7), st.lists(st.sampled_from("abcd"), max_size=7))
def test_script_round_trip(src, tgt):
    pair = AlignedPair(tuple(src), tuple(tgt))
    assert apply_script(pair.input, pair.script) == pair.output


def test_learn_hand_alignment():
    m = learn_from_search([(WHAT, WHICH)] * 3, min_support=2)
    assert m.rules == {("what", BOS): [("which", 3)]}
    assert m.insertion_rules == {}
    assert len(learn_from_search([(WHAT, WHAT)] * 3)) == 0
    assert len(learn_from_search([(WHAT, WHICH)] * 3, min_support=4)) == 0
    with pytest.raises(ValueError):
        learn_from_search([])


def test_learn_insertions_and_ranking():
    src, tgt = tokenize("you think best"), tokenize("you think is the best")
    other = (tokenize("you think best"), tokenize("you think the best"))
    m = learn_from_search([(src, tgt)] * 2 + [other] * 2, min_support=2)
    # tokens inserted before "best": "is"/"the" twice and "the" twice more
    assert m.insertion_rules[("think", "best")] == [("the", 4), ("is", 2)]
    m = learn_from_search([(("a",), ("a", "z"))] * 2, min_support=1)
    assert m.insertion_rules == {("a", EOS): [("z", 2)]}


def test_initial_candidate():
    assert initial_candidate(SubstitutionModel({}, {}), WHAT) == WHAT
    m = SubstitutionModel({("what", BOS): [("which", 3)]}, {})
    assert initial_candidate(m, WHAT) == WHICH
    assert initial_candidate(m, tokenize("so what ?")) == tokenize("so what ?")
    m = SubstitutionModel({}, {("think", "best"): [("the", 2)]})
    assert initial_candidate(m, tokenize("you think best")) == tokenize("you think the best")


def test_dump_load_round_trip(tmp_path):
    m = learn_from_search([(WHAT, WHICH)] * 3 + [(("a",), ("a", "z"))] * 2)
    p = tmp_path / "rules.tsv"
    m.dump(p)
    assert p.read_text().splitlines() == ["REPL\t<s>\twhat\twhich\t3", "INS\ta\t</s>\tz\t2"]
    back = SubstitutionModel.load(p)
    assert back.rules == m.rules and back.insertion_rules == m.insertion_rules
    p.write_text("REPL\tonly\tfour\tfields\n")
    with pytest.raises(ValueError, match=":1:"):
        SubstitutionModel.load(p)


def test_better_init_never_hurts_hill_climbing_under_scripted_proposals():
    targets = [0, 1, 0, 2, 1]
    worse = run_search(toy_score, STATES[0], ScriptedProposer(targets), SearchConfig(HILL, iterations=5),
                       ScriptedRng([0.5] * 5))
    better = run_search(toy_score, STATES[1], ScriptedProposer(targets), SearchConfig(HILL, iterations=5),
                        ScriptedRng([0.5] * 5))
    assert better.output_log_score >= worse.output_log_score


@pytest.fixture(scope="module")
def setup():
    lm = train_lm(paraphrase_corpus(), order=3)
    o = Objective.of(("fluency", FluencyScorer(lm)), ("diversity", DiversityScorer(), 0.5))
    return lm, o


def test_one_round_equals_batch_search(setup):
    lm, o = setup
    inputs = paraphrase_inputs()[:3]
    cfg = SearchConfig(SA, iterations=10, shortlist_k=6, seed=4)
    alt = alternate(inputs, o, cfg, rounds=1, lm=lm)
    plain = search_batch(o, [BatchJob(x, x) for x in inputs], lm, cfg)
    assert alt.model is None
    assert alt.rounds[0].outputs == [r.output for r in plain]
    with pytest.raises(ValueError):
        alternate(inputs, o, cfg, rounds=0, lm=lm)


def test_speed_path_needs_no_objective_evaluations(setup):
    calls = []
    m = learn_from_search([(WHAT, WHICH)] * 3)
    o = Objective.of(("spy", lambda y, x: calls.append(1) or 1.0))
    outs = [initial_candidate(m, x) for x in paraphrase_inputs()]
    assert calls == [] and all(out[0] == "which" for out in outs)
    assert o.evaluate(outs[0], ()) == 0.0 and len(calls) == 1


@given(st.lists(st.sampled_from(["what", "movie", "a", "?"]), min_size=1, max_size=6))
def test_initial_candidate_deterministic_and_nonempty(x):
    m = learn_from_search([(WHAT, WHICH)] * 2 + [(("a",), ("a", "z"))] * 2)
    assert initial_candidate(m, x) == initial_candidate(m, x)
    assert len(initial_candidate(m, x)) >= len(x)
