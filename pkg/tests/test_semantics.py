import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from searchgen.semantics import (
    EPS, EmbeddingTable, cosine, keyword_coverage, load_embeddings, semantic_score, sentence_embedding,
)

TABLE = EmbeddingTable.from_dict({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})


def test_load_minimal(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1.0 0.0\nb 0.0 1.0\n", encoding="utf-8")
    t = load_embeddings(p)
    assert t.dim == 2 and len(t.index) == 2
    np.testing.assert_array_equal(t.vector("b"), [0.0, 1.0])


def test_load_skips_count_dim_header(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("2 2\na 1.0 0.0\nb 0.0 1.0\n", encoding="utf-8")
    t = load_embeddings(p)
    assert t.dim == 2 and set(t.index) == {"a", "b"}


def test_load_inconsistent_dimension_names_line(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1.0 0.0\nb 0.0 1.0 3.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        load_embeddings(p)


def test_load_empty(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty"):
        load_embeddings(p)


def test_sentence_embedding_mean_and_oov():
    np.testing.assert_array_equal(sentence_embedding(TABLE, ["a"]), [1, 0])
    np.testing.assert_array_equal(sentence_embedding(TABLE, ["a", "b"]), [0.5, 0.5])
    np.testing.assert_array_equal(sentence_embedding(TABLE, ["x", "y"]), [0, 0])


def test_cosine_values():
    assert cosine([1, 0], [1, 0]) == 1.0
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 1], [1, 0]) == pytest.approx(0.7071, abs=1e-4)
    assert cosine([0, 0], [1, 0]) == 0.0
    with pytest.raises(ValueError):
        cosine([1, 0], [1, 0, 0])


def test_semantic_identity_and_keyword_hit():
    assert semantic_score(TABLE, ["a", "b"], ["a", "b"]) == pytest.approx(1.0)
    assert keyword_coverage(TABLE, ["c", "a"], {"a"}) == 1.0


def test_semantic_hand_computed():
    # y = [a, c], x = [b], keywords {a, b}
    # sent: mean(y) = (1, .5) vs (0, 1) -> .5 / sqrt(1.25) = sqrt(.2)
    # kw:  a is in y -> 1;  b -> max(cos(b,a)=0, cos(b,c)=sqrt(.5)) -> min = sqrt(.5)
    got = semantic_score(TABLE, ["a", "c"], ["b"], {"a", "b"})
    assert got == pytest.approx(math.sqrt(0.2) * math.sqrt(0.5), abs=1e-12)
    # exponents apply to each part
    got = semantic_score(TABLE, ["a", "c"], ["b"], {"a", "b"}, beta=2.0, gamma=0.5)
    assert got == pytest.approx(0.2 * 0.5 ** 0.25, abs=1e-12)


def test_negative_cosine_clamped():
    t = EmbeddingTable.from_dict({"p": [1.0, 0.0], "n": [-1.0, 0.0]})
    assert semantic_score(t, ["p"], ["n"]) == pytest.approx(EPS)


tokens = st.lists(st.sampled_from(["a", "b", "c", "zz"]), max_size=4)


@given(tokens, tokens)
def test_symmetric_without_keywords(y, x):
    assert semantic_score(TABLE, y, x) == pytest.approx(semantic_score(TABLE, x, y), abs=1e-12)


@given(tokens, tokens, st.sets(st.sampled_from(["a", "b", "c", "zz"]), max_size=3), st.sampled_from(["a", "b", "c", "zz"]))
def test_bounds_and_keyword_monotonicity(y, x, kws, extra):
    s = semantic_score(TABLE, y, x, kws)
    assert 0.0 < s <= 1.0
    assert keyword_coverage(TABLE, y, kws | {extra}) <= keyword_coverage(TABLE, y, kws)
