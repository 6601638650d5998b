"""Unsupervised text generation by local search over a heuristic objective."""

from .editing import EditProposal, SelectionMask, apply_edit, gibbs_word_distribution, propose_edit, propose_swap
from .evaluation import bleu, ibleu
from .kernels import BACKEND
from .learning import SubstitutionModel, alternate, initial_candidate, learn_from_search
from .lm import NGramModel, candidate_words, fluency_score, sentence_log_prob, train_lm
from .objective import Component, Objective, evaluate_log_score
from .search import (
    SearchConfig,
    SearchResult,
    hill_climb,
    metropolis_hastings,
    search,
    search_batch,
    simulated_annealing,
)
from .semantics import EmbeddingTable, cosine, load_embeddings, semantic_score, sentence_embedding
from .text import Sentence, Vocabulary, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Component", "EditProposal", "EmbeddingTable", "NGramModel", "Objective", "SearchConfig",
    "SearchResult", "SelectionMask", "Sentence", "SubstitutionModel", "Vocabulary", "alternate",
    "apply_edit", "bleu", "candidate_words", "cosine", "detokenize", "evaluate_log_score",
    "fluency_score", "gibbs_word_distribution", "hill_climb", "ibleu", "initial_candidate",
    "learn_from_search", "load_embeddings", "metropolis_hastings", "propose_edit", "propose_swap",
    "search", "search_batch", "semantic_score", "sentence_embedding", "sentence_log_prob",
    "simulated_annealing", "tokenize", "train_lm",
]
