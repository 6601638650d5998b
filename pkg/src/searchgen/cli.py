"""Command line interface: ``searchgen train-lm | generate | evaluate``.

Exit codes: 0 success, 2 usage or validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import objective as obj
from .constraints import read_labeled_corpus, train_style_classifier
from .editing import WORD_OPS, SelectionMask, SwapProposer
from .evaluation import corpus_scores
from .learning import alternate
from .lm import NGramModel, train_lm
from .search import ALGORITHMS, BatchJob, SearchConfig, SearchResult, search_batch
from .semantics import load_embeddings
from .text import detokenize, read_corpus, tokenize, words

TASKS = ("paraphrase", "summarize", "keywords", "correct", "style")


class UsageError(Exception):
    """Bad flags, config or inputs; reported on stderr with exit status 2."""


# -- config ------------------------------------------------------------------

_NUMBER = (int, float)
CONFIG_KEYS: dict[str, tuple] = {
    "algorithm": (str,),
    "iterations": (int,),
    "T0": _NUMBER,
    "cooling_rate": _NUMBER,
    "T_min": _NUMBER,
    "shortlist_K": (int,),
    "components": (list,),
    "lm_path": (str,),
    "lm_order": (int,),
    "embeddings_path": (str,),
    "budget_k": (int,),
    "style_model_path": (str,),
    "target_style": (str,),
    "enabled_ops": (list,),
    "workers": (int,),
    "learn": (dict,),
}
REQUIRED_KEYS = ("components", "lm_path")
COMPONENT_PARAMS = {
    "fluency": set(),
    "semantic": {"beta", "gamma", "keywords_from_input"},
    "diversity": {"max_n"},
    "keywords": set(),
    "length": set(),
    "flesch": set(),
    "style": set(),
}


def _check_type(key: str, value: Any, types: tuple) -> None:
    if isinstance(value, bool) or not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise UsageError(f"config key {key!r}: expected {names}, got {type(value).__name__}")


def validate_config(cfg: Any) -> dict:
    """Check a parsed config against the schema; unknown keys are rejected."""
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, value in cfg.items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        _check_type(key, value, CONFIG_KEYS[key])
    for key in REQUIRED_KEYS:
        if key not in cfg:
            raise UsageError(f"missing config key {key!r}")
    if cfg.get("algorithm", "sa") not in ALGORITHMS:
        raise UsageError(f"config key 'algorithm': must be one of {', '.join(ALGORITHMS)}")
    for op in cfg.get("enabled_ops", []):
        if op not in WORD_OPS:
            raise UsageError(f"config key 'enabled_ops': unknown op {op!r}")
    if not cfg["components"]:
        raise UsageError("config key 'components': at least one component required")
    for i, comp in enumerate(cfg["components"]):
        where = f"components[{i}]"
        if not isinstance(comp, dict):
            raise UsageError(f"config key {where!r}: expected object")
        extra = set(comp) - {"name", "weight", "params"}
        if extra:
            raise UsageError(f"unknown config key {where + '.' + sorted(extra)[0]!r}")
        name = comp.get("name")
        if name not in COMPONENT_PARAMS:
            raise UsageError(f"config key {where + '.name'!r}: unknown component {name!r}")
        weight = comp.get("weight", 1.0)
        _check_type(where + ".weight", weight, _NUMBER)
        if weight < 0:
            raise UsageError(f"config key {where + '.weight'!r}: must be >= 0")
        params = comp.get("params", {})
        _check_type(where + ".params", params, (dict,))
        bad = set(params) - COMPONENT_PARAMS[name]
        if bad:
            raise UsageError(f"unknown config key {where + '.params.' + sorted(bad)[0]!r}")
    learn = cfg.get("learn")
    if learn is not None:
        for key, value in learn.items():
            if key not in ("rounds", "min_support"):
                raise UsageError(f"unknown config key {'learn.' + key!r}")
            _check_type("learn." + key, value, (int,))
    return cfg


def search_config(cfg: dict, seed: int) -> SearchConfig:
    try:
        return SearchConfig(
            algorithm=cfg.get("algorithm", "sa"),
            iterations=cfg.get("iterations", 200),
            T0=float(cfg.get("T0", 1.0)),
            cooling_rate=cfg.get("cooling_rate"),
            T_min=float(cfg.get("T_min", 1e-3)),
            seed=seed,
            shortlist_k=cfg.get("shortlist_K", 50),
            enabled_ops=tuple(cfg.get("enabled_ops", WORD_OPS)),
        )
    except ValueError as exc:
        raise UsageError(f"config: {exc}") from None


def _resource(cfg: dict, key: str, task: str) -> Path:
    if key not in cfg:
        raise UsageError(f"task {task!r} needs config key {key!r}")
    path = Path(cfg[key])
    if not path.is_file():
        raise UsageError(f"config key {key!r}: file not found: {path}")
    return path


def load_lm(cfg: dict, task: str) -> NGramModel:
    """Load a saved model (``.npz``) or train one from a plain-text corpus."""
    path = _resource(cfg, "lm_path", task)
    if path.suffix == ".npz":
        return NGramModel.load(path)
    try:
        return train_lm(read_corpus(path), order=cfg.get("lm_order", 3))
    except ValueError as exc:
        raise UsageError(f"config key 'lm_path': {exc}") from None


def build_objective(cfg: dict, task: str, lm: NGramModel) -> obj.Objective:
    components = []
    table = None
    for i, comp in enumerate(cfg["components"]):
        name, params = comp["name"], comp.get("params", {})
        if name == "fluency":
            scorer = obj.FluencyScorer(lm)
        elif name == "semantic":
            if table is None:
                try:
                    table = load_embeddings(_resource(cfg, "embeddings_path", task))
                except ValueError as exc:
                    raise UsageError(f"config key 'embeddings_path': {exc}") from None
            scorer = obj.SemanticScorer(
                table, keywords_from_input=params.get("keywords_from_input", task == "keywords"),
                beta=params.get("beta", 1.0), gamma=params.get("gamma", 1.0))
        elif name == "diversity":
            max_n = params.get("max_n", 2)
            if not isinstance(max_n, int) or not 1 <= max_n <= 4:
                raise UsageError(f"config key 'components[{i}].params.max_n': must be an integer in [1, 4]")
            scorer = obj.DiversityScorer(max_n)
        elif name == "keywords":
            scorer = obj.KeywordScorer()
        elif name == "length":
            if "budget_k" not in cfg:
                raise UsageError("component 'length' needs config key 'budget_k'")
            scorer = obj.LengthScorer(cfg["budget_k"])
        elif name == "flesch":
            scorer = obj.FleschScorer()
        else:
            path = _resource(cfg, "style_model_path", task)
            if "target_style" not in cfg:
                raise UsageError(f"task {task!r} needs config key 'target_style'")
            try:
                clf = train_style_classifier(read_labeled_corpus(path))
                scorer = obj.StyleScorer(clf, cfg["target_style"])
            except (ValueError, KeyError) as exc:
                raise UsageError(f"config key 'style_model_path': {exc}") from None
        components.append(obj.Component(name, scorer, float(comp.get("weight", 1.0))))
    return obj.Objective(tuple(components))


# -- generation ----------------------------------------------------------------


def _summary_job(line: str, budget_k: int) -> tuple[BatchJob, bool]:
    source = tuple(words(tokenize(line)))
    if len(source) <= budget_k:
        # too short to select from: emit the words as they are
        return BatchJob(source, source), False
    mask = SelectionMask.first_k(source, budget_k)
    return BatchJob(source, mask, lambda score: SwapProposer()), True


def generate(task: str, cfg: dict, lines: list[str], seed: int) -> list[tuple[str, SearchResult | None, tuple]]:
    """Run the task on every input line; returns (line, result, output tokens)."""
    if task not in TASKS:
        raise UsageError(f"unknown task {task!r}")
    if task == "style":
        _resource(cfg, "style_model_path", task)
        if "target_style" not in cfg:
            raise UsageError("task 'style' needs config key 'target_style'")
    if task == "summarize":
        if "budget_k" not in cfg:
            raise UsageError("task 'summarize' needs config key 'budget_k'")
        if cfg["budget_k"] < 1:
            raise UsageError("config key 'budget_k': must be >= 1")
    lm = load_lm(cfg, task)
    objective = build_objective(cfg, task, lm)
    scfg = search_config(cfg, seed)
    workers = cfg.get("workers", 1)

    if task == "summarize":
        jobs, searchable = zip(*[_summary_job(line, cfg["budget_k"]) for line in lines]) if lines else ((), ())
        todo = [j for j, s in zip(jobs, searchable) if s]
        done = iter(search_batch(objective, todo, lm, scfg, workers))
        out = []
        for line, job, s in zip(lines, jobs, searchable):
            if s:
                res = next(done)
                out.append((line, res, res.output))
            else:
                out.append((line, None, job.init))
        return out

    # for the keywords task the keyword line is both input and initial candidate
    inputs = [tokenize(line) for line in lines]
    if any(not x for x in inputs):
        raise UsageError("input contains an empty line")
    learn = cfg.get("learn")
    if learn:
        alt = alternate(inputs, objective, scfg, rounds=learn.get("rounds", 2), lm=lm,
                        min_support=learn.get("min_support", 2), workers=workers)
        results = alt.rounds[-1].results
    else:
        jobs = [BatchJob(x, x) for x in inputs]
        results = search_batch(objective, jobs, lm, scfg, workers)
    return [(line, r, r.output) for line, r in zip(lines, results)]


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def cmd_train_lm(args) -> int:
    try:
        corpus = read_corpus(args.corpus)
    except OSError as exc:
        raise UsageError(f"cannot read corpus {args.corpus}: {exc.strerror}") from None
    try:
        model = train_lm(corpus, order=args.order, min_count=args.min_count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    model.save(args.out)
    for key, value in model.stats().items():
        print(f"{key}\t{value}")
    return 0


def cmd_generate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    validate_config(cfg)
    lines = _read_lines(args.input)
    rows = generate(args.task, cfg, lines, args.seed)

    with open(args.out, "w", encoding="utf-8") as out:
        for line, res, tokens in rows:
            rec = {
                "input": line,
                "output": detokenize(tokens),
                "log_score": res.output_log_score if res else None,
                "init_log_score": res.init_log_score if res else None,
                "iterations": len(res.trace) if res else 0,
            }
            out.write(json.dumps(rec) + "\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for _, res, _ in rows:
                for step in (res.trace if res else ()):
                    fh.write(step.to_json() + "\n")
    return 0


def _output_lines(path: str) -> list[str]:
    """Plain lines, or the ``output`` field when the file is generate's JSONL."""
    lines = _read_lines(path)
    out = []
    for line in lines:
        if line.startswith("{"):
            try:
                rec = json.loads(line)
                if isinstance(rec, dict) and "output" in rec:
                    out.append(rec["output"])
                    continue
            except json.JSONDecodeError:
                pass
        out.append(line)
    return out


def cmd_evaluate(args) -> int:
    outputs = _output_lines(args.outputs)
    refs = _read_lines(args.references)
    inputs = _read_lines(args.inputs)
    if not len(outputs) == len(refs) == len(inputs):
        raise UsageError(f"line counts differ: outputs={len(outputs)} references={len(refs)} inputs={len(inputs)}")
    if not 0.0 <= args.alpha <= 1.0:
        raise UsageError("--alpha must be in [0, 1]")
    scores = corpus_scores([tokenize(s) for s in outputs], [tokenize(s) for s in refs],
                           [tokenize(s) for s in inputs], alpha=args.alpha)
    print(json.dumps(scores))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="searchgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="train an n-gram language model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("generate", help="run search-based generation")
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="BLEU / iBLEU over parallel files")
    p.add_argument("--outputs", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--alpha", type=float, default=0.9)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"searchgen: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort exit status
        print(f"searchgen: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
