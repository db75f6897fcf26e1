"""A grammar, a dictionary and the rule registry bundled into one model."""
from __future__ import annotations

import json
from typing import Sequence

from .cfg import Grammar, ParseError, ParseNode, load_grammar, parse
from .data.scan import ACTIONS, INPUT_VOCAB
from .neural import Tensor
from .rng import ALGORITHM
from .semantics import (EXPR, LEARNED, SEQ, Context, LearnedDictionary, SemanticsError,
                        SuppliedDictionary, build_registry, expr_loss, render_value, run_cpg, seq_loss)

CHECKPOINT_VERSION = 1


class CPG:
    def __init__(self, grammar: Grammar, dictionary, mode: str, registry: dict | None = None,
                 seed: int = 0, w_out: int = 8, s_max: int = 9, o_max: int = 6,
                 init_scale: float = 0.1, copy_empty_bias: float = 0.0, grammar_text: str | None = None):
        self.grammar = grammar
        self.grammar_text = grammar_text
        self.dictionary = dictionary
        self.mode = mode
        self.dims = {"w_out": w_out, "s_max": s_max, "o_max": o_max}
        self.registry = registry if registry is not None else build_registry(
            grammar, mode, seed, w_out, s_max, o_max, init_scale, copy_empty_bias)
        self._trees: dict = {}

    # -- construction helpers
    @classmethod
    def for_scan(cls, grammar: Grammar, seed: int = 0, hidden: int = 30, empty_bias: float = 2.0,
                 output_vocab: Sequence[str] = ACTIONS, **kw) -> "CPG":
        vocab = [t for t in INPUT_VOCAB if grammar.token_rules(t)]
        vocab += [t for t in grammar.vocabulary if t not in vocab]
        dictionary = LearnedDictionary(vocab, output_vocab, hidden, seed, empty_bias)
        return cls(grammar, dictionary, SEQ, seed=seed, **kw)

    @classmethod
    def for_cogs(cls, grammar: Grammar, dictionary: SuppliedDictionary, seed: int = 0, **kw) -> "CPG":
        return cls(grammar, dictionary, EXPR, seed=seed, **kw)

    # -- inference
    def tree(self, tokens: Sequence[str]) -> ParseNode:
        key = tuple(tokens)
        t = self._trees.get(key)
        if t is None:
            t = parse(self.grammar, key)
            self._trees[key] = t
        return t

    def value(self, tokens: Sequence[str], ctx: Context):
        return run_cpg(self.grammar, self.registry, self.dictionary, tokens, ctx, self.tree(tokens))

    def predict(self, tokens: Sequence[str]) -> str | None:
        """Noise-free output string, or None if the input cannot be processed."""
        try:
            return render_value(self.value(tokens, Context()), self.dictionary)
        except (ParseError, SemanticsError):
            return None

    def target_ids(self, target) -> list[int]:
        vocab = {t: i for i, t in enumerate(self.dictionary.output_vocab)}
        return [vocab[t] for t in target]

    def loss(self, value, target) -> Tensor:
        if self.mode == SEQ:
            return seq_loss(value, self.target_ids(target), self.dictionary.empty_index)
        return expr_loss(value, target, self.dictionary.objects)

    def render(self, value) -> str:
        return render_value(value, self.dictionary)

    # -- parameters
    def trainable_params(self) -> list:
        params = [p for d in self.registry.values() for p in d.params if not p.frozen]
        params += [p for p in self.dictionary.params if not p.frozen]
        return params

    def frozen_rules(self) -> set:
        return {rid for rid, d in self.registry.items() if d.frozen}

    # -- checkpoints
    def state_dict(self) -> dict:
        if self.dictionary.mode == LEARNED:
            dictionary = self.dictionary.state_dict()
        else:
            dictionary = {"mode": "SUPPLIED"}
        return {
            "version": CHECKPOINT_VERSION,
            "rng": ALGORITHM,
            "mode": self.mode,
            "dims": self.dims,
            "grammar": self.grammar_text,
            "modules": {rid: d.state_dict() for rid, d in sorted(self.registry.items())},
            "dictionary": dictionary,
        }

    def load_state(self, state: dict) -> None:
        if state.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {state.get('version')}")
        missing = set(self.registry) - set(state["modules"])
        if missing:
            raise ValueError(f"checkpoint lacks modules: {sorted(missing)}")
        for rid, d in self.registry.items():
            d.load_state(state["modules"][rid])
        if self.dictionary.mode == LEARNED:
            self.dictionary.load_state(state["dictionary"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.state_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def load_checkpoint(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def model_from_checkpoint(state: dict, dictionary=None, seed: int = 0) -> CPG:
    """Rebuild a model whose grammar text is stored in the checkpoint."""
    if not state.get("grammar"):
        raise ValueError("checkpoint does not embed its grammar")
    grammar = load_grammar(state["grammar"])
    dims = state.get("dims", {})
    if state["mode"] == SEQ:
        d = state["dictionary"]
        dictionary = LearnedDictionary(d["input_vocab"], d["output_vocab"], d["hidden"], seed)
        model = CPG(grammar, dictionary, SEQ, seed=seed, grammar_text=state["grammar"], **dims)
    else:
        if dictionary is None:
            raise ValueError("a supplied dictionary is required for EXPR checkpoints")
        model = CPG(grammar, dictionary, EXPR, seed=seed, grammar_text=state["grammar"], **dims)
    model.load_state(state)
    return model
