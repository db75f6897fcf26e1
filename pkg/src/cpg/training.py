"""Curricular training: stages by input length, annealing, freezing, diagnostics."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .cfg import Grammar, ParseError, parse_types
from .data.io import Example
from .model import CPG
from .neural import Adam, ReduceOnPlateau, add, total
from .rng import Streams
from .semantics import LEARNED, Context, SemanticsError

log = logging.getLogger(__name__)

SCAN_STAGES = [(n, n) for n in range(1, 8)]
COGS_STAGES = [(2, 3), (4, 6), (7, 9), (10, 12), (13, 15), (16, 18), (19, 21)]
TOKEN = "token:"  # marks a dictionary entry among failing names
METRIC_FIELDS = ["step", "stage", "loss", "acc", "ema_acc", "temperature", "lr"]


@dataclass
class Hyper:
    lr: float = 5e-2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    factor: float = 0.5
    patience: int = 50
    min_delta: float = 1e-4
    min_lr: float = 1e-2
    tau0: float = 10.0
    tau_min: float = 0.1
    max_steps: int = 20000
    ema_decay: float = 0.9
    ema_threshold: float = 0.999
    max_rollbacks: int = 2
    empty_prior: float = 0.03


class StageAbort(RuntimeError):
    def __init__(self, stage: int, report: str, failing: Sequence[str] = ()):
        self.stage = stage
        self.report = report
        self.failing = list(failing)
        super().__init__(f"stage {stage} did not converge\n{report}")


@dataclass
class Curriculum:
    stages: list
    current: int = 0
    stage_acc: float = 0.0
    tau0: float = 10.0
    tau_min: float = 0.1

    def __post_init__(self):
        prev = -math.inf
        for lo, hi in self.stages:
            if lo > hi or lo <= prev:
                raise ValueError(f"stages must be disjoint and ascending: {self.stages}")
            prev = hi

    @property
    def temperature(self) -> float:
        return anneal(self.stage_acc, self.tau0, self.tau_min)

    def members(self, data: Sequence[Example], k: int) -> list[Example]:
        lo, hi = self.stages[k]
        return [e for e in data if lo <= len(e.input) <= hi]


def anneal(stage_acc: float, tau0: float = 10.0, tau_min: float = 0.1) -> float:
    """Temperature falls linearly with stage accuracy, floored at tau_min."""
    if not 0.0 <= stage_acc <= 1.0:
        raise ValueError("stage accuracy must lie in [0, 1]")
    return max(tau_min, tau0 * (1.0 - stage_acc))


def exact_match_accuracy(model: CPG, dataset: Sequence[Example]) -> float:
    """Fraction of examples whose noise-free output equals the target string."""
    if not dataset:
        warnings.warn("exact-match accuracy of an empty dataset is defined as 1.0")
        return 1.0
    hits = sum(model.predict(e.input) == e.target_text for e in dataset)
    return hits / len(dataset)


def rules_of(model: CPG, examples: Sequence[Example]) -> set:
    used = set()
    for e in examples:
        used |= parse_types(model.tree(e.input))
    return {r for r in used if r in model.registry}


def tokens_of(examples: Sequence[Example]) -> set:
    return {t for e in examples for t in e.input}


def freeze_stage(model: CPG, rules, stage: int | None = None, tokens=()) -> list:
    """Freeze the argmax maps (and logits) of ``rules`` and dictionary ``tokens``."""
    done = []
    for rid in sorted(rules):
        d = model.registry[rid]
        if not d.frozen:
            d.freeze(stage)
            done.append(rid)
    if model.dictionary.mode == LEARNED:
        model.dictionary.freeze(sorted(tokens), stage)
        if all(t in model.dictionary.frozen for t in model.dictionary.input_vocab):
            for p in model.dictionary.params:
                p.frozen = True
    return done


class MetricsWriter:
    def __init__(self, fh=None):
        self.fh = fh
        self.writer = csv.writer(fh, lineterminator="\n") if fh is not None else None
        if self.writer:
            self.writer.writerow(METRIC_FIELDS)

    def row(self, **values) -> None:
        if self.writer:
            self.writer.writerow([_fmt(values[k]) for k in METRIC_FIELDS])


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


class Trainer:
    """Owns one model and trains it stage by stage."""

    def __init__(self, model: CPG, curriculum: Curriculum, hyper: Hyper | None = None, seed: int = 0,
                 metrics: MetricsWriter | None = None):
        self.model = model
        self.curriculum = curriculum
        self.hyper = hyper or Hyper()
        self.seed = seed
        self.streams = Streams(seed)
        self.metrics = metrics or MetricsWriter()
        self.step = 0
        self.log: list[dict] = []
        self.frozen_log: list[dict] = []
        self.rollbacks: list[dict] = []

    def _clean_pass(self, examples) -> bool:
        return all(self.model.predict(e.input) == e.target_text for e in examples)

    def train(self, train_set: Sequence[Example], val_set: Sequence[Example] | None = None,
              start_stage: int = 0) -> list[dict]:
        data = []
        for e in train_set:
            try:
                self.model.tree(e.input)
                data.append(e)
            except ParseError as err:
                raise ValueError(f"training example does not parse: {e.input_text!r}: {err}") from None
        k, first, budget = start_stage, start_stage, self.hyper.max_rollbacks
        while k < len(self.curriculum.stages):
            self.curriculum.current = k
            try:
                record = self._run_stage(k, data, val_set, first)
            except StageAbort:
                if first == start_stage or budget == 0:
                    raise
                # the previous stage may have frozen a solution that only fits its own
                # examples; thaw it and learn both stages together
                budget -= 1
                # the stage before `first` may itself be a merge; restart at its own start
                prev = self.log.pop()
                self._thaw_stage(prev["stage"])
                first = prev.get("merged_from", prev["stage"]) - 1
                self.rollbacks.append({"failed_stage": k + 1, "thawed_stage": prev["stage"]})
                continue
            self.log.append(record)
            k += 1
            first = k
        return self.log

    def _thaw_stage(self, stage: int) -> None:
        model = self.model
        for rid, d in model.registry.items():
            if d.frozen and d.stage == stage:
                d.reset()
        self.frozen_log = [f for f in self.frozen_log if f["stage"] != stage]
        if model.dictionary.mode == LEARNED:
            tokens = [t for t, s in model.dictionary.stage.items() if s == stage]
            model.dictionary.thaw(tokens)

    def _unfrozen_tokens(self, examples) -> list[str]:
        d = self.model.dictionary
        if d.mode != LEARNED:
            return []
        return sorted(tokens_of(examples) - set(d.frozen))

    def _run_stage(self, k: int, data, val_set, first: int | None = None) -> dict:
        h = self.hyper
        model = self.model
        cur = self.curriculum
        first = k if first is None else first
        examples = [e for j in range(first, k + 1) for e in cur.members(data, j)]
        cur.stage_acc = 0.0
        record = {"stage": k + 1, "range": [cur.stages[first][0], cur.stages[k][1]],
                  "examples": len(examples)}
        if first != k:
            record["merged_from"] = first + 1
        new_rules = sorted(rules_of(model, examples) - model.frozen_rules())
        record["new_rules"] = new_rules
        t0 = time.perf_counter()
        if examples:
            record["start_acc"] = exact_match_accuracy(model, examples)
        else:
            record["start_acc"] = 1.0
        steps = 0
        converged = self._clean_pass(examples)
        if not converged:
            if not model.trainable_params():
                raise StageAbort(k + 1, self.report(extra=f"stage {k + 1}: nothing left to train"))
            if model.dictionary.mode == LEARNED:
                # unfrozen entries start each stage from the prior, not from drift
                model.dictionary.restart()
            steps, converged = self._optimise(k, examples)
        record["steps"] = steps
        record["converged"] = converged
        if not converged:
            failing = new_rules + [TOKEN + t for t in self._unfrozen_tokens(examples)]
            raise StageAbort(k + 1, self.report(extra=f"stage {k + 1}: gave up after {steps} steps",
                                                failing=failing), failing)
        for rid in new_rules:
            model.registry[rid].steps += steps
        frozen = freeze_stage(model, new_rules, k + 1, tokens_of(examples))
        for rid in frozen:
            self.frozen_log.append({"stage": k + 1, "rule": rid,
                                    "map": [int(v) for v in model.registry[rid].frozen_map]})
        record["frozen"] = frozen
        record["final_acc"] = exact_match_accuracy(model, examples) if examples else 1.0
        if val_set is not None:
            record["val_acc"] = exact_match_accuracy(model, val_set)
        record["seconds"] = round(time.perf_counter() - t0, 3)
        log.info("stage %d: %d examples, %d steps", k + 1, len(examples), steps)
        return record

    def _optimise(self, k: int, examples) -> tuple[int, bool]:
        h = self.hyper
        model = self.model
        cur = self.curriculum
        opt = Adam(model.trainable_params(), h.lr, (h.beta1, h.beta2), h.adam_eps)
        sched = ReduceOnPlateau(h.lr, h.factor, h.patience, h.min_delta, h.min_lr)
        order_rng = self.streams.get(f"order:{k}")
        steps = 0
        queue: list[int] = []
        epoch_losses: list[float] = []
        while steps < h.max_steps:
            if not queue:
                if epoch_losses:
                    # one scheduler step per pass, patience still counted in optimizer steps
                    mean = sum(epoch_losses) / len(epoch_losses)
                    for _ in epoch_losses[:-1]:
                        sched.step(math.inf)
                    opt.lr = sched.step(mean)
                    epoch_losses = []
                queue = list(order_rng.permutation(len(examples)))
            ex = examples[queue.pop()]
            tau = cur.temperature
            ctx = Context(tau=tau, streams=self.streams, grad=True)
            try:
                value = model.value(ex.input, ctx)
                loss = model.loss(value, ex.target)
                if h.empty_prior and ctx.empty_terms:
                    loss = add(loss, total(ctx.empty_terms, h.empty_prior))
                correct = model.render(value) == ex.target_text
            except SemanticsError:
                loss, correct = None, False
            if loss is not None and loss.requires_grad:
                loss.backward()
                opt.step()
            opt.zero_grad()
            steps += 1
            self.step += 1
            lval = float(loss.data) if loss is not None else -math.log(1e-9)
            epoch_losses.append(lval)
            cur.stage_acc = h.ema_decay * cur.stage_acc + (1.0 - h.ema_decay) * float(correct)
            self.metrics.row(step=self.step, stage=k + 1, loss=lval, acc=float(correct),
                             ema_acc=cur.stage_acc, temperature=tau, lr=opt.lr)
            if cur.stage_acc >= h.ema_threshold and self._clean_pass(examples):
                cur.stage_acc = 1.0
                return steps, True
        return steps, False

    def report(self, extra: str = "", failing: Sequence[str] = ()) -> str:
        return diagnose(self.model, self.model.grammar, failing=failing, header=extra)

    def manifest(self) -> dict:
        return {
            "seed": self.seed,
            "hyperparameters": asdict(self.hyper),
            "stages": [list(s) for s in self.curriculum.stages],
            # wall-clock time stays out so equal seeds give identical manifests
            "trajectory": [{k: v for k, v in r.items() if k != "seconds"} for r in self.log],
            "frozen_log": self.frozen_log,
            "rollbacks": self.rollbacks,
            "total_steps": self.step,
        }


# ---------------------------------------------------------------------------
# diagnostics


def grammar_hints(grammar: Grammar) -> list[str]:
    """Refactoring hints: repeated type sequences and single-use chained types."""
    return [text for text, _ in _hints(grammar)]


def _hints(grammar: Grammar) -> list[tuple[str, set]]:
    """Each hint with the rule ids it concerns."""
    hints = []
    rules = [r for r in grammar.rules if not r.primitive]
    for a in rules:
        if a.arity < 2:
            continue
        for b in rules:
            if b is a or b.arity <= a.arity or b.lhs == a.lhs:
                continue
            for i in range(b.arity - a.arity + 1):
                if b.rhs[i:i + a.arity] == a.rhs:
                    hints.append((f"type-reuse: rule '{b.rule_id}' repeats '{' '.join(a.rhs)}'; "
                                  f"consider using '{a.lhs}' there", {a.rule_id, b.rule_id}))
                    break
    uses: dict[str, list] = {}
    for r in rules:
        if r.transparent:
            continue
        for t in r.rhs:
            uses.setdefault(t, []).append(r)
    prim = grammar.primitive_types()
    for t, users in sorted(uses.items()):
        producers = grammar.rules_for(t)
        if t in prim or len(users) != 1 or len(producers) != 1 or producers[0].transparent:
            continue
        hints.append((f"type-merge: '{t}' is produced only by '{producers[0].rule_id}' and used only in "
                      f"'{users[0].rule_id}'; consider inlining it", {producers[0].rule_id, users[0].rule_id}))
    return hints


def diagnose(model: CPG, grammar: Grammar | None = None, failing: Sequence[str] = (),
             header: str = "") -> str:
    grammar = grammar or model.grammar
    lines = [header] if header else []
    for rid, d in sorted(model.registry.items()):
        status = "frozen" if d.frozen else "unfrozen"
        flag = "  <-- did not converge" if rid in failing else ""
        lines.append(f"{rid}: {d.kind} {d.describe()} stage={d.stage} steps={d.steps} {status}{flag}")
    if model.dictionary.mode == LEARNED:
        vocab = model.dictionary.output_vocab + ["<empty>"]
        pairs = [f"{t}->{vocab[model.dictionary.greedy(t)]}" for t in model.dictionary.input_vocab]
        lines.append("dictionary: " + ", ".join(pairs))
    tokens = [f[len(TOKEN):] for f in failing if f.startswith(TOKEN)]
    if tokens:
        lines.append("dictionary entries that did not converge: " + ", ".join(tokens))
    # a hint is only a warning when it touches a rule that failed to converge
    failing = set(failing)
    warned = 0
    for text, rules in _hints(grammar):
        if rules & failing:
            warned += 1
            lines.append("warning: " + text)
        else:
            lines.append("hint: " + text)
    lines.append(f"warnings: {len(failing) + warned}")
    return "\n".join(lines)


def metrics_to_stage_drops(rows: Sequence[dict]) -> dict:
    """Accuracy drop at the start of each stage from metric rows (EMA before vs. first step)."""
    out = {}
    last_stage = None
    for r in rows:
        s = int(r["stage"])
        if s != last_stage:
            out[s] = 1.0 - float(r["acc"])
            last_stage = s
    return out
