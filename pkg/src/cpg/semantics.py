"""Dictionaries, per-rule semantic modules, and the generate/evaluate recursion.

Two value kinds flow through a computation tree:

* ``SeqValue``: a token sequence held as one-hot rows over the output
  vocabulary plus an explicit *empty* symbol.  During training, rows whose
  label is empty are kept as inert placeholders so that a choice which
  produced nothing can still receive gradient; rendering drops them.
* ``ExprValue``: a list of conjuncts whose arguments are either open slots
  or one-hot object rows, together with the objects exported upwards.

Copy modules choose, for each of ``W_out`` output segments, one child (or
nothing) and emit the concatenation of the chosen children.  Substitute
modules fill every open slot of their children's concatenated expression
with one of the concatenated objects.  Both realise the choice as a
selector-mask product so gradients reach the rule's distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import logical_form as lf
from .cfg import Grammar, ParseNode, parse as cfg_parse
from .neural import (FFNet, Param, Tensor, affine, cross_entropy, gather_rows, gumbel_noise,
                     gumbel_sample, linear_const, matmul, one_hot_rows, row_log_loss, select_copy, take,
                     vstack, DEFAULT_EPS)
from .rng import Streams

SEQ, EXPR = "SEQ", "EXPR"
COPY, SUBST, LEAF = "COPY", "SUBST", "LEAF"
LEARNED, SUPPLIED = "LEARNED", "SUPPLIED"
EMPTY_TOKEN = "<empty>"


class SemanticsError(ValueError):
    pass


class MissingModuleError(SemanticsError):
    pass


class OverflowError_(SemanticsError):
    """An input exceeded a module's fixed capacity."""


@dataclass
class Context:
    """Per-call evaluation settings.

    ``streams`` enables Gumbel noise (training); ``grad`` keeps empty rows
    and builds the differentiable graph.
    """
    tau: float = 1.0
    streams: Streams | None = None
    grad: bool = False
    trace: list | None = None
    used: dict = field(default_factory=dict)
    empty_terms: list = field(default_factory=list)

    def rng(self, name: str):
        return None if self.streams is None else self.streams.get("noise:" + name)


# ---------------------------------------------------------------------------
# values


class SeqValue:
    __slots__ = ("rows", "labels")

    def __init__(self, rows: Tensor | None, labels: Sequence[int]):
        self.rows = rows
        self.labels = list(labels)

    def __len__(self) -> int:
        return len(self.labels)

    def tokens(self, vocab: Sequence[str]) -> list[str]:
        n = len(vocab)
        return [vocab[i] for i in self.labels if i != n]


Ref = tuple  # (Tensor, row index) pointing at a one-hot object row


@dataclass
class ExprConjunct:
    definite: bool
    suffix: str
    items: list           # items[0] is the predicate stem; each a Ref or None (open slot)

    @property
    def skeleton(self) -> str:
        star = "*" if self.definite else ""
        holes = ", ".join("{}" for _ in self.items[1:])
        return f"{star}{{}}{self.suffix}({holes})"


@dataclass
class ExprValue:
    conjuncts: list
    objs: list

    @property
    def open_slots(self) -> int:
        return sum(it is None for c in self.conjuncts for it in c.items)


def ref_label(ref: Ref) -> int:
    t, r = ref
    return int(np.argmax(t.data[r]))


# ---------------------------------------------------------------------------
# dictionaries


class LearnedDictionary:
    """Token -> one output token or nothing, through a small FF net."""

    mode = LEARNED

    def __init__(self, input_vocab: Sequence[str], output_vocab: Sequence[str], hidden: int = 30,
                 seed: int = 0, empty_bias: float = 2.0):
        self.input_vocab = list(input_vocab)
        self.output_vocab = list(output_vocab)
        self.index = {t: i for i, t in enumerate(self.input_vocab)}
        out_bias = np.zeros(len(self.output_vocab) + 1)
        out_bias[-1] = empty_bias
        rng = Streams(seed).get("init:dictionary")
        self.net = FFNet(len(self.input_vocab), len(self.output_vocab) + 1, hidden, rng, out_bias, "dictionary")
        self._init = [p.data.copy() for p in self.net.params]
        self.frozen: dict[str, int] = {}
        self.stage: dict[str, int] = {}

    @property
    def empty_index(self) -> int:
        return len(self.output_vocab)

    @property
    def n_out(self) -> int:
        return len(self.output_vocab) + 1

    @property
    def params(self) -> list[Param]:
        return self.net.params

    def _onehot(self, token: str) -> Tensor:
        if token not in self.index:
            raise SemanticsError(f"unknown dictionary key {token!r}")
        x = np.zeros((1, len(self.input_vocab)))
        x[0, self.index[token]] = 1.0
        return Tensor(x)

    def logits(self, token: str) -> Tensor:
        return self.net(self._onehot(token))

    def greedy(self, token: str) -> int:
        if token in self.frozen:
            return self.frozen[token]
        return int(np.argmax(self.logits(token).data))

    def lookup(self, ptype: str, token: str, position: int, ctx: Context) -> SeqValue:
        if token not in self.index:
            raise SemanticsError(f"unknown dictionary key {token!r}")
        if token in self.frozen:
            label = self.frozen[token]
            rows = Tensor(one_hot_rows(np.array([label]), self.n_out))
        else:
            logits = self.logits(token)
            noise = None
            rng = ctx.rng("dictionary:" + token)
            if rng is not None:
                noise = gumbel_noise(rng, logits.shape)
            rows = gumbel_sample(logits, ctx.tau, noise)
            label = int(np.argmax(rows.data[0]))
            if ctx.grad:
                ctx.empty_terms.append(row_log_loss(logits, self.empty_index))
        if not ctx.grad and label == self.empty_index:
            return SeqValue(None, [])
        return SeqValue(rows, [label])

    def restart(self) -> None:
        """Put the net back to its initial weights; frozen tokens keep their outputs."""
        for p, w in zip(self.net.params, self._init):
            if not p.frozen:
                p.data[...] = w

    def thaw(self, tokens: Iterable[str]) -> None:
        for t in tokens:
            self.frozen.pop(t, None)
            self.stage.pop(t, None)
        for p in self.net.params:
            p.frozen = False

    def freeze(self, tokens: Iterable[str], stage: int | None = None) -> list[str]:
        done = []
        for t in tokens:
            if t not in self.frozen:
                self.frozen[t] = self.greedy(t)
                self.stage[t] = stage
                done.append(t)
        return done

    def state_dict(self) -> dict:
        return {
            "mode": LEARNED,
            "input_vocab": self.input_vocab,
            "output_vocab": self.output_vocab,
            "hidden": self.net.hidden_size,
            "w1": self.net.w1.data.tolist(), "b1": self.net.b1.data.tolist(),
            "w2": self.net.w2.data.tolist(), "b2": self.net.b2.data.tolist(),
            "frozen": dict(self.frozen),
            "stage": dict(self.stage),
        }

    def load_state(self, state: dict) -> None:
        for name in ("w1", "b1", "w2", "b2"):
            getattr(self.net, name).data[...] = np.asarray(state[name], dtype=float)
        self.frozen = {k: int(v) for k, v in state.get("frozen", {}).items()}
        self.stage = dict(state.get("stage", {}))


@dataclass
class Template:
    conjuncts: list     # [(definite, suffix, [item...])]; item = ("slot",) | ("pos",) | ("lit", str)
    objs: list          # [("pos",) | ("lit", str)]


def _template_item(sym: str):
    if sym == "y":
        return ("slot",)
    if sym == "@":
        return ("pos",)
    return ("lit", sym)


def parse_template(expr: str, objs: str) -> Template:
    conjuncts = []
    if expr.strip() != "_":
        for c in lf.parse_conjuncts(expr):
            items = [_template_item(c.stem)] + [_template_item(a) for a in c.args]
            conjuncts.append((c.definite, c.suffix, items))
    obj_items = [] if objs.strip() in ("", "_") else [_template_item(o) for o in objs.split()]
    if any(o[0] == "slot" for o in obj_items):
        raise SemanticsError("objects cannot be slots")
    return Template(conjuncts, obj_items)


class ObjectVocab:
    """Constants plus stringified token positions."""

    def __init__(self, constants: Iterable[str], max_positions: int = 64):
        words = [str(i) for i in range(max_positions)]
        seen = set(words)
        for c in constants:
            if c not in seen:
                seen.add(c)
                words.append(c)
        self.words = words
        self.index = {w: i for i, w in enumerate(words)}
        self.max_positions = max_positions

    def __len__(self) -> int:
        return len(self.words)

    def id(self, word: str) -> int | None:
        return self.index.get(word)


class SuppliedDictionary:
    """Fixed table from (type, token) or token to an expression template.

    Rows whose type column is ``*`` are looked up by token alone; the
    others by (primitive type, token), which is how verbs of different
    types get different templates.
    """

    mode = SUPPLIED

    def __init__(self, table: dict, max_positions: int = 64):
        self.table = table
        consts = []
        for t in table.values():
            for _, _, items in t.conjuncts:
                consts.extend(i[1] for i in items if i[0] == "lit")
            consts.extend(o[1] for o in t.objs if o[0] == "lit")
        self.objects = ObjectVocab(consts, max_positions)
        self.frozen: dict = {}
        self.params: list = []

    @classmethod
    def from_text(cls, text: str, max_positions: int = 64) -> "SuppliedDictionary":
        table = {}
        for number, raw in enumerate(text.splitlines(), 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise SemanticsError(f"line {number}: expected 4 tab-separated fields, got {len(parts)}")
            ptype, token, expr, objs = (p.strip() for p in parts)
            key = (None if ptype == "*" else ptype, token)
            if key in table:
                raise SemanticsError(f"line {number}: duplicate entry {ptype} {token}")
            try:
                table[key] = parse_template(expr, objs)
            except (lf.LogicalFormError, SemanticsError) as e:
                raise SemanticsError(f"line {number}: {e}") from None
        return cls(table, max_positions)

    @classmethod
    def load(cls, path, max_positions: int = 64) -> "SuppliedDictionary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), max_positions)

    def template(self, ptype: str, token: str) -> Template:
        t = self.table.get((ptype, token))
        if t is None:
            t = self.table.get((None, token))
        if t is None:
            raise SemanticsError(f"unknown dictionary key ({ptype!r}, {token!r})")
        return t

    def _const(self, item, position: int) -> str:
        return str(position) if item[0] == "pos" else item[1]

    def lookup(self, ptype: str, token: str, position: int, ctx: Context | None = None) -> ExprValue:
        if position >= self.objects.max_positions:
            raise OverflowError_(f"position {position} exceeds max_positions")
        t = self.template(ptype, token)
        words = []
        for _, _, items in t.conjuncts:
            words.extend(self._const(i, position) for i in items if i[0] != "slot")
        words.extend(self._const(o, position) for o in t.objs)
        ids = []
        for w in words:
            i = self.objects.id(w)
            if i is None:
                raise SemanticsError(f"object {w!r} missing from the object vocabulary")
            ids.append(i)
        const = Tensor(one_hot_rows(np.array(ids, dtype=int), len(self.objects))) if ids else None
        k = 0
        conjuncts = []
        for definite, suffix, items in t.conjuncts:
            filled = []
            for i in items:
                if i[0] == "slot":
                    filled.append(None)
                else:
                    filled.append((const, k))
                    k += 1
            conjuncts.append(ExprConjunct(definite, suffix, filled))
        objs = [(const, k + j) for j in range(len(t.objs))]
        return ExprValue(conjuncts, objs)


# ---------------------------------------------------------------------------
# module distributions


class ModuleDist:
    """Learnable rows x cols categorical map owned by one grammar rule."""

    def __init__(self, rule_id: str, kind: str, rows: int, cols: int, seed: int = 0,
                 init_scale: float = 0.1, in_dim: int = 1, empty_bias: float = 0.0):
        self.rule_id = rule_id
        self.kind = kind
        self.rows = rows
        self.cols = cols
        rng = Streams(seed).get("init:" + rule_id)
        self.weight = Param(rng.normal(0.0, init_scale, (in_dim, rows * cols)), rule_id + ".weight")
        bias = np.zeros((rows, cols))
        if kind == COPY and empty_bias:
            bias[:, -1] = empty_bias
        self.bias = Param(bias.reshape(1, rows * cols), rule_id + ".bias")
        self._init = (self.weight.data.copy(), self.bias.data.copy())
        self.frozen_map: np.ndarray | None = None
        self.used: tuple[int, int] | None = None
        self.stage: int | None = None
        self.steps = 0

    @property
    def params(self) -> list[Param]:
        return [self.weight, self.bias]

    @property
    def frozen(self) -> bool:
        return self.frozen_map is not None

    def logits(self) -> Tensor:
        return linear_const(self.weight, self.bias, self.rows, self.cols)

    def sample(self, n_rows: int, n_cols: int, ctx: Context) -> Tensor:
        if n_rows > self.rows or n_cols > self.cols:
            raise OverflowError_(f"{self.rule_id}: needs {n_rows}x{n_cols}, capacity {self.rows}x{self.cols}")
        self.used = (n_rows, n_cols)
        ctx.used[self.rule_id] = (n_rows, n_cols)
        if self.frozen_map is not None:
            m = self.frozen_map[:n_rows]
            if len(m) < n_rows or (m >= n_cols).any():
                raise SemanticsError(f"{self.rule_id}: frozen map does not fit {n_rows}x{n_cols}")
            return Tensor(one_hot_rows(m, n_cols))
        logits = self.logits()
        if (n_rows, n_cols) != (self.rows, self.cols):
            logits = take(logits, slice(0, n_rows), slice(0, n_cols))
        rng = ctx.rng(self.rule_id)
        noise = None if rng is None else gumbel_noise(rng, (n_rows, n_cols))
        return gumbel_sample(logits, ctx.tau, noise)

    def greedy_map(self) -> np.ndarray:
        if self.frozen_map is not None:
            return self.frozen_map.copy()
        r, c = self.used if self.used is not None else (self.rows, self.cols)
        return np.argmax(self.logits().data[:r, :c], axis=1)

    def freeze(self, stage: int | None = None) -> None:
        if self.frozen_map is not None:
            return
        self.frozen_map = self.greedy_map()
        self.weight.frozen = True
        self.bias.frozen = True
        self.stage = stage

    def reset(self) -> None:
        """Unfreeze and return to the initial logits."""
        self.weight.data[...] = self._init[0]
        self.bias.data[...] = self._init[1]
        self.weight.frozen = self.bias.frozen = False
        self.frozen_map = None
        self.stage = None
        self.steps = 0

    def state_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rows": self.rows,
            "cols": self.cols,
            "weight": self.weight.data.tolist(),
            "bias": self.bias.data.tolist(),
            "frozen_map": None if self.frozen_map is None else [int(v) for v in self.frozen_map],
            "used": None if self.used is None else list(self.used),
            "stage": self.stage,
            "steps": self.steps,
        }

    def load_state(self, state: dict) -> None:
        self.weight.data[...] = np.asarray(state["weight"], dtype=float).reshape(self.weight.shape)
        self.bias.data[...] = np.asarray(state["bias"], dtype=float).reshape(self.bias.shape)
        fm = state.get("frozen_map")
        self.frozen_map = None if fm is None else np.asarray(fm, dtype=int)
        self.weight.frozen = self.bias.frozen = self.frozen_map is not None
        self.used = None if state.get("used") is None else tuple(state["used"])
        self.stage = state.get("stage")
        self.steps = int(state.get("steps", 0))

    def describe(self) -> str:
        m = self.greedy_map()
        if self.kind == COPY:
            arity = self.cols - 1
            parts = [str(int(v) + 1) for v in m if v < arity]
            return "[" + " ".join(parts) + "]"
        return "slots->objects [" + " ".join(str(int(v)) for v in m) + "]"


def build_registry(grammar: Grammar, mode: str, seed: int = 0, w_out: int = 8, s_max: int = 9,
                   o_max: int = 6, init_scale: float = 0.1, copy_empty_bias: float = 0.0) -> dict:
    registry = {}
    for rule in grammar.module_rules:
        if mode == SEQ:
            registry[rule.rule_id] = ModuleDist(rule.rule_id, COPY, w_out, rule.arity + 1, seed,
                                                init_scale, empty_bias=copy_empty_bias)
        else:
            registry[rule.rule_id] = ModuleDist(rule.rule_id, SUBST, s_max, o_max, seed, init_scale)
    return registry


# ---------------------------------------------------------------------------
# programs


def copy_apply(dist: ModuleDist, args: Sequence[SeqValue], ctx: Context, n_out: int,
               max_rows: int = 512) -> SeqValue:
    """Emit, for each output segment, the chosen child sequence (or nothing).

    The forward value equals indexing with the hard map; it is computed as
    a selector-mask product over the stacked child rows so that the map
    and the children both receive gradients.
    """
    arity = len(args)
    sample = dist.sample(dist.rows, arity + 1, ctx)
    choices = np.argmax(sample.data, axis=1)
    lengths = [len(a) for a in args]
    starts = np.concatenate([[0], np.cumsum(lengths)]).astype(int)
    empty_row = int(starts[-1])
    parts = [a.rows for a in args if len(a)]
    parts.append(Tensor(one_hot_rows(np.array([n_out - 1]), n_out)))
    stacked = vstack(parts)
    child_labels = [lab for a in args for lab in a.labels]

    index_rows, slots, labels = [], [], []
    for k, c in enumerate(choices):
        if c < arity:
            length = lengths[c]
        else:
            length = 1 if ctx.grad else 0
        for o in range(length):
            row = [int(starts[cc] + o) if o < lengths[cc] else empty_row for cc in range(arity)]
            row.append(empty_row)
            index_rows.append(row)
            slots.append(k)
            labels.append(child_labels[starts[c] + o] if c < arity else n_out - 1)
    if len(labels) > max_rows:
        raise OverflowError_(f"{dist.rule_id}: output of {len(labels)} rows exceeds {max_rows}")
    if not labels:
        return SeqValue(None, [])
    out = select_copy(sample, stacked, np.asarray(index_rows, dtype=int), np.asarray(slots, dtype=int))
    return SeqValue(out, labels)


def pointwise_concat(args: Sequence[ExprValue]) -> ExprValue:
    conjuncts = [ExprConjunct(c.definite, c.suffix, list(c.items)) for a in args for c in a.conjuncts]
    objs = [o for a in args for o in a.objs]
    return ExprValue(conjuncts, objs)


def substitute_apply(dist: ModuleDist, args: Sequence[ExprValue], ctx: Context) -> ExprValue:
    """Fill every open slot with one of the concatenated objects.

    Slots and objects are numbered left to right.  A module that filled
    slots exports a single object upwards: the argument filled first in
    the first conjunct it completed (its head).  A module with nothing to
    fill passes its objects through.
    """
    value = pointwise_concat(args)
    open_slots = [(ci, ii) for ci, c in enumerate(value.conjuncts)
                  for ii, it in enumerate(c.items) if it is None]
    if not open_slots:
        return value
    if not value.objs:
        raise SemanticsError(f"{dist.rule_id}: open slots but no objects")
    sample = dist.sample(len(open_slots), len(value.objs), ctx)
    filled = matmul(sample, gather_rows(value.objs))
    for k, (ci, ii) in enumerate(open_slots):
        value.conjuncts[ci].items[ii] = (filled, k)
    head_conj = open_slots[0][0]
    in_head = [k for k, (ci, ii) in enumerate(open_slots) if ci == head_conj]
    args_only = [k for k in in_head if open_slots[k][1] >= 1]
    head = (args_only or in_head)[0]
    return ExprValue(value.conjuncts, [(filled, head)])


# ---------------------------------------------------------------------------
# computation trees


class CompNode:
    __slots__ = ("function", "dist", "children", "value", "rule_id")

    def __init__(self, function: str, rule_id: str, dist: ModuleDist | None = None,
                 children: Sequence["CompNode"] = (), value=None):
        self.function = function
        self.rule_id = rule_id
        self.dist = dist
        self.children = list(children)
        self.value = value

    def structure(self):
        if self.function == LEAF:
            return (LEAF, self.rule_id)
        return (self.function, id(self.dist), tuple(c.structure() for c in self.children))


def generate(tree: ParseNode, grammar: Grammar, registry: dict, dictionary, ctx: Context,
             trace: list | None = None) -> CompNode:
    """Map a parse tree to a computation tree, children first."""
    if tree.is_primitive:
        value = dictionary.lookup(tree.node_type, tree.token, tree.span[0], ctx)
        if trace is not None:
            trace.append((LEAF, tree.rule_id, None))
        return CompNode(LEAF, tree.rule_id, value=value)
    rule = grammar.rule(tree.rule_id)
    if rule.transparent:
        return generate(tree.children[0], grammar, registry, dictionary, ctx, trace)
    dist = registry.get(tree.rule_id)
    if dist is None:
        raise MissingModuleError(f"no module registered for rule {tree.rule_id!r}")
    children = [generate(c, grammar, registry, dictionary, ctx, trace) for c in tree.children]
    if trace is not None:
        trace.append((dist.kind, tree.rule_id, id(dist)))
    return CompNode(dist.kind, tree.rule_id, dist, children)


def evaluate(node: CompNode, ctx: Context, n_out: int | None = None):
    """Evaluate a computation tree bottom-up and return its value."""
    if node.function == LEAF:
        if ctx.trace is not None:
            ctx.trace.append(node.rule_id)
        return node.value
    values = [evaluate(c, ctx, n_out) for c in node.children]
    if ctx.trace is not None:
        ctx.trace.append(node.rule_id)
    if node.function == COPY:
        node.value = copy_apply(node.dist, values, ctx, n_out)
    elif node.function == SUBST:
        node.value = substitute_apply(node.dist, values, ctx)
    else:
        raise SemanticsError(f"unknown module kind {node.function}")
    return node.value


# ---------------------------------------------------------------------------
# losses and rendering


def align_sequence(labels: Sequence[int], target: Sequence[int], empty: int,
                   missing_cost: float = 2.0) -> tuple[list[int], int]:
    """Cheapest monotone alignment of produced rows to the target.

    Every row is assigned either a target token or the empty symbol; target
    tokens left without a row are counted as missing.  Returns the
    per-row assignment and the number of missing tokens.
    """
    m, n = len(labels), len(target)
    inf = math.inf
    cost = [[inf] * (n + 1) for _ in range(m + 1)]
    cost[0][0] = 0
    for i in range(m + 1):
        for j in range(n + 1):
            here = cost[i][j]
            if here == inf:
                continue
            if i < m and j < n:
                c = here + (labels[i] != target[j])
                if c < cost[i + 1][j + 1]:
                    cost[i + 1][j + 1] = c
            if i < m:
                c = here + (labels[i] != empty)
                if c < cost[i + 1][j]:
                    cost[i + 1][j] = c
            if j < n:
                c = here + missing_cost
                if c < cost[i][j + 1]:
                    cost[i][j + 1] = c
    assign = [empty] * m
    missing = 0
    i, j = m, n
    while i or j:
        if i and j and cost[i][j] == cost[i - 1][j - 1] + (labels[i - 1] != target[j - 1]):
            assign[i - 1] = target[j - 1]
            i, j = i - 1, j - 1
        elif i and cost[i][j] == cost[i - 1][j] + (labels[i - 1] != empty):
            i -= 1
        else:
            missing += 1
            j -= 1
    return assign, missing


def seq_loss(value: SeqValue, target: Sequence[int], empty: int, eps: float = DEFAULT_EPS) -> Tensor:
    assign, missing = align_sequence(value.labels, target, empty)
    penalty = -math.log(eps)
    m = len(assign)
    if m == 0:
        return Tensor(penalty if missing else 0.0)
    ce = cross_entropy(value.rows, assign, eps)
    return affine(ce, m / (m + missing), penalty * missing / (m + missing))


def expr_loss(value: ExprValue, target: str, objects: ObjectVocab, eps: float = DEFAULT_EPS) -> Tensor:
    """Cross entropy of every filled argument against the matching target conjunct.

    Output conjuncts are matched to target conjuncts with the same
    skeleton, preferring the candidate that agrees on the most arguments.
    """
    wanted = lf.parse_conjuncts(target)
    free = list(range(len(wanted)))
    refs, ids = [], []
    missing = 0
    for c in value.conjuncts:
        labels = [None if it is None else ref_label(it) for it in c.items]
        best, best_score = None, -1
        for t in free:
            w = wanted[t]
            if w.skeleton != c.skeleton:
                continue
            score = sum(lab is not None and objects.words[lab] == f for lab, f in zip(labels, w.fillers))
            if score > best_score:
                best, best_score = t, score
        if best is None:
            missing += len(c.items)
            continue
        free.remove(best)
        for it, f in zip(c.items, wanted[best].fillers):
            oid = objects.id(f)
            if it is None or oid is None:
                missing += 1
            else:
                refs.append(it)
                ids.append(oid)
    missing += sum(len(wanted[t].fillers) for t in free)
    penalty = -math.log(eps)
    if not refs:
        return Tensor(penalty if missing else 0.0)
    m = len(refs)
    ce = cross_entropy(gather_rows(refs), ids, eps)
    return affine(ce, m / (m + missing), penalty * missing / (m + missing))


def render_expr(value: ExprValue, objects: ObjectVocab) -> str:
    conjs = []
    for c in value.conjuncts:
        words = ["y" if it is None else objects.words[ref_label(it)] for it in c.items]
        conjs.append(lf.Conjunct(c.definite, words[0], c.suffix, tuple(words[1:])))
    return lf.canonical(conjs)


def render_value(value, dictionary) -> str:
    if isinstance(value, SeqValue):
        return " ".join(value.tokens(dictionary.output_vocab))
    return render_expr(value, dictionary.objects)


def run_cpg(grammar: Grammar, registry: dict, dictionary, sentence: Sequence[str], ctx: Context,
            tree: ParseNode | None = None):
    """Parse, generate and evaluate one input; returns the semantic value."""
    if tree is None:
        tree = cfg_parse(grammar, sentence)
    node = generate(tree, grammar, registry, dictionary, ctx)
    n_out = dictionary.n_out if dictionary.mode == LEARNED else None
    return evaluate(node, ctx, n_out)
