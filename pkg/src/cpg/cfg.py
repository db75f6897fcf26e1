"""Context-free grammars, the grammar file format and an Earley chart parser.

Grammar files are line oriented::

    # comment
    u: "walk" | "look"          primitive rules, one per quoted token
    d: u dir | turn dir          non-primitive rules, one per alternative
    !v: d | u                    transparent unary rules (identity semantics)
    start: c                     start symbol

A line starting with ``|`` continues the alternatives of the previous
line.  Rule ids are ``lhs -> rhs`` for non-primitive rules and
``lhs -> "token"`` for primitive ones; declaration order is the rule
index used to break ties between derivations.
"""
from __future__ import annotations

import re
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Sequence

TYPE_RE = re.compile(r"[a-z_][a-z0-9_]*\Z")
HEAD_RE = re.compile(r"\s*(!?)([^:\s]+)\s*:(.*)\Z")
TOKEN_RE = re.compile(r'"([^"\s]+)"\Z')


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ParseError(ValueError):
    pass


class AmbiguityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Rule:
    rule_id: str
    lhs: str
    rhs: tuple[str, ...]
    index: int
    token: str | None = None
    transparent: bool = False

    @property
    def primitive(self) -> bool:
        return self.token is not None

    @property
    def arity(self) -> int:
        return len(self.rhs)


@dataclass(frozen=True)
class Grammar:
    types: frozenset
    rules: tuple[Rule, ...]
    start_type: str

    def __post_init__(self):
        by_id = {}
        for r in self.rules:
            if r.rule_id in by_id:
                raise GrammarError(f"duplicate rule {r.rule_id!r}")
            by_id[r.rule_id] = r
        object.__setattr__(self, "_by_id", by_id)
        for r in self.rules:
            for t in (r.lhs,) + r.rhs:
                if t not in self.types:
                    raise GrammarError(f"undeclared type {t!r} in rule {r.rule_id!r}")
            if not r.primitive and not r.rhs:
                raise GrammarError(f"empty body in rule {r.rule_id!r}")
        if self.start_type not in self.types:
            raise GrammarError(f"undeclared start type {self.start_type!r}")
        lexicon = defaultdict(list)
        by_lhs = defaultdict(list)
        for r in self.rules:
            if r.primitive:
                lexicon[r.token].append(r)
            else:
                by_lhs[r.lhs].append(r)
        object.__setattr__(self, "_lexicon", dict(lexicon))
        object.__setattr__(self, "_by_lhs", dict(by_lhs))

    @property
    def primitive_rules(self) -> list[tuple[str, str, str]]:
        return [(r.token, r.lhs, r.rule_id) for r in self.rules if r.primitive]

    @property
    def nonprimitive_rules(self) -> list[tuple[str, tuple[str, ...], str]]:
        return [(r.lhs, r.rhs, r.rule_id) for r in self.rules if not r.primitive]

    def rule(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def __contains__(self, rule_id: str) -> bool:
        return rule_id in self._by_id

    def rules_for(self, lhs: str) -> list[Rule]:
        return self._by_lhs.get(lhs, [])

    def token_rules(self, token: str) -> list[Rule]:
        return self._lexicon.get(token, [])

    @property
    def vocabulary(self) -> list[str]:
        return list(self._lexicon)

    @property
    def module_rules(self) -> list[Rule]:
        """Non-primitive rules that own a learnable module."""
        return [r for r in self.rules if not r.primitive and not r.transparent]

    def primitive_types(self) -> set[str]:
        return {r.lhs for r in self.rules if r.primitive}


def rule_id_for(lhs: str, rhs: Sequence[str] = (), token: str | None = None) -> str:
    if token is not None:
        return f'{lhs} -> "{token}"'
    return f"{lhs} -> {' '.join(rhs)}"


def _logical_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (first line number, joined line) with continuations folded in."""
    pending: tuple[int, str] | None = None
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("|"):
            if pending is None:
                raise GrammarError("continuation line without a rule", number)
            pending = (pending[0], pending[1] + " " + line)
            continue
        if pending is not None:
            yield pending
        pending = (number, line)
    if pending is not None:
        yield pending


def load_grammar(text: str) -> Grammar:
    """Parse a grammar file and validate it."""
    start = None
    declared: set[str] = set()
    pending: list[tuple[int, str, bool, list[list[str]]]] = []
    for number, line in _logical_lines(text):
        m = HEAD_RE.match(line)
        if not m:
            raise GrammarError(f"expected 'type: body', got {line!r}", number)
        bang, lhs, body = m.group(1) == "!", m.group(2), m.group(3).strip()
        if lhs == "start" and not bang:
            if start is not None:
                raise GrammarError("start declared twice", number)
            if not TYPE_RE.match(body):
                raise GrammarError(f"bad start type {body!r}", number)
            start = body
            continue
        if not TYPE_RE.match(lhs):
            raise GrammarError(f"bad type name {lhs!r}", number)
        if not body:
            raise GrammarError(f"empty body for {lhs!r}", number)
        alternatives = [alt.split() for alt in body.split("|")]
        if any(not alt for alt in alternatives):
            raise GrammarError(f"empty alternative for {lhs!r}", number)
        declared.add(lhs)
        pending.append((number, lhs, bang, alternatives))
    if start is None:
        raise GrammarError("no start symbol declared")

    rules: list[Rule] = []
    seen: set[str] = set()
    types = set(declared)
    for number, lhs, transparent, alternatives in pending:
        for alt in alternatives:
            tokens = [TOKEN_RE.match(sym) for sym in alt]
            if all(tokens):
                if transparent:
                    raise GrammarError(f"transparent rule for {lhs!r} cannot be primitive", number)
                if len(alt) != 1:
                    raise GrammarError(f"primitive alternative must be a single token: {alt}", number)
                rid = rule_id_for(lhs, token=tokens[0].group(1))
                rule = Rule(rid, lhs, (), len(rules), token=tokens[0].group(1))
            elif any(tokens):
                raise GrammarError(f"mixed tokens and types in {alt}", number)
            else:
                for sym in alt:
                    if not TYPE_RE.match(sym):
                        raise GrammarError(f"bad type name {sym!r}", number)
                    if sym not in declared:
                        raise GrammarError(f"undeclared type {sym!r}", number)
                if transparent and len(alt) != 1:
                    raise GrammarError(f"transparent rule for {lhs!r} must be unary", number)
                rid = rule_id_for(lhs, alt)
                rule = Rule(rid, lhs, tuple(alt), len(rules), transparent=transparent)
            if rule.rule_id in seen:
                raise GrammarError(f"duplicate rule {rule.rule_id!r}", number)
            seen.add(rule.rule_id)
            rules.append(rule)
    if start not in declared:
        raise GrammarError(f"undeclared start type {start!r}")
    return Grammar(frozenset(types), tuple(rules), start)


def load_grammar_file(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return load_grammar(fh.read())


# ---------------------------------------------------------------------------
# parse trees


@dataclass(frozen=True)
class ParseNode:
    rule_id: str
    node_type: str
    children: tuple["ParseNode", ...] = ()
    token: str | None = None
    span: tuple[int, int] = (0, 0)
    ambiguous: bool = field(default=False, compare=False)

    @property
    def is_primitive(self) -> bool:
        return self.token is not None

    def leaves(self) -> list["ParseNode"]:
        if self.is_primitive:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def tokens(self) -> list[str]:
        return [leaf.token for leaf in self.leaves()]

    def walk(self) -> Iterator["ParseNode"]:
        """Postfix traversal (children first, left to right)."""
        for c in self.children:
            yield from c.walk()
        yield self

    def structure(self):
        """Rule skeleton without tokens or spans, for structural comparisons."""
        if self.is_primitive:
            return self.node_type
        return (self.rule_id, tuple(c.structure() for c in self.children))


def parse_types(tree: ParseNode) -> set[str]:
    """All rule ids used anywhere in ``tree``."""
    return {n.rule_id for n in tree.walk()}


def tree_types(tree: ParseNode) -> set[str]:
    """All node types used anywhere in ``tree``."""
    return {n.node_type for n in tree.walk()}


def render_tree(tree: ParseNode, grammar: Grammar | None = None, indent: str = "  ") -> str:
    lines = []

    def visit(node: ParseNode, depth: int) -> None:
        label = node.rule_id
        if grammar is not None and not node.is_primitive and grammar.rule(node.rule_id).transparent:
            label += "  (transparent)"
        lines.append(f"{indent * depth}{label}")
        for c in node.children:
            visit(c, depth + 1)
    visit(tree, 0)
    return "\n".join(lines)


def tree_to_json(tree: ParseNode) -> dict:
    out = {"rule_id": tree.rule_id, "type": tree.node_type, "span": list(tree.span)}
    if tree.is_primitive:
        out["token"] = tree.token
    else:
        out["children"] = [tree_to_json(c) for c in tree.children]
    return out


# ---------------------------------------------------------------------------
# Earley parsing


class _Chart:
    """Completed constituents (type, start, end) -> rule indices."""

    def __init__(self):
        self.done: dict[tuple[str, int, int], list[int]] = defaultdict(list)

    def add(self, key, rule_index: int) -> None:
        entry = self.done[key]
        if rule_index not in entry:
            entry.append(rule_index)


def _recognise(g: Grammar, sentence: Sequence[str]) -> _Chart:
    n = len(sentence)
    rules = g.rules
    chart = _Chart()
    token_types = []
    for i, tok in enumerate(sentence):
        found = g.token_rules(tok)
        if not found:
            raise ParseError(f"unknown token {tok!r} at position {i}")
        token_types.append({r.lhs: r.index for r in found})
        for r in found:
            chart.add((r.lhs, i, i + 1), r.index)

    # items are (rule index, dot, origin); -1 is the goal rule "-> start"
    sets: list[list[tuple[int, int, int]]] = [[] for _ in range(n + 1)]
    members: list[set] = [set() for _ in range(n + 1)]
    waiting: list[dict[str, list[tuple[int, int, int]]]] = [defaultdict(list) for _ in range(n + 1)]

    def rhs_of(ri: int) -> tuple[str, ...]:
        return (g.start_type,) if ri < 0 else rules[ri].rhs

    def add(k: int, item: tuple[int, int, int]) -> None:
        if item not in members[k]:
            members[k].add(item)
            sets[k].append(item)

    add(0, (-1, 0, 0))
    for k in range(n + 1):
        predicted: set[str] = set()
        j = 0
        while j < len(sets[k]):
            ri, dot, origin = sets[k][j]
            j += 1
            rhs = rhs_of(ri)
            if dot < len(rhs):
                nxt = rhs[dot]
                waiting[k][nxt].append((ri, dot, origin))
                if nxt not in predicted:
                    predicted.add(nxt)
                    for r in g.rules_for(nxt):
                        add(k, (r.index, 0, k))
                if k < n and nxt in token_types[k]:
                    add(k + 1, (ri, dot + 1, origin))
            elif ri >= 0:
                lhs = rules[ri].lhs
                chart.add((lhs, origin, k), ri)
                for pri, pdot, porigin in waiting[origin].get(lhs, ()):
                    add(k, (pri, pdot + 1, porigin))
    if (-1, 1, 0) not in members[n]:
        raise ParseError("no derivation for: " + " ".join(sentence))
    return chart


class _Extractor:
    def __init__(self, g: Grammar, sentence: Sequence[str], chart: _Chart):
        self.g = g
        self.sentence = sentence
        self.done = chart.done
        self.counts: dict = {}
        self.seq_counts: dict = {}
        self.active: set = set()
        self.ambiguous = False

    def count(self, typ: str, i: int, j: int) -> int:
        """Number of derivations of typ over [i, j), capped at 2."""
        key = (typ, i, j)
        if key in self.counts:
            return self.counts[key]
        if key not in self.done or key in self.active:
            return 0
        self.active.add(key)
        total = 0
        for ri in self.done[key]:
            rule = self.g.rules[ri]
            total += 1 if rule.primitive else self.count_seq(rule.rhs, 0, i, j)
            if total >= 2:
                break
        self.active.discard(key)
        self.counts[key] = min(total, 2)
        return self.counts[key]

    def count_seq(self, rhs: tuple, t: int, start: int, j: int) -> int:
        """Derivations of rhs[t:] over [start, j), capped at 2."""
        key = (rhs, t, start, j)
        if key in self.seq_counts:
            return self.seq_counts[key]
        last = len(rhs) - 1
        if t == last:
            total = self.count(rhs[t], start, j)
        else:
            total = 0
            for mid in range(start + 1, j - (last - t) + 1):
                head = self.count(rhs[t], start, mid)
                if head:
                    total += head * self.count_seq(rhs, t + 1, mid, j)
                    if total >= 2:
                        break
        self.seq_counts[key] = min(total, 2)
        return self.seq_counts[key]

    def first_split(self, rhs: tuple, i: int, j: int) -> list[int] | None:
        bounds = [i]
        for t in range(len(rhs) - 1):
            start = bounds[-1]
            for mid in range(start + 1, j - (len(rhs) - 1 - t) + 1):
                if self.count(rhs[t], start, mid) and self.count_seq(rhs, t + 1, mid, j):
                    bounds.append(mid)
                    break
            else:
                return None
        bounds.append(j)
        return bounds

    def build(self, typ: str, i: int, j: int) -> ParseNode:
        key = (typ, i, j)
        is_amb = self.count(typ, i, j) > 1
        if is_amb:
            self.ambiguous = True
        for ri in sorted(self.done.get(key, ())):
            rule = self.g.rules[ri]
            if rule.primitive:
                return ParseNode(rule.rule_id, typ, (), rule.token, (i, j), is_amb)
            if not self.count_seq(rule.rhs, 0, i, j):
                continue
            bounds = self.first_split(rule.rhs, i, j)
            kids = tuple(self.build(t, a, b) for t, a, b in zip(rule.rhs, bounds, bounds[1:]))
            return ParseNode(rule.rule_id, typ, kids, None, (i, j), is_amb)
        raise ParseError(f"no derivation of {typ} over tokens {i}..{j}")


def parse(g: Grammar, sentence: Sequence[str]) -> ParseNode:
    """Parse a token list into a tree rooted at the start type.

    When several derivations exist the one using the lowest rule index at
    the highest ambiguous node (then the leftmost split) is returned, the
    affected nodes are flagged ``ambiguous`` and an AmbiguityWarning is
    issued.
    """
    sentence = list(sentence)
    if not sentence:
        raise ParseError("empty sentence")
    chart = _recognise(g, sentence)
    ex = _Extractor(g, sentence, chart)
    tree = ex.build(g.start_type, 0, len(sentence))
    if ex.ambiguous:
        warnings.warn("ambiguous parse for: " + " ".join(sentence), AmbiguityWarning, stacklevel=2)
    return tree


def tokenize(text: str) -> list[str]:
    return text.split()
