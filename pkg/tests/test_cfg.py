import itertools
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from cpg.cfg import (AmbiguityWarning, GrammarError, ParseError, load_grammar, parse, parse_types,
                     render_tree, tree_to_json, tree_types)
from cpg.data.scan import all_commands

TOY = '''
# toy grammar
t1: "jump" | "walk"
t2: "left"
t4: t1 t2
!t5: t4 | t1
start: t5
'''


def test_primitive_alternatives_become_rules():
    g = load_grammar(TOY)
    assert ("jump", "t1", 't1 -> "jump"') in g.primitive_rules
    assert ("walk", "t1", 't1 -> "walk"') in g.primitive_rules
    assert g.start_type == "t5"


@pytest.mark.parametrize("text, message", [
    ('t1:\nstart: t1', "empty body"),
    ('t1: "a" |\nstart: t1', "empty alternative"),
    ('t1: "a"\nt2: t1 t3\nstart: t2', "undeclared type"),
    ('t1: "a" | "a"\nstart: t1', "duplicate rule"),
    ('t1: "a"', "no start symbol"),
    ('t1: "a" t1\nstart: t1', "mixed tokens"),
    ('t1: "a"\n!t2: t1 t1\nstart: t2', "must be unary"),
    ('T1: "a"\nstart: T1', "bad type name"),
])
def test_malformed_grammars_are_rejected(text, message):
    with pytest.raises(GrammarError, match=message):
        load_grammar(text)


def test_errors_carry_line_numbers():
    with pytest.raises(GrammarError) as info:
        load_grammar('t1: "a"\n\nt2: t1 zz\nstart: t2')
    assert "line 3" in str(info.value)


def test_cogs_grammar_has_sixty_types(cogs_grammar):
    assert len(cogs_grammar.types) == 60


def test_jump_left_parse_shape(scan_grammar):
    tree = parse(scan_grammar, ["jump", "left"])
    node = tree
    while not node.is_primitive and len(node.children) == 1:
        node = node.children[0]
    assert node.rule_id == "d -> u dir"
    assert [c.rule_id for c in node.children] == ['u -> "jump"', 'dir -> "left"']


def test_single_token_parse_is_a_unary_chain(scan_grammar):
    tree = parse(scan_grammar, ["jump"])
    node, depth = tree, 0
    while not node.is_primitive:
        assert len(node.children) == 1
        node, depth = node.children[0], depth + 1
    assert node.token == "jump" and depth >= 1
    assert tree.node_type == scan_grammar.start_type


def test_cogs_sentence_has_one_leaf_per_token(cogs_grammar):
    tree = parse(cogs_grammar, "emma ate the bread".split())
    assert len(tree.leaves()) == 4
    assert {"np_det", "n_prop", "s_omis_tr"} <= tree_types(tree)


def test_parse_types_of_longer_sentence_keep_shared_rules(scan_grammar):
    small = parse_types(parse(scan_grammar, ["jump"]))
    large = parse_types(parse(scan_grammar, ["jump", "left"]))
    assert 'u -> "jump"' in small and 'u -> "jump"' in large


def test_parse_errors(scan_grammar):
    with pytest.raises(ParseError):
        parse(scan_grammar, [])
    with pytest.raises(ParseError):
        parse(scan_grammar, ["jump", "banana"])
    with pytest.raises(ParseError):
        parse(scan_grammar, ["left", "jump"])


def test_ambiguity_is_flagged_and_tie_broken_by_rule_order():
    g = load_grammar('a: "x"\npair: a a\nleft: pair a\nright: a pair\n!s: left | right\nstart: s')
    with pytest.warns(AmbiguityWarning):
        tree = parse(g, ["x", "x", "x"])
    assert tree.children[0].rule_id == "left -> pair a"
    assert tree.ambiguous


def test_unambiguous_parse_is_silent(scan_grammar):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse(scan_grammar, "jump around left twice after walk".split())


def _rederive(grammar, node):
    """Expand the tree's rules top-down and return the derived token list."""
    if node.is_primitive:
        rule = grammar.rule(node.rule_id)
        assert rule.lhs == node.node_type
        return [rule.token]
    rule = grammar.rule(node.rule_id)
    assert tuple(c.node_type for c in node.children) == rule.rhs
    return [t for c in node.children for t in _rederive(grammar, c)]


def test_every_short_scan_command_parses_and_rederives(scan_grammar):
    commands = [c for c in all_commands() if len(c) <= 6]
    assert len(commands) > 1000
    for c in commands:
        tree = parse(scan_grammar, c)
        assert _rederive(scan_grammar, tree) == c
        assert parse_types(tree) <= {r.rule_id for r in scan_grammar.rules}


SCAN_COMMANDS = all_commands()


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SCAN_COMMANDS))
def test_round_trip_and_determinism(scan_grammar, command):
    first = parse(scan_grammar, command)
    assert first.tokens() == command
    assert parse(scan_grammar, command) == first


def test_bundled_cogs_sentences_round_trip(cogs_grammar, cogs_few_shot, cogs_recombination):
    for ex in itertools.chain(cogs_few_shot, cogs_recombination):
        tree = parse(cogs_grammar, ex.input)
        assert tuple(tree.tokens()) == ex.input
        assert _rederive(cogs_grammar, tree) == list(ex.input)


def test_renderings(scan_grammar):
    tree = parse(scan_grammar, ["jump", "left"])
    text = render_tree(tree, scan_grammar)
    assert "d -> u dir" in text and "(transparent)" in text
    js = tree_to_json(tree)
    assert js["type"] == scan_grammar.start_type
