import random

import pytest
from hypothesis import given, settings, strategies as st

from cpg.cfg import parse, parse_types, tree_types
from cpg.data.cogs import (FEW_SHOT_SOURCE, CogsGenerator, bundled_splits, generate_cogs_dataset, surface_text,
                           to_cogs_release)
from cpg.data.fewshot import build_few_shot, example_keys
from cpg.data.io import (DataFormatError, Example, load_dataset, parse_cogs_line, parse_scan_line,
                         save_dataset)
from cpg.data.scan import ScanError, generate_scan_dataset, make_splits, sample_examples, scan_oracle
from cpg.logical_form import canonicalize, from_cogs

SCAN = generate_scan_dataset()


def test_oracle_examples():
    assert scan_oracle(["jump"]) == ["I_JUMP"]
    assert scan_oracle("jump left".split()) == ["I_TURN_LEFT", "I_JUMP"]
    assert scan_oracle("jump left twice".split()) == ["I_TURN_LEFT", "I_JUMP"] * 2
    with pytest.raises(ScanError):
        scan_oracle("left jump".split())


def test_oracle_agrees_with_reference_pairs(scan_pairs):
    assert len(scan_pairs) >= 20
    for ex in scan_pairs:
        assert scan_oracle(ex.input) == list(ex.target), ex.input_text


def test_generated_dataset_size_and_order():
    assert abs(len(SCAN) - 21_000) <= 2_100
    assert len({e.input for e in SCAN}) == len(SCAN)
    assert generate_scan_dataset() == SCAN


def test_add_jump_split():
    train, test = make_splits(SCAN, "add_jump")
    assert ("jump",) in {e.input for e in train}
    assert all("jump" not in e.input for e in train if e.input != ("jump",))
    assert all("jump" in e.input for e in test)
    assert len(train) + len(test) == len(SCAN)


def test_length_split():
    train, test = make_splits(SCAN, "length", cutoff=22)
    assert all(len(e.target) <= 22 for e in train)
    assert test and all(len(e.target) > 22 for e in test)
    with pytest.raises(ValueError):
        make_splits(SCAN, "mcd")


def test_sampling_is_deterministic():
    assert sample_examples(SCAN, 50, seed=3) == sample_examples(SCAN, 50, seed=3)
    assert sample_examples(SCAN, 50, seed=3) != sample_examples(SCAN, 50, seed=4)


def test_scan_few_shot_has_fourteen_examples(scan_grammar):
    for kind in ("add_jump", "length"):
        train, _ = make_splits(SCAN, kind)
        assert len(build_few_shot(train, scan_grammar)) == 14


def test_cogs_few_shot_has_twenty_two_examples_covering_every_type(cogs_grammar, cogs_few_shot):
    source = generate_cogs_dataset(FEW_SHOT_SOURCE["n"], seed=FEW_SHOT_SOURCE["seed"],
                                   pp_prob=FEW_SHOT_SOURCE["pp_prob"])
    few = build_few_shot(source, cogs_grammar, key="types")
    assert len(few) == 22
    assert [e.input for e in few] == [e.input for e in cogs_few_shot]
    covered = set().union(*(tree_types(parse(cogs_grammar, e.input)) for e in cogs_few_shot))
    assert covered == set(cogs_grammar.types)


def test_one_example_dataset_keeps_it(scan_grammar):
    ex = Example(("walk",), ("I_WALK",))
    assert build_few_shot([ex], scan_grammar) == [ex]


def test_unparsable_examples_are_skipped_with_a_warning(scan_grammar):
    bad = Example(("fly",), ("I_FLY",))
    with pytest.warns(UserWarning, match="unparsable"):
        assert build_few_shot([bad, Example(("walk",), ("I_WALK",))], scan_grammar)[0].input == ("walk",)


def keys_of(grammar, examples, key):
    return [example_keys(parse(grammar, e.input), key) for e in examples]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 60))
def test_few_shot_covers_the_source_and_each_example_adds_something(scan_grammar, seed, size):
    source = random.Random(seed).sample(SCAN, size)
    few = build_few_shot(source, scan_grammar)
    used = set().union(*(parse_types(parse(scan_grammar, e.input)) for e in source))
    kept = keys_of(scan_grammar, few, "rules")
    assert set().union(*kept) == used
    for i, k in enumerate(kept):
        assert not k <= set().union(set(), *kept[:i])
    lengths = [len(e.input) for e in few]
    assert lengths == sorted(lengths)
    # ties keep their source order
    positions = [source.index(e) for e in few]
    assert all(len(few[i].input) < len(few[i + 1].input) or positions[i] < positions[i + 1]
               for i in range(len(few) - 1))


@pytest.mark.xfail(strict=True, reason="greedy length-ordered selection keeps 'look' although "
                   "'look thrice' later covers its rules; dropping it would contradict the 14-example count")
def test_few_shot_is_minimal_under_removal(scan_grammar):
    train, _ = make_splits(SCAN, "add_jump")
    kept = keys_of(scan_grammar, build_few_shot(train, scan_grammar), "rules")
    for i, k in enumerate(kept):
        assert not k <= set().union(*(kept[:i] + kept[i + 1:]))


def test_scan_file_format(tmp_path):
    assert parse_scan_line("IN: jump OUT: I_JUMP") == Example(("jump",), ("I_JUMP",))
    with pytest.raises(DataFormatError, match="line 4"):
        parse_scan_line("jump I_JUMP", 4)
    path = tmp_path / "d.txt"
    save_dataset(path, SCAN[:20])
    assert load_dataset(path) == SCAN[:20]


def test_cogs_file_format(tmp_path):
    line = "Emma ate the bread .\t* bread ( x _ 3 ) ; eat . agent ( x _ 1 , Emma ) AND eat . theme ( x _ 1 , x _ 3 )\tin_distribution"
    ex = parse_cogs_line(line)
    assert ex.input == ("emma", "ate", "the", "bread")
    assert ex.target == "*bread(3) eat.agent(1, Emma) eat.theme(1, 3)"
    assert ex.split_tag == "in_distribution"
    with pytest.raises(DataFormatError, match="line 2"):
        parse_cogs_line("only one field", 2)
    path = tmp_path / "d.tsv"
    save_dataset(path, [ex])
    assert load_dataset(path) == [ex]


def test_release_notation_round_trips():
    for ex in generate_cogs_dataset(200, seed=11, max_cp=2):
        assert from_cogs(to_cogs_release(ex.target)) == ex.target
        assert canonicalize(ex.target) == ex.target


def test_generator_is_deterministic_and_parses(cogs_grammar):
    a = generate_cogs_dataset(300, seed=4)
    assert a == generate_cogs_dataset(300, seed=4)
    assert len({e.input for e in a}) == 300
    function_words = {"the", "a", "was", "by", "to", "that", "on", "in", "beside"}
    for ex in a:
        parse(cogs_grammar, ex.input)
        content = [t for t in ex.input if t not in function_words]
        assert len(set(content)) == len(content)


def test_subject_noun_phrases_carry_no_prepositions():
    gen = CogsGenerator(seed=1, pp_prob=1.0)
    for _ in range(100):
        ex = gen.example(kind="s_unerg")
        assert len(ex.input) == 2 or ex.input[2] not in ("on", "in", "beside")


def test_bundled_files_match_their_recipe(cogs_grammar, cogs_few_shot, cogs_recombination):
    few, held = bundled_splits(cogs_grammar)
    assert [e.target for e in few] == [e.target for e in cogs_few_shot]
    assert [e.target for e in held] == [e.target for e in cogs_recombination]
    assert len(cogs_recombination) == 50
    assert not {e.input for e in cogs_recombination} & {e.input for e in cogs_few_shot}
    assert surface_text(("emma", "ate", "the", "bread")) == "Emma ate the bread ."
