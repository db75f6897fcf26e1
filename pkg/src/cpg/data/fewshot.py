"""Few-shot subsets: length-sorted examples that bring in something new."""
from __future__ import annotations

import warnings
from typing import Sequence

from ..cfg import Grammar, ParseError, parse, parse_types, tree_types
from .io import Example


def example_keys(tree, key: str) -> set:
    return parse_types(tree) if key == "rules" else tree_types(tree)


def build_few_shot(dataset: Sequence[Example], grammar: Grammar, key: str = "rules") -> list[Example]:
    """Keep an example iff its parse uses a rule (or type) not seen earlier.

    Examples are visited in ascending input length; equal lengths keep
    their source order.  ``key`` is ``"rules"`` (rule ids, including
    primitive token rules) or ``"types"`` (node types).
    """
    if key not in ("rules", "types"):
        raise ValueError("key must be 'rules' or 'types'")
    seen: set = set()
    kept = []
    for ex in sorted(dataset, key=lambda e: len(e.input)):
        try:
            tree = parse(grammar, ex.input)
        except ParseError as e:
            warnings.warn(f"skipping unparsable example {ex.input_text!r}: {e}")
            continue
        keys = example_keys(tree, key)
        if not keys <= seen:
            seen |= keys
            kept.append(ex)
    return kept
