"""SCAN commands: an exhaustive generator, the reference interpreter and splits."""
from __future__ import annotations

import random
from typing import Sequence

from .io import Example

VERBS = {"walk": "I_WALK", "look": "I_LOOK", "run": "I_RUN", "jump": "I_JUMP"}
TURNS = {"left": "I_TURN_LEFT", "right": "I_TURN_RIGHT"}
ACTIONS = ["I_WALK", "I_LOOK", "I_RUN", "I_JUMP", "I_TURN_LEFT", "I_TURN_RIGHT"]
INPUT_VOCAB = ["walk", "look", "run", "jump", "turn", "left", "right", "opposite", "around",
               "twice", "thrice", "and", "after"]
LENGTH_CUTOFF = 22


class ScanError(ValueError):
    pass


def _primitive(tokens: Sequence[str]) -> list[str]:
    # x | x dir | x opposite dir | x around dir, where x is a verb or "turn"
    n = len(tokens)
    head = tokens[0] if tokens else None
    if head not in VERBS and head != "turn":
        raise ScanError(f"bad command start {head!r}")
    act = [] if head == "turn" else [VERBS[head]]
    if n == 1:
        if head == "turn":
            raise ScanError("'turn' needs a direction")
        return act
    if n == 2 and tokens[1] in TURNS:
        return [TURNS[tokens[1]]] + act
    if n == 3 and tokens[2] in TURNS:
        turn = TURNS[tokens[2]]
        if tokens[1] == "opposite":
            return [turn, turn] + act
        if tokens[1] == "around":
            return ([turn] + act) * 4
    raise ScanError("underivable command: " + " ".join(tokens))


def _repeated(tokens: Sequence[str]) -> list[str]:
    if tokens and tokens[-1] == "twice":
        return _primitive(tokens[:-1]) * 2
    if tokens and tokens[-1] == "thrice":
        return _primitive(tokens[:-1]) * 3
    return _primitive(tokens)


def scan_oracle(command: Sequence[str]) -> list[str]:
    """Interpret a SCAN command into its action sequence."""
    tokens = list(command)
    for conj in ("and", "after"):
        if conj in tokens:
            k = tokens.index(conj)
            left, right = _repeated(tokens[:k]), _repeated(tokens[k + 1:])
            return left + right if conj == "and" else right + left
    return _repeated(tokens)


def _verb_phrases() -> list[list[str]]:
    verbs = list(VERBS)
    out = [[v] for v in verbs]
    for x in verbs + ["turn"]:
        for d in TURNS:
            out.append([x, d])
    for mod in ("opposite", "around"):
        for x in verbs + ["turn"]:
            for d in TURNS:
                out.append([x, mod, d])
    return out


def all_commands() -> list[list[str]]:
    """Every SCAN command in a fixed canonical order (20,910 commands)."""
    singles = []
    for vp in _verb_phrases():
        singles.append(vp)
        singles.append(vp + ["twice"])
        singles.append(vp + ["thrice"])
    out = list(singles)
    for conj in ("and", "after"):
        for a in singles:
            for b in singles:
                out.append(a + [conj] + b)
    return out


def generate_scan_dataset(max_len: int | None = None, seed: int | None = None,
                          sample: int | None = None, order_seed: int | None = 0) -> list[Example]:
    """All commands (optionally at most ``max_len`` tokens) with oracle targets.

    Examples are shuffled with ``order_seed`` (None keeps enumeration order),
    like a released file whose lines are not sorted. ``sample`` draws that
    many examples with ``seed``, preserving that order.
    """
    data = [Example(tuple(c), tuple(scan_oracle(c))) for c in all_commands()
            if max_len is None or len(c) <= max_len]
    if order_seed is not None:
        random.Random(order_seed).shuffle(data)
    if sample is not None and sample < len(data):
        keep = sorted(random.Random(seed).sample(range(len(data)), sample))
        data = [data[i] for i in keep]
    return data


def make_splits(dataset: Sequence[Example], kind: str, cutoff: int = LENGTH_CUTOFF):
    """(train, test) for the ``length`` or ``add_jump`` protocol."""
    if kind == "length":
        train = [e for e in dataset if len(e.target) <= cutoff]
        test = [e for e in dataset if len(e.target) > cutoff]
    elif kind == "add_jump":
        train = [e for e in dataset if "jump" not in e.input or e.input == ("jump",)]
        test = [e for e in dataset if "jump" in e.input and e.input != ("jump",)]
    else:
        raise ValueError(f"unknown split kind {kind!r}")
    return train, test


def sample_examples(data: Sequence[Example], n: int, seed: int = 0) -> list[Example]:
    if n >= len(data):
        return list(data)
    keep = sorted(random.Random(seed).sample(range(len(data)), n))
    return [data[i] for i in keep]
