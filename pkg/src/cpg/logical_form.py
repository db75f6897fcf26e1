"""COGS-style logical forms: conjunct parsing, canonical ordering, conversion.

The canonical surface form is a space separated list of conjuncts such as
``*bread(3) eat.agent(1, Emma) eat.theme(1, 3)``: definite nouns first,
then everything else ordered by (first argument, predicate, arguments).
Indices are 0-based token positions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

CONJ_RE = re.compile(r"(\*?)([A-Za-z_@][\w@]*)((?:\.[A-Za-z_]\w*)*)\s*\(([^()]*)\)")


class LogicalFormError(ValueError):
    pass


@dataclass(frozen=True)
class Conjunct:
    definite: bool
    stem: str
    suffix: str          # e.g. ".agent" or ".nmod.on"
    args: tuple[str, ...]

    @property
    def skeleton(self) -> str:
        star = "*" if self.definite else ""
        holes = ", ".join("{}" for _ in self.args)
        return f"{star}{{}}{self.suffix}({holes})"

    @property
    def fillers(self) -> tuple[str, ...]:
        return (self.stem,) + self.args

    def __str__(self) -> str:
        return self.skeleton.format(*self.fillers)


def parse_conjuncts(text: str) -> list[Conjunct]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = CONJ_RE.match(text, pos)
        if not m:
            raise LogicalFormError(f"cannot parse logical form at {text[pos:pos + 20]!r}")
        args = tuple(a.strip() for a in m.group(4).split(",")) if m.group(4).strip() else ()
        out.append(Conjunct(m.group(1) == "*", m.group(2), m.group(3), args))
        pos = m.end()
    return out


def _num(s: str) -> tuple[int, int | str]:
    return (0, int(s)) if s.isdigit() else (1, s)


def sort_key(c: Conjunct):
    first = _num(c.args[0]) if c.args else (2, "")
    return (0 if c.definite else 1, first, c.stem + c.suffix, tuple(_num(a) for a in c.args))


def canonical(conjuncts) -> str:
    return " ".join(str(c) for c in sorted(conjuncts, key=sort_key))


def canonicalize(text: str) -> str:
    return canonical(parse_conjuncts(text))


def from_cogs(lf: str) -> str:
    """Convert a COGS release logical form to the canonical surface form.

    Handles ``x _ N`` variables, ``;`` after the definite prefix and
    ``AND`` separators.  Primitive-only forms such as ``LAMBDA`` lines are
    not supported.
    """
    s = re.sub(r"\bx\s*_\s*(\d+)", r"\1", lf)
    s = s.replace(";", " ").replace(" AND ", " ")
    s = re.sub(r"\s*\.\s*", ".", s)
    s = re.sub(r"\*\s+", "*", s)
    s = re.sub(r"\s*\(\s*", "(", s)
    s = re.sub(r"\s*\)", ")", s)
    s = re.sub(r"\s*,\s*", ", ", s)
    return canonicalize(s)
