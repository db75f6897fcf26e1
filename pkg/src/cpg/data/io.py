"""Example records and the SCAN / COGS file formats."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..logical_form import LogicalFormError, canonicalize, from_cogs


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    input: tuple
    target: tuple | str
    split_tag: str | None = None

    def __post_init__(self):
        if not self.input:
            raise DataFormatError("empty input")
        if not self.target:
            raise DataFormatError("empty target")

    @property
    def target_text(self) -> str:
        return self.target if isinstance(self.target, str) else " ".join(self.target)

    @property
    def input_text(self) -> str:
        return " ".join(self.input)


def parse_scan_line(line: str, number: int | None = None) -> Example:
    where = f"line {number}: " if number is not None else ""
    if not line.startswith("IN:") or " OUT:" not in line:
        raise DataFormatError(f"{where}expected 'IN: ... OUT: ...'")
    left, right = line[3:].split(" OUT:", 1)
    cmd, actions = left.split(), right.split()
    if not cmd or not actions:
        raise DataFormatError(f"{where}empty command or action sequence")
    return Example(tuple(cmd), tuple(actions))


def format_scan(ex: Example) -> str:
    return f"IN: {ex.input_text} OUT: {ex.target_text}"


def cogs_input_tokens(sentence: str) -> tuple:
    """Lower-case and drop the final full stop, keeping token positions."""
    toks = [t.lower() for t in sentence.split()]
    if toks and toks[-1] == ".":
        toks = toks[:-1]
    return tuple(toks)


def parse_cogs_line(line: str, number: int | None = None) -> Example:
    where = f"line {number}: " if number is not None else ""
    parts = line.split("\t")
    if len(parts) not in (2, 3):
        raise DataFormatError(f"{where}expected 2 or 3 tab-separated fields, got {len(parts)}")
    raw_lf = parts[1].strip()
    try:
        target = from_cogs(raw_lf) if "x _" in raw_lf or " AND " in raw_lf or ";" in raw_lf \
            else canonicalize(raw_lf)
    except LogicalFormError as e:
        raise DataFormatError(f"{where}{e}") from None
    tag = parts[2].strip() if len(parts) == 3 else None
    return Example(cogs_input_tokens(parts[0]), target, tag)


def format_cogs(ex: Example, surface: str | None = None) -> str:
    sentence = surface if surface is not None else ex.input_text
    fields = [sentence, ex.target_text]
    if ex.split_tag is not None:
        fields.append(ex.split_tag)
    return "\t".join(fields)


def detect_format(path) -> str:
    name = os.fspath(path)
    return "cogs" if name.endswith((".tsv", ".cogs")) else "scan"


def load_dataset(path, fmt: str | None = None) -> list[Example]:
    fmt = fmt or detect_format(path)
    parser = parse_cogs_line if fmt == "cogs" else parse_scan_line
    out = []
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            out.append(parser(line, number))
    return out


def save_dataset(path, examples: Iterable[Example], fmt: str | None = None,
                 surfaces: Sequence[str] | None = None) -> None:
    fmt = fmt or detect_format(path)
    examples = list(examples)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, ex in enumerate(examples):
            if fmt == "cogs":
                fh.write(format_cogs(ex, None if surfaces is None else surfaces[k]) + "\n")
            else:
                fh.write(format_scan(ex) + "\n")
