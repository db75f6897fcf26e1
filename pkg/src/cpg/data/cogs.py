"""COGS-style sentences with logical forms, built constructively.

The generator composes a sentence and its logical form together from a
small lexicon, so it is an oracle that does not depend on the parser or
the model. The lexicon also produces the bundled grammar and dictionary
files (see ``grammar_text`` and ``dictionary_text``).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from ..logical_form import Conjunct, canonical
from .io import Example

ANIMATE = ["cat", "dog", "girl", "boy", "baby", "lion", "frog", "teacher", "hero", "sailor", "king", "duck"]
INANIMATE = ["cake", "cookie", "ball", "box", "book", "rose", "donut", "pencil", "hat", "bread", "melon", "doll"]
PROPER = ["Emma", "Liam", "Olivia", "Noah", "Ava", "Mason", "Lucas", "Mia", "Ella", "Leo", "Zoe", "Owen"]
LOCATION = {
    "on": ["table", "stage", "bed", "chair", "rug", "shelf"],
    "in": ["house", "room", "car", "garden", "cup", "bag"],
    "beside": ["tree", "road", "lamp", "bench", "desk", "sink"],
}

# (past, participle, lemma)
UNERG = [("slept", None, "sleep"), ("smiled", None, "smile"), ("laughed", None, "laugh"),
         ("danced", None, "dance"), ("cried", None, "cry"), ("snored", None, "snore")]
UNACC = [("rolled", "rolled", "roll"), ("froze", "frozen", "freeze"), ("broke", "broken", "break"),
         ("grew", "grown", "grow"), ("burned", "burned", "burn"), ("shattered", "shattered", "shatter")]
OMISSIBLE = [("ate", "eaten", "eat"), ("painted", "painted", "paint"), ("cooked", "cooked", "cook"),
             ("cleaned", "cleaned", "clean"), ("drew", "drawn", "draw"), ("studied", "studied", "study")]
NOT_OMISSIBLE = [("liked", "liked", "like"), ("helped", "helped", "help"), ("found", "found", "find"),
                 ("admired", "admired", "admire"), ("touched", "touched", "touch"), ("held", "held", "hold")]
DATIVE = [("gave", "given", "give"), ("sold", "sold", "sell"), ("offered", "offered", "offer"),
          ("sent", "sent", "send"), ("handed", "handed", "hand"), ("lent", "lent", "lend")]
CP_TAKING = [("said", None, "say"), ("believed", None, "believe"), ("hoped", None, "hope"),
             ("thought", None, "think"), ("noticed", None, "notice"), ("declared", None, "declare")]
INF_TAKING = [("wanted", None, "want"), ("tried", None, "try"), ("planned", None, "plan"),
              ("needed", None, "need"), ("intended", None, "intend"), ("preferred", None, "prefer")]
INF = [("walk", None, "walk"), ("sleep", None, "sleep"), ("run", None, "run"),
       ("nap", None, "nap"), ("jog", None, "jog"), ("sneeze", None, "sneeze")]

# verb type -> (lexicon, surface form index, role order)
VERB_TYPES = {
    "v_unerg": (UNERG, 0, ("agent",)),
    "v_unacc_tr": (UNACC, 0, ("agent", "theme")),
    "v_unacc_intr": (UNACC, 0, ("theme",)),
    "v_omis_tr": (OMISSIBLE, 0, ("agent", "theme")),
    "v_omis_intr": (OMISSIBLE, 0, ("agent",)),
    "v_notomis": (NOT_OMISSIBLE, 0, ("agent", "theme")),
    "v_omis_pass": (OMISSIBLE, 1, ("theme",)),
    "v_omis_pass_by": (OMISSIBLE, 1, ("theme", "agent")),
    "v_notomis_pass": (NOT_OMISSIBLE, 1, ("theme",)),
    "v_notomis_pass_by": (NOT_OMISSIBLE, 1, ("theme", "agent")),
    "v_unacc_pass": (UNACC, 1, ("theme",)),
    "v_unacc_pass_by": (UNACC, 1, ("theme", "agent")),
    "v_dat_pp": (DATIVE, 0, ("agent", "theme", "recipient")),
    "v_dat_do": (DATIVE, 0, ("agent", "recipient", "theme")),
    "v_dat_pass_pp": (DATIVE, 1, ("theme", "recipient")),
    "v_dat_pass_pp_by": (DATIVE, 1, ("theme", "recipient", "agent")),
    "v_dat_pass_do": (DATIVE, 1, ("recipient", "theme")),
    "v_dat_pass_do_by": (DATIVE, 1, ("recipient", "theme", "agent")),
    "v_cp": (CP_TAKING, 0, ("agent", "ccomp")),
    "v_inf_taking": (INF_TAKING, 0, ("agent", "xcomp")),
    "v_inf": (INF, 0, ("agent",)),
}

# sentence rule -> right-hand side; "np" slots are filled in role order of the verb
SENTENCES = {
    "s_unerg": ("np", "v_unerg"),
    "s_unacc_tr": ("np", "v_unacc_tr", "np"),
    "s_unacc_intr": ("np", "v_unacc_intr"),
    "s_omis_tr": ("np", "v_omis_tr", "np"),
    "s_omis_intr": ("np", "v_omis_intr"),
    "s_notomis": ("np", "v_notomis", "np"),
    "s_omis_pass": ("np", "aux", "v_omis_pass"),
    "s_omis_pass_by": ("np", "aux", "v_omis_pass_by", "pp_by"),
    "s_notomis_pass": ("np", "aux", "v_notomis_pass"),
    "s_notomis_pass_by": ("np", "aux", "v_notomis_pass_by", "pp_by"),
    "s_unacc_pass": ("np", "aux", "v_unacc_pass"),
    "s_unacc_pass_by": ("np", "aux", "v_unacc_pass_by", "pp_by"),
    "s_dat_pp": ("np", "v_dat_pp", "np", "pp_dat"),
    "s_dat_do": ("np", "v_dat_do", "np", "np"),
    "s_dat_pass_pp": ("np", "aux", "v_dat_pass_pp", "pp_dat"),
    "s_dat_pass_pp_by": ("np", "aux", "v_dat_pass_pp_by", "pp_dat", "pp_by"),
    "s_dat_pass_do": ("np", "aux", "v_dat_pass_do", "np"),
    "s_dat_pass_do_by": ("np", "aux", "v_dat_pass_do_by", "np", "pp_by"),
    "s_cp": ("np", "v_cp", "comp", "s"),
    "s_inf": ("np", "v_inf_taking", "inf_to", "v_inf"),
}

FUNCTION_WORDS = {"det": ["the", "a"], "aux": ["was"], "by": ["by"], "p_dat": ["to"],
                  "inf_to": ["to"], "comp": ["that"], "p_on": ["on"], "p_in": ["in"],
                  "p_beside": ["beside"]}

# noun-phrase roles that are animate in COGS (agents, recipients, and subjects of cp/inf verbs)
ANIMATE_ROLES = {"agent", "recipient"}


@dataclass
class _Phrase:
    tokens: list
    conjuncts: list
    head: str


class CogsGenerator:
    """Builds (sentence, logical form) pairs; positions are 0-based token indices."""

    def __init__(self, seed: int = 0, pp_prob: float = 0.3, max_pp: int = 2, cp_prob: float = 0.15,
                 max_cp: int = 1, subject_pp: bool = False):
        self.rng = random.Random(seed)
        self.pp_prob = pp_prob
        self.max_pp = max_pp
        self.cp_prob = cp_prob
        self.max_cp = max_cp
        self.subject_pp = subject_pp

    # -- noun phrases
    def noun_phrase(self, offset: int, animate: bool, used: set, pp_depth: int = 0,
                    proper_ok: bool = True) -> _Phrase:
        r = self.rng
        if proper_ok and r.random() < 0.4:
            name = self._fresh(PROPER, used)
            return _Phrase([name.lower()], [], name)
        noun = self._fresh(ANIMATE if animate else INANIMATE, used)
        return self._common(offset, noun, used, pp_depth)

    def _common(self, offset: int, noun: str, used: set, pp_depth: int) -> _Phrase:
        r = self.rng
        det = r.choice(FUNCTION_WORDS["det"])
        pos = str(offset + 1)
        tokens = [det, noun]
        conjuncts = [Conjunct(det == "the", noun, "", (pos,))]
        if pp_depth > 0 and r.random() < self.pp_prob:
            prep = r.choice(sorted(LOCATION))
            inner_noun = self._fresh(LOCATION[prep], used)
            inner = self._common(offset + 3, inner_noun, used, pp_depth - 1)
            tokens += [prep] + inner.tokens
            conjuncts += [Conjunct(False, noun, ".nmod." + prep, (pos, inner.head))] + inner.conjuncts
        return _Phrase(tokens, conjuncts, pos)

    def _fresh(self, words: Sequence[str], used: set) -> str:
        choices = [w for w in words if w not in used] or list(words)
        w = self.rng.choice(choices)
        used.add(w)
        return w

    # -- sentences
    def sentence(self, kind: str | None = None, offset: int = 0, used: set | None = None,
                 cp_depth: int | None = None) -> _Phrase:
        r = self.rng
        used = set() if used is None else used
        cp_depth = self.max_cp if cp_depth is None else cp_depth
        if kind is None:
            kinds = [k for k in SENTENCES if k != "s_cp" or cp_depth > 0]
            if cp_depth > 0 and r.random() < self.cp_prob:
                kind = "s_cp"
            else:
                kind = r.choice([k for k in kinds if k != "s_cp"])
        rhs = SENTENCES[kind]
        vtype = next(t for t in rhs if t.startswith("v_") and t != "v_inf")
        lex, form, roles = VERB_TYPES[vtype]
        past, participle, lemma = r.choice(lex)
        surface = (past, participle)[form]
        # roles of noun phrases in surface order
        np_roles = _np_roles(kind, roles)
        tokens: list = []
        conjuncts: list = []
        fillers: dict = {}
        event = None
        np_index = 0
        for sym in rhs:
            here = offset + len(tokens)
            if sym == "np":
                role = np_roles[np_index]
                np_index += 1
                depth = self.max_pp if np_index > 1 or self.subject_pp else 0
                animate = role in ANIMATE_ROLES
                phrase = self.noun_phrase(here, animate, used, depth, proper_ok=animate)
                tokens += phrase.tokens
                conjuncts += phrase.conjuncts
                fillers[role] = phrase.head
            elif sym in ("pp_by", "pp_dat"):
                tokens.append("by" if sym == "pp_by" else "to")
                role = "agent" if sym == "pp_by" else "recipient"
                phrase = self.noun_phrase(here + 1, True, used)
                tokens += phrase.tokens
                conjuncts += phrase.conjuncts
                fillers[role] = phrase.head
            elif sym == "aux":
                tokens.append("was")
            elif sym == "comp":
                tokens.append("that")
            elif sym == "inf_to":
                tokens.append("to")
            elif sym == "s":
                inner = self.sentence(None, here, used, cp_depth - 1)
                tokens += inner.tokens
                conjuncts += inner.conjuncts
                fillers["ccomp"] = inner.head
            elif sym == "v_inf":
                inf_past, _, inf_lemma = r.choice(INF)
                fillers["xcomp"] = str(here)
                conjuncts.append(Conjunct(False, inf_lemma, ".agent", (str(here), "@agent")))
                tokens.append(inf_past)
            else:
                event = str(here)
                tokens.append(surface)
        for role in roles:
            conjuncts.append(Conjunct(False, lemma, "." + role, (event, fillers[role])))
        conjuncts = [Conjunct(c.definite, c.stem, c.suffix,
                              tuple(fillers["agent"] if a == "@agent" else a for a in c.args))
                     for c in conjuncts]
        return _Phrase(tokens, conjuncts, event)

    def example(self, kind: str | None = None, tag: str | None = None) -> Example:
        p = self.sentence(kind)
        return Example(tuple(p.tokens), canonical(p.conjuncts), tag)


def _np_roles(kind: str, roles: Sequence[str]) -> list:
    """Roles of the bare noun phrases of a sentence rule, in surface order."""
    if kind in ("s_unacc_intr", "s_omis_pass", "s_notomis_pass", "s_unacc_pass", "s_omis_pass_by",
                "s_notomis_pass_by", "s_unacc_pass_by", "s_dat_pass_pp", "s_dat_pass_pp_by"):
        return ["theme"]
    if kind in ("s_dat_pass_do", "s_dat_pass_do_by"):
        return ["recipient", "theme"]
    if kind == "s_dat_do":
        return ["agent", "recipient", "theme"]
    if kind == "s_dat_pp":
        return ["agent", "theme"]
    if kind in ("s_unacc_tr", "s_omis_tr", "s_notomis"):
        return ["agent", "theme"]
    return ["agent"]


def generate_cogs_dataset(n: int, seed: int = 0, tag: str | None = None, **options) -> list[Example]:
    """``n`` distinct examples; ``options`` go to :class:`CogsGenerator`."""
    gen = CogsGenerator(seed, **options)
    seen: set = set()
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 100 * n:
            raise RuntimeError("generator cannot produce enough distinct sentences")
        ex = gen.example(tag=tag)
        if ex.input in seen:
            continue
        seen.add(ex.input)
        out.append(ex)
    return out


def to_cogs_release(lf: str) -> str:
    """Canonical form to the COGS release notation (``x _ N``, ``;`` and ``AND``)."""
    from ..logical_form import parse_conjuncts

    def arg(a: str) -> str:
        return f"x _ {a}" if a.isdigit() else a

    def fmt(c: Conjunct) -> str:
        pred = " . ".join([c.stem] + [p for p in c.suffix.split(".") if p])
        return f"{pred} ( {' , '.join(arg(a) for a in c.args)} )"

    conj = parse_conjuncts(lf)
    definite = [f"* {fmt(c)}" for c in conj if c.definite]
    rest = " AND ".join(fmt(c) for c in conj if not c.definite)
    return " ; ".join(definite + ([rest] if rest else []))


# ---------------------------------------------------------------------------
# bundled resources


def _verb_tokens(vtype: str) -> list:
    lex, form, _ = VERB_TYPES[vtype]
    return sorted({entry[form] for entry in lex})


def lexicon() -> dict:
    """Primitive type -> tokens."""
    lex = dict(FUNCTION_WORDS)
    lex["n_common"] = sorted(set(ANIMATE + INANIMATE + [w for ws in LOCATION.values() for w in ws]))
    lex["n_prop"] = sorted(p.lower() for p in PROPER)
    for vtype in VERB_TYPES:
        lex[vtype] = _verb_tokens(vtype)
    return lex


def grammar_text() -> str:
    lines = ["# COGS-style grammar: 60 types. Generated by cpg.data.cogs.grammar_text().", ""]
    for ptype, tokens in lexicon().items():
        lines.append(f"{ptype}: " + " | ".join(f'"{t}"' for t in tokens))
    lines += [
        "",
        "np_det: det n_common",
        "np_on: det n_common p_on np",
        "np_in: det n_common p_in np",
        "np_beside: det n_common p_beside np",
        "!np: np_det | n_prop | np_on | np_in | np_beside",
        "pp_dat: p_dat np",
        "pp_by: by np",
        "",
    ]
    for kind, rhs in SENTENCES.items():
        lines.append(f"{kind}: " + " ".join(rhs))
    lines += ["!s: " + " | ".join(SENTENCES), "", "start: s", ""]
    return "\n".join(lines)


def dictionary_text() -> str:
    lines = ["# type\ttoken\texpression\tobjects", "# y = slot, @ = own position, _ = nothing"]
    lines.append("*\tthe\t*y(y)\t_")
    lines.append("*\ta\ty(y)\t_")
    for prep in sorted(LOCATION):
        lines.append(f"*\t{prep}\ty.nmod.{prep}(y, y)\t_")
    for w in ("was", "by", "to", "that"):
        lines.append(f"*\t{w}\t_\t_")
    for noun in lexicon()["n_common"]:
        lines.append(f"*\t{noun}\t_\t{noun} @")
    for name in PROPER:
        lines.append(f"*\t{name.lower()}\t_\t{name}")
    for vtype, (lex, form, roles) in VERB_TYPES.items():
        expr = " ".join(f"y.{role}(y, y)" for role in roles)
        for entry in sorted(lex):
            lines.append(f"{vtype}\t{entry[form]}\t{expr}\t{entry[2]} @")
    return "\n".join(lines) + "\n"


# The bundled few-shot file is build_few_shot over this synthetic train split.
FEW_SHOT_SOURCE = {"n": 500, "seed": 5, "pp_prob": 0.9}
RECOMBINATION_SOURCE = {"n": 400, "seed": 1001, "pp_prob": 0.5, "max_cp": 2}
RECOMBINATION_SIZE = 50
_PROPER_SURFACE = {p.lower(): p for p in PROPER}


def surface_text(tokens: Sequence[str]) -> str:
    """Release-style sentence: capitalised first word and names, final full stop."""
    words = [_PROPER_SURFACE.get(t, t) for t in tokens]
    words[0] = words[0][0].upper() + words[0][1:]
    return " ".join(words) + " ."


def bundled_splits(grammar) -> tuple[list[Example], list[Example]]:
    """The few-shot set and a held-out recombination set of unseen sentences."""
    from .fewshot import build_few_shot

    source = dict(FEW_SHOT_SOURCE)
    train = generate_cogs_dataset(source.pop("n"), seed=source.pop("seed"), tag="train", **source)
    few = build_few_shot(train, grammar, key="types")
    source = dict(RECOMBINATION_SOURCE)
    pool = generate_cogs_dataset(source.pop("n"), seed=source.pop("seed"), tag="recombination", **source)
    seen = {ex.input for ex in train}
    held = [ex for ex in pool if ex.input not in seen][:RECOMBINATION_SIZE]
    return few, held


def write_release_tsv(path, examples: Sequence[Example]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fields = [surface_text(ex.input), to_cogs_release(ex.target_text)]
            if ex.split_tag is not None:
                fields.append(ex.split_tag)
            fh.write("\t".join(fields) + "\n")
