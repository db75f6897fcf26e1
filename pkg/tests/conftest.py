from importlib import resources
from pathlib import Path

import pytest

from cpg.cfg import load_grammar
from cpg.data.io import load_dataset
from cpg.semantics import SuppliedDictionary

FIXTURES = Path(__file__).parent / "fixtures"

# acceptance results by criterion number, printed after the run
ACCEPTANCE: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])


def resource(name: str):
    return resources.files("cpg").joinpath("resources", name)


def resource_text(name: str) -> str:
    return resource(name).read_text(encoding="utf-8")


def resource_dataset(name: str):
    with resources.as_file(resource(name)) as path:
        return load_dataset(path)


@pytest.fixture(scope="session")
def scan_grammar():
    return load_grammar(resource_text("scan.grammar"))


@pytest.fixture(scope="session")
def scan_grammar_text():
    return resource_text("scan.grammar")


@pytest.fixture(scope="session")
def cogs_grammar():
    return load_grammar(resource_text("cogs.grammar"))


@pytest.fixture(scope="session")
def cogs_dictionary():
    return SuppliedDictionary.from_text(resource_text("cogs.dict.tsv"))


@pytest.fixture(scope="session")
def cogs_few_shot():
    return resource_dataset("cogs_fewshot.tsv")


@pytest.fixture(scope="session")
def cogs_recombination():
    return resource_dataset("cogs_recombination.tsv")


@pytest.fixture(scope="session")
def scan_pairs():
    return load_dataset(FIXTURES / "scan_pairs.txt")


@pytest.fixture(scope="session")
def scan_few_shot(scan_grammar):
    from cpg.data.fewshot import build_few_shot
    from cpg.data.scan import generate_scan_dataset, make_splits

    train, _ = make_splits(generate_scan_dataset(), "add_jump")
    return build_few_shot(train, scan_grammar)


@pytest.fixture(scope="session")
def trained_scan(scan_grammar, scan_grammar_text, scan_few_shot):
    from cpg.model import CPG
    from cpg.training import SCAN_STAGES, Curriculum, Trainer

    model = CPG.for_scan(scan_grammar, seed=1, grammar_text=scan_grammar_text)
    trainer = Trainer(model, Curriculum(SCAN_STAGES), seed=1)
    trainer.train(scan_few_shot)
    return model, trainer


@pytest.fixture(scope="session")
def trained_cogs(cogs_grammar, cogs_dictionary, cogs_few_shot):
    from cpg.model import CPG
    from cpg.training import COGS_STAGES, Curriculum, Trainer

    model = CPG.for_cogs(cogs_grammar, cogs_dictionary, seed=0, grammar_text=resource_text("cogs.grammar"))
    trainer = Trainer(model, Curriculum(COGS_STAGES), seed=0)
    trainer.train(cogs_few_shot)
    return model, trainer


def late_curriculum(train_split, grammar):
    """Few-shot set without 'after'/'thrice', plus 12 length 4-5 commands that use them.

    The extra commands make stages 4 and 5 non-empty, so later stages have real work
    (stage 4) and zero-shot carryover (stage 5).
    """
    from cpg.data.fewshot import build_few_shot
    from cpg.data.scan import sample_examples

    def late(e):
        return "after" in e.input or "thrice" in e.input

    early = build_few_shot([e for e in train_split if not late(e)], grammar)
    later = sample_examples([e for e in train_split if late(e) and len(e.input) in (4, 5)], 12, seed=0)
    return early + later


@pytest.fixture(scope="session")
def scan_add_jump():
    from cpg.data.scan import generate_scan_dataset, make_splits

    return make_splits(generate_scan_dataset(), "add_jump")


@pytest.fixture(scope="session")
def late_data(scan_add_jump, scan_grammar):
    return late_curriculum(scan_add_jump[0], scan_grammar)


def snapshot(model) -> dict:
    """Frozen maps and logits of every frozen rule, plus frozen dictionary entries."""
    rules = {rid: (d.stage, d.frozen_map.copy(), [p.data.copy() for p in d.params])
             for rid, d in model.registry.items() if d.frozen}
    tokens = dict(getattr(model.dictionary, "frozen", {}))
    return {"rules": rules, "tokens": tokens}


class RecordingTrainer:
    """Wraps a trainer's stage runner to record what the model looks like around each stage."""

    def __init__(self, trainer, data):
        self.trainer = trainer
        self.data = data
        self.before: dict = {}
        self.after: dict = {}
        inner = trainer._run_stage

        def run_stage(k, data, val_set, first=None):
            from cpg.cfg import parse_types

            model = trainer.model
            frozen = model.frozen_rules()
            members = trainer.curriculum.members(data, k)
            ready = [e for e in members
                     if parse_types(model.tree(e.input)) & set(model.registry) <= frozen
                     and set(e.input) <= set(getattr(model.dictionary, "frozen", {}))]
            self.before[k + 1] = {"frozen": frozen, "ready": ready,
                                  "ready_correct": [model.predict(e.input) == e.target_text for e in ready]}
            record = inner(k, data, val_set, first)
            seen = [e for j in range(k + 1) for e in trainer.curriculum.members(data, j)]
            self.after[k + 1] = {"snapshot": snapshot(model), "seen": seen,
                                 "seen_correct": all(model.predict(e.input) == e.target_text for e in seen)}
            return record

        trainer._run_stage = run_stage

    def committed(self) -> list[int]:
        return [r["stage"] for r in self.trainer.log]


@pytest.fixture(scope="session")
def trained_late(scan_grammar, late_data):
    """Seed 4 on the late curriculum: one rollback at stage 3, real work at stage 4."""
    import io

    from cpg.model import CPG
    from cpg.training import SCAN_STAGES, Curriculum, MetricsWriter, Trainer

    model = CPG.for_scan(scan_grammar, seed=4)
    buf = io.StringIO()
    trainer = Trainer(model, Curriculum(SCAN_STAGES), seed=4, metrics=MetricsWriter(buf))
    rec = RecordingTrainer(trainer, late_data)
    trainer.train(late_data)
    return model, trainer, rec, buf.getvalue()
