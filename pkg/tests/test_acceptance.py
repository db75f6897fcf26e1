"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are repeated in an "acceptance criteria" section at the end of the run.
Set CPG_COGS_TRAIN to a COGS release train.tsv (and optionally CPG_COGS_GEN to a
generalization-split TSV) to run the full COGS criterion instead of its bundled form.
"""
import csv
import io
import itertools
import json
import os
import random
from collections import Counter
from pathlib import Path

import pytest

from cpg.cfg import parse
from cpg.cli import main
from cpg.data.io import load_dataset
from cpg.data.scan import generate_scan_dataset, scan_oracle
from cpg.model import CPG, model_from_checkpoint
from cpg.semantics import LEAF, Context, generate, ref_label
from cpg.training import SCAN_STAGES, Curriculum, Trainer, exact_match_accuracy

from conftest import record_criterion
from test_neural import ff_net_check, soft_gumbel_check
from test_semantics import copy_oracle, expr_child, run_copy, run_substitute

pytestmark = pytest.mark.slow

SEEDS = 5
RUN_LIMIT_SECONDS = 30 * 60


def scan_runs(root: Path, split: str) -> tuple[Path, dict]:
    """Few-shot file plus a 5-seed CLI training run on one SCAN split."""
    few = root / "fewshot.txt"
    assert main(["fewshot", "--split", split, "--out", str(few)]) == 0
    out = root / "runs"
    code = main(["train", "--split", split, "--few-shot", "--seeds", str(SEEDS), "--output-dir", str(out)])
    assert code in (0, 1)
    return few, json.loads((out / "summary.json").read_text())


@pytest.fixture(scope="module")
def add_jump_runs(tmp_path_factory):
    return scan_runs(tmp_path_factory.mktemp("add_jump"), "add_jump")


def scan_reproduction(number, split, few, summary):
    n_few = len(load_dataset(few))
    accs = [r["test_acc"] for r in summary["runs"]]
    perfect = sum(a == 1.0 for a in accs)
    slowest = max(r["seconds"] for r in summary["runs"])
    ok = n_few == 14 and perfect >= 4 and slowest <= RUN_LIMIT_SECONDS
    record_criterion(number, ok, f"{split}: {n_few} few-shot examples; test acc on 1000 per seed "
                                 f"{accs}; {perfect}/{SEEDS} at 1.0 (need 4); slowest run {slowest:.1f}s")
    return ok


def test_criterion_1_scan_add_jump(add_jump_runs):
    assert scan_reproduction(1, "add_jump", *add_jump_runs)


def test_criterion_2_scan_length(tmp_path):
    assert scan_reproduction(2, "length", *scan_runs(tmp_path, "length"))


def test_criterion_3_cogs(tmp_path):
    external = os.environ.get("CPG_COGS_TRAIN")
    out = tmp_path / "runs"
    if external:
        few = tmp_path / "fewshot.tsv"
        assert main(["fewshot", "--task", "cogs", "--data", external, "--out", str(few)]) == 0
        n_few = len(load_dataset(few))
        argv = ["train", "--task", "cogs", "--train", external, "--seeds", str(SEEDS), "--output-dir", str(out),
                "--set", "test_sample=200"]
        gen = os.environ.get("CPG_COGS_GEN")
        if gen:
            argv += ["--test", gen]
        main(argv)
        summary = json.loads((out / "summary.json").read_text())
        held_out = "generalization sample" if gen else "bundled recombination set"
        perfect = sum(r["test_acc"] == 1.0 for r in summary["runs"])
        ok = n_few == 22 and perfect >= 4
        detail = f"external train file: {n_few} few-shot examples; {perfect}/{SEEDS} seeds at 1.0 on the {held_out}"
    else:
        few = load_dataset(Path(__file__).parent.parent / "src" / "cpg" / "resources" / "cogs_fewshot.tsv")
        main(["train", "--task", "cogs", "--seeds", str(SEEDS), "--output-dir", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        both = [(r["train_acc"], r["test_acc"]) for r in summary["runs"]]
        perfect = sum(a == 1.0 and b == 1.0 for a, b in both)
        ok = len(few) == 22 and perfect >= 4
        detail = (f"bundled form (no external train file): {len(few)} examples; (train acc, acc on 50 held-out "
                  f"recombinations) per seed {both}; {perfect}/{SEEDS} at 1.0 on both (need 4)")
    record_criterion(3, ok, detail)
    assert ok


def stage_drops(run_dir: Path) -> tuple[dict, bool]:
    """Accuracy drop at each stage start and whether training accuracy then rose to the end of the stage.

    The drop is one minus the noise-free accuracy on the new stage's examples at the boundary,
    as recorded in the manifest trajectory; the rise is read from the metrics CSV.
    """
    manifest = json.loads((run_dir / "manifest.json").read_text())
    drops = {s: 0.0 for s in range(1, len(SCAN_STAGES) + 1)}
    for r in manifest["trajectory"]:
        # a rollback merges stages; the merged record stands for each stage it covers
        for stage in range(r.get("merged_from", r["stage"]), r["stage"] + 1):
            drops[stage] = round(1.0 - r["start_acc"], 4)
    rows = list(csv.DictReader(io.StringIO((run_dir / "metrics.csv").read_text())))
    rises = True
    for stage in {r["stage"] for r in rows}:
        ema = [float(r["ema_acc"]) for r in rows if r["stage"] == stage]
        rises &= ema[-1] > ema[0]
    trained = {r["stage"] for r in manifest["trajectory"] if r["steps"] > 0}
    return drops, rises and all(drops[s] > 0 for s in trained)


def test_criterion_4_training_curve_shape(add_jump_runs):
    _, summary = add_jump_runs
    shapes = []
    for run in summary["runs"]:
        drops, rises = stage_drops(Path(run["dir"]))
        last = [drops[s] for s in (5, 6, 7)]
        shapes.append((drops, rises and last[0] >= last[1] >= last[2]))
    good = sum(ok for _, ok in shapes)
    ok = good >= 3
    per_seed = "; ".join(f"seed {i}: " + ",".join(f"{d[s]:g}" for s in sorted(d)) for i, (d, _) in enumerate(shapes))
    record_criterion(4, ok, f"{good}/{SEEDS} seeds show a drop at every trained stage, a rise within it and "
                            f"non-increasing drops over stages 5-7 (need 3); drops by stage: {per_seed}")
    assert ok


def test_criterion_5_oracle_equivalences(scan_pairs):
    checked_copy = 0
    for arity in range(1, 4):
        for lengths in itertools.product(range(6), repeat=arity):
            if sum(lengths) > 5:
                continue
            # distinct labels, so any misplaced segment shows up
            start = 0
            children = []
            for n in lengths:
                children.append(list(range(start, start + n)))
                start += n
            for width in range(1, 7):
                for mapping in itertools.product(range(arity + 1), repeat=width):
                    for grad in (False, True):
                        out = run_copy(children, mapping, grad)
                        assert out.labels == copy_oracle(children, mapping, keep_empty=grad)
                        checked_copy += 1
    checked_subst = 0
    for slots in range(1, 7):
        for objects in range(1, 4):
            object_ids = list(range(1, objects + 1))
            for mapping in itertools.product(range(objects), repeat=slots):
                children = [expr_child(slots, []), expr_child(0, object_ids)]
                out = run_substitute(children, mapping, objects)
                assert [ref_label(it) for it in out.conjuncts[0].items[1:]] == [object_ids[m] for m in mapping]
                checked_subst += 1
    pairs_ok = all(scan_oracle(e.input) == list(e.target) for e in scan_pairs)
    ok = pairs_ok and len(scan_pairs) >= 20
    record_criterion(5, ok, f"copy: {checked_copy} (children, map, mode) cases with |x| <= 5, W <= 6 match the "
                            f"index oracle; substitute: {checked_subst} maps match; scan_oracle agrees with "
                            f"{len(scan_pairs)} hand-written reference pairs: {pairs_ok}")
    assert ok


def test_criterion_6_gradient_checks():
    gumbel = [soft_gumbel_check(3, 4, seed) for seed in range(10)]
    ff = [ff_net_check(5, 31, 8, seed) for seed in range(10)]
    worst = max(gumbel + ff)
    ok = worst < 1e-4
    record_criterion(6, ok, f"max relative error over 10 random instances: Gumbel-softmax 3x4 {max(gumbel):.2e}, "
                            f"FF net 5x31x8 {max(ff):.2e} (limit 1e-4)")
    assert ok


def early_state(state: dict) -> dict:
    """Modules and dictionary entries frozen in stages 1-3 of a checkpoint."""
    modules = {rid: m for rid, m in state["modules"].items() if m["stage"] is not None and m["stage"] <= 3}
    d = state["dictionary"]
    tokens = {t: d["frozen"][t] for t, s in d.get("stage", {}).items() if s <= 3}
    return {"modules": modules, "tokens": tokens}


def test_criterion_7_resume_without_forgetting(add_jump_runs, tmp_path, scan_grammar, scan_few_shot,
                                               trained_late, late_data):
    from cpg.cli import thaw_from

    _, summary = add_jump_runs
    early_data = [e for e in scan_few_shot if len(e.input) <= 3]
    results = []
    for run in summary["runs"]:
        ckpt = Path(run["dir"]) / "checkpoint.json"
        before = json.loads(ckpt.read_text())
        out = tmp_path / f"resume_{run['seed']}"
        code = main(["train", "--seeds", f"[{run['seed']}]", "--resume-from-stage", "4", "--checkpoint", str(ckpt),
                     "--output-dir", str(out), "--set", "test_sample=1"])
        after = json.loads((out / f"seed_{run['seed']}" / "checkpoint.json").read_text())
        same = early_state(before) == early_state(after) and early_state(before)["modules"] != {}
        acc = exact_match_accuracy(model_from_checkpoint(after), early_data)
        results.append(code == 0 and same and acc == 1.0)
    # a curriculum where stage 4 has real work: the stage is relearned, stages 1-3 stay put
    model, trainer, _, _ = trained_late
    resumed = CPG.for_scan(scan_grammar, seed=4)
    resumed.load_state(model.state_dict())
    again = Trainer(resumed, Curriculum(SCAN_STAGES), seed=4)
    thaw_from(again, 4)
    again.train(late_data, start_stage=3)
    late_early = [e for e in late_data if len(e.input) <= 3]
    late_ok = (early_state(model.state_dict()) == early_state(resumed.state_dict())
               and exact_match_accuracy(resumed, late_early) == 1.0
               and again.log[0]["steps"] > 0)
    ok = all(results) and late_ok
    record_criterion(7, ok, f"few-shot runs resumed at stage 4, stages 1-3 bit-identical and 1.0 on their data: "
                            f"{sum(results)}/{len(results)}; curriculum with {again.log[0]['steps']} steps of "
                            f"stage-4 retraining: {late_ok}")
    assert ok


def structure(tree):
    """Parse tree with tokens erased: rule ids inside, primitive types at the leaves."""
    if tree.is_primitive:
        return tree.node_type
    return (tree.rule_id, tuple(structure(c) for c in tree.children))


def test_criterion_8_systematicity(scan_grammar):
    groups: dict = {}
    for e in generate_scan_dataset():
        tree = parse(scan_grammar, e.input)
        rules = Counter(n.rule_id for n in tree.walk() if not n.is_primitive)
        key = (structure(tree), tuple(sorted(rules.items())))
        groups.setdefault(key, []).append(e.input)
    rng = random.Random(0)
    shared = [g for g in groups.values() if len(g) > 1]
    model = CPG.for_scan(scan_grammar, seed=0)
    same = 0
    for _ in range(100):
        a, b = rng.sample(rng.choice(shared), 2)
        traces = []
        for tokens in (a, b):
            trace = []
            generate(parse(scan_grammar, tokens), scan_grammar, model.registry, model.dictionary, Context(), trace)
            traces.append([(kind, rid, dist) for kind, rid, dist in trace if kind != LEAF])
        same += traces[0] == traces[1] and a != b
    ok = same == 100
    record_criterion(8, ok, f"{same}/100 random pairs of distinct commands with equal structure compose "
                            f"identical module traces ({len(shared)} structure classes)")
    assert ok
