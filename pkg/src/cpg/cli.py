"""Command-line entry point: train, eval, parse, fewshot, diagnose, gen-data.

Configuration is a ``key = value`` text file (``#`` starts a comment, values
are JSON where they parse as JSON and plain strings otherwise). Precedence,
lowest first: built-in defaults, task preset, config file, ``CPG_OUTPUT_DIR``,
command-line flags.

Exit codes: 0 success, 1 a training run aborted, 2 bad config or data.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from importlib import resources
from pathlib import Path

from .cfg import GrammarError, ParseError, load_grammar, parse, render_tree, tree_to_json
from .data.cogs import FEW_SHOT_SOURCE, generate_cogs_dataset, write_release_tsv
from .data.fewshot import build_few_shot
from .data.io import DataFormatError, Example, load_dataset, save_dataset
from .data.scan import ACTIONS, LENGTH_CUTOFF, generate_scan_dataset, make_splits, sample_examples
from .model import CPG, load_checkpoint, model_from_checkpoint
from .semantics import EXPR, SEQ, SemanticsError, SuppliedDictionary
from .training import (COGS_STAGES, SCAN_STAGES, Curriculum, Hyper, MetricsWriter, StageAbort, Trainer,
                       diagnose, exact_match_accuracy)

EXIT_OK, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2
BUNDLED = "bundled:"

HYPER_KEYS = {f.name for f in fields(Hyper)}
DEFAULTS = {
    "task": "scan",
    "mode": None,
    "grammar_path": None,
    "dictionary_path": None,
    "output_vocab": None,
    "stages": None,
    "split": "add_jump",
    "length_cutoff": LENGTH_CUTOFF,
    "few_shot": True,
    "few_shot_key": None,
    "train_path": None,
    "test_path": None,
    "test_sample": 1000,
    "sample_seed": 0,
    "seeds": 5,
    "workers": 1,
    "output_dir": "runs",
    "hidden_size": 30,
    "w_out": 8,
    "s_max": 9,
    "o_max": 6,
    "cogs_size": FEW_SHOT_SOURCE["n"],
    "cogs_seed": FEW_SHOT_SOURCE["seed"],
    "cogs_pp_prob": FEW_SHOT_SOURCE["pp_prob"],
    **{k: getattr(Hyper(), k) for k in HYPER_KEYS},
}
PRESETS = {
    "scan": {"mode": SEQ, "grammar_path": BUNDLED + "scan.grammar", "output_vocab": ACTIONS,
             "stages": SCAN_STAGES, "few_shot_key": "rules"},
    "cogs": {"mode": EXPR, "grammar_path": BUNDLED + "cogs.grammar", "dictionary_path": BUNDLED + "cogs.dict.tsv",
             "stages": COGS_STAGES, "few_shot_key": "types"},
    "custom": {},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def read_config_text(text: str) -> dict:
    out = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {number}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"config line {number}: unknown key {key!r}")
        out[key] = parse_value(value)
    return out


def parse_stages(value) -> list:
    """``"1-1, 2-3"`` or ``[[1, 1], [2, 3]]`` -> list of (lo, hi)."""
    try:
        if isinstance(value, str):
            pairs = []
            for part in value.split(","):
                lo, _, hi = part.strip().partition("-")
                pairs.append((int(lo), int(hi or lo)))
            return pairs
        return [(int(lo), int(hi)) for lo, hi in value]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read stages from {value!r}") from None


def parse_seeds(value) -> list:
    """An int n means seeds 0..n-1; a list or ``"3,5"`` lists them."""
    try:
        if isinstance(value, int):
            if value < 1:
                raise ValueError
            return list(range(value))
        if isinstance(value, str):
            return [int(s) for s in value.split(",") if s.strip()]
        return [int(s) for s in value]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read seeds from {value!r}; a single integer is a run count >= 1") from None


def resolve_config(file_values: dict | None = None, flags: dict | None = None, env=None) -> dict:
    env = os.environ if env is None else env
    file_values = file_values or {}
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    task = flags.get("task", file_values.get("task", DEFAULTS["task"]))
    if task not in PRESETS:
        raise ConfigError(f"unknown task {task!r}; choose from {sorted(PRESETS)}")
    cfg = dict(DEFAULTS)
    cfg.update(PRESETS[task])
    cfg.update(file_values)
    if env.get("CPG_OUTPUT_DIR"):
        cfg["output_dir"] = env["CPG_OUTPUT_DIR"]
    cfg.update(flags)
    cfg["task"] = task
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if cfg["mode"] not in (SEQ, EXPR):
        raise ConfigError("mode must be SEQ or EXPR")
    if not cfg["grammar_path"]:
        raise ConfigError("grammar_path is required")
    if cfg["mode"] == EXPR and not cfg["dictionary_path"]:
        raise ConfigError("mode EXPR requires dictionary_path")
    if cfg["mode"] == SEQ and not cfg["output_vocab"]:
        raise ConfigError("mode SEQ with a learned dictionary requires output_vocab")
    if isinstance(cfg["output_vocab"], str):
        cfg["output_vocab"] = cfg["output_vocab"].split()
    if cfg["task"] == "custom" and not cfg["train_path"]:
        raise ConfigError("task custom requires train_path")
    if not cfg["stages"]:
        raise ConfigError("stages are required")
    cfg["stages"] = [list(s) for s in parse_stages(cfg["stages"])]
    try:
        Curriculum([tuple(s) for s in cfg["stages"]])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    cfg["seeds"] = parse_seeds(cfg["seeds"])
    if cfg["split"] not in ("add_jump", "length"):
        raise ConfigError("split must be add_jump or length")
    if cfg["few_shot_key"] not in (None, "rules", "types"):
        raise ConfigError("few_shot_key must be rules or types")
    for key in ("workers", "test_sample", "hidden_size", "w_out", "s_max", "o_max", "max_steps", "patience"):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            raise ConfigError(f"{key} must be a positive integer")
    for key in ("lr", "tau0", "tau_min", "factor", "min_lr"):
        if not isinstance(cfg[key], (int, float)) or cfg[key] <= 0:
            raise ConfigError(f"{key} must be a positive number")
    for path_key in ("grammar_path", "dictionary_path", "train_path", "test_path"):
        path = cfg[path_key]
        if path and not str(path).startswith(BUNDLED) and not Path(path).is_file():
            raise ConfigError(f"{path_key}: no such file {path!r}")
    return cfg


def read_text(path: str) -> str:
    if str(path).startswith(BUNDLED):
        return resources.files("cpg").joinpath("resources", path[len(BUNDLED):]).read_text(encoding="utf-8")
    return Path(path).read_text(encoding="utf-8")


def read_dataset(path: str) -> list[Example]:
    if str(path).startswith(BUNDLED):
        name = path[len(BUNDLED):]
        fmt = "cogs" if name.endswith(".tsv") else "scan"
        ref = resources.files("cpg").joinpath("resources", name)
        with resources.as_file(ref) as real:
            return load_dataset(real, fmt)
    return load_dataset(path)


# ---------------------------------------------------------------------------
# building blocks shared by the commands


def load_grammar_from(cfg: dict):
    text = read_text(cfg["grammar_path"])
    return load_grammar(text), text


def load_dictionary(cfg: dict) -> SuppliedDictionary | None:
    if cfg["mode"] != EXPR:
        return None
    return SuppliedDictionary.from_text(read_text(cfg["dictionary_path"]))


def build_model(cfg: dict, grammar, grammar_text: str, seed: int, dictionary=None) -> CPG:
    dims = {"w_out": cfg["w_out"], "s_max": cfg["s_max"], "o_max": cfg["o_max"]}
    if cfg["mode"] == SEQ:
        return CPG.for_scan(grammar, seed, cfg["hidden_size"], output_vocab=cfg["output_vocab"],
                            grammar_text=grammar_text, **dims)
    return CPG(grammar, dictionary, EXPR, seed=seed, grammar_text=grammar_text, **dims)


def cogs_source_split(cfg: dict) -> list[Example]:
    return generate_cogs_dataset(cfg["cogs_size"], seed=cfg["cogs_seed"], tag="train",
                                 pp_prob=cfg["cogs_pp_prob"])


def source_train(cfg: dict, grammar) -> list[Example]:
    """The training split before any few-shot selection."""
    if cfg["train_path"]:
        return read_dataset(cfg["train_path"])
    if cfg["task"] == "scan":
        train, _ = make_splits(generate_scan_dataset(), cfg["split"], cfg["length_cutoff"])
        return train
    return cogs_source_split(cfg)


def few_shot_key(cfg: dict) -> str:
    return cfg["few_shot_key"] or ("types" if cfg["mode"] == EXPR else "rules")


def training_and_test(cfg: dict, grammar) -> tuple[list[Example], list[Example]]:
    if cfg["task"] == "cogs" and not cfg["train_path"] and cfg["few_shot"]:
        train = read_dataset(BUNDLED + "cogs_fewshot.tsv")
    else:
        train = source_train(cfg, grammar)
        if cfg["few_shot"]:
            train = build_few_shot(train, grammar, few_shot_key(cfg))
    if cfg["test_path"]:
        test = read_dataset(cfg["test_path"])
    elif cfg["task"] == "scan":
        _, test = make_splits(generate_scan_dataset(), cfg["split"], cfg["length_cutoff"])
    elif cfg["task"] == "cogs":
        test = read_dataset(BUNDLED + "cogs_recombination.tsv")
    else:
        test = []
    test = sample_examples(test, cfg["test_sample"], cfg["sample_seed"])
    return train, test


def check_parses(grammar, examples, what: str) -> None:
    for e in examples:
        try:
            parse(grammar, e.input)
        except ParseError as err:
            raise DataFormatError(f"{what} example does not parse: {e.input_text!r}: {err}") from None


def thaw_from(trainer: Trainer, stage: int) -> None:
    """Undo freezing of every stage >= ``stage`` (1-based)."""
    stages = {d.stage for d in trainer.model.registry.values() if d.stage is not None}
    if hasattr(trainer.model.dictionary, "stage"):
        stages |= set(trainer.model.dictionary.stage.values())
    for s in sorted(x for x in stages if x >= stage):
        trainer._thaw_stage(s)


def hyper_from(cfg: dict) -> Hyper:
    return Hyper(**{k: cfg[k] for k in HYPER_KEYS})


def train_one_seed(job: dict) -> dict:
    """Train one seed; returns everything the writer needs. Runs in a worker process."""
    cfg, seed = job["cfg"], job["seed"]
    grammar, grammar_text = load_grammar_from(cfg)
    model = build_model(cfg, grammar, grammar_text, seed, load_dictionary(cfg))
    start = 0
    if job.get("resume") is not None:
        model.load_state(job["resume"]["state"])
        start = job["resume"]["stage"] - 1
    buf = io.StringIO()
    trainer = Trainer(model, Curriculum([tuple(s) for s in cfg["stages"]], tau0=cfg["tau0"],
                                        tau_min=cfg["tau_min"]), hyper_from(cfg), seed, MetricsWriter(buf))
    if start:
        thaw_from(trainer, start + 1)
    t0 = time.perf_counter()
    abort = None
    try:
        trainer.train(job["train"], start_stage=start)
    except StageAbort as e:
        abort = {"stage": e.stage, "failing": e.failing, "report": e.report}
    seconds = time.perf_counter() - t0
    manifest = {
        "seed": seed,
        "task": cfg["task"],
        "mode": cfg["mode"],
        "grammar_path": cfg["grammar_path"],
        "dictionary_path": cfg["dictionary_path"],
        "train_path": cfg["train_path"],
        "test_path": cfg["test_path"],
        "split": cfg["split"] if cfg["task"] == "scan" else None,
        "few_shot": cfg["few_shot"],
        "train_examples": len(job["train"]),
        "test_examples": len(job["test"]),
        "resumed_from_stage": start + 1 if start else None,
        **trainer.manifest(),
        "status": "aborted" if abort else "ok",
        "abort": abort,
        "train_acc": exact_match_accuracy(model, job["train"]) if job["train"] else 1.0,
        "test_acc": exact_match_accuracy(model, job["test"]) if job["test"] else None,
    }
    return {"seed": seed, "manifest": manifest, "metrics": buf.getvalue(),
            "checkpoint": model.state_dict(), "seconds": seconds}


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_train(cfg: dict, resume_stage: int | None = None, checkpoint: str | None = None,
              out=None, as_json: bool = False) -> int:
    out = out or sys.stdout
    grammar, _ = load_grammar_from(cfg)
    load_dictionary(cfg)
    train, test = training_and_test(cfg, grammar)
    check_parses(grammar, train, "training")
    resume = None
    if resume_stage is not None:
        if checkpoint is None:
            raise ConfigError("--resume-from-stage needs --checkpoint")
        if not 1 <= resume_stage <= len(cfg["stages"]):
            raise ConfigError(f"--resume-from-stage must lie in 1..{len(cfg['stages'])}")
        state = load_checkpoint(checkpoint)
        # fail now, not inside a worker, if the checkpoint does not fit the grammar
        build_model(cfg, grammar, "", 0, load_dictionary(cfg)).load_state(state)
        resume = {"stage": resume_stage, "state": state}
    jobs = [{"cfg": cfg, "seed": s, "train": train, "test": test, "resume": resume} for s in cfg["seeds"]]
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg["workers"], len(jobs))) as pool:
            results = list(pool.map(train_one_seed, jobs))
    else:
        results = [train_one_seed(j) for j in jobs]
    root = Path(cfg["output_dir"])
    summary = {"runs": [], "config": cfg}
    for r in results:
        run_dir = root / f"seed_{r['seed']}"
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "manifest.json").write_text(dump_json(r["manifest"]), encoding="utf-8")
        (run_dir / "metrics.csv").write_text(r["metrics"], encoding="utf-8")
        (run_dir / "checkpoint.json").write_text(dump_json(r["checkpoint"]), encoding="utf-8")
        m = r["manifest"]
        summary["runs"].append({"seed": r["seed"], "status": m["status"], "train_acc": m["train_acc"],
                                "test_acc": m["test_acc"], "seconds": round(r["seconds"], 3),
                                "dir": str(run_dir)})
    accs = [run["test_acc"] for run in summary["runs"] if run["test_acc"] is not None]
    summary["mean_test_acc"] = sum(accs) / len(accs) if accs else None
    (root / "summary.json").write_text(dump_json(summary), encoding="utf-8")
    aborted = [run for run in summary["runs"] if run["status"] != "ok"]
    if as_json:
        out.write(dump_json(summary))
    else:
        out.write(f"training examples: {len(train)}, test examples: {len(test)}\n")
        for run in summary["runs"]:
            out.write(f"seed {run['seed']}: {run['status']} train_acc={run['train_acc']:.4f} "
                      f"test_acc={_acc(run['test_acc'])} ({run['seconds']:.1f}s)\n")
        out.write(f"mean test accuracy: {_acc(summary['mean_test_acc'])}\n")
        for r in results:
            if r["manifest"]["abort"]:
                out.write(f"seed {r['seed']} aborted:\n{r['manifest']['abort']['report']}\n")
    return EXIT_ABORT if aborted else EXIT_OK


def _acc(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def model_for_eval(cfg: dict, checkpoint: str) -> CPG:
    state = load_checkpoint(checkpoint)
    dictionary = load_dictionary(cfg) if state.get("mode") == EXPR else None
    return model_from_checkpoint(state, dictionary)


def cmd_eval(cfg: dict, checkpoint: str, dataset: str | None = None, out=None,
             as_json: bool = False) -> float:
    out = out or sys.stdout
    model = model_for_eval(cfg, checkpoint)
    if dataset:
        data = read_dataset(dataset)
    else:
        _, data = training_and_test(cfg, model.grammar)
    acc = exact_match_accuracy(model, data)
    if as_json:
        out.write(dump_json({"accuracy": acc, "examples": len(data)}))
    else:
        out.write(f"accuracy: {acc:.4f} on {len(data)} examples\n")
    return acc


def cmd_parse(cfg: dict, sentence: str, out=None, as_json: bool = False) -> str:
    out = out or sys.stdout
    grammar, _ = load_grammar_from(cfg)
    tokens = sentence.split()
    if cfg["task"] == "cogs":
        tokens = [t.lower() for t in tokens if t != "."]
    tree = parse(grammar, tokens)
    text = dump_json(tree_to_json(tree)) if as_json else render_tree(tree, grammar) + "\n"
    out.write(text)
    return text


def cmd_fewshot(cfg: dict, dataset: str | None = None, dest: str | None = None, out=None,
                as_json: bool = False) -> Path:
    out = out or sys.stdout
    grammar, _ = load_grammar_from(cfg)
    if dataset:
        source = read_dataset(dataset)
        fmt = "cogs" if dataset.endswith((".tsv", ".cogs")) else "scan"
    else:
        source = source_train(cfg, grammar)
        fmt = "cogs" if cfg["mode"] == EXPR else "scan"
    few = build_few_shot(source, grammar, few_shot_key(cfg))
    path = Path(dest) if dest else Path(cfg["output_dir"]) / ("fewshot.tsv" if fmt == "cogs" else "fewshot.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "cogs" and not dataset:
        write_release_tsv(path, few)
    else:
        save_dataset(path, few, fmt)
    if as_json:
        out.write(dump_json({"path": str(path), "examples": len(few), "source": len(source)}))
    else:
        out.write(f"{len(few)} examples from {len(source)} -> {path}\n")
    return path


def cmd_diagnose(cfg: dict, checkpoint: str, manifest: str | None = None, out=None,
                 as_json: bool = False) -> str:
    out = out or sys.stdout
    model = model_for_eval(cfg, checkpoint)
    failing = []
    if manifest:
        abort = json.loads(Path(manifest).read_text(encoding="utf-8")).get("abort")
        failing = abort["failing"] if abort else []
    report = diagnose(model, failing=failing)
    if as_json:
        count = int(report.rsplit("warnings:", 1)[1])
        out.write(dump_json({"report": report.splitlines(), "warnings": count}))
    else:
        out.write(report + "\n")
    return report


def cmd_gen_data(cfg: dict, out=None, as_json: bool = False) -> list[Path]:
    out = out or sys.stdout
    root = Path(cfg["output_dir"])
    written = []
    if cfg["task"] == "scan":
        data = generate_scan_dataset()
        root.mkdir(parents=True, exist_ok=True)
        written.append(root / "tasks.txt")
        save_dataset(written[-1], data, "scan")
        for kind in ("add_jump", "length"):
            train, test = make_splits(data, kind, cfg["length_cutoff"])
            for name, part in (("train", train), ("test", test)):
                written.append(root / f"{kind}_{name}.txt")
                save_dataset(written[-1], part, "scan")
    elif cfg["task"] == "cogs":
        root.mkdir(parents=True, exist_ok=True)
        written.append(root / "train.tsv")
        write_release_tsv(written[-1], cogs_source_split(cfg))
    else:
        raise ConfigError("gen-data needs task scan or cogs")
    if as_json:
        out.write(dump_json({"written": [str(p) for p in written]}))
    else:
        for p in written:
            out.write(f"wrote {p}\n")
    return written


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--task", choices=sorted(PRESETS))
    common.add_argument("--grammar", dest="grammar_path")
    common.add_argument("--dictionary", dest="dictionary_path")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="cpg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", parents=[common], help="train one model per seed")
    t.add_argument("--split", choices=["add_jump", "length"])
    t.add_argument("--few-shot", dest="few_shot", action="store_const", const=True)
    t.add_argument("--full", dest="few_shot", action="store_const", const=False,
                   help="train on the whole training split")
    t.add_argument("--seeds", help="count n (seeds 0..n-1) or a comma-separated list")
    t.add_argument("--workers", type=int)
    t.add_argument("--train", dest="train_path")
    t.add_argument("--test", dest="test_path")
    t.add_argument("--resume-from-stage", dest="resume_stage", type=int)
    t.add_argument("--checkpoint")

    e = sub.add_parser("eval", parents=[common], help="exact-match accuracy of a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", help="dataset file (default: the configured test set)")
    e.add_argument("--split", choices=["add_jump", "length"])

    pa = sub.add_parser("parse", parents=[common], help="print the parse tree of a sentence")
    pa.add_argument("sentence")

    f = sub.add_parser("fewshot", parents=[common], help="write the few-shot subset of a training split")
    f.add_argument("--data", help="source dataset (default: the configured training split)")
    f.add_argument("--split", choices=["add_jump", "length"])
    f.add_argument("--out", help="output file")

    d = sub.add_parser("diagnose", parents=[common], help="per-rule report for a checkpoint")
    d.add_argument("--checkpoint", required=True)
    d.add_argument("--manifest", help="run manifest naming the rules that failed")

    sub.add_parser("gen-data", parents=[common], help="write generated datasets")
    return p


def config_from_args(args) -> dict:
    file_values = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        file_values = read_config_text(text)
    flags = {}
    for key in ("task", "grammar_path", "dictionary_path", "output_dir", "split", "few_shot", "seeds",
                "workers", "train_path", "test_path"):
        flags[key] = getattr(args, key, None)
    if flags["seeds"] is not None:
        flags["seeds"] = parse_value(flags["seeds"])
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in DEFAULTS:
            raise ConfigError(f"bad --set {item!r}")
        flags[key.strip()] = parse_value(value)
    return resolve_config(file_values, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "train":
            return cmd_train(cfg, args.resume_stage, args.checkpoint, as_json=args.json)
        if args.command == "eval":
            cmd_eval(cfg, args.checkpoint, args.data, as_json=args.json)
        elif args.command == "parse":
            cmd_parse(cfg, args.sentence, as_json=args.json)
        elif args.command == "fewshot":
            cmd_fewshot(cfg, args.data, args.out, as_json=args.json)
        elif args.command == "diagnose":
            cmd_diagnose(cfg, args.checkpoint, args.manifest, as_json=args.json)
        elif args.command == "gen-data":
            cmd_gen_data(cfg, as_json=args.json)
        return EXIT_OK
    except (ConfigError, DataFormatError, GrammarError, ParseError, SemanticsError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    warnings.simplefilter("default")
    sys.exit(main())
