"""Command-line entry point: one subcommand per pipeline stage.

    sensefit fit --embeddings W.vec --inventory INV.tsv --out S.vec
    sensefit disambiguate-relations --embeddings W.vec --inventory INV.tsv --out RESOLVED.tsv
    sensefit wsd --corpus C.tsv --inventory INV.tsv --word-emb W.vec [--sense-emb S.vec] --report out.json
    sensefit eval-sim --sense-emb S.vec --dataset D.tsv [--report out.json]
    sensefit gen-simsense --inventory INV.tsv --pairs P.tsv --out SKEL.tsv
    sensefit iaa --annotations A.tsv [--report out.json]
    sensefit replay RUN.manifest.json [--out-dir DIR]

Every command that writes files also writes ``<main output>.manifest.json``
with the resolved arguments, input/output checksums and library versions;
``replay`` re-executes a run from that file alone.  Exit codes: 0 success,
1 invalid input or flags, 2 failure while running.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__

log = logging.getLogger("sensefit")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

# args that never influence results; left out of the config hash
VOLATILE = {"log_level", "threads", "config"}


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


# -- configuration ------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Everything one command needs, validated up front."""
    command: str
    inputs: dict[str, Path] = field(default_factory=dict)
    outputs: dict[str, Path] = field(default_factory=dict)
    fit: object = None  # SenseFitConfig
    wsd: object = None  # WSDConfig
    polarity_map: dict = field(default_factory=dict)
    args: dict = field(default_factory=dict)
    log_level: str = "INFO"
    threads: int | None = None

    def validate(self) -> None:
        for role, p in self.inputs.items():
            if not p.is_file():
                raise ValidationError(f"--{role.replace('_', '-')}: no readable file at {p}")
        for role, p in self.outputs.items():
            if not p.parent.is_dir():
                raise ValidationError(f"--{role.replace('_', '-')}: directory {p.parent} does not exist")
        if self.threads is not None and self.threads < 1:
            raise ValidationError("--threads must be positive")

    @property
    def config_hash(self) -> str:
        stable = {k: v for k, v in self.args.items() if k not in VOLATILE}
        return hashlib.sha256(json.dumps(stable, sort_keys=True).encode()).hexdigest()


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line.  Keys may use
    dashes or underscores."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"--config: cannot read {path}: {e.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _truthy(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def apply_config_defaults(parser: argparse.ArgumentParser, values: dict[str, str], source: str) -> None:
    """Install config-file values as parser defaults so explicit flags still win."""
    actions = {}
    for a in parser._actions:
        if a.dest in ("help", "config"):
            continue
        for opt in a.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = a
    typed = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            raise ValidationError(f"{source}: unknown key {key!r} for '{parser.prog}'")
        key = action.dest
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            typed[key] = _truthy(raw)
        elif action.type is not None:
            try:
                typed[key] = action.type(raw)
            except (TypeError, ValueError):
                raise ValidationError(f"{source}: bad value for {key}: {raw!r}") from None
        else:
            typed[key] = raw
        if action.choices is not None and typed[key] not in action.choices:
            raise ValidationError(f"{source}: {key} must be one of {sorted(action.choices)}")
    parser.set_defaults(**typed)


def _abs(p: str | None) -> str | None:
    return None if p is None else str(Path(p).resolve())


def _csv_list(text: str | None) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()] if text else []


def _polarity_map(text: str | None) -> dict:
    from .lexicon import DEFAULT_POLARITY, Polarity, RelationType
    pmap = dict(DEFAULT_POLARITY)
    for item in _csv_list(text):
        if "=" not in item:
            raise ValidationError(f"--polarity: expected type=attract|repel, got {item!r}")
        k, v = item.split("=", 1)
        try:
            pmap[RelationType(k.strip())] = Polarity(v.strip())
        except ValueError as e:
            raise ValidationError(f"--polarity: {e}") from None
    return pmap


def _fit_config(a: argparse.Namespace):
    from .fitting import SenseFitConfig
    try:
        return SenseFitConfig(delta=a.delta, attract_margin=a.attract_margin, repel_margin=a.repel_margin,
                              reg_lambda=a.reg_lambda, batch_size=a.batch_size,
                              learning_rate=a.learning_rate, rng_seed=a.seed, epochs=a.fit_epochs)
    except ValueError as e:
        raise ValidationError(str(e)) from None


def _require(a: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(a, n, None) in (None, "")]
    if missing:
        raise ValidationError(f"{a.command}: missing required {', '.join(missing)}")


# -- command table ----------------------------------------------------------------

@dataclass
class Command:
    name: str
    help: str
    add_args: Callable[[argparse.ArgumentParser], None]
    build: Callable[[argparse.Namespace], PipelineConfig]
    run: Callable[[PipelineConfig], dict[str, Path]]


def _fit_flags(p: argparse.ArgumentParser, epochs: int = 5, epochs_flag: str = "--epochs") -> None:
    g = p.add_argument_group("specialization")
    g.add_argument("--delta", type=float, default=0.05, help="gloss-word cosine threshold (default 0.05)")
    g.add_argument(epochs_flag, type=int, default=epochs, dest="fit_epochs")
    g.add_argument("--attract-margin", type=float, default=0.6)
    g.add_argument("--repel-margin", type=float, default=0.0)
    g.add_argument("--reg-lambda", type=float, default=1e-9)
    g.add_argument("--batch-size", type=int, default=50)
    g.add_argument("--learning-rate", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--polarity", help="overrides like hypernym=attract,antonym=repel")


# fit

def _add_fit(p):
    p.add_argument("--embeddings", help="word vectors, word2vec text format")
    p.add_argument("--inventory", help="sense inventory TSV")
    p.add_argument("--resolved", help="relation resolutions from disambiguate-relations")
    p.add_argument("--out", help="sense vectors to write")
    p.add_argument("--lowercase", action="store_true", help="fold the word vocabulary to lower case")
    p.add_argument("--no-expand", action="store_true", help="skip sense-to-lemma relations instead of expanding them")
    _fit_flags(p)


def _build_fit(a):
    _require(a, "embeddings", "inventory", "out")
    out = Path(a.out).resolve()
    inputs = {"embeddings": Path(a.embeddings).resolve(), "inventory": Path(a.inventory).resolve()}
    if a.resolved:
        inputs["resolved"] = Path(a.resolved).resolve()
    outputs = {"out": out, "loss_csv": Path(f"{out}.loss.csv"), "report": Path(f"{out}.report.json")}
    return PipelineConfig("fit", inputs, outputs, fit=_fit_config(a), polarity_map=_polarity_map(a.polarity))


def _run_fit(cfg: PipelineConfig) -> dict[str, Path]:
    from .embeddings import save_embeddings, atomic_write_text
    from .fitting import sense_fit, write_loss_csv
    from .reldisamb import apply_resolutions, load_resolutions
    a = cfg.args
    words = _load_embeddings(cfg.inputs["embeddings"], a["lowercase"])
    inv = _load_inventory(cfg.inputs["inventory"])
    if "resolved" in cfg.inputs:
        res = _load(load_resolutions, cfg.inputs["resolved"], "resolved")
        try:
            inv = apply_resolutions(inv, res)
        except KeyError as e:
            raise ValidationError(f"--resolved: {e.args[0]}") from None
    result = sense_fit(words, inv, cfg.polarity_map, cfg.fit, expand_ambiguous=not a["no_expand"])
    report = {
        "senses_written": len(result.store),
        "senses_skipped": [s.key for s in result.skipped],
        "constraints": {t.value: dataclasses.asdict(c) for t, c in result.constraints.counts.items()},
        "attract_pairs": len(result.constraints.attract),
        "repel_pairs": len(result.constraints.repel),
        "final_epoch": dataclasses.asdict(result.trace[-1]) if result.trace else None,
    }
    save_embeddings(result.store, cfg.outputs["out"])
    atomic_write_text(cfg.outputs["loss_csv"], write_loss_csv(result.trace))
    atomic_write_text(cfg.outputs["report"], _dumps(report))
    return cfg.outputs


# disambiguate-relations

def _add_reldis(p):
    p.add_argument("--embeddings")
    p.add_argument("--inventory")
    p.add_argument("--out", help="resolution file to write")
    p.add_argument("--gold", help="gold resolutions (same format) to score against")
    p.add_argument("--plan", choices=("two-batch", "single-batch"), default="two-batch")
    p.add_argument("--epochs", type=int, default=10, dest="rounds",
                   help="maximum specialize-and-resolve rounds (default 10)")
    p.add_argument("--lowercase", action="store_true")
    _fit_flags(p, epochs=1, epochs_flag="--optimizer-epochs")


def _build_reldis(a):
    _require(a, "embeddings", "inventory", "out")
    if a.rounds < 1:
        raise ValidationError("--epochs must be positive")
    out = Path(a.out).resolve()
    inputs = {"embeddings": Path(a.embeddings).resolve(), "inventory": Path(a.inventory).resolve()}
    if a.gold:
        inputs["gold"] = Path(a.gold).resolve()
    return PipelineConfig("disambiguate-relations", inputs, {"out": out, "report": Path(f"{out}.report.json")},
                          fit=_fit_config(a), polarity_map=_polarity_map(a.polarity))


def _run_reldis(cfg: PipelineConfig) -> dict[str, Path]:
    from .embeddings import atomic_write_text
    from .reldisamb import (DisambiguationRun, disambiguate_relations, evaluate_disambiguation,
                            format_resolutions, load_resolutions)
    a = cfg.args
    words = _load_embeddings(cfg.inputs["embeddings"], a["lowercase"])
    inv = _load_inventory(cfg.inputs["inventory"])
    gold = _load(load_resolutions, cfg.inputs["gold"], "gold") if "gold" in cfg.inputs else None
    run = DisambiguationRun(epochs=a["rounds"], batch_plan=a["plan"], optimizer_epochs=cfg.fit.epochs)
    _, run, _ = disambiguate_relations(words, inv, cfg.fit, run, cfg.polarity_map)
    report = {"resolved": len(run.resolved), "rounds": len(run.trace), "changes_per_round": run.trace}
    if gold is not None:
        report["scores"] = {k: v.as_dict() for k, v in evaluate_disambiguation(run.resolved, gold).items()}
    atomic_write_text(cfg.outputs["out"], format_resolutions(run))
    atomic_write_text(cfg.outputs["report"], _dumps(report))
    return cfg.outputs


# wsd

def _add_wsd(p):
    p.add_argument("--corpus")
    p.add_argument("--inventory")
    p.add_argument("--word-emb")
    p.add_argument("--sense-emb")
    p.add_argument("--components", help="comma list of sense,gloss,relation "
                   "(default: all three with --sense-emb, gloss,relation without)")
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--relation-types", default="synonym,hyponym")
    p.add_argument("--method", choices=("three-fold", "first-sense", "random"), default="three-fold")
    p.add_argument("--use-lemmas", action="store_true", help="build contexts from the lemma layer")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--seed", type=int, default=1, help="seed for the random baseline")
    p.add_argument("--report")


def _build_wsd(a):
    from .wsd import WSDConfig
    _require(a, "corpus", "inventory", "report")
    inputs = {"corpus": Path(a.corpus).resolve(), "inventory": Path(a.inventory).resolve()}
    wcfg = None
    if a.method == "three-fold":
        _require(a, "word_emb")
        comps = _csv_list(a.components) or (["sense", "gloss", "relation"] if a.sense_emb else ["gloss", "relation"])
        if "sense" in comps and not a.sense_emb:
            raise ValidationError("--components includes 'sense' but no --sense-emb was given")
        try:
            wcfg = WSDConfig(window=a.window, use_components=frozenset(comps),
                             relation_types=frozenset(_csv_list(a.relation_types)), rng_seed=a.seed,
                             use_lemmas=a.use_lemmas)
        except ValueError as e:
            raise ValidationError(str(e)) from None
        inputs["word_emb"] = Path(a.word_emb).resolve()
        if a.sense_emb:
            inputs["sense_emb"] = Path(a.sense_emb).resolve()
    return PipelineConfig("wsd", inputs, {"report": Path(a.report).resolve()}, wsd=wcfg)


def _run_wsd(cfg: PipelineConfig) -> dict[str, Path]:
    import numpy as np
    from .embeddings import atomic_write_text
    from .wsd import (Disambiguator, Stores, baseline_first_sense, baseline_random_sense, dumps_report,
                      load_corpus, report)
    a = cfg.args
    corpus = _load(load_corpus, cfg.inputs["corpus"], "corpus")
    inv = _load_inventory(cfg.inputs["inventory"])
    method = a["method"]
    if method == "first-sense":
        preds = [baseline_first_sense(i, inv) for i in corpus]
        comps = None
    elif method == "random":
        rng = np.random.default_rng(a["seed"])
        preds = [baseline_random_sense(i, inv, rng) for i in corpus]
        comps = None
    else:
        words = _load_embeddings(cfg.inputs["word_emb"], a["lowercase"])
        senses = _load_embeddings(cfg.inputs["sense_emb"], False) if "sense_emb" in cfg.inputs else None
        if senses is not None and senses.dimension != words.dimension:
            raise ValidationError(f"sense vectors have dimension {senses.dimension}, word vectors {words.dimension}")
        wsd = Disambiguator(inv, Stores(words, senses), cfg.wsd)
        preds = [wsd(i) for i in corpus]
        comps = cfg.wsd.use_components
    atomic_write_text(cfg.outputs["report"], dumps_report(report(corpus, preds, method, comps)))
    return cfg.outputs


# eval-sim

def _add_evalsim(p):
    p.add_argument("--sense-emb")
    p.add_argument("--dataset", help="src<TAB>tgt<TAB>score[<TAB>type] sense pairs")
    p.add_argument("--report", help="JSON report path (default: standard output)")


def _build_evalsim(a):
    _require(a, "sense_emb", "dataset")
    outputs = {"report": Path(a.report).resolve()} if a.report else {}
    return PipelineConfig("eval-sim", {"sense_emb": Path(a.sense_emb).resolve(),
                                       "dataset": Path(a.dataset).resolve()}, outputs)


def _run_evalsim(cfg: PipelineConfig) -> dict[str, Path]:
    from .evaluation import evaluate_similarity, load_similarity_dataset
    senses = _load_embeddings(cfg.inputs["sense_emb"], False)
    data = _load(load_similarity_dataset, cfg.inputs["dataset"], "dataset")
    res = evaluate_similarity(senses, data)
    doc = {"rho": res.rho, "scored": res.scored, "dropped": res.dropped,
           "dropped_pairs": [[p.source.key, p.target.key] for p in res.dropped_pairs]}
    return _emit(cfg, doc)


# gen-simsense

def _add_gensim(p):
    p.add_argument("--inventory")
    p.add_argument("--pairs", help="lemma<TAB>lemma word pairs")
    p.add_argument("--out", help="unscored pair skeleton to write")
    p.add_argument("--relation-types", default="synonym,antonym,hyponym,hypernym")


def _build_gensim(a):
    _require(a, "inventory", "pairs", "out")
    try:
        from .lexicon import RelationType
        [RelationType(t) for t in _csv_list(a.relation_types)]
    except ValueError as e:
        raise ValidationError(f"--relation-types: {e}") from None
    return PipelineConfig("gen-simsense", {"inventory": Path(a.inventory).resolve(),
                                           "pairs": Path(a.pairs).resolve()}, {"out": Path(a.out).resolve()})


def _run_gensim(cfg: PipelineConfig) -> dict[str, Path]:
    from .evaluation import generate_simsense_pairs, load_word_pairs, save_similarity_dataset
    inv = _load_inventory(cfg.inputs["inventory"])
    pairs = _load(load_word_pairs, cfg.inputs["pairs"], "pairs")
    out, skipped = generate_simsense_pairs(pairs, inv, _csv_list(cfg.args["relation_types"]))
    log.info("%d sense pairs from %d word pairs (%d skipped)", len(out), len(pairs), len(skipped))
    save_similarity_dataset(out, cfg.outputs["out"])
    return cfg.outputs


# iaa

def _add_iaa(p):
    p.add_argument("--annotations")
    p.add_argument("--report", help="JSON report path (default: standard output)")


def _build_iaa(a):
    _require(a, "annotations")
    outputs = {"report": Path(a.report).resolve()} if a.report else {}
    return PipelineConfig("iaa", {"annotations": Path(a.annotations).resolve()}, outputs)


def _run_iaa(cfg: PipelineConfig) -> dict[str, Path]:
    from .evaluation import inter_annotator_agreement, load_annotations
    m = _load(load_annotations, cfg.inputs["annotations"], "annotations")
    try:
        rho, sigma = inter_annotator_agreement(m)
    except ValueError as e:
        raise ValidationError(f"--annotations: {e}") from None
    return _emit(cfg, {"rho": rho, "sigma": sigma, "annotators": len(m.annotators), "pairs": len(m.pairs)})


COMMANDS = {c.name: c for c in (
    Command("fit", "initialize and specialize sense vectors", _add_fit, _build_fit, _run_fit),
    Command("disambiguate-relations", "resolve sense-to-lemma relations", _add_reldis, _build_reldis, _run_reldis),
    Command("wsd", "lexical-sample word sense disambiguation", _add_wsd, _build_wsd, _run_wsd),
    Command("eval-sim", "Spearman correlation against a sense similarity dataset",
            _add_evalsim, _build_evalsim, _run_evalsim),
    Command("gen-simsense", "generate unscored sense-pair skeletons", _add_gensim, _build_gensim, _run_gensim),
    Command("iaa", "inter-annotator agreement", _add_iaa, _build_iaa, _run_iaa),
)}


# -- helpers ------------------------------------------------------------------

def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(cfg: PipelineConfig, doc: dict) -> dict[str, Path]:
    from .embeddings import atomic_write_text
    if "report" in cfg.outputs:
        atomic_write_text(cfg.outputs["report"], _dumps(doc))
    else:
        sys.stdout.write(_dumps(doc))
    return cfg.outputs


def _load(fn, path: Path, role: str):
    try:
        return fn(path)
    except (OSError, UnicodeDecodeError) as e:
        raise ValidationError(f"--{role.replace('_', '-')}: cannot read {path}: {e}") from None
    except (ValueError, KeyError) as e:
        raise ValidationError(f"--{role.replace('_', '-')}: {e}") from None


def _load_embeddings(path: Path, lowercase: bool):
    from .embeddings import load_embeddings
    return _load(lambda p: load_embeddings(p, lowercase=lowercase), path, "embeddings")


def _load_inventory(path: Path):
    from .lexicon import load_inventory
    return _load(load_inventory, path, "inventory")


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _versions() -> dict[str, str]:
    import numpy
    import scipy
    return {"sensefit": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__}


def manifest_path(outputs: dict[str, Path]) -> Path | None:
    main = outputs.get("out") or outputs.get("report")
    return None if main is None else Path(f"{main}.manifest.json")


def build_manifest(cfg: PipelineConfig, written: dict[str, Path]) -> dict:
    return {
        "command": cfg.command,
        "args": cfg.args,
        "config_hash": cfg.config_hash,
        "seed": cfg.args.get("seed"),
        "inputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in sorted(cfg.inputs.items())},
        "outputs": {k: {"path": str(p), "sha256": sha256_file(p)} for k, p in sorted(written.items())},
        "versions": _versions(),
    }


# -- parsing and dispatch -----------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="sensefit", description="Sense embeddings, relation disambiguation and WSD.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    subs = {}
    for c in COMMANDS.values():
        p = sub.add_parser(c.name, help=c.help)
        c.add_args(p)
        common = p.add_argument_group("common")
        common.add_argument("--config", help="flat key = value file; explicit flags override it")
        common.add_argument("--threads", type=int, help="cap numerical library threads")
        common.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
        subs[c.name] = p
    rp = sub.add_parser("replay", help="re-run a command from its manifest and compare outputs")
    rp.add_argument("manifest")
    rp.add_argument("--out-dir", help="write outputs here instead of their recorded locations")
    rp.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    subs["replay"] = rp
    return parser, subs


def parse(argv: list[str]) -> argparse.Namespace:
    parser, subs = build_parser()
    a = parser.parse_args(argv)
    if a.command is None:
        raise ValidationError("no command given; see sensefit --help")
    if getattr(a, "config", None):
        apply_config_defaults(subs[a.command], read_config_file(a.config), a.config)
        a = parser.parse_args(argv)
    return a


def _limit_threads(n: int | None) -> None:
    if n is None:
        return
    if "numpy" in sys.modules:
        log.debug("numpy already loaded; --threads may not take effect")
    for var in THREAD_VARS:
        os.environ[var] = str(n)


def config_from_args(a: argparse.Namespace) -> PipelineConfig:
    cmd = COMMANDS[a.command]
    cfg = cmd.build(a)
    args = {k: v for k, v in vars(a).items() if k not in VOLATILE}
    # store paths absolute so the manifest replays from anywhere
    for role in list(cfg.inputs) + list(cfg.outputs):
        if args.get(role) is not None:
            args[role] = _abs(args[role])
    cfg.args = args
    cfg.log_level = a.log_level
    cfg.threads = a.threads
    cfg.validate()
    return cfg


def execute(cfg: PipelineConfig) -> dict:
    """Run a validated config and write its manifest; returns the manifest
    (empty when the command only printed to standard output)."""
    written = COMMANDS[cfg.command].run(cfg)
    mpath = manifest_path(written)
    if mpath is None:
        log.info("no output files; manifest not written")
        return {}
    from .embeddings import atomic_write_text
    manifest = build_manifest(cfg, written)
    atomic_write_text(mpath, _dumps(manifest))
    log.info("wrote %s", mpath)
    return manifest


def replay(path: str, out_dir: str | None = None) -> int:
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
        command, args = manifest["command"], dict(manifest["args"])
    except (OSError, ValueError, KeyError) as e:
        raise ValidationError(f"cannot read manifest {path}: {e}") from None
    if command not in COMMANDS:
        raise ValidationError(f"manifest names unknown command {command!r}")
    for role, rec in manifest["inputs"].items():
        p = Path(rec["path"])
        if not p.is_file():
            raise ValidationError(f"recorded input {role} missing: {p}")
        if sha256_file(p) != rec["sha256"]:
            raise ValidationError(f"recorded input {role} changed since the run: {p}")
    if out_dir is not None:
        for role in ("out", "report"):
            if args.get(role) is not None:
                args[role] = str(Path(out_dir).resolve() / Path(args[role]).name)
    a = argparse.Namespace(**args, log_level=logging.getLevelName(log.getEffectiveLevel()), threads=None, config=None)
    new = execute(config_from_args(a))
    same = True
    for role, rec in manifest["outputs"].items():
        got = new["outputs"].get(role, {}).get("sha256")
        if got != rec["sha256"]:
            log.error("output %s differs from the recorded run", role)
            same = False
    if same:
        log.info("replay reproduced all %d outputs bit for bit", len(manifest["outputs"]))
    return EXIT_OK if same else EXIT_RUNTIME


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = parse(argv)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(stream=sys.stderr, level=a.log_level,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    logging.captureWarnings(True)
    try:
        if a.command == "replay":
            return replay(a.manifest, a.out_dir)
        _limit_threads(a.threads)
        cfg = config_from_args(a)
        execute(cfg)
    except ValidationError as e:
        log.error("%s", e)
        return EXIT_VALIDATION
    except Exception as e:  # anything past validation is a runtime failure
        log.error("%s failed: %s", a.command, e, exc_info=log.isEnabledFor(logging.DEBUG))
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
