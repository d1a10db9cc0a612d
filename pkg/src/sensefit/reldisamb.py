"""Bootstrapped disambiguation of sense-to-lemma relations.

Every sense starts as a copy of its lemma's word vector.  Each round runs a
short specialization over the current constraints (resolved relations as
sense pairs, still-open ones expanded over the target's senses), then
re-resolves each open relation to the target sense closest to the source
(farthest, for repel relations).  Rounds stop after ``epochs`` or once no
resolution changes.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .embeddings import EmbeddingStore, atomic_write_text
from .fitting import SenseEmbeddingStore, SenseFitConfig, specialize
from .lexicon import (DEFAULT_POLARITY, Polarity, Relation, RelationType, SenseID, SenseInventory,
                      extract_constraints, senses_of)
from .scoring import PRF

log = logging.getLogger(__name__)

PLANS = ("two-batch", "single-batch")


@dataclass
class DisambiguationRun:
    epochs: int = 10
    batch_plan: str = "two-batch"
    optimizer_epochs: int = 1
    restart: bool = False
    resolved: dict[Relation, SenseID] = field(default_factory=dict)
    resolved_epoch: dict[Relation, int] = field(default_factory=dict)
    trace: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.batch_plan not in PLANS:
            raise ValueError(f"batch_plan must be one of {PLANS}")
        if self.optimizer_epochs < 0:
            raise ValueError("optimizer_epochs must be non-negative")


def expand_lemma_to_senses(word_store: EmbeddingStore, inv: SenseInventory) -> tuple[SenseEmbeddingStore, list[str]]:
    """One copy of the (unit-normalized) lemma vector per sense.

    Returns the sense store and the lemmas skipped for lack of a vector.
    """
    keys, rows, skipped = [], [], []
    for lemma, entries in inv.entries.items():
        v = word_store.get(lemma)
        n = 0.0 if v is None else float(np.linalg.norm(v))
        if n == 0.0:
            skipped.append(lemma)
            continue
        for e in entries:
            keys.append(e.id.key)
            rows.append(v / n)
    if skipped:
        log.info("%d lemma(s) without a word vector: no sense copies", len(skipped))
    vectors = np.vstack(rows) if rows else np.zeros((0, word_store.dimension))
    return SenseEmbeddingStore(keys, vectors, word_store.dimension), skipped


def select_target_sense(store: EmbeddingStore, src: SenseID, tgt_lemma: str, polarity: Polarity,
                        inv: SenseInventory) -> SenseID | None:
    """Embedded sense of ``tgt_lemma`` with maximal (ATTRACT) or minimal
    (REPEL) cosine to ``src``; ties go to the earlier sense.  A monosemous
    target resolves to its only sense.  ``None`` when unresolvable."""
    candidates = senses_of(inv, tgt_lemma)
    if len(candidates) == 1:
        return candidates[0]
    src_vec = store.get(src.key)
    if src_vec is None:
        return None
    src_unit = src_vec / np.linalg.norm(src_vec)
    best, best_score = None, None
    for t in candidates:
        v = store.get(t.key)
        if v is None:
            continue
        score = float(np.dot(src_unit, v / np.linalg.norm(v)))
        if polarity is Polarity.REPEL:
            score = -score
        if best_score is None or score > best_score:
            best, best_score = t, score
    return best


def _round_constraints(inv: SenseInventory, store: SenseEmbeddingStore, sense_rels: list[Relation],
                       open_rels: list[Relation], resolved: Mapping[Relation, SenseID],
                       pmap: Mapping[RelationType, Polarity], types: set[RelationType]):
    rels = [r for r in sense_rels if r.type in types]
    for r in open_rels:
        if r.type not in types:
            continue
        t = resolved.get(r)
        rels.append(r if t is None else Relation(r.type, r.source, t))
    return extract_constraints(inv, store, pmap, expand_ambiguous=True, relations=rels)


def disambiguate_relations(word_store: EmbeddingStore, inv: SenseInventory, cfg: SenseFitConfig | None = None,
                           run: DisambiguationRun | None = None,
                           polarity_map: Mapping[RelationType, Polarity] | None = None,
                           initial: SenseEmbeddingStore | None = None
                           ) -> tuple[list[Relation], DisambiguationRun, SenseEmbeddingStore]:
    """Resolve the inventory's sense-to-lemma relations.

    ``initial`` replaces the lemma-copy start store.  Returns the resolved
    relations (sense targets), the run record, and the final store.
    """
    cfg = cfg or SenseFitConfig()
    run = run or DisambiguationRun()
    pmap = dict(DEFAULT_POLARITY if polarity_map is None else polarity_map)
    start = initial.copy() if initial is not None else expand_lemma_to_senses(word_store, inv)[0]
    store = start
    round_cfg = cfg.replace(epochs=run.optimizer_epochs)

    sense_rels = [r for r in inv.relations if not r.ambiguous]
    ambiguous = [r for r in inv.relations if r.ambiguous]
    run.resolved.clear()
    run.resolved_epoch.clear()
    run.trace.clear()
    open_rels = []
    for r in ambiguous:
        targets = senses_of(inv, r.target)
        if len(targets) == 1:
            run.resolved[r] = targets[0]
            run.resolved_epoch[r] = 0
        else:
            open_rels.append(r)
    log.info("%d sense-to-lemma relations: %d monosemous, %d to resolve",
             len(ambiguous), len(ambiguous) - len(open_rels), len(open_rels))

    if run.batch_plan == "two-batch":
        passes = [set(RelationType) - {RelationType.ANTONYM}, {RelationType.ANTONYM}]
    else:
        passes = [set(RelationType)]

    for epoch in range(1, run.epochs + 1):
        if run.restart:
            store = start
        for types in passes:
            constraints = _round_constraints(inv, store, sense_rels, open_rels, run.resolved, pmap, types)
            if len(constraints) and run.optimizer_epochs:
                store, _ = specialize(store, constraints, round_cfg.replace(rng_seed=cfg.rng_seed + epoch))
        changed = 0
        for r in open_rels:
            t = select_target_sense(store, r.source, r.target, Polarity(pmap[r.type]), inv)
            if t is None or run.resolved.get(r) == t:
                continue
            run.resolved[r] = t
            run.resolved_epoch[r] = epoch
            changed += 1
        run.trace.append(changed)
        log.info("round %d: %d resolution(s) changed", epoch, changed)
        if changed == 0:
            break

    out = [Relation(r.type, r.source, run.resolved[r]) for r in ambiguous if r in run.resolved]
    return out, run, store


def evaluate_disambiguation(predicted: Mapping[Relation, SenseID], gold: Mapping[Relation, SenseID]) -> dict[str, PRF]:
    """Per relation type and overall ("all") precision/recall/F1 against ``gold``.

    Only gold relations are considered; a gold relation without a prediction
    lowers recall but not precision.
    """
    counts: dict[str, list[int]] = {t.value: [0, 0, 0] for t in RelationType}
    counts["all"] = [0, 0, 0]
    for r, g in gold.items():
        p = predicted.get(r)
        for key in (r.type.value, "all"):
            c = counts[key]
            c[0] += 1
            c[1] += p is not None
            c[2] += p is not None and p == g
    return {k: PRF.from_counts(*v) for k, v in counts.items()}


def apply_resolutions(inv: SenseInventory, resolved: Mapping[Relation, SenseID]) -> SenseInventory:
    """Copy of ``inv`` whose sense-to-lemma relations are replaced by their
    resolved sense-to-sense form where ``resolved`` has one."""
    rels = []
    for r in inv.relations:
        t = resolved.get(r) if r.ambiguous else None
        if t is not None and t not in inv:
            raise KeyError(f"resolution target {t.key} is not in the inventory")
        rels.append(r if t is None else Relation(r.type, r.source, t))
    return SenseInventory(inv.entries, rels)


# -- resolution files -------------------------------------------------------

def format_resolutions(run: DisambiguationRun) -> str:
    lines = []
    for r, t in run.resolved.items():
        lines.append(f"R\t{r.type.value}\t{r.source.key}\t{t.key}\t{run.resolved_epoch[r]}\n")
    return "".join(lines)


def save_resolutions(run: DisambiguationRun, path: str | os.PathLike) -> None:
    atomic_write_text(path, format_resolutions(run))


def load_resolutions(path: str | os.PathLike) -> dict[Relation, SenseID]:
    """Read ``R<TAB>type<TAB>src<TAB>resolved_tgt[<TAB>epoch]`` lines, keyed
    by the sense-to-lemma relation they resolve."""
    path = Path(path)
    out = {}
    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if fields[0] != "R" or len(fields) not in (4, 5):
                raise ValueError(f"{path}:{lineno}: expected R<TAB>type<TAB>src<TAB>tgt[<TAB>epoch]")
            try:
                rtype = RelationType(fields[1])
                src, tgt = SenseID.parse(fields[2]), SenseID.parse(fields[3])
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
            out[Relation(rtype, src, tgt.lemma)] = tgt
    return out
