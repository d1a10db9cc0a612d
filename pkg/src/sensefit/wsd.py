"""Knowledge-based lexical-sample WSD.

Each candidate sense is represented by up to three vectors: its fitted
sense vector, the centroid of its gloss words, and the centroid of its
related senses/lemmas.  A context is the centroid of the words around the
target.  The score of a sense is the mean cosine between the context and
the components that are present; the best-scoring sense wins, ties going to
the lower sense index.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore, centroid
from .scoring import PRF
from .lexicon import POS, RelationType, SenseID, SenseInventory, parse_pos, related_senses, senses_of

log = logging.getLogger(__name__)

COMPONENTS = ("sense", "gloss", "relation")
NEGATIVE_INFINITY = -math.inf


@dataclass
class WSDInstance:
    tokens: list[str]
    target_index: int
    target_lemma: str
    pos: POS | None = None
    gold: SenseID | None = None
    lemmas: list[str] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(f"target_index {self.target_index} out of range for {len(self.tokens)} tokens")
        if self.lemmas is not None and len(self.lemmas) != len(self.tokens):
            raise ValueError("lemma layer must align with tokens")


@dataclass
class WSDConfig:
    window: int = 8
    use_components: frozenset[str] = frozenset(COMPONENTS)
    relation_types: frozenset[RelationType] = frozenset({RelationType.SYNONYM, RelationType.HYPONYM})
    rng_seed: int = 1
    use_lemmas: bool = False
    prefer_sense_vectors: bool = True

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be positive")
        self.use_components = frozenset(self.use_components)
        if not self.use_components:
            raise ValueError("use_components must not be empty")
        unknown = self.use_components - set(COMPONENTS)
        if unknown:
            raise ValueError(f"unknown components {sorted(unknown)}")
        self.relation_types = frozenset(RelationType(t) for t in self.relation_types)


@dataclass
class ContextVector:
    vector: np.ndarray
    contributing_tokens: int


@dataclass
class SenseRepresentation:
    sense: SenseID
    s_s: np.ndarray | None = None
    s_g: np.ndarray | None = None
    s_r: np.ndarray | None = None

    def components(self, enabled: Iterable[str] = COMPONENTS) -> list[np.ndarray]:
        enabled = set(enabled)
        out = []
        for name, v in zip(COMPONENTS, (self.s_s, self.s_g, self.s_r)):
            if name in enabled and v is not None:
                out.append(v)
        return out


@dataclass
class Stores:
    word: EmbeddingStore
    sense: EmbeddingStore | None = None


def context_vector(inst: WSDInstance, word_store: EmbeddingStore, cfg: WSDConfig) -> ContextVector | None:
    """Centroid of the embedded tokens within ``cfg.window`` positions on each
    side of the target (target excluded).  Repeated tokens count per occurrence."""
    layer = inst.lemmas if cfg.use_lemmas and inst.lemmas is not None else inst.tokens
    lo = max(0, inst.target_index - cfg.window)
    hi = min(len(layer), inst.target_index + cfg.window + 1)
    vecs = []
    for i in range(lo, hi):
        if i == inst.target_index:
            continue
        v = word_store.get(layer[i])
        if v is not None:
            vecs.append(v)
    if not vecs:
        return None
    return ContextVector(centroid(vecs), len(vecs))


def gloss_vector(sense: SenseID, inv: SenseInventory, word_store: EmbeddingStore) -> np.ndarray | None:
    vecs = [v for v in (word_store.get(t) for t in inv.entry(sense).gloss_tokens) if v is not None]
    return centroid(vecs) if vecs else None


def relation_vector(sense: SenseID, inv: SenseInventory, sense_store: EmbeddingStore | None,
                    word_store: EmbeddingStore, cfg: WSDConfig) -> np.ndarray | None:
    """Centroid over the sense's related targets (types from ``cfg``).

    A sense target uses its fitted vector when one exists (and
    ``cfg.prefer_sense_vectors`` is on), otherwise its lemma's word vector.
    """
    vecs = []
    for t in related_senses(inv, sense, cfg.relation_types):
        v = None
        if isinstance(t, SenseID):
            if cfg.prefer_sense_vectors and sense_store is not None:
                v = sense_store.get(t.key)
            if v is None:
                v = word_store.get(t.lemma)
        else:
            v = word_store.get(t)
        if v is not None:
            vecs.append(v)
    return centroid(vecs) if vecs else None


def build_representation(sense: SenseID, inv: SenseInventory, stores: Stores, cfg: WSDConfig) -> SenseRepresentation:
    rep = SenseRepresentation(sense)
    if "sense" in cfg.use_components and stores.sense is not None:
        rep.s_s = stores.sense.get(sense.key)
    if "gloss" in cfg.use_components:
        rep.s_g = gloss_vector(sense, inv, stores.word)
    if "relation" in cfg.use_components:
        rep.s_r = relation_vector(sense, inv, stores.sense, stores.word, cfg)
    return rep


def _cos(a: np.ndarray, b: np.ndarray) -> float | None:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return None
    return float(np.dot(a, b) / (na * nb))


def similarity(c: ContextVector, rep: SenseRepresentation, components: Iterable[str] = COMPONENTS) -> float:
    """Mean cosine between the context and each present, enabled component.

    Components whose cosine is undefined (zero vector) are left out of the
    mean; with nothing left the score is ``-inf``.
    """
    scores = [s for s in (_cos(c.vector, x) for x in rep.components(components)) if s is not None]
    if not scores:
        return NEGATIVE_INFINITY
    return sum(scores) / len(scores)


class Disambiguator:
    """Scores instances against one inventory and store pair, caching sense
    representations across instances."""

    def __init__(self, inv: SenseInventory, stores: Stores, cfg: WSDConfig):
        self.inv = inv
        self.stores = stores
        self.cfg = cfg
        self._reps: dict[SenseID, SenseRepresentation] = {}

    def representation(self, sense: SenseID) -> SenseRepresentation:
        rep = self._reps.get(sense)
        if rep is None:
            rep = self._reps[sense] = build_representation(sense, self.inv, self.stores, self.cfg)
        return rep

    def scores(self, inst: WSDInstance) -> tuple[list[SenseID], list[float]] | None:
        candidates = senses_of(self.inv, inst.target_lemma, inst.pos)
        c = context_vector(inst, self.stores.word, self.cfg)
        if not candidates or c is None:
            return None
        return candidates, [similarity(c, self.representation(s), self.cfg.use_components) for s in candidates]

    def __call__(self, inst: WSDInstance) -> SenseID | None:
        scored = self.scores(inst)
        if scored is None:
            return None
        candidates, scores = scored
        best = 0
        for i, s in enumerate(scores):
            if s > scores[best]:
                best = i
        return candidates[best]


def disambiguate(inst: WSDInstance, inv: SenseInventory, stores: Stores, cfg: WSDConfig) -> SenseID | None:
    """Best sense for ``inst``, or ``None`` (abstain) without context or candidates."""
    return Disambiguator(inv, stores, cfg)(inst)


def baseline_first_sense(inst: WSDInstance, inv: SenseInventory) -> SenseID | None:
    candidates = senses_of(inv, inst.target_lemma, inst.pos)
    return candidates[0] if candidates else None


def baseline_random_sense(inst: WSDInstance, inv: SenseInventory, rng: np.random.Generator | int) -> SenseID | None:
    """Uniform pick among the candidate senses.  Pass one Generator across a
    corpus; an int seeds a fresh one."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    candidates = senses_of(inv, inst.target_lemma, inst.pos)
    if not candidates:
        return None
    return candidates[int(rng.integers(len(candidates)))]


# -- scoring ----------------------------------------------------------------

@dataclass
class Scores:
    overall: PRF
    per_pos: dict[str, PRF] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"overall": self.overall.as_dict(), "per_pos": {k: v.as_dict() for k, v in self.per_pos.items()}}


def score_corpus(predictions: Sequence[tuple[WSDInstance, SenseID | None]]) -> Scores:
    """IMS-style scores: precision over answered instances, recall over all.

    Per-POS rows use the instance POS (falling back to the gold sense's).
    """
    buckets: dict[str, list[int]] = {p.value: [0, 0, 0] for p in (POS.NOUN, POS.VERB, POS.ADJECTIVE)}
    tot = [0, 0, 0]
    for inst, pred in predictions:
        if inst.gold is None:
            raise ValueError("score_corpus needs a gold sense on every instance")
        pos = (inst.pos or inst.gold.pos).value
        row = buckets.setdefault(pos, [0, 0, 0])
        hit = pred is not None and pred == inst.gold
        for acc in (row, tot):
            acc[0] += 1
            acc[1] += pred is not None
            acc[2] += hit
    return Scores(PRF.from_counts(*tot), {k: PRF.from_counts(*v) for k, v in buckets.items()})


# -- corpus file ------------------------------------------------------------

class CorpusFormatError(ValueError):
    pass


def load_corpus(path: str | os.PathLike) -> list[WSDInstance]:
    """Read ``tokens<TAB>lemmas<TAB>target_index<TAB>lemma#pos[<TAB>gold]`` records."""
    path = Path(path)
    out = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise CorpusFormatError(f"{path}:{lineno}: expected 4 or 5 fields, got {len(fields)}")
            try:
                tokens = fields[0].split(" ")
                lemmas = fields[1].split(" ") if fields[1] else None
                idx = int(fields[2])
                lemma, pos = fields[3].rsplit("#", 1)
                gold = SenseID.parse(fields[4]) if len(fields) == 5 and fields[4] else None
                out.append(WSDInstance(tokens, idx, lemma, parse_pos(pos), gold, lemmas))
            except ValueError as e:
                raise CorpusFormatError(f"{path}:{lineno}: {e}") from None
    return out


def format_corpus(instances: Sequence[WSDInstance]) -> str:
    lines = []
    for inst in instances:
        lemmas = " ".join(inst.lemmas) if inst.lemmas is not None else ""
        pos = inst.pos.value if inst.pos is not None else POS.OTHER.value
        gold = f"\t{inst.gold.key}" if inst.gold is not None else ""
        lines.append(f"{' '.join(inst.tokens)}\t{lemmas}\t{inst.target_index}\t{inst.target_lemma}#{pos}{gold}\n")
    return "".join(lines)


def save_corpus(instances: Sequence[WSDInstance], path: str | os.PathLike) -> None:
    from .embeddings import atomic_write_text
    atomic_write_text(path, format_corpus(instances))


def report(instances: Sequence[WSDInstance], predictions: Sequence[SenseID | None], method: str,
           components: Iterable[str] | None = None) -> dict:
    """JSON-ready report with scores (when gold exists) and per-instance predictions."""
    rows = [{"instance": i, "target": f"{inst.target_lemma}#{inst.pos.value if inst.pos else ''}",
             "prediction": None if p is None else p.key,
             "gold": None if inst.gold is None else inst.gold.key}
            for i, (inst, p) in enumerate(zip(instances, predictions))]
    doc = {"method": method}
    if components is not None:
        doc["components"] = sorted(components)
    if instances and all(inst.gold is not None for inst in instances):
        doc["scores"] = score_corpus(list(zip(instances, predictions))).as_dict()
    else:
        doc["scores"] = None
    doc["predictions"] = rows
    return doc


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
