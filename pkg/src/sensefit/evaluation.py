"""Similarity-based evaluation of sense vectors, SimSense-style pair
generation, and inter-annotator agreement."""
from __future__ import annotations

import itertools
import logging
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .embeddings import EmbeddingStore, atomic_write_text
from .lexicon import RelationType, SenseID, SenseInventory, senses_of

log = logging.getLogger(__name__)

SAMPLE_TYPES = ("positive", "negative", "false")


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman's rho with average ranks for ties.

    ``None`` when fewer than two points or when either side has no rank
    variance.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two equal-length 1-d sequences")
    if len(x) < 2:
        return None
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    rx -= rx.mean()
    ry -= ry.mean()
    sxx = float(np.dot(rx, rx))
    syy = float(np.dot(ry, ry))
    if sxx == 0.0 or syy == 0.0:
        return None
    rho = float(np.dot(rx, ry) / np.sqrt(sxx * syy))
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class SimilarityPair:
    source: SenseID
    target: SenseID
    score: float | None = None
    sample_type: str | None = None

    def __post_init__(self) -> None:
        if self.score is not None and not 0.0 <= self.score <= 10.0:
            raise ValueError(f"similarity score {self.score} outside [0, 10]")
        if self.sample_type is not None and self.sample_type not in SAMPLE_TYPES:
            raise ValueError(f"unknown sample type {self.sample_type!r}")


@dataclass
class SimilarityResult:
    rho: float | None
    scored: int
    dropped: int
    dropped_pairs: list[SimilarityPair] = field(default_factory=list)


def evaluate_similarity(sense_store: EmbeddingStore, dataset: Sequence[SimilarityPair]) -> SimilarityResult:
    """Spearman correlation between gold scores and sense-vector cosines.

    Pairs with a missing (or zero) vector are dropped and counted.
    """
    model, gold, dropped = [], [], []
    for p in dataset:
        a = sense_store.get(p.source.key)
        b = sense_store.get(p.target.key)
        na = 0.0 if a is None else np.linalg.norm(a)
        nb = 0.0 if b is None else np.linalg.norm(b)
        if na == 0.0 or nb == 0.0 or p.score is None:
            dropped.append(p)
            continue
        model.append(float(np.dot(a, b) / (na * nb)))
        gold.append(p.score)
    rho = spearman(model, gold) if len(model) >= 2 else None
    if dropped:
        log.info("similarity evaluation: %d of %d pairs not scoreable", len(dropped), len(dataset))
    return SimilarityResult(rho, len(model), len(dropped), dropped)


# -- SimSense-style pair generation -----------------------------------------

def _related(inv: SenseInventory, a: SenseID, b: SenseID, types: frozenset[RelationType]) -> bool:
    for src, tgt in ((a, b), (b, a)):
        for r in inv.outgoing(src):
            if r.type in types and r.target == tgt:
                return True
    return False


def generate_simsense_pairs(word_pairs: Iterable[tuple[str, str]], inv: SenseInventory,
                            relation_types: Iterable[RelationType | str] = tuple(RelationType)
                            ) -> tuple[list[SimilarityPair], list[tuple[str, str]]]:
    """Unscored sense-pair skeletons for a list of word pairs.

    For each source sense, the first target sense linked to it by a
    sense-to-sense relation (either direction) gives a positive sample, and
    the first target sense not linked to it gives a negative one.  A word pair
    with no positive at all gives a single false sample made of both words'
    first senses.  Word pairs with an unknown lemma are returned as skipped.
    """
    types = frozenset(RelationType(t) for t in relation_types)
    out: list[SimilarityPair] = []
    skipped = []
    for a, b in word_pairs:
        src_senses, tgt_senses = senses_of(inv, a), senses_of(inv, b)
        if not src_senses or not tgt_senses:
            log.warning("skipping word pair (%s, %s): lemma not in inventory", a, b)
            skipped.append((a, b))
            continue
        found = False
        for s in src_senses:
            pos = next((t for t in tgt_senses if _related(inv, s, t, types)), None)
            if pos is None:
                continue
            found = True
            out.append(SimilarityPair(s, pos, sample_type="positive"))
            neg = next((t for t in tgt_senses if not _related(inv, s, t, types)), None)
            if neg is not None:
                out.append(SimilarityPair(s, neg, sample_type="negative"))
        if not found:
            out.append(SimilarityPair(src_senses[0], tgt_senses[0], sample_type="false"))
    return out, skipped


# -- agreement ----------------------------------------------------------------

@dataclass
class AnnotationMatrix:
    pairs: list[tuple[str, str]]
    annotators: list[str]
    scores: np.ndarray  # (n_pairs, n_annotators)

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != (len(self.pairs), len(self.annotators)):
            raise ValueError(f"score matrix shape {self.scores.shape} does not match "
                             f"{len(self.pairs)} pairs x {len(self.annotators)} annotators")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("annotation matrix must be complete")


def inter_annotator_agreement(m: AnnotationMatrix) -> tuple[float | None, float]:
    """Mean pairwise Spearman between annotators, and mean per-pair
    population standard deviation of the scores."""
    n_pairs, k = m.scores.shape
    if k < 2 or n_pairs < 2:
        raise ValueError("agreement needs at least two annotators and two pairs")
    rhos = []
    for i, j in itertools.combinations(range(k), 2):
        rho = spearman(m.scores[:, i], m.scores[:, j])
        if rho is None:
            warnings.warn(f"annotators {m.annotators[i]} and {m.annotators[j]}: correlation undefined "
                          "(constant scores); excluded", stacklevel=2)
            continue
        rhos.append(rho)
    rho_bar = float(np.mean(rhos)) if rhos else None
    sigma_bar = float(np.mean(np.std(m.scores, axis=1, ddof=0)))
    return rho_bar, sigma_bar


# -- files --------------------------------------------------------------------

def _fields(path: Path):
    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if line.strip() and not line.startswith("#"):
                yield lineno, line.split("\t")


def load_similarity_dataset(path: str | os.PathLike) -> list[SimilarityPair]:
    path = Path(path)
    out = []
    for lineno, f in _fields(path):
        if len(f) not in (3, 4):
            raise ValueError(f"{path}:{lineno}: expected src<TAB>tgt<TAB>score[<TAB>type]")
        try:
            score = float(f[2]) if f[2] else None
            out.append(SimilarityPair(SenseID.parse(f[0]), SenseID.parse(f[1]), score,
                                      f[3] if len(f) == 4 and f[3] else None))
        except ValueError as e:
            raise ValueError(f"{path}:{lineno}: {e}") from None
    return out


def format_similarity_dataset(pairs: Sequence[SimilarityPair]) -> str:
    lines = []
    for p in pairs:
        score = "" if p.score is None else repr(float(p.score))
        lines.append(f"{p.source.key}\t{p.target.key}\t{score}\t{p.sample_type or ''}\n")
    return "".join(lines)


def save_similarity_dataset(pairs: Sequence[SimilarityPair], path: str | os.PathLike) -> None:
    atomic_write_text(path, format_similarity_dataset(pairs))


def load_word_pairs(path: str | os.PathLike) -> list[tuple[str, str]]:
    """First two tab-separated columns of each line; extra columns are ignored."""
    path = Path(path)
    out = []
    for lineno, f in _fields(path):
        if len(f) < 2:
            raise ValueError(f"{path}:{lineno}: expected lemma<TAB>lemma")
        out.append((f[0], f[1]))
    return out


def load_annotations(path: str | os.PathLike) -> AnnotationMatrix:
    """Header row of annotator ids (optionally preceded by two label columns),
    then ``src<TAB>tgt<TAB>score_1 ... score_k`` rows."""
    path = Path(path)
    rows = list(_fields(path))
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one pair")
    header = rows[0][1]
    width = len(rows[1][1])
    if len(header) == width:
        annotators = header[2:]
    elif len(header) == width - 2:
        annotators = header
    else:
        raise ValueError(f"{path}:1: header has {len(header)} fields for rows of {width}")
    pairs, scores = [], []
    for lineno, f in rows[1:]:
        if len(f) != width:
            raise ValueError(f"{path}:{lineno}: expected {width} fields, got {len(f)}")
        try:
            scores.append([float(x) for x in f[2:]])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric score") from None
        pairs.append((f[0], f[1]))
    return AnnotationMatrix(pairs, list(annotators), np.array(scores))
