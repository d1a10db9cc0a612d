"""SenseFitting: gloss-centroid sense initialization followed by
attract/repel specialization of the sense vectors.

Batch objective, for attract pairs (l, r) with in-batch negatives (tl, tr)::

    hinge(attract_margin + cos(l, tl) - cos(l, r))
  + hinge(attract_margin + cos(r, tr) - cos(r, l))

for repel pairs::

    hinge(repel_margin + cos(l, r) - cos(l, tl))
  + hinge(repel_margin + cos(r, l) - cos(r, tr))

each scaled by the constraint weight, plus
``reg_lambda * sum ||v - v_original||^2`` over the distinct vectors in the
batch.  An attract anchor's negative is its most similar other batch member,
a repel anchor's negative its least similar one (the hardest negative for
each hinge).  Steps use AdaGrad and every touched row is renormalized.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingStore, CaseMode, centroid, cosine
from .lexicon import (ConstraintSet, Polarity, RelationType, SenseEntry, SenseID,
                      SenseInventory, extract_constraints)

log = logging.getLogger(__name__)

ADAGRAD_INITIAL_ACCUMULATOR = 0.1


@dataclass
class SenseFitConfig:
    delta: float = 0.05
    attract_margin: float = 0.6
    repel_margin: float = 0.0
    reg_lambda: float = 1e-9
    batch_size: int = 50
    epochs: int = 5
    learning_rate: float = 0.05
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if not -1.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [-1, 1], got {self.delta}")
        if self.attract_margin < 0 or self.repel_margin < 0:
            raise ValueError("margins must be non-negative")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be non-negative")
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2 (negatives come from the batch)")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not -(2 ** 63) <= self.rng_seed < 2 ** 64:
            raise ValueError("rng_seed must fit in 64 bits")

    def replace(self, **changes) -> "SenseFitConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SenseFitConfig(**values)


@dataclass(eq=False)
class SenseEmbeddingStore(EmbeddingStore):
    """Sense vectors keyed by ``lemma#pos#index`` plus a frozen copy of the
    vectors as they were before specialization (the regularizer's anchor)."""
    originals: np.ndarray | None = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.originals is None:
            self.originals = self.vectors.copy()
        else:
            self.originals = np.asarray(self.originals, dtype=np.float64)
            if self.originals.shape != self.vectors.shape:
                raise ValueError("originals must parallel the current vector table")

    @classmethod
    def from_store(cls, store: EmbeddingStore) -> "SenseEmbeddingStore":
        return cls(list(store.keys), store.vectors.copy(), store.dimension, CaseMode.AS_IS)

    def copy(self) -> "SenseEmbeddingStore":
        return SenseEmbeddingStore(list(self.keys), self.vectors.copy(), self.dimension,
                                   self.case_mode, self.originals.copy())

    def sense_vector(self, sense: SenseID) -> np.ndarray | None:
        return self.get(sense.key)


# -- initialization ---------------------------------------------------------

def init_sense_embedding(word_store: EmbeddingStore, entry: SenseEntry, cfg: SenseFitConfig) -> np.ndarray | None:
    """Centroid of the lemma's word vector and the gloss words whose cosine
    to it is strictly above ``cfg.delta``.  ``None`` if the lemma has no
    usable word vector; out-of-vocabulary gloss words are skipped."""
    lemma_vec = word_store.get(entry.id.lemma)
    if lemma_vec is None or not np.any(lemma_vec):
        return None
    members = [lemma_vec]
    for tok in entry.gloss_tokens:
        v = word_store.get(tok)
        if v is None or not np.any(v):
            continue
        if cosine(v, lemma_vec) > cfg.delta:
            members.append(v)
    return centroid(members)


def init_all(word_store: EmbeddingStore, inventory: SenseInventory,
             cfg: SenseFitConfig) -> tuple[SenseEmbeddingStore, list[SenseID]]:
    """Initial, unit-normalized sense vectors for every sense whose lemma is
    embedded.  Returns the store and the list of skipped senses."""
    keys, rows, skipped = [], [], []
    for lemma_senses in inventory.entries.values():
        for entry in lemma_senses:
            v = init_sense_embedding(word_store, entry, cfg)
            n = 0.0 if v is None else np.linalg.norm(v)
            if n == 0.0:
                skipped.append(entry.id)
                continue
            keys.append(entry.id.key)
            rows.append(v / n)
    vectors = np.vstack(rows) if rows else np.zeros((0, word_store.dimension))
    if skipped:
        log.info("skipped %d sense(s) without an embedded lemma", len(skipped))
    return SenseEmbeddingStore(keys, vectors, word_store.dimension), skipped


# -- batch objective --------------------------------------------------------

@dataclass
class PairBatch:
    """Constraint pairs as row indices into a store, with weights."""
    left: np.ndarray
    right: np.ndarray
    weights: np.ndarray

    @classmethod
    def empty(cls) -> "PairBatch":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), np.zeros(0))

    @classmethod
    def from_pairs(cls, store: EmbeddingStore, pairs: Sequence[tuple], weights: Sequence[float] | None = None) -> "PairBatch":
        def row(s):
            key = s.key if isinstance(s, SenseID) else s
            i = store.row(key)
            if i is None:
                raise KeyError(f"{key} has no vector in the sense store")
            return i
        left = np.array([row(a) for a, _ in pairs], dtype=np.int64)
        right = np.array([row(b) for _, b in pairs], dtype=np.int64)
        w = np.ones(len(pairs)) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(left, right, w)

    def __len__(self) -> int:
        return len(self.left)

    def take(self, idx: np.ndarray) -> "PairBatch":
        return PairBatch(self.left[idx], self.right[idx], self.weights[idx])


@dataclass
class BatchLoss:
    attract: float = 0.0
    repel: float = 0.0
    reg: float = 0.0

    @property
    def total(self) -> float:
        return self.attract + self.repel + self.reg


def select_negatives(unit: np.ndarray, left: np.ndarray, right: np.ndarray, attract: bool) -> tuple[np.ndarray, np.ndarray]:
    """In-batch negatives for every anchor, as indices into ``unit``.

    Candidates are the other slots of the batch (ordered l0, r0, l1, r1, ...)
    whose row is neither the anchor nor its partner.  Attract anchors take the
    most similar candidate, repel anchors the least similar; ties go to the
    lower slot.  ``-1`` marks an anchor with no candidate.
    """
    n = len(left)
    if n == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy()
    slots = np.empty(2 * n, dtype=np.int64)
    slots[0::2] = left
    slots[1::2] = right
    partners = np.empty_like(slots)
    partners[0::2] = right
    partners[1::2] = left
    sims = unit[slots] @ unit[slots].T
    masked = (slots[None, :] == slots[:, None]) | (slots[None, :] == partners[:, None])
    fill = -np.inf if attract else np.inf
    sims = np.where(masked, fill, sims)
    pick = np.argmax(sims, axis=1) if attract else np.argmin(sims, axis=1)
    neg = slots[pick]
    neg[masked.all(axis=1)] = -1
    return neg[0::2].copy(), neg[1::2].copy()


def _hinge(unit, batch: PairBatch, neg_l, neg_r, margin: float, attract: bool, grad_unit) -> float:
    loss = 0.0
    for a, p, t in ((batch.left, batch.right, neg_l), (batch.right, batch.left, neg_r)):
        ok = t >= 0
        a, p, t, w = a[ok], p[ok], t[ok], batch.weights[ok]
        cos_ap = np.einsum("ij,ij->i", unit[a], unit[p])
        cos_at = np.einsum("ij,ij->i", unit[a], unit[t])
        z = margin + cos_at - cos_ap if attract else margin + cos_ap - cos_at
        on = z > 0
        if not on.any():
            continue
        a, p, t, w = a[on], p[on], t[on], w[on]
        loss += float(np.sum(w * z[on]))
        # d cos(x, y) / d unit_x = unit_y
        s = 1.0 if attract else -1.0
        ww = w[:, None]
        np.add.at(grad_unit, a, s * ww * (unit[t] - unit[p]))
        np.add.at(grad_unit, t, s * ww * unit[a])
        np.add.at(grad_unit, p, -s * ww * unit[a])
    return loss


def batch_objective(vectors: np.ndarray, originals: np.ndarray, attract: PairBatch, repel: PairBatch,
                    negatives: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
                    cfg: SenseFitConfig) -> tuple[BatchLoss, np.ndarray]:
    """Loss and gradient w.r.t. ``vectors`` for fixed negatives.

    ``vectors``/``originals`` are the batch-local tables; pair and negative
    indices refer to their rows.  Cosines are taken on the normalized rows, so
    the gradient is exact for vectors off the unit sphere too.
    """
    norms = np.linalg.norm(vectors, axis=1)
    unit = vectors / norms[:, None]
    grad_unit = np.zeros_like(vectors)
    att_l, att_r, rep_l, rep_r = negatives
    loss = BatchLoss()
    loss.attract = _hinge(unit, attract, att_l, att_r, cfg.attract_margin, True, grad_unit)
    loss.repel = _hinge(unit, repel, rep_l, rep_r, cfg.repel_margin, False, grad_unit)
    # chain rule through v / ||v||
    radial = np.einsum("ij,ij->i", grad_unit, unit)
    grad = (grad_unit - radial[:, None] * unit) / norms[:, None]
    diff = vectors - originals
    loss.reg = float(cfg.reg_lambda * np.sum(diff * diff))
    grad += 2.0 * cfg.reg_lambda * diff
    return loss, grad


def _localize(attract: PairBatch, repel: PairBatch) -> tuple[np.ndarray, PairBatch, PairBatch]:
    rows = np.unique(np.concatenate([attract.left, attract.right, repel.left, repel.right]))

    def loc(b: PairBatch) -> PairBatch:
        return PairBatch(np.searchsorted(rows, b.left), np.searchsorted(rows, b.right), b.weights)
    return rows, loc(attract), loc(repel)


def new_accumulator(store: EmbeddingStore) -> np.ndarray:
    return np.full(store.vectors.shape, ADAGRAD_INITIAL_ACCUMULATOR)


def mini_batch_update(store: SenseEmbeddingStore, attract: PairBatch, repel: PairBatch, cfg: SenseFitConfig,
                      accumulator: np.ndarray | None = None) -> BatchLoss:
    """One AdaGrad step on the batch objective, applied to ``store`` in place.

    Returns the loss before the step.  Only rows named in the batch change,
    and each of them is renormalized afterwards.
    """
    if len(attract) == 0 and len(repel) == 0:
        return BatchLoss()
    if accumulator is None:
        accumulator = new_accumulator(store)
    rows, att, rep = _localize(attract, repel)
    vectors = store.vectors[rows]
    unit = vectors / np.linalg.norm(vectors, axis=1)[:, None]
    negatives = (*select_negatives(unit, att.left, att.right, True),
                 *select_negatives(unit, rep.left, rep.right, False))
    loss, grad = batch_objective(vectors, store.originals[rows], att, rep, negatives, cfg)
    if not grad.any():
        return loss
    acc = accumulator[rows] + grad * grad
    accumulator[rows] = acc
    updated = vectors - cfg.learning_rate * grad / np.sqrt(acc)
    norms = np.linalg.norm(updated, axis=1)
    if np.any(norms == 0.0):
        raise FloatingPointError("update collapsed a sense vector to zero")
    store.vectors[rows] = updated / norms[:, None]
    return loss


# -- epochs -----------------------------------------------------------------

@dataclass
class EpochLoss:
    epoch: int
    mean_attract_loss: float
    mean_repel_loss: float
    mean_reg: float
    steps: int


def _chunks(order: np.ndarray, size: int) -> list[np.ndarray]:
    parts = [order[i:i + size] for i in range(0, len(order), size)]
    # a trailing batch of one pair has no in-batch negative; fold it into its neighbour
    if len(parts) >= 2 and len(parts[-1]) < 2:
        last = parts.pop()
        parts[-1] = np.concatenate([parts[-1], last])
    return parts


def specialize(store: SenseEmbeddingStore, constraints: ConstraintSet, cfg: SenseFitConfig,
               on_epoch: Callable[[int, SenseEmbeddingStore, EpochLoss], None] | None = None
               ) -> tuple[SenseEmbeddingStore, list[EpochLoss]]:
    """Run ``cfg.epochs`` passes of attract/repel specialization on a copy of ``store``.

    Each epoch shuffles both constraint lists with one generator seeded from
    ``cfg.rng_seed`` and walks them in ``cfg.batch_size`` chunks, pairing the
    i-th attract chunk with the i-th repel chunk in one step.
    """
    out = store.copy()
    if len(constraints) == 0:
        warnings.warn("empty constraint set; store returned unchanged", stacklevel=2)
        return out, []
    attract = PairBatch.from_pairs(out, constraints.attract, constraints.attract_weights)
    repel = PairBatch.from_pairs(out, constraints.repel, constraints.repel_weights)
    for name, b in (("attract", attract), ("repel", repel)):
        if len(b) == 1:
            log.warning("only one %s constraint: it has no in-batch negative and only the regularizer applies", name)

    rng = np.random.default_rng(cfg.rng_seed)
    accumulator = new_accumulator(out)
    trace = []
    for epoch in range(1, cfg.epochs + 1):
        att_chunks = _chunks(rng.permutation(len(attract)), cfg.batch_size)
        rep_chunks = _chunks(rng.permutation(len(repel)), cfg.batch_size)
        steps = max(len(att_chunks), len(rep_chunks))
        sums = np.zeros(3)
        for i in range(steps):
            a = attract.take(att_chunks[i]) if i < len(att_chunks) else PairBatch.empty()
            r = repel.take(rep_chunks[i]) if i < len(rep_chunks) else PairBatch.empty()
            loss = mini_batch_update(out, a, r, cfg, accumulator)
            sums += (loss.attract, loss.repel, loss.reg)
        mean = sums / max(steps, 1)
        rec = EpochLoss(epoch, float(mean[0]), float(mean[1]), float(mean[2]), steps)
        trace.append(rec)
        log.debug("epoch %d: attract %.5f repel %.5f reg %.3g", epoch, *mean)
        if on_epoch is not None:
            on_epoch(epoch, out, rec)
    return out, trace


@dataclass
class FitResult:
    store: SenseEmbeddingStore
    trace: list[EpochLoss]
    constraints: ConstraintSet
    skipped: list[SenseID] = field(default_factory=list)


def sense_fit(word_store: EmbeddingStore, inventory: SenseInventory,
              polarity_map: Mapping[RelationType, Polarity] | None = None,
              cfg: SenseFitConfig | None = None, expand_ambiguous: bool = True) -> FitResult:
    """Initialize sense vectors from glosses, derive constraints, specialize."""
    cfg = cfg or SenseFitConfig()
    initial, skipped = init_all(word_store, inventory, cfg)
    constraints = extract_constraints(inventory, initial, polarity_map, expand_ambiguous=expand_ambiguous)
    fitted, trace = specialize(initial, constraints, cfg)
    return FitResult(fitted, trace, constraints, skipped)


def write_loss_csv(trace: Sequence[EpochLoss]) -> str:
    lines = ["epoch,mean_attract_loss,mean_repel_loss,mean_reg\n"]
    lines += [f"{e.epoch},{e.mean_attract_loss!r},{e.mean_repel_loss!r},{e.mean_reg!r}\n" for e in trace]
    return "".join(lines)
