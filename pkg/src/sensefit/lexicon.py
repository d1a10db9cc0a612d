"""Sense inventory: lemmas with ordered senses, glosses and typed relations.

Inventory files are UTF-8, tab separated, with two record kinds::

    S  lemma  pos  index  gloss tokens (space separated)
    R  type   src_lemma#pos#index  tgt_lemma#pos#index | tgt_lemma

A relation whose target is a bare lemma is a sense-to-lemma relation: it
names the target word but not which of its senses is meant.
"""
from __future__ import annotations

import enum
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

log = logging.getLogger(__name__)


class InventoryFormatError(ValueError):
    """Malformed inventory record; the message carries the line number."""


class POS(str, enum.Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    OTHER = "other"


_POS_ALIASES = {"n": POS.NOUN, "v": POS.VERB, "a": POS.ADJECTIVE, "adj": POS.ADJECTIVE}


def parse_pos(text: str) -> POS:
    try:
        return POS(text)
    except ValueError:
        if text in _POS_ALIASES:
            return _POS_ALIASES[text]
        raise ValueError(f"unknown part of speech {text!r}") from None


class RelationType(str, enum.Enum):
    SYNONYM = "synonym"
    ANTONYM = "antonym"
    HYPONYM = "hyponym"
    HYPERNYM = "hypernym"


class Polarity(str, enum.Enum):
    ATTRACT = "attract"
    REPEL = "repel"


DEFAULT_POLARITY: dict[RelationType, Polarity] = {
    RelationType.SYNONYM: Polarity.ATTRACT,
    RelationType.HYPONYM: Polarity.ATTRACT,
    RelationType.HYPERNYM: Polarity.ATTRACT,
    RelationType.ANTONYM: Polarity.REPEL,
}


@dataclass(frozen=True, order=True)
class SenseID:
    lemma: str
    pos: POS
    index: int

    @property
    def key(self) -> str:
        return f"{self.lemma}#{self.pos.value}#{self.index}"

    def __str__(self) -> str:
        return self.key

    @classmethod
    def parse(cls, text: str) -> "SenseID":
        parts = text.rsplit("#", 2)
        if len(parts) != 3 or not parts[0]:
            raise ValueError(f"not a sense id: {text!r}")
        index = int(parts[2])
        if index < 1:
            raise ValueError(f"sense index must be positive: {text!r}")
        return cls(parts[0], parse_pos(parts[1]), index)


@dataclass(frozen=True)
class SenseEntry:
    id: SenseID
    gloss_tokens: tuple[str, ...] = ()


Target = Union[SenseID, str]


@dataclass(frozen=True)
class Relation:
    type: RelationType
    source: SenseID
    target: Target

    @property
    def ambiguous(self) -> bool:
        return isinstance(self.target, str)


def format_target(t: Target) -> str:
    return t.key if isinstance(t, SenseID) else t


@dataclass
class SenseInventory:
    entries: dict[str, list[SenseEntry]] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_id: dict[SenseID, SenseEntry] = {}
        for lemma, senses in self.entries.items():
            for e in senses:
                if e.id.lemma != lemma:
                    raise ValueError(f"sense {e.id} filed under lemma {lemma!r}")
                if e.id in self._by_id:
                    raise ValueError(f"duplicate sense {e.id}")
                self._by_id[e.id] = e
        self._outgoing: dict[SenseID, list[Relation]] = defaultdict(list)
        for r in self.relations:
            if r.source not in self._by_id:
                raise ValueError(f"relation source {r.source} is not in the inventory")
            if isinstance(r.target, SenseID):
                if r.target not in self._by_id:
                    raise ValueError(f"relation target {r.target} is not in the inventory")
            elif not self.entries.get(r.target):
                raise ValueError(f"relation target lemma {r.target!r} has no senses")
            self._outgoing[r.source].append(r)

    def __contains__(self, sense: object) -> bool:
        return sense in self._by_id

    def entry(self, sense: SenseID) -> SenseEntry:
        return self._by_id[sense]

    def senses(self) -> list[SenseID]:
        return [e.id for senses in self.entries.values() for e in senses]

    def outgoing(self, sense: SenseID) -> list[Relation]:
        return self._outgoing.get(sense, [])

    @property
    def n_senses(self) -> int:
        return len(self._by_id)


def senses_of(inv: SenseInventory, lemma: str, pos: POS | str | None = None) -> list[SenseID]:
    """Senses of ``lemma`` in inventory order, optionally restricted to one POS."""
    entries = inv.entries.get(lemma, [])
    if pos is None:
        return [e.id for e in entries]
    pos = parse_pos(pos) if isinstance(pos, str) and not isinstance(pos, POS) else pos
    return [e.id for e in entries if e.id.pos is pos]


def related_senses(inv: SenseInventory, s: SenseID, types: Iterable[RelationType | str]) -> list[Target]:
    """Targets of all relations leaving ``s`` whose type is in ``types``.

    Sense-to-lemma targets are returned as plain lemma strings.
    """
    if s not in inv:
        raise KeyError(s)
    wanted = {RelationType(t) for t in types}
    return [r.target for r in inv.outgoing(s) if r.type in wanted]


def load_inventory(path: str | os.PathLike) -> SenseInventory:
    path = Path(path)
    entries: dict[str, list[SenseEntry]] = {}
    ids: set[SenseID] = set()
    pending: list[tuple[int, list[str]]] = []
    last_index: dict[tuple[str, POS], int] = {}

    with path.open("r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            kind = fields[0]
            if kind == "S":
                if len(fields) not in (4, 5):
                    raise InventoryFormatError(f"{path}:{lineno}: sense record needs 4 or 5 fields, got {len(fields)}")
                lemma = fields[1]
                try:
                    pos = parse_pos(fields[2])
                    index = int(fields[3])
                except ValueError as e:
                    raise InventoryFormatError(f"{path}:{lineno}: {e}") from None
                if not lemma or index < 1:
                    raise InventoryFormatError(f"{path}:{lineno}: empty lemma or non-positive index")
                prev = last_index.get((lemma, pos), 0)
                if index <= prev:
                    raise InventoryFormatError(
                        f"{path}:{lineno}: sense index {index} of {lemma}#{pos.value} is not ascending (previous {prev})"
                    )
                last_index[(lemma, pos)] = index
                sid = SenseID(lemma, pos, index)
                gloss = tuple(fields[4].split()) if len(fields) == 5 else ()
                entries.setdefault(lemma, []).append(SenseEntry(sid, gloss))
                ids.add(sid)
            elif kind == "R":
                if len(fields) != 4:
                    raise InventoryFormatError(f"{path}:{lineno}: relation record needs 4 fields, got {len(fields)}")
                pending.append((lineno, fields))
            else:
                raise InventoryFormatError(f"{path}:{lineno}: unknown record kind {kind!r}")

    relations = []
    for lineno, fields in pending:
        try:
            rtype = RelationType(fields[1])
        except ValueError:
            raise InventoryFormatError(f"{path}:{lineno}: unknown relation type {fields[1]!r}") from None
        try:
            src = SenseID.parse(fields[2])
        except ValueError as e:
            raise InventoryFormatError(f"{path}:{lineno}: bad relation source: {e}") from None
        if src not in ids:
            raise InventoryFormatError(f"{path}:{lineno}: relation source {src} does not exist")
        target = _parse_target(fields[3], ids, entries)
        if target is None:
            raise InventoryFormatError(f"{path}:{lineno}: relation target {fields[3]!r} does not exist")
        relations.append(Relation(rtype, src, target))

    inv = SenseInventory(entries, relations)
    log.info("loaded inventory %s: %d lemmas, %d senses, %d relations",
             path, len(entries), inv.n_senses, len(relations))
    return inv


def _parse_target(text: str, ids: set[SenseID], entries: Mapping[str, list]) -> Target | None:
    try:
        sid = SenseID.parse(text)
    except ValueError:
        sid = None
    if sid is not None:
        return sid if sid in ids else None
    return text if entries.get(text) else None


def save_inventory(inv: SenseInventory, path: str | os.PathLike) -> None:
    from .embeddings import atomic_write_text

    lines = []
    for senses in inv.entries.values():
        for e in senses:
            lines.append(f"S\t{e.id.lemma}\t{e.id.pos.value}\t{e.id.index}\t{' '.join(e.gloss_tokens)}\n")
    for r in inv.relations:
        lines.append(f"R\t{r.type.value}\t{r.source.key}\t{format_target(r.target)}\n")
    atomic_write_text(path, "".join(lines))


# -- constraints ------------------------------------------------------------

@dataclass
class ConstraintCounts:
    """Per-relation-type bookkeeping.

    ``candidates`` is the number of sense pairs the relations produced
    (one per sense-to-sense relation, one per target sense for expanded
    sense-to-lemma relations); every candidate ends up either kept or in
    exactly one drop bucket.
    """
    relations: int = 0
    ambiguous_relations: int = 0
    ambiguous_excluded: int = 0
    candidates: int = 0
    dropped_unembedded: int = 0
    dropped_self: int = 0
    dropped_duplicate: int = 0
    dropped_conflict: int = 0
    kept: int = 0

    def balances(self) -> bool:
        return self.kept == (self.candidates - self.dropped_unembedded - self.dropped_self
                             - self.dropped_duplicate - self.dropped_conflict)


@dataclass
class ConstraintSet:
    attract: list[tuple[SenseID, SenseID]] = field(default_factory=list)
    repel: list[tuple[SenseID, SenseID]] = field(default_factory=list)
    attract_weights: list[float] = field(default_factory=list)
    repel_weights: list[float] = field(default_factory=list)
    counts: dict[RelationType, ConstraintCounts] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.attract_weights:
            self.attract_weights = [1.0] * len(self.attract)
        if not self.repel_weights:
            self.repel_weights = [1.0] * len(self.repel)
        if len(self.attract_weights) != len(self.attract) or len(self.repel_weights) != len(self.repel):
            raise ValueError("constraint weights must parallel the pair lists")

    def __len__(self) -> int:
        return len(self.attract) + len(self.repel)

    def senses(self) -> set[SenseID]:
        return {s for pair in self.attract + self.repel for s in pair}


def extract_constraints(inv: SenseInventory, store, polarity_map: Mapping[RelationType, Polarity] | None = None,
                        expand_ambiguous: bool = True, relations: Iterable[Relation] | None = None) -> ConstraintSet:
    """Turn inventory relations into ATTRACT/REPEL sense pairs.

    ``store`` is the operative sense store (keys are ``SenseID.key``); pairs
    with a member missing from it are dropped.  A sense-to-lemma relation is
    either skipped or, with ``expand_ambiguous``, expanded to one pair per
    sense of the target lemma, each weighted ``1/k``.  Repeated ordered pairs
    within a polarity keep the first occurrence.  A pair that lands in both
    polarities (in either order) survives only on the side with the larger
    weight, and is dropped from both on equal weight.
    """
    pmap = dict(DEFAULT_POLARITY if polarity_map is None else polarity_map)
    missing = set(RelationType) - set(pmap)
    if missing:
        raise ValueError(f"polarity map is missing {sorted(t.value for t in missing)}")
    rels = inv.relations if relations is None else list(relations)

    counts = {t: ConstraintCounts() for t in RelationType}
    # per polarity: ordered pair -> (weight, type)
    chosen: dict[Polarity, dict[tuple[SenseID, SenseID], tuple[float, RelationType]]] = {
        Polarity.ATTRACT: {}, Polarity.REPEL: {}}

    for r in rels:
        c = counts[r.type]
        c.relations += 1
        if isinstance(r.target, SenseID):
            targets, weight = [r.target], 1.0
        else:
            c.ambiguous_relations += 1
            if not expand_ambiguous:
                c.ambiguous_excluded += 1
                continue
            targets = senses_of(inv, r.target)
            weight = 1.0 / len(targets)
        pol = Polarity(pmap[r.type])
        for t in targets:
            c.candidates += 1
            if r.source == t:
                c.dropped_self += 1
            elif r.source.key not in store or t.key not in store:
                c.dropped_unembedded += 1
            elif (r.source, t) in chosen[pol]:
                c.dropped_duplicate += 1
            else:
                chosen[pol][(r.source, t)] = (weight, r.type)

    att = chosen[Polarity.ATTRACT]
    rep = chosen[Polarity.REPEL]
    # strongest weight per unordered pair and polarity
    strength: dict[Polarity, dict[frozenset, float]] = {Polarity.ATTRACT: {}, Polarity.REPEL: {}}
    for pol, pairs in chosen.items():
        for pair, (w, _) in pairs.items():
            key = frozenset(pair)
            strength[pol][key] = max(w, strength[pol].get(key, 0.0))
    shared = strength[Polarity.ATTRACT].keys() & strength[Polarity.REPEL].keys()
    losers: dict[Polarity, set[frozenset]] = {Polarity.ATTRACT: set(), Polarity.REPEL: set()}
    for key in shared:
        wa, wr = strength[Polarity.ATTRACT][key], strength[Polarity.REPEL][key]
        if wa <= wr:
            losers[Polarity.ATTRACT].add(key)
        if wr <= wa:
            losers[Polarity.REPEL].add(key)

    out = ConstraintSet(counts=counts)
    for pol, pairs, dst, wdst in ((Polarity.ATTRACT, att, out.attract, out.attract_weights),
                                  (Polarity.REPEL, rep, out.repel, out.repel_weights)):
        for pair, (w, rtype) in pairs.items():
            if frozenset(pair) in losers[pol]:
                counts[rtype].dropped_conflict += 1
                continue
            counts[rtype].kept += 1
            dst.append(pair)
            wdst.append(w)
    if shared:
        log.info("%d sense pair(s) were both attract and repel candidates; the weaker side was dropped "
                 "(both on equal weight)", len(shared))
    for t, c in counts.items():
        log.info("%s: %d relations -> %d constraints (unembedded %d, self %d, duplicate %d, conflict %d)",
                 t.value, c.relations, c.kept, c.dropped_unembedded, c.dropped_self,
                 c.dropped_duplicate, c.dropped_conflict)
    return out
