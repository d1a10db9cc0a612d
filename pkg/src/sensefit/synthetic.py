"""Seeded synthetic inventories and embeddings.

The quantitative checks run on small worlds with planted structure: latent concept vectors, senses assigned to concepts, relations
derived from the concept graph, and word vectors that blend a lemma's
concepts with noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingStore
from .fitting import SenseEmbeddingStore
from .lexicon import (POS, ConstraintSet, Relation, RelationType, SenseEntry, SenseID, SenseInventory,
                      senses_of)
from .evaluation import SimilarityPair
from .wsd import WSDInstance


def _unit(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def constraint_fixture(seed: int = 0, dim: int = 25, n_senses: int = 20, n_attract: int = 10,
                       n_repel: int = 5, n_untouched: int = 4) -> tuple[SenseEmbeddingStore, ConstraintSet]:
    """``n_senses`` random unit sense vectors with disjoint-ish attract and
    repel pairs; the last ``n_untouched`` senses appear in no constraint."""
    rng = np.random.default_rng(seed)
    ids = [SenseID(f"w{i:02d}", POS.NOUN, 1) for i in range(n_senses)]
    store = SenseEmbeddingStore([s.key for s in ids], _unit(rng, n_senses, dim), dim)
    active = n_senses - n_untouched
    pairs: set[frozenset] = set()
    attract, repel = [], []
    while len(attract) < n_attract or len(repel) < n_repel:
        a, b = rng.choice(active, size=2, replace=False)
        key = frozenset((int(a), int(b)))
        if key in pairs:
            continue
        pairs.add(key)
        if len(attract) < n_attract:
            attract.append((ids[a], ids[b]))
        else:
            repel.append((ids[a], ids[b]))
    return store, ConstraintSet(attract=attract, repel=repel)


# -- relation disambiguation world ---------------------------------------------

@dataclass
class RelationWorld:
    word_store: EmbeddingStore
    inventory: SenseInventory           # relations with lemma targets only
    gold: dict[Relation, SenseID]       # lemma-target relation -> planted sense
    full_inventory: SenseInventory      # same relations with sense targets
    concept_of: dict[SenseID, int]


def relation_world(seed: int = 0, n_lemmas: int = 40, dim: int = 50, noise: float = 0.3,
                   synset_size: int = 3, antonym_fraction: float = 0.15,
                   antonym_contrast: float = 1.0, hierarchy_coherence: float = 1.0) -> RelationWorld:
    """Symmetric wordnet-like world.

    Senses are grouped into synsets (concepts) of ``synset_size`` senses from
    different lemmas; every two members of a synset are synonyms in both
    directions.  Concepts form a random forest whose edges yield mirrored
    hyponym/hypernym relations between all member senses; a child concept
    leans towards its parent by ``hierarchy_coherence``.  A few disjoint
    concept pairs are antonymous in both directions; the second concept of
    such a pair is pulled towards the negated first by ``antonym_contrast``
    (0 leaves it independent).  A lemma's word vector is the mean of its
    senses' concept vectors plus Gaussian noise.  Relations whose
    planted target would be ambiguous within the target lemma (two senses of
    it related to the same source, whatever the types) are left out.
    """
    rng = np.random.default_rng(seed)
    n_senses_per = rng.integers(2, 4, size=n_lemmas)
    lemmas = [f"lemma{i:02d}" for i in range(n_lemmas)]
    senses = [SenseID(lem, POS.NOUN, j + 1) for lem, k in zip(lemmas, n_senses_per) for j in range(k)]

    # assign senses to synsets of distinct lemmas
    order = list(rng.permutation(len(senses)))
    synsets: list[list[SenseID]] = []
    while order:
        group, rest = [], []
        for idx in order:
            s = senses[idx]
            if len(group) < synset_size and all(g.lemma != s.lemma for g in group):
                group.append(s)
            else:
                rest.append(idx)
        synsets.append(group)
        order = rest
    concept_of = {s: c for c, group in enumerate(synsets) for s in group}
    n_concepts = len(synsets)
    centers = _unit(rng, n_concepts, dim)

    # concept forest: each concept after the first few gets a random earlier parent
    parent = {c: int(rng.integers(0, c)) for c in range(4, n_concepts)}
    for c in range(4, n_concepts):
        v = centers[c] + hierarchy_coherence * centers[parent[c]]
        centers[c] = v / np.linalg.norm(v)
    antonyms = set()
    used: set[int] = set()
    n_ant = min(int(antonym_fraction * n_concepts), n_concepts // 2)
    while len(antonyms) < n_ant:
        a, b = (int(x) for x in rng.choice(n_concepts, size=2, replace=False))
        if a in used or b in used or parent.get(a) == b or parent.get(b) == a:
            continue
        antonyms.add(frozenset((a, b)))
        used.update((a, b))
    for a, b in sorted(tuple(sorted(p)) for p in antonyms):
        v = centers[b] - antonym_contrast * centers[a]
        centers[b] = v / np.linalg.norm(v)

    sense_rels: list[Relation] = []
    for group in synsets:
        for s in group:
            for t in group:
                if s != t:
                    sense_rels.append(Relation(RelationType.SYNONYM, s, t))
    for child, par in parent.items():
        for s in synsets[child]:
            for t in synsets[par]:
                sense_rels.append(Relation(RelationType.HYPERNYM, s, t))
                sense_rels.append(Relation(RelationType.HYPONYM, t, s))
    for pair in sorted(tuple(sorted(p)) for p in antonyms):
        a, b = pair
        for s in synsets[a]:
            for t in synsets[b]:
                sense_rels.append(Relation(RelationType.ANTONYM, s, t))
                sense_rels.append(Relation(RelationType.ANTONYM, t, s))

    # lemma-target form; drop relations whose gold would be ambiguous or self-lemma
    # (of any type: a lemma holding both a synonym and a hypernym of one sense
    # cannot be resolved by similarity alone)
    counts: dict[tuple, int] = {}
    for r in sense_rels:
        key = (r.source, r.target.lemma)
        counts[key] = counts.get(key, 0) + 1
    kept = [r for r in sense_rels
            if counts[(r.source, r.target.lemma)] == 1 and r.source.lemma != r.target.lemma]

    entries = {lem: [] for lem in lemmas}
    for s in senses:
        entries[s.lemma].append(SenseEntry(s, ()))
    for lem in entries:
        entries[lem].sort(key=lambda e: e.id.index)
    lemma_rels = [Relation(r.type, r.source, r.target.lemma) for r in kept]
    gold = {Relation(r.type, r.source, r.target.lemma): r.target for r in kept}
    inventory = SenseInventory(entries, lemma_rels)
    full = SenseInventory(entries, kept)

    vectors = []
    for lem in lemmas:
        mix = np.mean([centers[concept_of[s]] for s in senses_of(full, lem)], axis=0)
        vectors.append(mix + noise * rng.standard_normal(dim) / np.sqrt(dim))
    word_store = EmbeddingStore(lemmas, np.array(vectors), dim)
    return RelationWorld(word_store, inventory, gold, full, concept_of)


# -- similarity world -------------------------------------------------------------

@dataclass
class SimilarityWorld:
    word_store: EmbeddingStore
    inventory: SenseInventory
    dataset: list[SimilarityPair]
    concept_of: dict[SenseID, int]


def similarity_world(seed: int = 0, n_concepts: int = 30, n_lemmas: int = 60, dim: int = 50,
                     lemma_noise: float = 1.0, gloss_noise: float = 3.0, gloss_len: int = 4,
                     n_pairs: int = 200, positive_fraction: float = 0.3) -> SimilarityWorld:
    """Polysemous lemmas over latent concepts; senses sharing a concept are
    synonyms.  Gloss words are noisy samples around the sense's concept and
    lemma vectors blend all of a lemma's concepts, so initial sense vectors
    are blurred.  Gold similarity of a sense pair is ``10 * (1 + cos)/2`` of
    their concept vectors (10 for the same concept).  About
    ``positive_fraction`` of the pairs share a concept; the rest are drawn at
    random."""
    rng = np.random.default_rng(seed)
    centers = _unit(rng, n_concepts, dim)
    lemmas = [f"word{i:02d}" for i in range(n_lemmas)]
    entries: dict[str, list[SenseEntry]] = {}
    concept_of: dict[SenseID, int] = {}
    keys, vecs = [], []
    gloss_id = 0
    for lem in lemmas:
        k = int(rng.integers(1, 4))
        cs = rng.choice(n_concepts, size=k, replace=False)
        entries[lem] = []
        for j, c in enumerate(cs):
            sid = SenseID(lem, POS.NOUN, j + 1)
            concept_of[sid] = int(c)
            gloss = []
            for _ in range(gloss_len):
                tok = f"g{gloss_id:04d}"
                gloss_id += 1
                keys.append(tok)
                vecs.append(centers[c] + gloss_noise * rng.standard_normal(dim) / np.sqrt(dim))
                gloss.append(tok)
            entries[lem].append(SenseEntry(sid, tuple(gloss)))
        keys.append(lem)
        vecs.append(centers[cs].mean(axis=0) + lemma_noise * rng.standard_normal(dim) / np.sqrt(dim))

    by_concept: dict[int, list[SenseID]] = {}
    for s, c in concept_of.items():
        by_concept.setdefault(c, []).append(s)
    relations = [Relation(RelationType.SYNONYM, s, t)
                 for group in by_concept.values() for s in group for t in group
                 if s != t and s.lemma != t.lemma]
    inventory = SenseInventory(entries, relations)
    word_store = EmbeddingStore(keys, np.array(vecs), dim)

    all_senses = list(concept_of)
    positives = [(r.source, r.target) for r in relations if r.source < r.target]
    n_pos = min(len(positives), int(round(positive_fraction * n_pairs)))
    dataset, seen = [], set()
    for i in rng.permutation(len(positives))[:n_pos]:
        s, t = positives[int(i)]
        seen.add(frozenset((s, t)))
        dataset.append(SimilarityPair(s, t, 10.0))
    others = [(s, t) for i, s in enumerate(all_senses) for t in all_senses[i + 1:]
              if s.lemma != t.lemma and frozenset((s, t)) not in seen]
    n_rest = max(0, min(n_pairs - len(dataset), len(others)))
    for i in sorted(rng.choice(len(others), size=n_rest, replace=False)):
        s, t = others[int(i)]
        cs, ct = concept_of[s], concept_of[t]
        score = 10.0 if cs == ct else float(10.0 * (1.0 + centers[cs] @ centers[ct]) / 2.0)
        dataset.append(SimilarityPair(s, t, min(10.0, max(0.0, score))))
    return SimilarityWorld(word_store, inventory, dataset, concept_of)


# -- WSD world -----------------------------------------------------------------------

@dataclass
class WSDWorld:
    word_store: EmbeddingStore
    sense_store: SenseEmbeddingStore
    inventory: SenseInventory
    instances: list[WSDInstance]


def wsd_world(seed: int = 0, n_senses: int = 200, n_instances: int = 1000, dim: int = 20,
              vocab: int = 300, oov_rate: float = 0.1, max_senses: int = 5) -> WSDWorld:
    """Random inventory of about ``n_senses`` senses with glosses and relations
    (some sense senses, some lemma targets), random word and sense vectors,
    some glossless and unembedded senses, and random contexts with OOV tokens."""
    rng = np.random.default_rng(seed)
    words = [f"t{i:03d}" for i in range(vocab)]
    entries: dict[str, list[SenseEntry]] = {}
    total = 0
    li = 0
    pos_cycle = [POS.NOUN, POS.VERB, POS.ADJECTIVE]
    while total < n_senses:
        lem = f"lem{li:03d}"
        pos = pos_cycle[li % 3]
        li += 1
        k = int(rng.integers(1, max_senses + 1))
        entries[lem] = []
        for j in range(k):
            n_gloss = int(rng.integers(0, 6))
            gloss = tuple(words[g] for g in rng.integers(0, vocab, size=n_gloss))
            entries[lem].append(SenseEntry(SenseID(lem, pos, j + 1), gloss))
        total += k
    all_senses = [e.id for es in entries.values() for e in es]
    lemmas = list(entries)
    relations = []
    types = list(RelationType)
    for s in all_senses:
        for _ in range(int(rng.integers(0, 4))):
            rtype = types[int(rng.integers(len(types)))]
            if rng.random() < 0.7:
                t = all_senses[int(rng.integers(len(all_senses)))]
                if t != s:
                    relations.append(Relation(rtype, s, t))
            else:
                relations.append(Relation(rtype, s, lemmas[int(rng.integers(len(lemmas)))]))
    inventory = SenseInventory(entries, relations)

    embedded_words = [w for w in words if rng.random() > oov_rate]
    word_keys = embedded_words + [lem for lem in lemmas if rng.random() > oov_rate]
    word_store = EmbeddingStore(word_keys, rng.standard_normal((len(word_keys), dim)), dim)
    sense_keys = [s.key for s in all_senses if rng.random() > 0.15]
    sense_store = SenseEmbeddingStore(sense_keys, _unit(rng, len(sense_keys), dim), dim)

    instances = []
    vocab_pool = words + ["<oov1>", "<oov2>"]
    for _ in range(n_instances):
        lem = lemmas[int(rng.integers(len(lemmas)))]
        n = int(rng.integers(1, 25))
        tokens = [vocab_pool[int(rng.integers(len(vocab_pool)))] for _ in range(n)]
        ti = int(rng.integers(n))
        tokens[ti] = lem
        cands = senses_of(inventory, lem)
        gold = cands[int(rng.integers(len(cands)))]
        instances.append(WSDInstance(tokens, ti, lem, gold.pos, gold))
    return WSDWorld(word_store, sense_store, inventory, instances)


# -- files for the command-line tools ------------------------------------------------

def write_fixture_files(out_dir, seed: int = 0, small: bool = True) -> dict[str, str]:
    """Write one small synthetic input file per CLI command into ``out_dir``.

    Returns a mapping from role to file path.
    """
    import os
    from .embeddings import save_embeddings, atomic_write_text
    from .evaluation import save_similarity_dataset
    from .lexicon import save_inventory
    from .wsd import save_corpus

    os.makedirs(out_dir, exist_ok=True)
    path = {k: os.path.join(out_dir, v) for k, v in {
        "words": "words.vec", "inventory": "inventory.tsv", "dataset": "similarity.tsv",
        "rel_words": "rel_words.vec", "rel_inventory": "rel_inventory.tsv", "rel_gold": "rel_gold.tsv",
        "wsd_words": "wsd_words.vec", "wsd_senses": "wsd_senses.vec", "wsd_inventory": "wsd_inventory.tsv",
        "corpus": "corpus.tsv", "pairs": "word_pairs.tsv", "annotations": "annotations.tsv"}.items()}

    sim = similarity_world(seed, n_concepts=10, n_lemmas=12, n_pairs=40) if small else similarity_world(seed)
    save_embeddings(sim.word_store, path["words"])
    save_inventory(sim.inventory, path["inventory"])
    save_similarity_dataset(sim.dataset, path["dataset"])

    rel = relation_world(seed, n_lemmas=12) if small else relation_world(seed)
    save_embeddings(rel.word_store, path["rel_words"])
    save_inventory(rel.inventory, path["rel_inventory"])
    atomic_write_text(path["rel_gold"], "".join(
        f"R\t{r.type.value}\t{r.source.key}\t{t.key}\n" for r, t in rel.gold.items()))

    w = wsd_world(seed, n_senses=40, n_instances=50) if small else wsd_world(seed)
    save_embeddings(w.word_store, path["wsd_words"])
    save_embeddings(w.sense_store, path["wsd_senses"])
    save_inventory(w.inventory, path["wsd_inventory"])
    save_corpus(w.instances, path["corpus"])

    lemmas = list(sim.inventory.entries)
    rng = np.random.default_rng(seed)
    pairs = [(lemmas[i], lemmas[j]) for i, j in rng.integers(0, len(lemmas), size=(8, 2)) if i != j]
    atomic_write_text(path["pairs"], "".join(f"{a}\t{b}\n" for a, b in pairs))

    # three annotators scoring the dataset with small disagreements
    gold = [p.score for p in sim.dataset[:15]]
    lines = ["source\ttarget\tA1\tA2\tA3\n"]
    for p, g in zip(sim.dataset[:15], gold):
        marks = np.clip(np.round(g + rng.normal(0.0, 1.0, size=3)), 0, 10)
        lines.append(f"{p.source.key}\t{p.target.key}\t" + "\t".join(f"{m:g}" for m in marks) + "\n")
    atomic_write_text(path["annotations"], "".join(lines))
    return path
