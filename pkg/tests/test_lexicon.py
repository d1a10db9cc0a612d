import numpy as np
import pytest
from hypothesis import given, strategies as st

from sensefit.embeddings import EmbeddingStore
from sensefit.lexicon import (DEFAULT_POLARITY, POS, InventoryFormatError, Polarity, Relation, RelationType,
                              SenseEntry, SenseID, SenseInventory, extract_constraints, load_inventory,
                              related_senses, save_inventory, senses_of)

INV = """\
S\tbank\tnoun\t1\tmoney institution
S\tbank\tnoun\t2\triver side
S\tshore\tnoun\t1\tland by water
R\tsynonym\tbank#noun#2\tshore#noun#1
"""


def sid(text):
    return SenseID.parse(text)


def write(tmp_path, text):
    p = tmp_path / "inv.tsv"
    p.write_text(text, encoding="utf-8")
    return p


def store_for(keys, dim=3, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingStore(list(keys), rng.standard_normal((len(keys), dim)), dim)


def test_load_small_inventory(tmp_path):
    inv = load_inventory(write(tmp_path, INV))
    assert len(inv.relations) == 1
    assert inv.n_senses == 3
    assert inv.entry(sid("bank#noun#1")).gloss_tokens == ("money", "institution")


def test_dangling_sense_index(tmp_path):
    text = INV + "R\tsynonym\tbank#noun#1\tshore#noun#5\n"
    with pytest.raises(InventoryFormatError, match=":5:"):
        load_inventory(write(tmp_path, text))


@pytest.mark.parametrize("line,msg", [
    ("R\tmeronym\tbank#noun#1\tshore#noun#1", "unknown relation type"),
    ("S\tbank\tnoun", "4 or 5 fields"),
    ("S\tbank\tnoun\t1\tdup", "not ascending"),
    ("X\tfoo", "unknown record kind"),
    ("R\tsynonym\tbank#noun#9\tshore", "does not exist"),
])
def test_malformed_lines_report_line_number(tmp_path, line, msg):
    with pytest.raises(InventoryFormatError, match=msg) as e:
        load_inventory(write(tmp_path, INV + line + "\n"))
    assert ":5:" in str(e.value)


def test_lemma_target_parsed_as_ambiguous(tmp_path):
    inv = load_inventory(write(tmp_path, INV + "R\tsynonym\tshore#noun#1\tbank\n"))
    r = inv.relations[-1]
    assert r.ambiguous and r.target == "bank"


def test_senses_of_order_and_pos():
    entries = {"lauf": [SenseEntry(SenseID("lauf", POS.NOUN, 1)), SenseEntry(SenseID("lauf", POS.VERB, 1)),
                        SenseEntry(SenseID("lauf", POS.NOUN, 2))]}
    inv = SenseInventory(entries)
    assert senses_of(inv, "lauf") == [sid("lauf#noun#1"), sid("lauf#verb#1"), sid("lauf#noun#2")]
    assert senses_of(inv, "lauf", "noun") == [sid("lauf#noun#1"), sid("lauf#noun#2")]
    assert senses_of(inv, "lauf", POS.VERB) == [sid("lauf#verb#1")]
    assert senses_of(inv, "unknown") == []


def test_senses_of_stable_across_loads(tmp_path):
    p = write(tmp_path, INV)
    assert senses_of(load_inventory(p), "bank") == senses_of(load_inventory(p), "bank")


def test_related_senses_mixed_targets():
    a, b, c = sid("a#noun#1"), sid("b#noun#1"), sid("c#noun#1")
    entries = {x.lemma: [SenseEntry(x)] for x in (a, b, c)}
    rels = [Relation(RelationType.SYNONYM, a, b), Relation(RelationType.SYNONYM, a, "c"),
            Relation(RelationType.HYPONYM, a, c)]
    inv = SenseInventory(entries, rels)
    assert related_senses(inv, a, {"synonym"}) == [b, "c"]
    assert related_senses(inv, a, {RelationType.ANTONYM}) == []
    assert related_senses(inv, a, {"synonym", "hyponym"}) == [b, "c", c]
    with pytest.raises(KeyError):
        related_senses(inv, sid("z#noun#1"), {"synonym"})


def test_inventory_round_trip(tmp_path):
    inv = load_inventory(write(tmp_path, INV + "R\tantonym\tshore#noun#1\tbank\n"))
    out = tmp_path / "copy.tsv"
    save_inventory(inv, out)
    back = load_inventory(out)
    assert back.relations == inv.relations
    assert back.entries == inv.entries


def small_inventory():
    a1, b1, c1 = sid("a#noun#1"), sid("b#noun#1"), sid("c#noun#1")
    entries = {x.lemma: [SenseEntry(x)] for x in (a1, b1, c1)}
    return entries, a1, b1, c1


def test_one_synonym_one_antonym():
    entries, a, b, c = small_inventory()
    inv = SenseInventory(entries, [Relation(RelationType.SYNONYM, a, b), Relation(RelationType.ANTONYM, a, c)])
    cs = extract_constraints(inv, store_for([a.key, b.key, c.key]))
    assert cs.attract == [(a, b)] and cs.repel == [(a, c)]
    assert cs.attract_weights == [1.0] and cs.repel_weights == [1.0]


def test_unembedded_pair_dropped_and_counted():
    entries, a, b, c = small_inventory()
    inv = SenseInventory(entries, [Relation(RelationType.SYNONYM, a, b)])
    cs = extract_constraints(inv, store_for([a.key]))
    assert cs.attract == []
    counts = cs.counts[RelationType.SYNONYM]
    assert counts.relations == 1 and counts.dropped_unembedded == 1 and counts.kept == 0
    assert counts.balances()


def test_ambiguous_expansion_weights():
    a = sid("a#noun#1")
    bs = [SenseID("b", POS.NOUN, i) for i in (1, 2, 3)]
    entries = {"a": [SenseEntry(a)], "b": [SenseEntry(s) for s in bs]}
    inv = SenseInventory(entries, [Relation(RelationType.SYNONYM, a, "b")])
    store = store_for([a.key] + [s.key for s in bs])
    cs = extract_constraints(inv, store)
    assert cs.attract == [(a, s) for s in bs]
    assert cs.attract_weights == pytest.approx([1 / 3] * 3)
    skipped = extract_constraints(inv, store, expand_ambiguous=False)
    assert len(skipped) == 0
    assert skipped.counts[RelationType.SYNONYM].ambiguous_excluded == 1


def test_duplicates_and_self_pairs():
    entries, a, b, c = small_inventory()
    rels = [Relation(RelationType.SYNONYM, a, b), Relation(RelationType.SYNONYM, a, b),
            Relation(RelationType.HYPONYM, a, b), Relation(RelationType.SYNONYM, a, a)]
    cs = extract_constraints(SenseInventory(entries, rels), store_for([a.key, b.key, c.key]))
    assert cs.attract == [(a, b)]
    assert cs.counts[RelationType.SYNONYM].dropped_duplicate == 1
    assert cs.counts[RelationType.SYNONYM].dropped_self == 1
    assert cs.counts[RelationType.HYPONYM].dropped_duplicate == 1
    assert all(c.balances() for c in cs.counts.values())


def test_polarity_conflict_resolved_by_weight():
    entries, a, b, c = small_inventory()
    store = store_for([a.key, b.key, c.key])
    # equal weights: dropped from both sides
    rels = [Relation(RelationType.SYNONYM, a, b), Relation(RelationType.ANTONYM, b, a)]
    cs = extract_constraints(SenseInventory(entries, rels), store)
    assert cs.attract == [] and cs.repel == []
    assert cs.counts[RelationType.SYNONYM].dropped_conflict == 1
    assert cs.counts[RelationType.ANTONYM].dropped_conflict == 1
    # the 1/2-weight expanded side loses to the sense-level relation
    b2 = SenseID("b", POS.NOUN, 2)
    entries["b"] = [SenseEntry(b), SenseEntry(b2)]
    store = store_for([a.key, b.key, b2.key, c.key])
    rels = [Relation(RelationType.SYNONYM, a, "b"), Relation(RelationType.ANTONYM, a, b)]
    cs = extract_constraints(SenseInventory(entries, rels), store)
    assert cs.repel == [(a, b)]
    assert cs.attract == [(a, b2)]


def test_polarity_map_must_be_total():
    entries, a, b, c = small_inventory()
    with pytest.raises(ValueError, match="missing"):
        extract_constraints(SenseInventory(entries, []), store_for([a.key]),
                            {RelationType.SYNONYM: Polarity.ATTRACT})


def test_polarity_override():
    entries, a, b, c = small_inventory()
    pmap = dict(DEFAULT_POLARITY)
    pmap[RelationType.HYPERNYM] = Polarity.REPEL
    inv = SenseInventory(entries, [Relation(RelationType.HYPERNYM, a, b)])
    cs = extract_constraints(inv, store_for([a.key, b.key, c.key]), pmap)
    assert cs.repel == [(a, b)] and cs.attract == []


# random inventories: every output sense is embedded and the counts balance

@st.composite
def inventories(draw):
    n_lemmas = draw(st.integers(1, 5))
    entries, senses = {}, []
    for i in range(n_lemmas):
        k = draw(st.integers(1, 3))
        ids = [SenseID(f"l{i}", POS.NOUN, j + 1) for j in range(k)]
        entries[f"l{i}"] = [SenseEntry(s) for s in ids]
        senses += ids
    rels = []
    for _ in range(draw(st.integers(0, 12))):
        src = draw(st.sampled_from(senses))
        t = draw(st.sampled_from(list(RelationType)))
        if draw(st.booleans()):
            rels.append(Relation(t, src, draw(st.sampled_from(senses))))
        else:
            rels.append(Relation(t, src, draw(st.sampled_from(list(entries)))))
    embedded = draw(st.lists(st.sampled_from(senses), unique=True))
    return SenseInventory(entries, rels), embedded


@given(inventories(), st.booleans())
def test_constraints_only_embedded_and_balanced(data, expand):
    inv, embedded = data
    store = store_for([s.key for s in embedded]) if embedded else EmbeddingStore.empty(3)
    cs = extract_constraints(inv, store, expand_ambiguous=expand)
    keys = set(store.keys)
    assert all(s.key in keys for s in cs.senses())
    for t, c in cs.counts.items():
        assert c.balances()
        assert c.relations == sum(r.type is t for r in inv.relations)
    assert len(cs.attract) + len(cs.repel) == sum(c.kept for c in cs.counts.values())
    assert len(set(cs.attract)) == len(cs.attract) and len(set(cs.repel)) == len(cs.repel)
    unordered_att = {frozenset(p) for p in cs.attract}
    assert not any(frozenset(p) in unordered_att for p in cs.repel)
