"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from acceptance_log import record  # noqa: E402
from sensefit.cli import main  # noqa: E402
from sensefit.evaluation import evaluate_similarity, spearman  # noqa: E402
from sensefit.fitting import (PairBatch, SenseFitConfig, batch_objective, init_all, select_negatives,  # noqa: E402
                              sense_fit, specialize)
from sensefit.lexicon import POS, SenseEntry, SenseID, SenseInventory, extract_constraints  # noqa: E402
from sensefit.reldisamb import DisambiguationRun, disambiguate_relations, evaluate_disambiguation  # noqa: E402
from sensefit.scoring import PRF  # noqa: E402
from sensefit.synthetic import (constraint_fixture, relation_world, similarity_world, wsd_world,  # noqa: E402
                                write_fixture_files)
from sensefit.wsd import (Disambiguator, Stores, WSDConfig, WSDInstance, baseline_first_sense,  # noqa: E402
                          baseline_random_sense, score_corpus)


def check(number, name, ok, detail):
    record(number, name, ok, detail)
    assert ok, detail


def numeric_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(*x.shape):
        old = x[idx]
        x[idx] = old + h
        up = f(x)
        x[idx] = old - h
        down = f(x)
        x[idx] = old
        g[idx] = (up - down) / (2 * h)
    return g


def pair_batch(pairs):
    left, right = zip(*pairs)
    return PairBatch(np.array(left), np.array(right), np.ones(len(pairs)))


# 1 ---------------------------------------------------------------------------------------------

def test_criterion_01_gradient_check():
    # margins and a visible regularizer so every term carries gradient
    cfg = SenseFitConfig(repel_margin=0.5, reg_lambda=0.1)
    t0 = time.perf_counter()
    worst = 0.0
    cases = 0
    for dim in (5, 50):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n = 9
            vecs, orig = rng.standard_normal((n, dim)), rng.standard_normal((n, dim))
            perm = rng.permutation(n)
            # rows shared across pairs and polarities exercise the accumulated gradient
            att = pair_batch([(perm[0], perm[1]), (perm[2], perm[3]), (perm[1], perm[4])])
            rep = pair_batch([(perm[5], perm[6]), (perm[7], perm[8]), (perm[2], perm[5])])
            unit = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
            negs = (*select_negatives(unit, att.left, att.right, True),
                    *select_negatives(unit, rep.left, rep.right, False))
            _, grad = batch_objective(vecs, orig, att, rep, negs, cfg)
            num = numeric_gradient(lambda v: batch_objective(v, orig, att, rep, negs, cfg)[0].total, vecs.copy())
            scale = max(np.linalg.norm(grad), np.linalg.norm(num), 1e-12)
            worst = max(worst, float(np.linalg.norm(grad - num) / scale))
            cases += 1
    elapsed = time.perf_counter() - t0
    check(1, "gradient check", worst <= 1e-4 and elapsed < 10,
          f"{cases} cases, max relative error {worst:.2e} (<= 1e-4), {elapsed:.2f}s (< 10s)")


# 2 ---------------------------------------------------------------------------------------------

def mean_pair_cos(store, pairs):
    out = []
    for a, b in pairs:
        u, v = store[a.key], store[b.key]
        out.append(float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v))))
    return float(np.mean(out))


def test_criterion_02_attract_repel_monotonicity():
    t0 = time.perf_counter()
    store, cs = constraint_fixture(seed=0)
    out, _ = specialize(store, cs, SenseFitConfig(epochs=5))
    elapsed = time.perf_counter() - t0
    d_att = mean_pair_cos(out, cs.attract) - mean_pair_cos(store, cs.attract)
    d_rep = mean_pair_cos(out, cs.repel) - mean_pair_cos(store, cs.repel)
    check(2, "attract/repel monotonicity", d_att >= 0.05 and d_rep <= -0.05 and elapsed < 5,
          f"attract cos {d_att:+.3f} (>= +0.05), repel cos {d_rep:+.3f} (<= -0.05), {elapsed:.2f}s (< 5s)")


# 3 and 4 ---------------------------------------------------------------------------------------

def fixture_runs():
    """(name, store, constraints, cfg) for every specialization fixture."""
    for seed in range(10):
        store, cs = constraint_fixture(seed)
        yield f"constraint_fixture({seed})", store, cs, SenseFitConfig(epochs=5, rng_seed=seed)
        yield f"constraint_fixture({seed}) batch 3", store, cs, SenseFitConfig(epochs=3, batch_size=3)
    for seed in range(3):
        w = similarity_world(seed)
        cfg = SenseFitConfig()
        initial, _ = init_all(w.word_store, w.inventory, cfg)
        yield f"similarity_world({seed})", initial, extract_constraints(w.inventory, initial), cfg
        r = relation_world(seed)
        initial, _ = init_all(r.word_store, r.full_inventory, cfg)
        yield f"relation_world({seed})", initial, extract_constraints(r.full_inventory, initial), cfg


def test_criterion_03_untouched_immutability():
    runs, checked, bad = 0, 0, []
    for name, store, cs, cfg in fixture_runs():
        touched = {s.key for s in cs.senses()}
        out, _ = specialize(store, cs, cfg)
        runs += 1
        for k in store.keys:
            if k not in touched:
                checked += 1
                if out[k].tobytes() != store[k].tobytes():
                    bad.append(f"{name}:{k}")
    check(3, "untouched-vector immutability", not bad and checked > 0,
          f"{checked} untouched vectors over {runs} runs, {len(bad)} changed")


def test_criterion_04_unit_sphere_every_epoch():
    worst, epochs = 0.0, 0

    def hook(touched):
        def on_epoch(epoch, s, rec):
            nonlocal worst, epochs
            rows = [s.row(k) for k in touched]
            worst = max(worst, float(np.max(np.abs(np.linalg.norm(s.vectors[rows], axis=1) - 1.0))))
            epochs += 1
        return on_epoch

    for name, store, cs, cfg in fixture_runs():
        specialize(store, cs, cfg, on_epoch=hook({s.key for s in cs.senses()}))
    # the alternating loop specializes internally; check its store after every round count
    for rounds in (1, 3):
        w = relation_world(0, n_lemmas=12)
        _, _, s = disambiguate_relations(w.word_store, w.inventory, SenseFitConfig(batch_size=10),
                                         DisambiguationRun(epochs=rounds))
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(s.vectors, axis=1) - 1.0))))
    check(4, "unit-sphere invariant", worst <= 1e-6 and epochs > 0,
          f"{epochs} epochs checked, max | |v| - 1 | = {worst:.1e} (<= 1e-6)")


# 5 ---------------------------------------------------------------------------------------------

def test_criterion_05_relation_disambiguation():
    t0 = time.perf_counter()
    counts: dict[str, list[int]] = {}
    for seed in range(10):
        w = relation_world(seed)
        _, run, _ = disambiguate_relations(w.word_store, w.inventory, SenseFitConfig(batch_size=20),
                                           DisambiguationRun())
        for rtype, s in evaluate_disambiguation(run.resolved, w.gold).items():
            acc = counts.setdefault(rtype, [0, 0, 0])
            acc[0] += s.total
            acc[1] += s.answered
            acc[2] += s.correct
    elapsed = time.perf_counter() - t0
    pooled = {k: PRF.from_counts(*v) for k, v in counts.items() if v[0] > 0}
    per_type = {k: v.f1 for k, v in pooled.items() if k != "all"}
    ok = len(per_type) == 4 and all(f >= 0.90 for f in per_type.values()) and elapsed < 30
    detail = ", ".join(f"{k} {v:.3f}" for k, v in sorted(per_type.items()))
    check(5, "relation disambiguation", ok, f"pooled F1 over 10 seeds: {detail} (>= 0.90), {elapsed:.1f}s (< 30s)")


# 6 ---------------------------------------------------------------------------------------------

def test_criterion_06_wsd_oracle_equivalence():
    world = wsd_world(0, n_senses=200, n_instances=1000)
    cfg = WSDConfig()
    d = Disambiguator(world.inventory, Stores(world.word_store, world.sense_store), cfg)
    t0 = time.perf_counter()
    got = [d(inst) for inst in world.instances]
    elapsed = time.perf_counter() - t0

    def wv(t):
        v = world.word_store.get(t)
        return None if v is None else list(v)

    def sv(k):
        v = world.sense_store.get(k)
        return None if v is None else list(v)

    agree = 0
    for inst, g in zip(world.instances, got):
        cands = oracles.wsd_candidates(world.inventory, inst.target_lemma, inst.pos, wv, sv, cfg.relation_types)
        agree += g == oracles.brute_force_wsd(inst.tokens, inst.target_index, cands, cfg.use_components,
                                              cfg.window, wv)
    n = len(world.instances)
    check(6, "WSD oracle equivalence", agree == n == 1000 and elapsed < 10,
          f"{agree}/{n} instances agree (100%), disambiguation {elapsed:.2f}s (< 10s)")


# 7 ---------------------------------------------------------------------------------------------

def test_criterion_07_baselines():
    w = wsd_world(1, n_senses=200, n_instances=1000)
    first = [WSDInstance(i.tokens, i.target_index, i.target_lemma, i.pos,
                         senses_first(w.inventory, i)) for i in w.instances]
    f1_first = score_corpus([(i, baseline_first_sense(i, w.inventory)) for i in first]).overall.f1

    lemmas = {f"l{j}": [SenseEntry(SenseID(f"l{j}", POS.NOUN, k)) for k in (1, 2, 3, 4)] for j in range(50)}
    inv = SenseInventory(lemmas, [])
    rng = np.random.default_rng(0)
    n = 10_000
    corpus = []
    for _ in range(n):
        lem = f"l{int(rng.integers(50))}"
        corpus.append(WSDInstance(["x", lem, "y"], 1, lem, POS.NOUN,
                                  SenseID(lem, POS.NOUN, int(rng.integers(1, 5)))))
    pick = np.random.default_rng(1)
    f1_rand = score_corpus([(i, baseline_random_sense(i, inv, pick)) for i in corpus]).overall.f1
    band = 3 * math.sqrt(0.25 * 0.75 / n)
    ok = f1_first == 1.0 and abs(f1_rand - 0.25) <= band
    check(7, "baseline sanity", ok,
          f"first-sense F1 {f1_first:.4f} (= 1), random F1 {f1_rand:.4f} within 0.25 +/- {band:.4f}")


def senses_first(inv, inst):
    return inv.entries[inst.target_lemma][0].id


# 8 ---------------------------------------------------------------------------------------------

def test_criterion_08_spearman_oracle():
    rng = np.random.default_rng(8)
    worst, undefined = 0.0, 0
    for i in range(100):
        # small integer ranges force ties; every third dataset mixes in floats
        xs = rng.integers(0, 10, 50).astype(float)
        ys = rng.integers(0, 12, 50).astype(float)
        if i % 3 == 0:
            ys = ys + rng.standard_normal(50) * (rng.random(50) < 0.5)
        got, want = spearman(xs, ys), oracles.spearman(list(xs), list(ys))
        if got is None or want is None:
            undefined += got is not want
            continue
        worst = max(worst, abs(got - want))
    check(8, "Spearman oracle", worst <= 1e-12 and undefined == 0,
          f"100 datasets of 50 points with ties, max |diff| {worst:.1e} (<= 1e-12)")


# 9 ---------------------------------------------------------------------------------------------

def test_criterion_09_similarity_gain():
    t0 = time.perf_counter()
    gains = []
    for seed in range(10):
        w = similarity_world(seed)
        cfg = SenseFitConfig()
        base, _ = init_all(w.word_store, w.inventory, cfg)
        fitted = sense_fit(w.word_store, w.inventory, cfg=cfg).store
        gains.append(evaluate_similarity(fitted, w.dataset).rho - evaluate_similarity(base, w.dataset).rho)
    elapsed = time.perf_counter() - t0
    mean = float(np.mean(gains))
    check(9, "similarity gain after fitting", mean >= 0.1 and elapsed < 60,
          f"mean rho gain {mean:+.3f} over 10 seeds (>= +0.1, min {min(gains):+.3f}), {elapsed:.1f}s (< 60s)")


# 10 --------------------------------------------------------------------------------------------

def cli_runs(f, d):
    yield "fit", ["fit", "--embeddings", f["words"], "--inventory", f["inventory"], "--out", str(d / "senses.vec"),
                  "--epochs", "3"]
    yield "disambiguate-relations", ["disambiguate-relations", "--embeddings", f["rel_words"], "--inventory",
                                     f["rel_inventory"], "--gold", f["rel_gold"], "--out", str(d / "res.tsv"),
                                     "--epochs", "3", "--batch-size", "10"]
    yield "wsd", ["wsd", "--corpus", f["corpus"], "--inventory", f["wsd_inventory"], "--word-emb", f["wsd_words"],
                  "--sense-emb", f["wsd_senses"], "--report", str(d / "wsd.json")]
    yield "wsd random", ["wsd", "--corpus", f["corpus"], "--inventory", f["wsd_inventory"], "--word-emb",
                         f["wsd_words"], "--method", "random", "--seed", "5", "--report", str(d / "rand.json")]
    yield "eval-sim", ["eval-sim", "--sense-emb", str(d / "senses.vec"), "--dataset", f["dataset"],
                       "--report", str(d / "sim.json")]
    yield "gen-simsense", ["gen-simsense", "--inventory", f["inventory"], "--pairs", f["pairs"],
                           "--out", str(d / "skeleton.tsv")]
    yield "iaa", ["iaa", "--annotations", f["annotations"], "--report", str(d / "iaa.json")]


def test_criterion_10_cli_replay_determinism(tmp_path):
    files = write_fixture_files(tmp_path / "inputs", seed=0)
    first, again = tmp_path / "run", tmp_path / "replay"
    first.mkdir()
    again.mkdir()
    bad = []
    compared = 0
    try:
        for name, argv in cli_runs(files, first):
            if main([*argv, "--log-level", "WARNING"]) != 0:
                bad.append(f"{name} failed")
                continue
            target = Path(argv[argv.index("--out") + 1] if "--out" in argv else argv[argv.index("--report") + 1])
            manifest = json.loads(Path(str(target) + ".manifest.json").read_text())
            if main(["replay", str(target) + ".manifest.json", "--out-dir", str(again),
                     "--log-level", "WARNING"]) != 0:
                bad.append(f"{name} replay differs")
            for rec in manifest["outputs"].values():
                p = Path(rec["path"])
                compared += 1
                if p.read_bytes() != (again / p.name).read_bytes():
                    bad.append(f"{name}:{p.name}")
    finally:
        import logging
        logging.captureWarnings(False)
    check(10, "CLI replay determinism", not bad and compared > 0,
          f"7 runs over 6 commands, {compared} artifacts compared, mismatches: {bad or 'none'}")


# 11 --------------------------------------------------------------------------------------------

def test_criterion_11_scoring_arithmetic():
    g, other = SenseID("w", POS.NOUN, 1), SenseID("w", POS.NOUN, 2)

    def corpus(n, answered, correct):
        inst = WSDInstance(["w"], 0, "w", POS.NOUN, g)
        return [(inst, None if i >= answered else (g if i < correct else other)) for i in range(n)]

    full = score_corpus(corpus(100, 100, 56)).overall
    part = score_corpus(corpus(100, 80, 60)).overall
    hm = 2 * 0.75 * 0.6 / (0.75 + 0.6)
    wsd_ok = ((full.precision, full.recall, full.f1) == (0.56, 0.56, 0.56)
              and (part.precision, part.recall, part.f1) == (0.75, 0.6, hm))

    from sensefit.lexicon import Relation, RelationType
    rels = [Relation(RelationType.SYNONYM, SenseID(f"s{i}", POS.NOUN, 1), "t") for i in range(10)]
    gold = {r: SenseID("t", POS.NOUN, 1) for r in rels}
    wrong = SenseID("t", POS.NOUN, 2)
    perfect = evaluate_disambiguation(dict(gold), gold)["all"]
    partial = evaluate_disambiguation({r: (gold[r] if i < 6 else wrong) for i, r in enumerate(rels[:8])}, gold)["all"]
    none = evaluate_disambiguation({}, gold)["all"]
    rel_ok = ((perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)
              and (partial.precision, partial.recall, partial.f1) == (0.75, 0.6, hm)
              and (none.precision, none.recall, none.f1) == (None, 0.0, 0.0))
    check(11, "scoring arithmetic", wsd_ok and rel_ok,
          f"WSD 56/100 -> {full.f1}, 60/80/100 -> P {part.precision} R {part.recall} F1 {part.f1:.6f}; "
          f"relations 10/10 -> {perfect.f1}, 6/8/10 -> F1 {partial.f1:.6f}, 0/0/10 -> {none.f1}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
