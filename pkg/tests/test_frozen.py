"""Library and oracles against frozen reference values (scripts/freeze_oracles.py)."""
import json
from pathlib import Path

import numpy as np
import pytest

import oracles
from sensefit.evaluation import spearman
from sensefit.fitting import (PairBatch, SenseEmbeddingStore, SenseFitConfig, batch_objective, mini_batch_update,
                              select_negatives)

FROZEN = json.loads((Path(__file__).parent / "data" / "oracle_frozen.json").read_text())


def batch(pairs, weights=None):
    left, right = zip(*pairs)
    return PairBatch(np.array(left), np.array(right), np.ones(len(pairs)) if weights is None else np.array(weights))


def tuples(pairs):
    return [tuple(p) for p in pairs]


@pytest.mark.parametrize("case", FROZEN["adagrad_step"])
def test_adagrad_step(case):
    again = oracles.adagrad_step(case["vectors"], case["originals"], tuples(case["attract"]), tuples(case["repel"]),
                                 case["attract_margin"], case["repel_margin"], case["reg_lambda"],
                                 case["learning_rate"], case["initial_accumulator"])
    np.testing.assert_allclose(again, case["expected"], atol=1e-9)

    vecs = np.array(case["vectors"])
    store = SenseEmbeddingStore([f"s{i}#noun#1" for i in range(len(vecs))], vecs.copy(), vecs.shape[1],
                                originals=np.array(case["originals"]))
    cfg = SenseFitConfig(attract_margin=case["attract_margin"], repel_margin=case["repel_margin"],
                         reg_lambda=case["reg_lambda"], learning_rate=case["learning_rate"])
    mini_batch_update(store, batch(case["attract"]), batch(case["repel"]), cfg)
    np.testing.assert_allclose(store.vectors, case["expected"], atol=1e-7)


@pytest.mark.parametrize("case", FROZEN["batch_loss"])
def test_batch_loss(case):
    exp = case["expected"]
    att, rep = tuples(case["attract"]), tuples(case["repel"])
    a, r, g = oracles.batch_loss(case["vectors"], case["originals"], att, rep, case["attract_margin"],
                                 case["repel_margin"], case["reg_lambda"], case["attract_weights"],
                                 case["repel_weights"])
    assert (a, r, g) == pytest.approx((exp["attract"], exp["repel"], exp["reg"]), abs=1e-12)

    vecs = np.array(case["vectors"])
    unit = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    A, R = batch(att, case["attract_weights"]), batch(rep, case["repel_weights"])
    negs = (*select_negatives(unit, A.left, A.right, True), *select_negatives(unit, R.left, R.right, False))
    flat = [[int(x) for pair in zip(negs[0], negs[1]) for x in pair],
            [int(x) for pair in zip(negs[2], negs[3]) for x in pair]]
    assert flat == [[-1 if t is None else t for t in exp[k]] for k in ("attract_negatives", "repel_negatives")]
    cfg = SenseFitConfig(attract_margin=case["attract_margin"], repel_margin=case["repel_margin"],
                         reg_lambda=case["reg_lambda"])
    loss, _ = batch_objective(vecs, np.array(case["originals"]), A, R, negs, cfg)
    assert loss.attract == pytest.approx(exp["attract"], abs=1e-12)
    assert loss.repel == pytest.approx(exp["repel"], abs=1e-12)
    assert loss.reg == pytest.approx(exp["reg"], rel=1e-12)


@pytest.mark.parametrize("case", FROZEN["spearman"])
def test_spearman(case):
    assert oracles.spearman(case["x"], case["y"]) == pytest.approx(case["expected"], abs=1e-12)
    assert spearman(case["x"], case["y"]) == pytest.approx(case["expected"], abs=1e-12)
