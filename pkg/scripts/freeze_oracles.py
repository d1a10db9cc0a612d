"""Freeze reference outputs of the pure-Python oracles in tests/oracles.py.

Inputs are stored next to the outputs so the frozen file is self-contained;
tests/test_frozen.py checks both the oracles and the library against it.

    python3 scripts/freeze_oracles.py [--out tests/data/oracle_frozen.json]
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

log = logging.getLogger("freeze_oracles")


def unit_rows(rng, n, dim):
    v = rng.standard_normal((n, dim))
    return (v / np.linalg.norm(v, axis=1, keepdims=True)).tolist()


def adagrad_cases():
    out = []
    for seed in range(3):
        rng = np.random.default_rng(100 + seed)
        case = {
            "vectors": unit_rows(rng, 9, 4), "originals": unit_rows(rng, 9, 4),
            "attract": [[0, 1], [2, 3], [1, 4]], "repel": [[5, 6], [7, 2]],
            "attract_margin": 0.6, "repel_margin": 0.4, "reg_lambda": 0.05, "learning_rate": 0.05,
            "initial_accumulator": 0.1,
        }
        case["expected"] = oracles.adagrad_step(
            case["vectors"], case["originals"], [tuple(p) for p in case["attract"]],
            [tuple(p) for p in case["repel"]], 0.6, 0.4, 0.05, 0.05, 0.1)
        out.append(case)
    return out


def loss_cases():
    out = []
    for seed in range(3):
        rng = np.random.default_rng(200 + seed)
        vecs = rng.standard_normal((8, 5))
        case = {
            "vectors": vecs.tolist(), "originals": (vecs + 0.1 * rng.standard_normal((8, 5))).tolist(),
            "attract": [[0, 1], [2, 3], [4, 1]], "repel": [[5, 6], [7, 0]],
            "attract_weights": rng.uniform(0.2, 1, 3).tolist(), "repel_weights": rng.uniform(0.2, 1, 2).tolist(),
            "attract_margin": 0.6, "repel_margin": 0.3, "reg_lambda": 0.01,
        }
        pairs = [tuple(p) for p in case["attract"]], [tuple(p) for p in case["repel"]]
        a, r, g = oracles.batch_loss(case["vectors"], case["originals"], *pairs, 0.6, 0.3, 0.01,
                                     case["attract_weights"], case["repel_weights"])
        case["expected"] = {"attract": a, "repel": r, "reg": g,
                            "attract_negatives": oracles.negatives(case["vectors"], pairs[0], True),
                            "repel_negatives": oracles.negatives(case["vectors"], pairs[1], False)}
        out.append(case)
    return out


def spearman_cases():
    rng = np.random.default_rng(300)
    fixed = [
        ([1, 2, 2, 3], [1, 3, 2, 4]),
        ([5, 5, 5, 1, 1], [2, 1, 3, 4, 4]),
        ([0.5, 0.25, 0.25, 0.75, 1.0, 1.0], [10, 20, 20, 30, 30, 5]),
    ]
    fixed += [(rng.integers(0, 6, 40).tolist(), rng.integers(0, 4, 40).tolist()) for _ in range(4)]
    return [{"x": list(map(float, x)), "y": list(map(float, y)), "expected": oracles.spearman(x, y)}
            for x, y in fixed]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "tests" / "data" / "oracle_frozen.json"))
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    doc = {"adagrad_step": adagrad_cases(), "batch_loss": loss_cases(), "spearman": spearman_cases()}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %s (%s)", out, ", ".join(f"{k}: {len(v)}" for k, v in doc.items()))


if __name__ == "__main__":
    main()
