"""Similarity ranking before and after sense fitting on synthetic worlds.

Prints one row per seed with Spearman's rho for the gloss-initialized
vectors and for the fitted ones.

    python3 scripts/run_simsense_synthetic.py [--seeds 10] [--epochs 5]
"""
import argparse
import logging

import numpy as np

from sensefit.evaluation import evaluate_similarity
from sensefit.fitting import SenseFitConfig, init_all, sense_fit
from sensefit.synthetic import similarity_world


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=5)
    ap.add_argument("--batch-size", type=int, default=50)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)

    cfg = SenseFitConfig(epochs=args.epochs, batch_size=args.batch_size)
    gains = []
    print("seed  pairs  rho_init  rho_fit   gain")
    for seed in range(args.seeds):
        w = similarity_world(seed)
        base, _ = init_all(w.word_store, w.inventory, cfg)
        before = evaluate_similarity(base, w.dataset)
        after = evaluate_similarity(sense_fit(w.word_store, w.inventory, cfg=cfg).store, w.dataset)
        gains.append(after.rho - before.rho)
        print(f"{seed:>4}  {after.scored:>5}  {before.rho:8.3f}  {after.rho:7.3f}  {gains[-1]:+.3f}")
    print(f"mean gain {np.mean(gains):+.3f}  (min {min(gains):+.3f}, max {max(gains):+.3f})")


if __name__ == "__main__":
    main()
