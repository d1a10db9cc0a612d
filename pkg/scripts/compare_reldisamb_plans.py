"""Compare relation-disambiguation variants on the symmetric synthetic world.

Variants: two-batch vs single-batch plan, continuing vs restarting the store
each round, and the number of optimizer epochs per round.  Scores are pooled
over seeds (micro-averaged per relation type).

    python3 scripts/compare_reldisamb_plans.py [--seeds 10]
"""
import argparse
import logging
import time

from sensefit.fitting import SenseFitConfig
from sensefit.reldisamb import DisambiguationRun, disambiguate_relations, evaluate_disambiguation
from sensefit.scoring import PRF
from sensefit.synthetic import relation_world

TYPES = ("synonym", "antonym", "hyponym", "hypernym")
VARIANTS = {
    "two-batch": dict(),
    "single-batch": dict(batch_plan="single-batch"),
    "restart": dict(restart=True),
    "3 optimizer epochs": dict(optimizer_epochs=3),
}


def pooled_f1(seeds, batch_size, **run_kw):
    counts = {t: [0, 0, 0] for t in TYPES}
    rounds = []
    for seed in seeds:
        w = relation_world(seed)
        _, run, _ = disambiguate_relations(w.word_store, w.inventory, SenseFitConfig(batch_size=batch_size),
                                           DisambiguationRun(**run_kw))
        rounds.append(len(run.trace))
        for t, s in evaluate_disambiguation(run.resolved, w.gold).items():
            if t in counts:
                for i, v in enumerate((s.total, s.answered, s.correct)):
                    counts[t][i] += v
    return {t: PRF.from_counts(*c).f1 for t, c in counts.items()}, sum(rounds) / len(rounds)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--batch-size", type=int, default=20)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)

    print(f"{'variant':<20}" + "".join(f"{t:>10}" for t in TYPES) + f"{'rounds':>8}{'secs':>7}")
    for name, kw in VARIANTS.items():
        t0 = time.perf_counter()
        f1, rounds = pooled_f1(range(args.seeds), args.batch_size, **kw)
        cells = "".join(f"{'-' if f1[t] is None else format(f1[t], '.3f'):>10}" for t in TYPES)
        print(f"{name:<20}{cells}{rounds:8.1f}{time.perf_counter() - t0:7.1f}")


if __name__ == "__main__":
    main()
