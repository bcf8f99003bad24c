"""Compare the pruned search with the exhaustive oracle on a seeded corpus."""

from __future__ import annotations

import argparse
import time
from collections import Counter

from leveled_surface.corpus import DEFAULT_SEED, oracle_corpus
from leveled_surface.search import exhaustive_oracle, run_algorithm1


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--size", type=int, default=200)
    ap.add_argument("--max-outside", type=int, default=4)
    a = ap.parse_args()
    corpus = oracle_corpus(a.seed, a.size, a.max_outside)
    verdicts: Counter = Counter()
    t_alg = t_orc = 0.0
    for s in corpus:
        t0 = time.monotonic()
        x = run_algorithm1(s).status
        t1 = time.monotonic()
        y = exhaustive_oracle(s).status
        t_orc += time.monotonic() - t1
        t_alg += t1 - t0
        verdicts[(x, y)] += 1
        if x != y:
            print(f"disagreement: {s} algorithm={x} oracle={y}")
    levels = Counter(s.n_levels for s in corpus)
    print(f"instances={len(corpus)} levels={dict(sorted(levels.items()))}")
    print(f"verdicts={dict(verdicts)} algorithm={t_alg:.2f}s oracle={t_orc:.2f}s")


if __name__ == "__main__":
    main()
