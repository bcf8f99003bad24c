"""Five-level construction on random instances with a small middle level."""

from __future__ import annotations

import argparse
import random
from collections import Counter

from leveled_surface.corpus import DEFAULT_SEED, random_chord_spine
from leveled_surface.general import five_level_embed, four_level_genus
from leveled_surface.surface import verify


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--count", type=int, default=40)
    a = ap.parse_args()
    rng = random.Random(a.seed)
    seen: Counter = Counter()
    got = 0
    while got < a.count:
        s = random_chord_spine(rng, rng.randint(6, 11))
        if s.n_levels != 5 or not 1 <= len(s.fragments_at_level(3)) <= 2:
            continue
        got += 1
        r = five_level_embed(s)
        lv = {k: r.spine.fragments_at_level(k) for k in range(1, 6)}
        base = four_level_genus(r.spine, lv[1], lv[2], lv[4], lv[5])
        extra = len(r.cylinders)
        seen[(extra, r.genus == base + extra and verify(r).ok)] += 1
    print(f"instances={got} (extra cylinders, law holds) -> {dict(seen)}")


if __name__ == "__main__":
    main()
