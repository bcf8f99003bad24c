"""Circularity of search results under two readings of "no glue merges disks".

Literal: no glue has both ends on one disk.  Strict: additionally no glue
lowers the disk count (a one-fragment cylinder between two disks does).
"""

from __future__ import annotations

import argparse
from collections import Counter

from leveled_surface.corpus import DEFAULT_SEED, random_spines
from leveled_surface.search import run_algorithm1
from leveled_surface.surface import circularity


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--size", type=int, default=300)
    a = ap.parse_args()
    tally: Counter = Counter()
    for s in random_spines(a.seed, a.size, 2, 8):
        out = run_algorithm1(s)
        if not out.success:
            continue
        r = out.result
        circ = circularity(r.spine, r.state.label_map, r.faces)
        literal = not any(rec.single_disk for rec in r.records)
        strict = literal and all(rec.disks_after >= rec.disks_before for rec in r.records)
        tally[("literal", literal, circ)] += 1
        tally[("strict", strict, circ)] += 1
    for (reading, cond, circ), n in sorted(tally.items()):
        if cond:
            print(f"{reading:8s} condition holds, circular={circ}: {n}")


if __name__ == "__main__":
    main()
