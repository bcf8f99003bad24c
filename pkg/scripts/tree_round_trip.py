"""Reduce, search and expand a corpus of tree-fragment graphs."""

from __future__ import annotations

import argparse
import time

from leveled_surface.corpus import DEFAULT_SEED, tree_corpus
from leveled_surface.general import expand_graph, reduce_to_hamiltonian, run_algorithm2, verify_expanded


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--size", type=int, default=50)
    a = ap.parse_args()
    t0 = time.monotonic()
    ok = 0
    for k, g in enumerate(tree_corpus(a.seed, a.size)):
        s, m = reduce_to_hamiltonian(g)
        out = run_algorithm2(g)
        good = expand_graph(m) == g and out.success and verify_expanded(out.expanded).ok
        ok += good
        genus = out.expanded.genus if out.success else "-"
        print(f"{k:3d} spine={len(g.spine):2d} fragments={len(g.fragments)} chords={len(s.fragments)} "
              f"status={out.status} genus={genus} ok={good}")
    print(f"{ok}/{a.size} round trips in {time.monotonic() - t0:.2f}s")


if __name__ == "__main__":
    main()
