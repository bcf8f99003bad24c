"""Seeded random instances for property tests and experiments."""

from __future__ import annotations

import random

from .core import SpineList, relevel, representative_leveling

DEFAULT_SEED = 20240601


def random_chord_spine(rng: random.Random, n_fragments: int) -> SpineList:
    """Random chord diagram with levels from a random crossing order.

    Each fragment draws a distinct height; a conflicting pair is ordered by
    height, then levels are normalized to representative leveling.
    """
    m = 2 * n_fragments
    order = list(range(m))
    rng.shuffle(order)
    seq = [None] * m
    for k in range(n_fragments):
        seq[order[2 * k]] = (1, k + 1)
        seq[order[2 * k + 1]] = (1, k + 1)
    s = SpineList.from_symbols(seq)
    heights = list(range(1, len(s.fragments) + 1))
    rng.shuffle(heights)
    # heights are distinct, hence consistent; normalize to the lowest levels
    return representative_leveling(relevel(s, heights)[0])


def outside_counts(s: SpineList) -> list[int]:
    n = s.n_levels
    if n == 1:
        return [0]
    return [sum(1 for f in s.fragments if f.level not in (c, c + 1)) for c in range(1, n)]


def oracle_corpus(seed: int = DEFAULT_SEED, size: int = 200, max_outside: int = 4) -> list[SpineList]:
    """Spine lists with at most ``max_outside`` fragments off the base levels, for every base."""
    rng = random.Random(seed)
    out: list[SpineList] = []
    while len(out) < size:
        s = random_chord_spine(rng, rng.randint(2, 7))
        if max(outside_counts(s)) <= max_outside:
            out.append(s)
    return out


def random_spines(seed: int, size: int, lo: int = 2, hi: int = 8) -> list[SpineList]:
    rng = random.Random(seed)
    return [random_chord_spine(rng, rng.randint(lo, hi)) for _ in range(size)]


def random_tree_graph(rng: random.Random, n_spine: int, n_fragments: int):
    """General leveled graph whose fragments are stars or caterpillars.

    Each caterpillar spine vertex holds a run of consecutive attachments, so
    the fragment always fits in a disk bounded by the spine.  Levels are
    distinct, hence consistent.
    """
    from .general import GeneralFragment, GeneralLeveledGraph

    heights = list(range(1, n_fragments + 1))
    rng.shuffle(heights)
    frags = []
    for fi in range(n_fragments):
        k = rng.choice((2, 2, 3, 4))
        att = sorted(rng.sample(range(n_spine), min(k, n_spine)))
        r = rng.randint(1, len(att))
        inner = [f"x{fi}.{j}" for j in range(r)]
        edges = [(inner[j], inner[j + 1]) for j in range(r - 1)]
        cuts = sorted(rng.sample(range(1, len(att)), r - 1)) if r > 1 else []
        bounds = [0] + cuts + [len(att)]
        for j in range(r):
            edges += [(inner[j], a) for a in att[bounds[j] : bounds[j + 1]]]
        frags.append(GeneralFragment(tuple(att + inner), tuple(edges), tuple(att), heights[fi]))
    return GeneralLeveledGraph(tuple(range(n_spine)), tuple(frags))


def tree_corpus(seed: int = DEFAULT_SEED, size: int = 50, n_spine=(6, 12), n_fragments=(2, 6)):
    rng = random.Random(seed)
    return [
        random_tree_graph(rng, rng.randint(*n_spine), rng.randint(*n_fragments)) for _ in range(size)
    ]
