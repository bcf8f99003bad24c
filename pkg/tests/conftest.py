from __future__ import annotations

import random

from hypothesis import HealthCheck, settings, strategies as st

from leveled_surface.corpus import random_chord_spine

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIG1 = "(1^1, 2^2, 3^1, 3^2, 2^1, 3^2, 3^1, 1^2, 2^1, 2^2, 2^3, 1^2, 2^3, 1^1)"

FIVE_LEVEL = (
    "(1^1, 1^2, 1^3, 2^1, 2^2, 2^3, 3^1, 3^2, 3^3, 4^1, 4^2, 4^3, 5^1, 5^2, 5^3, "
    "1^3, 1^2, 1^1, 2^3, 2^2, 2^1, 3^3, 3^2, 3^1, 4^3, 4^2, 4^1, 5^3, 5^2, 5^1)"
)


@st.composite
def spine_lists(draw, lo: int = 1, hi: int = 7):
    """Representative spine lists from random chord diagrams."""
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(lo, hi))
    return random_chord_spine(random.Random(seed), n)


@st.composite
def symbol_sequences(draw, lo: int = 1, hi: int = 6):
    """Raw symbol sequences with arbitrary consistent levels (not normalized)."""
    s = draw(spine_lists(lo, hi))
    r = draw(st.integers(0, len(s) - 1))
    seq = list(s.symbols)
    return seq[r:] + seq[:r]
