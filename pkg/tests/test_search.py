from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIG1, spine_lists
from leveled_surface.core import SpineList, parse_spine_list
from leveled_surface.corpus import oracle_corpus
from leveled_surface.search import (
    FAILURE,
    SUCCESS,
    Accept,
    CapExceeded,
    Discard,
    SearchConfig,
    apply_discard_rules,
    enumerate_labelings,
    enumerate_partitions,
    exhaustive_oracle,
    labeling_count,
    run_algorithm1,
    separations,
)
from leveled_surface.surface import init_sphere, verify


def bell(n: int) -> int:
    # Bell triangle
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]


class TestPartitions:
    def test_three_items(self):
        got = [sorted(map(frozenset, p), key=min) for p in enumerate_partitions("ABC")]
        want = [
            [{"A"}, {"B"}, {"C"}],
            [{"A"}, {"B", "C"}],
            [{"A", "C"}, {"B"}],
            [{"A", "B"}, {"C"}],
            [{"A", "B", "C"}],
        ]
        assert got == [[frozenset(b) for b in p] for p in want]

    @pytest.mark.parametrize("n", range(1, 9))
    def test_bell_counts(self, n):
        assert sum(1 for _ in enumerate_partitions(range(n))) == bell(n)

    def test_empty_and_cap(self):
        assert list(enumerate_partitions([])) == [[]]
        with pytest.raises(CapExceeded):
            next(enumerate_partitions(range(5), cap=4))

    @given(st.integers(1, 6))
    def test_partitions_are_distinct_covers(self, n):
        seen = set()
        for p in enumerate_partitions(range(n)):
            assert sorted(x for b in p for x in b) == list(range(n))
            assert all(b for b in p)
            key = frozenset(map(frozenset, p))
            assert key not in seen
            seen.add(key)


def test_separations_are_contiguous_arcs():
    seps = separations([0, 1, 2, 3])
    assert len(seps) == 6
    for a, b in seps:
        assert a and b and sorted(a + b) == [0, 1, 2, 3]


class TestLabelings:
    def test_single_fragment_has_eight(self):
        s = parse_spine_list("(1^1, 1^1, 2^1, 2^1, 3^1, 3^1)")
        f = s.fragments_at_level(3)[0]
        a, b = s.fragments[f].positions
        lps = list(enumerate_labelings([[f]], s, 1))
        got = [
            (c.side, c.label_map[a], c.label_map[b])
            for lp in lps
            for c in lp.cylinders
        ]
        want = [(side, x, y) for side in "UL" for x in "ul" for y in "ul"]
        assert got == want
        assert all(c.spine_sublists == ((a,), (b,)) for lp in lps for c in lp.cylinders)
        assert labeling_count(s, [[f]]) == 8

    @given(spine_lists(1, 3))
    @settings(max_examples=20)
    def test_count_formula(self, s: SpineList):
        frags = [f.id for f in s.fragments]
        for p in enumerate_partitions(frags):
            assert sum(1 for _ in enumerate_labelings(p, s)) == labeling_count(s, p)


class TestRules:
    def test_rule_two_without_both_ends(self):
        # two nested chords on one cylinder, each with both ends on one disk
        s = parse_spine_list("(1^1, 1^1, 2^1, 2^1, 3^1, 3^1, 3^2, 3^2)")
        frags = s.fragments_at_level(3)
        lp = next(
            lp
            for lp in enumerate_labelings([frags], s, 1)
            if not lp.cylinders[0].both_ends
        )
        d = apply_discard_rules(lp, s)
        assert isinstance(d, Discard) and d.rule == 2

    def test_accept_returns_state(self):
        s = parse_spine_list("(1^1, 1^1, 2^1, 2^1, 3^1, 3^1)")
        f = s.fragments_at_level(3)[0]
        res = [apply_discard_rules(lp, s) for lp in enumerate_labelings([[f]], s, 1)]
        accepted = [r for r in res if isinstance(r, Accept)]
        assert accepted
        assert all(r.state.genus == 1 for r in accepted)


class TestSearch:
    def test_two_levels_are_planar(self):
        s = parse_spine_list("(1^1, 2^1, 1^1, 2^1)")
        out = run_algorithm1(s)
        assert out.status == SUCCESS and out.result.genus == 0

    def test_fig1(self):
        out = run_algorithm1(parse_spine_list(FIG1))
        assert out.success and verify(out.result).ok

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(max_fragments_outside_base=0)
        with pytest.raises(ValueError):
            SearchConfig(time_budget=-1)

    def test_cap(self):
        s = parse_spine_list(FIG1)
        with pytest.raises(CapExceeded):
            run_algorithm1(s, SearchConfig(base_level=1, max_fragments_outside_base=1))

    @given(spine_lists(2, 6), st.integers(0, 30))
    @settings(max_examples=30)
    def test_rotation_invariant_verdict(self, s, r):
        seq = list(s.symbols)
        r %= len(seq)
        t = SpineList.from_symbols(seq[r:] + seq[:r])
        assert run_algorithm1(s).status == run_algorithm1(t).status

    @given(spine_lists(2, 6))
    @settings(max_examples=30)
    def test_success_verifies(self, s):
        out = run_algorithm1(s)
        assert out.status in (SUCCESS, FAILURE)
        if out.success:
            assert verify(out.result).ok

    def test_cyclic_shifts_do_not_lose_success(self):
        s = parse_spine_list(FIG1)
        assert run_algorithm1(s, SearchConfig(try_cyclic_shifts=True)).success

    def test_base_level_is_respected(self):
        s = parse_spine_list(FIG1)
        out = run_algorithm1(s, SearchConfig(base_level=2))
        assert [t["base_level"] for t in out.stats["tried"]] == [2]


def test_oracle_agrees_on_small_corpus():
    for s in oracle_corpus(size=30):
        assert run_algorithm1(s).status == exhaustive_oracle(s).status, str(s)


@pytest.mark.slow
def test_parallel_matches_sequential():
    for s in oracle_corpus(seed=3, size=8):
        seq = run_algorithm1(s)
        par = run_algorithm1(s, SearchConfig(parallel=True, workers=2))
        assert seq.status == par.status
        if seq.success:
            assert verify(par.result).ok


def test_initial_sphere_is_not_mutated_by_rules():
    s = parse_spine_list("(1^1, 1^1, 2^1, 2^1, 3^1, 3^1)")
    st0 = init_sphere(s, 1)
    faces = st0.faces
    f = s.fragments_at_level(3)[0]
    for lp in enumerate_labelings([[f]], s, 1):
        apply_discard_rules(lp, s, st0)
    assert st0.faces == faces
