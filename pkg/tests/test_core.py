from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import FIG1, spine_lists, symbol_sequences
from leveled_surface.core import (
    ArityError,
    LevelConflictError,
    LevelGapError,
    SpineList,
    SpineSyntaxError,
    canonicalize,
    conflict_graph,
    conflicts,
    cyclic_level_shift,
    is_representative,
    parse_spine_list,
    relevel,
    representative_leveling,
    representative_levels,
    serialize_spine_list,
)


def brute_alternation(s: SpineList, i: int, j: int) -> bool:
    """Walk the cycle from every start and look for the pattern a, b, a, b."""
    a, b = s.fragments[i].positions, s.fragments[j].positions
    marks = {a[0]: "a", a[1]: "a", b[0]: "b", b[1]: "b"}
    seq = [marks[p] for p in sorted(marks)]
    return any(seq[r:] + seq[:r] == ["a", "b", "a", "b"] for r in range(4))


def conflict_pairs_by_label(s: SpineList):
    return {frozenset((s.label(i), s.label(j))) for i, j in conflict_graph(s).edges}


class TestParse:
    def test_fig1(self):
        s = parse_spine_list(FIG1)
        assert len(s.fragments) == 7
        assert s.n_levels == 3
        assert len(s) == 14

    def test_smallest(self):
        s = parse_spine_list("(1^1, 1^1)")
        assert len(s.fragments) == 1 and s.n_levels == 1

    def test_arity(self):
        with pytest.raises(ArityError):
            parse_spine_list("(1^1, 2^1, 1^1)")

    def test_level_gap(self):
        with pytest.raises(LevelGapError):
            parse_spine_list("(1^1, 3^1, 1^1, 3^1)")

    @pytest.mark.parametrize("text", ["(1^1, 1^1", "1^1, 1^1)", "(1^1 1^1)", "(1^a, 1^1)", "(1^1,, 1^1)"])
    def test_syntax_reports_position(self, text):
        with pytest.raises(SpineSyntaxError) as e:
            parse_spine_list(text)
        assert e.value.position is not None

    @given(spine_lists())
    def test_round_trip(self, s):
        assert parse_spine_list(serialize_spine_list(s)) == s
        assert serialize_spine_list(parse_spine_list(str(s))) == str(s)

    @given(symbol_sequences(), st.integers(0, 40))
    def test_rotation_invariance(self, seq, r):
        r %= len(seq)
        text = "(" + ", ".join(f"{a}^{b}" for a, b in seq[r:] + seq[:r]) + ")"
        assert parse_spine_list(text) == SpineList.from_symbols(seq)

    @given(symbol_sequences())
    def test_canonical_is_lex_min_rotation(self, seq):
        s, off = canonicalize(seq)
        m = len(seq)
        for r in range(m):
            assert s.symbols <= canonicalize(seq[r:] + seq[:r])[0].symbols
        # the offset maps canonical positions back to input positions
        for p in range(m):
            assert s.symbols[p][0] == seq[(p + off) % m][0]


class TestConflicts:
    def test_alternating(self):
        s = parse_spine_list("(1^1, 2^1, 1^1, 2^1)")
        a, b = s.fragments
        assert conflicts(a, b, s)
        assert len(conflict_graph(s).edges) == 1

    def test_nested(self):
        s = parse_spine_list("(1^1, 1^1, 2^1, 2^1)")
        a, b = s.fragments
        assert not conflicts(a, b, s)
        g = conflict_graph(s)
        assert len(g.vertices) == 2 and not g.edges

    def test_fig1_scan(self):
        s = parse_spine_list(FIG1)
        # in the input order, 1^1 sits at both ends and 2^2 at positions 1 and 9
        labels = {f.label: f.id for f in s.fragments}
        assert not conflicts(s.fragments[labels["1^1"]], s.fragments[labels["2^2"]], s)
        assert conflict_pairs_by_label(s) == {
            frozenset(p)
            for p in [("2^1", "1^2"), ("3^1", "2^2"), ("3^2", "2^2"), ("2^2", "1^2"), ("1^2", "2^3")]
        }

    @given(spine_lists())
    def test_graph_matches_brute_force(self, s):
        want = {
            (i, j)
            for i, j in itertools.combinations(range(len(s.fragments)), 2)
            if brute_alternation(s, i, j)
        }
        assert set(conflict_graph(s).edges) == want

    @given(spine_lists(2))
    def test_symmetric_irreflexive(self, s):
        assert all(i != j for i, j in conflict_graph(s).edges)
        for a, b in itertools.combinations(s.fragments, 2):
            assert conflicts(a, b, s) == conflicts(b, a, s)
        with pytest.raises(ValueError):
            conflicts(s.fragments[0], s.fragments[0], s)


class TestLeveling:
    def test_edgeless_goes_to_level_one(self):
        s = representative_leveling([(2, 1), (2, 1), (3, 1), (3, 1)])
        assert s.n_levels == 1

    def test_gap_example(self):
        s = representative_leveling([(1, 1), (3, 1), (1, 1), (3, 1)])
        assert sorted(f.level for f in s.fragments) == [1, 2]

    def test_inconsistent(self):
        # two alternating chords forced onto one level
        s = SpineList.from_symbols([(1, 1), (1, 2), (1, 1), (1, 2)])
        with pytest.raises(LevelConflictError):
            representative_levels(s)

    @given(spine_lists(1, 8))
    def test_representative_condition(self, s):
        r = representative_leveling(s)
        assert is_representative(r)
        for f in r.fragments:
            if f.level > 1:
                assert any(r.level(g) == f.level - 1 for g in r.conflicting(f.id))

    @given(spine_lists(1, 8), st.randoms())
    def test_preserves_conflicts_and_order(self, s, rnd):
        # spread levels apart while keeping their relative order, then normalize
        heights = sorted(rnd.sample(range(1, 100), s.n_levels))
        seq = [(heights[lv - 1], occ) for lv, occ in s.symbols]
        r = representative_leveling(seq)
        assert conflict_graph(r).edges == conflict_graph(s).edges
        for i, j in conflict_graph(s).edges:
            assert (s.level(i) < s.level(j)) == (r.level(i) < r.level(j))

    @given(spine_lists(1, 8))
    def test_idempotent(self, s):
        r = representative_leveling(s)
        assert representative_leveling(r) == r


class TestCyclicShift:
    def test_identity_cases(self):
        s = parse_spine_list(FIG1)
        assert cyclic_level_shift(s, 0) == s
        assert cyclic_level_shift(s, s.n_levels) == s

    def test_fig1_shift(self):
        s = parse_spine_list(FIG1)
        t = cyclic_level_shift(s, 1)
        before = {f.label: f.level for f in s.fragments}
        # labels change with the levels; compare positions instead
        assert sorted(f.level for f in t.fragments) == sorted(
            ((lv - 1 + 1) % 3) + 1 for lv in before.values()
        )
        assert len(conflict_graph(t).edges) == len(conflict_graph(s).edges)
        assert cyclic_level_shift(t, 2) == s

    @given(spine_lists(2, 7), st.integers(0, 6), st.integers(0, 6))
    def test_composition(self, s, a, b):
        lhs = cyclic_level_shift(cyclic_level_shift(s, a), b)
        assert lhs == cyclic_level_shift(s, a + b)

    @given(spine_lists(2, 7), st.integers(0, 6))
    def test_conflict_graph_invariant(self, s, k):
        n = s.n_levels
        t, off = relevel(s, [((f.level - 1 + k) % n) + 1 for f in s.fragments])
        assert t == cyclic_level_shift(s, k)
        m = len(s)

        def back(x, i):
            return s.fragment_at[(x.fragments[i].positions[0] + off) % m]

        mapped = {frozenset((back(t, i), back(t, j))) for i, j in conflict_graph(t).edges}
        assert mapped == {frozenset(e) for e in conflict_graph(s).edges}
