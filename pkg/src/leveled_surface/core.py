"""Combinatorial model of hamiltonian leveled spatial graphs.

A spine list is a cyclic sequence of symbols ``level^occurrence``; each
symbol names one fragment (a chord of the spine) and appears exactly twice,
once per endpoint.  Positions index the canonical rotation of the sequence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Symbol = tuple[int, int]  # (level, occurrence)


class SpineListError(ValueError):
    """Invalid spine list input."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class SpineSyntaxError(SpineListError):
    pass


class ArityError(SpineListError):
    pass


class LevelGapError(SpineListError):
    pass


class LevelConflictError(SpineListError):
    """Two conflicting fragments were given the same level."""


@dataclass(frozen=True)
class EndpointSymbol:
    fragment_id: int
    level: int
    occurrence: int


@dataclass(frozen=True)
class Fragment:
    id: int
    level: int
    occurrence: int
    positions: tuple[int, int]

    @property
    def label(self) -> str:
        return f"{self.level}^{self.occurrence}"


def _relabel_occurrences(seq: Sequence[Symbol]) -> tuple[Symbol, ...]:
    """Renumber occurrence indices per level by order of first appearance."""
    names: dict[Symbol, int] = {}
    counter: dict[int, int] = {}
    out = []
    for sym in seq:
        if sym not in names:
            counter[sym[0]] = counter.get(sym[0], 0) + 1
            names[sym] = counter[sym[0]]
        out.append((sym[0], names[sym]))
    return tuple(out)


def _validate(seq: Sequence[Symbol]) -> None:
    counts: dict[Symbol, int] = {}
    for sym in seq:
        counts[sym] = counts.get(sym, 0) + 1
    for sym, k in counts.items():
        if k != 2:
            raise ArityError(f"symbol {sym[0]}^{sym[1]} appears {k} time(s), expected 2")
    if not seq:
        raise SpineListError("empty spine list")
    levels = {sym[0] for sym in seq}
    if min(levels) < 1:
        raise LevelGapError("levels must be positive")
    missing = sorted(set(range(1, max(levels) + 1)) - levels)
    if missing:
        raise LevelGapError(f"level(s) {missing} absent")


def canonicalize(seq: Sequence[Symbol]) -> tuple["SpineList", int]:
    """Return the canonical spine list and the rotation offset used.

    Position ``p`` of the result corresponds to position ``(p + offset) % m``
    of ``seq``.
    """
    seq = tuple((int(a), int(b)) for a, b in seq)
    _validate(seq)
    m = len(seq)
    best, best_r = None, 0
    for r in range(m):
        cand = _relabel_occurrences(seq[r:] + seq[:r])
        if best is None or cand < best:
            best, best_r = cand, r
    return SpineList(best), best_r


@dataclass(frozen=True)
class SpineList:
    """Canonical spine list; build with :meth:`from_symbols` or :func:`parse_spine_list`."""

    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        _validate(self.symbols)

    @classmethod
    def from_symbols(cls, seq: Iterable[Symbol]) -> "SpineList":
        return canonicalize(list(seq))[0]

    def __len__(self) -> int:
        return len(self.symbols)

    @cached_property
    def n_levels(self) -> int:
        return max(sym[0] for sym in self.symbols)

    @cached_property
    def fragments(self) -> tuple[Fragment, ...]:
        first: dict[Symbol, int] = {}
        order: list[Symbol] = []
        pos: dict[Symbol, list[int]] = {}
        for i, sym in enumerate(self.symbols):
            if sym not in first:
                first[sym] = len(order)
                order.append(sym)
            pos.setdefault(sym, []).append(i)
        return tuple(
            Fragment(k, sym[0], sym[1], (pos[sym][0], pos[sym][1]))
            for k, sym in enumerate(order)
        )

    @cached_property
    def fragment_at(self) -> tuple[int, ...]:
        out = [0] * len(self.symbols)
        for f in self.fragments:
            for p in f.positions:
                out[p] = f.id
        return tuple(out)

    @cached_property
    def partner(self) -> tuple[int, ...]:
        out = [0] * len(self.symbols)
        for f in self.fragments:
            a, b = f.positions
            out[a], out[b] = b, a
        return tuple(out)

    @cached_property
    def _conflict_sets(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in self.fragments]
        for f in self.fragments:
            for g in self.fragments:
                if f.id < g.id and _alternate(f.positions, g.positions):
                    nbrs[f.id].add(g.id)
                    nbrs[g.id].add(f.id)
        return tuple(frozenset(n) for n in nbrs)

    def level(self, fid: int) -> int:
        return self.fragments[fid].level

    def fragments_at_level(self, level: int) -> list[int]:
        return [f.id for f in self.fragments if f.level == level]

    def conflicting(self, fid: int) -> frozenset[int]:
        return self._conflict_sets[fid]

    def endpoint(self, pos: int) -> EndpointSymbol:
        f = self.fragments[self.fragment_at[pos]]
        return EndpointSymbol(f.id, f.level, f.occurrence)

    def label(self, fid: int) -> str:
        return self.fragments[fid].label

    def __str__(self) -> str:
        return serialize_spine_list(self)


def _alternate(a: tuple[int, int], b: tuple[int, int]) -> bool:
    i, j = sorted(a)
    inside = sum(1 for p in b if i < p < j)
    return inside == 1


_TOKEN = re.compile(r"\s*(?:(\d+)\s*\^\s*(\d+)|([(),]))")


def parse_spine_list(text: str) -> SpineList:
    """Parse ``"(1^1, 2^1, 1^1, 2^1)"`` into a canonical :class:`SpineList`."""
    items: list[Symbol] = []
    i = 0
    n = len(text)

    def skip_ws(k: int) -> int:
        while k < n and text[k].isspace():
            k += 1
        return k

    i = skip_ws(i)
    if i >= n or text[i] != "(":
        raise SpineSyntaxError("expected '('", i)
    i += 1
    while True:
        m = _TOKEN.match(text, i)
        if not m or m.group(1) is None:
            raise SpineSyntaxError("expected item 'INT^INT'", skip_ws(i))
        items.append((int(m.group(1)), int(m.group(2))))
        i = skip_ws(m.end())
        if i < n and text[i] == ",":
            i += 1
            continue
        if i < n and text[i] == ")":
            i += 1
            break
        raise SpineSyntaxError("expected ',' or ')'", i)
    i = skip_ws(i)
    if i != n:
        raise SpineSyntaxError("trailing input", i)
    return SpineList.from_symbols(items)


def serialize_spine_list(s: SpineList) -> str:
    return "(" + ", ".join(f"{a}^{b}" for a, b in s.symbols) + ")"


def conflicts(a: Fragment, b: Fragment, s: SpineList) -> bool:
    """True iff the endpoints of ``a`` and ``b`` alternate on the spine."""
    if a.id == b.id:
        raise ValueError("a fragment does not conflict with itself")
    return _alternate(a.positions, b.positions)


@dataclass(frozen=True)
class ConflictGraph:
    vertices: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}


def conflict_graph(s: SpineList) -> ConflictGraph:
    edges = {
        (f.id, g)
        for f in s.fragments
        for g in s.conflicting(f.id)
        if f.id < g
    }
    return ConflictGraph(frozenset(f.id for f in s.fragments), frozenset(edges))


def relevel(s: SpineList, levels: Sequence[int]) -> tuple[SpineList, int]:
    """Assign ``levels[fid]`` to every fragment; returns (canonical list, offset)."""
    seq = []
    for p in range(len(s)):
        f = s.fragments[s.fragment_at[p]]
        # the old (level, occurrence) pair keeps fragments distinct
        seq.append((levels[f.id], f.id + 1))
    return canonicalize(seq)


def check_level_consistency(s: SpineList) -> None:
    for f in s.fragments:
        for g in s.conflicting(f.id):
            if g > f.id and s.level(g) == f.level:
                raise LevelConflictError(
                    f"conflicting fragments {f.label} and {s.label(g)} share level {f.level}"
                )


def representative_levels(s: SpineList) -> list[int]:
    """New level per fragment id: longest path in the level-ordered conflict DAG."""
    check_level_consistency(s)
    new = [1] * len(s.fragments)
    for f in sorted(s.fragments, key=lambda f: f.level):
        below = [new[g] for g in s.conflicting(f.id) if s.level(g) < f.level]
        new[f.id] = 1 + max(below, default=0)
    return new


def representative_leveling(s: SpineList | Sequence[Symbol]) -> SpineList:
    """Lowest consistent levels.  A raw symbol sequence may skip levels."""
    if not isinstance(s, SpineList):
        seq = [(int(a), int(b)) for a, b in s]
        rank = {lv: k + 1 for k, lv in enumerate(sorted({a for a, _ in seq}))}
        # a fresh occurrence per input symbol keeps fragments distinct
        occ = {sym: k + 1 for k, sym in enumerate(dict.fromkeys(seq))}
        s = SpineList.from_symbols([(rank[sym[0]], occ[sym]) for sym in seq])
    return relevel(s, representative_levels(s))[0]


def is_representative(s: SpineList) -> bool:
    for f in s.fragments:
        if f.level > 1 and not any(s.level(g) == f.level - 1 for g in s.conflicting(f.id)):
            return False
    return True


def cyclic_level_shift(s: SpineList, k: int) -> SpineList:
    n = s.n_levels
    return relevel(s, [((f.level - 1 + k) % n) + 1 for f in s.fragments])[0]


def split_vertices(g):
    """Reduce spine vertex degrees to three; see :func:`leveled_surface.general.split_vertices`."""
    from .general import split_vertices as _split

    return _split(g)
