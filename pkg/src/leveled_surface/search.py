"""Search for a consecutive cellular embedding by gluing cylinders to a sphere.

The search is a depth-first walk over set partitions of the fragments outside
the two base levels.  At each depth the next cylinder is a block containing
the smallest unplaced fragment, so every set partition is reached exactly once
while prefixes are shared.  Within a block the choices are iterated as side,
separation, endpoint labels.  Each choice is pruned by the discard rules
(cheapest first) and then glued.
"""

from __future__ import annotations

import functools
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

from .core import (
    SpineList,
    check_level_consistency,
    relevel,
    representative_levels,
)
from .patterns import (
    LOWER,
    SIDES,
    UPPER,
    CylinderCandidate,
    InBetweenContext,
    check_in_between,
    check_level_order,
    match_disk_sublists,
)
from .surface import (
    EmbeddingResult,
    GlueError,
    SurfaceState,
    dart_steps,
    euler_genus,
    glue_cylinder,
    init_sphere,
    verify,
)

log = logging.getLogger(__name__)

RULES = tuple(range(1, 10))


class CapExceeded(ValueError):
    pass


class SearchTimeout(Exception):
    pass


@dataclass(frozen=True)
class SearchConfig:
    base_level: int | None = None  # None tries every c
    max_fragments_outside_base: int = 12
    time_budget: float | None = None  # seconds
    parallel: bool = False
    try_cyclic_shifts: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.max_fragments_outside_base < 1:
            raise ValueError("max_fragments_outside_base must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.base_level is not None and self.base_level < 1:
            raise ValueError("base level must be positive")


SUCCESS, FAILURE, TIMED_OUT = "success", "failure", "timeout"


@dataclass
class SearchOutcome:
    status: str
    result: EmbeddingResult | None = None
    explored: dict[int, int] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    # set for general inputs: the embedding over the input graph and its reduction record
    expanded: Any = None
    contraction: Any = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def to_json(self, timings: bool = True) -> dict:
        out = {
            "status": self.status,
            "discards": {str(k): v for k, v in sorted(self.explored.items())},
            "stats": {k: v for k, v in self.stats.items() if timings or k != "elapsed"},
        }
        if self.result is not None:
            out["result"] = self.result.to_json()
        if self.contraction is not None:
            out["reduced_spine"] = str(self.contraction.spine)
        if self.expanded is not None:
            out["expanded"] = self.expanded.to_json()
        return out


# --------------------------------------------------------------------------
# enumeration


def enumerate_partitions(items: Sequence, cap: int | None = None) -> Iterator[list[list]]:
    """Set partitions in descending restricted-growth order (singletons first).

    Blocks are listed by their first member.
    """
    items = list(items)
    n = len(items)
    if cap is not None and n > cap:
        raise CapExceeded(f"{n} items exceeds cap {cap}")
    if n == 0:
        yield []
        return
    rgs = [0] * n

    def rec(i: int, top: int):
        if i == n:
            blocks: list[list] = [[] for _ in range(top + 1)]
            for item, b in zip(items, rgs):
                blocks[b].append(item)
            yield blocks
            return
        for b in range(top + 1, -1, -1):
            rgs[i] = b
            yield from rec(i + 1, max(top, b))

    yield from rec(1, 0)


def separations(endpoints: Sequence[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every split of cyclically ordered endpoints into two contiguous arcs."""
    e = list(endpoints)
    n = len(e)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            out.append((tuple(e[i:j]), tuple(e[j:] + e[:i])))
    return out


def _block_endpoints(s: SpineList, block: Iterable[int]) -> list[int]:
    return sorted(p for f in block for p in s.fragments[f].positions)


def cylinder_choices(s: SpineList, block: Sequence[int]) -> Iterator[CylinderCandidate]:
    """All (side, separation, labels) choices for one block, in enumeration order."""
    for side in SIDES:
        for s1, s2 in separations(_block_endpoints(s, block)):
            order = s1 + s2
            for labs in itertools.product("ul", repeat=len(order)):
                yield CylinderCandidate.build(s, side, (s1, s2), dict(zip(order, labs)))


@dataclass(frozen=True)
class LabeledPartition:
    base_level: int
    cylinders: tuple[CylinderCandidate, ...]


def enumerate_labelings(partition: Sequence[Sequence[int]], s: SpineList, c: int = 1):
    """Labeled partitions; the first cylinder's choice is the most significant."""
    blocks = sorted((sorted(b) for b in partition), key=lambda b: b[0])
    per = [list(cylinder_choices(s, b)) for b in blocks]
    for combo in itertools.product(*per):
        yield LabeledPartition(c, tuple(combo))


def labeling_count(s: SpineList, partition: Sequence[Sequence[int]]) -> int:
    total = 1
    for b in partition:
        n = 2 * len(b)
        total *= 2 * (n * (n - 1) // 2) * 2**n
    return total


# --------------------------------------------------------------------------
# rules between cylinders


def _between(x: int, a: int, b: int, m: int) -> bool:
    """x strictly inside the arc running forward from a to b."""
    return 0 < (x - a) % m < (b - a) % m


def _labeled_spans(c: CylinderCandidate, label: str):
    """Per sublist, the endpoints carrying ``label`` in arc order."""
    lab = c.label_map
    return [[p for p in sub if lab[p] == label] for sub in c.spine_sublists]


def _enclosed(x: int, pts: Sequence[int], m: int) -> tuple[int, int] | None:
    """Tightest consecutive pair of ``pts`` (arc order) around x, if x lies within their span."""
    if len(pts) < 2 or not _between(x, pts[0], pts[-1], m):
        return None
    for a, b in zip(pts, pts[1:]):
        if _between(x, a, b, m):
            return a, b
    return None


@dataclass(frozen=True)
class Discard:
    rule: int
    witness: dict


def in_between_violation(s: SpineList, pj: CylinderCandidate, pk: CylinderCandidate):
    """Fragment of ``pk`` wedged between a conflicting pair of ``pj`` (same side)."""
    if pj.side != pk.side:
        return None
    m = len(s)
    lab_j, lab_k = pj.label_map, pk.label_map
    frs = sorted(pj.fragments)
    for a in frs:
        for b in frs:
            if s.level(a) >= s.level(b) or b not in s.conflicting(a):
                continue
            for sub in pj.spine_sublists:
                for e in "ul":
                    pts = [p for p in sub if s.fragment_at[p] in (a, b) and lab_j[p] == e]
                    if len(pts) < 2:
                        continue
                    for x, lx in pk.labels:
                        if lx != e or not _between(x, pts[0], pts[-1], m):
                            continue
                        g = s.fragments[s.fragment_at[x]]
                        ctx = InBetweenContext(pj.side, e, pk.side)
                        if not check_in_between(s.fragments[a], s.fragments[b], g, ctx):
                            return {"pair": (a, b), "fragment": g.id, "endpoint": x}
    return None


def _arc_fragments(st: SurfaceState, y1: int, y2: int, label: str):
    """Fragments traversed on each of the two boundary arcs between two corners."""
    k = st.corner_face(y1, label)
    face = st.faces[k]
    n = len(face)
    i1 = st.corner_key(y1, label) % (2 * n)
    i2 = st.corner_key(y2, label) % (2 * n)
    labels = st.label_map
    arcs = ([], [])
    for i, d in enumerate(face):
        mid = 2 * i  # dart i sits between corner keys 2i-1 and 2i+1
        lo, hi = sorted((i1, i2))
        side = 0 if lo < mid < hi else 1
        for _, edge in dart_steps(st.spine, labels, d):
            if edge[0] == "f":
                arcs[side].append(edge[1])
    return arcs


def interaction_violation(
    s: SpineList,
    ph: CylinderCandidate,
    pj: CylinderCandidate,
    st: SurfaceState,
    position: dict[int, int],
    h: int,
):
    """Conflicts between an earlier cylinder ``ph`` (index h) and ``pj`` glued onto ``st``.

    ``position`` maps each placed fragment to its cylinder index (base: -1).
    """
    m = len(s)
    lab_h, lab_j = ph.label_map, pj.label_map
    if ph.side == pj.side:
        eh, ej = ("l", "u") if ph.side == UPPER else ("u", "l")
        spans_j = _labeled_spans(pj, ej)
        spans_h = _labeled_spans(ph, eh)
        for x, lx in ph.labels:
            if lx != eh:
                continue
            f = s.fragment_at[x]
            for pts in spans_j:
                pair = _enclosed(x, pts, m)
                if pair is None:
                    continue
                for y in pair:
                    g = s.fragment_at[y]
                    if _9a_levels(s, ph.side, f, g):
                        return Discard(9, {"case": "a", "fragments": (f, g)})
        for y, ly in pj.labels:
            if ly != ej:
                continue
            g = s.fragment_at[y]
            for pts in spans_h:
                pair = _enclosed(y, pts, m)
                if pair is None:
                    continue
                for x in pair:
                    f = s.fragment_at[x]
                    if _9a_levels(s, ph.side, f, g):
                        return Discard(9, {"case": "a", "fragments": (f, g)})
        return None

    # opposite sides
    e_b = "u" if ph.side == LOWER else "l"
    for y, ly in pj.labels:
        if ly == e_b:
            for pts in _labeled_spans(ph, e_b):
                if _enclosed(y, pts, m):
                    return Discard(9, {"case": "b", "endpoint": y})
    e_c = "u" if ph.side == UPPER else "l"
    for x, lx in ph.labels:
        if lx != e_c:
            continue
        f = s.fragment_at[x]
        for pts in _labeled_spans(pj, e_c):
            pair = _enclosed(x, pts, m)
            if pair is None:
                continue
            arcs = _arc_fragments(st, pair[0], pair[1], e_c)
            ok = any(
                any(position.get(g, -1) > h for g in arc)
                and not any(g in s.conflicting(f) for g in arc)
                for arc in arcs
            )
            if not ok:
                return Discard(9, {"case": "c", "fragment": f, "between": pair})
    low, up = (ph, pj) if ph.side == LOWER else (pj, ph)
    for x, lx in low.labels:
        if lx == "u" and any(_enclosed(x, pts, m) for pts in _labeled_spans(up, "l")):
            return Discard(9, {"case": "d", "endpoint": x})
    for x, lx in up.labels:
        if lx == "l" and any(_enclosed(x, pts, m) for pts in _labeled_spans(low, "u")):
            return Discard(9, {"case": "d", "endpoint": x})
    return None


def _9a_levels(s: SpineList, side: str, f: int, g: int) -> bool:
    if g not in s.conflicting(f):
        return False
    return s.level(f) < s.level(g) if side == UPPER else s.level(f) > s.level(g)


# --------------------------------------------------------------------------
# single labeled partition


@dataclass(frozen=True)
class Accept:
    state: SurfaceState


def apply_discard_rules(lp: LabeledPartition, s: SpineList, state: SurfaceState | None = None):
    """First violated rule of ``lp`` (cylinders in order), or :class:`Accept`."""
    st = init_sphere(s, lp.base_level) if state is None else state
    position = {f: -1 for f in st.placed_fragments}
    cyls = lp.cylinders
    for j, pj in enumerate(cyls):
        matches = match_disk_sublists(pj)
        if not matches:
            return Discard(2, {"cylinder": j})
        v = check_level_order(pj, s, matches)
        if v:
            return Discard(v[0].rule, {"cylinder": j, "fragments": v[0].fragments})
        for k, pk in enumerate(cyls):
            if k != j:
                w = in_between_violation(s, pj, pk)
                if w:
                    return Discard(7, {"cylinder": j, "other": k, **w})
        for h in range(j):
            d = interaction_violation(s, cyls[h], pj, st, position, h)
            if d:
                return Discard(9, {"cylinder": j, "other": h, **d.witness})
        try:
            new = glue_cylinder(st, pj)
        except GlueError as e:
            return Discard(1, {"cylinder": j, "reason": type(e).__name__, **e.witness})
        if not new.records[-1].cellular:
            return Discard(8, {"cylinder": j})
        st = new
        position.update({f: j for f in pj.fragments})
    return Accept(st)


# --------------------------------------------------------------------------
# depth-first search


def _blocks_with(first: int, rest: Sequence[int]) -> Iterator[tuple[int, ...]]:
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            yield (first,) + extra


class _Walker:
    def __init__(self, s: SpineList, oracle: bool, deadline: float | None, accept=None, same=None):
        self.s = s
        self.oracle = oracle
        self.deadline = deadline
        self.accept = accept
        # positions that must carry equal labels: position -> class members
        self.same = {}
        for cls in (same or ()):
            for p in cls:
                self.same[p] = cls
        self.counts = {r: 0 for r in RULES}
        self.nodes = 0
        self._matches: dict = {}

    def _tick(self):
        self.nodes += 1
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SearchTimeout()

    def _labelings(self, sublists, st: SurfaceState):
        """u/l labels whose corners of each sublist share a face (rule 1 as a filter)."""
        order = [(p, k) for k, sub in enumerate(sublists) for p in sub]
        labs: dict[int, str] = {}
        faces: list[int | None] = [None, None]

        def rec(i: int):
            if i == len(order):
                yield dict(labs)
                return
            p, k = order[i]
            for lab in "ul":
                if p in self.same and any(
                    labs.get(q, st.label_map.get(q, lab)) != lab for q in self.same[p]
                ):
                    continue
                f = st.corner_face(p, lab)
                if faces[k] is not None and faces[k] != f:
                    self.counts[1] += 1
                    continue
                saved = faces[k]
                faces[k] = f
                labs[p] = lab
                yield from rec(i + 1)
                faces[k] = saved
                del labs[p]

        yield from rec(0)

    def choices(self, block, st: SurfaceState, prefix: Sequence[CylinderCandidate], position):
        s = self.s
        pts = _block_endpoints(s, block)
        for side in SIDES:
            for sub in separations(pts):
                matches = None
                if not self.oracle:
                    key = (block, sub)
                    if key not in self._matches:
                        probe = CylinderCandidate.build(s, side, sub, {p: "u" for p in pts})
                        self._matches[key] = match_disk_sublists(probe)
                    matches = self._matches[key]
                    if not matches:
                        self.counts[2] += 1
                        continue
                for labels in self._labelings(sub, st):
                    self._tick()
                    cand = CylinderCandidate.build(s, side, sub, labels)
                    if not self.oracle:
                        rule = self._combinatorial_rules(cand, matches, st, prefix, position)
                        if rule:
                            self.counts[rule] += 1
                            continue
                    try:
                        new = glue_cylinder(st, cand)
                    except GlueError:
                        self.counts[1] += 1
                        continue
                    if self.oracle:
                        cellular = euler_genus(s, new.faces, len(new.placed_fragments)) == new.genus
                    else:
                        cellular = new.records[-1].cellular
                    if not cellular:
                        self.counts[8] += 1
                        continue
                    yield cand, new

    def _combinatorial_rules(self, cand, matches, st, prefix, position) -> int | None:
        s = self.s
        v = check_level_order(cand, s, matches)
        if v:
            return v[0].rule
        for pk in prefix:
            if in_between_violation(s, cand, pk) or in_between_violation(s, pk, cand):
                return 7
        for h, ph in enumerate(prefix):
            if interaction_violation(s, ph, cand, st, position, h):
                return 9
        return None

    def top_choices(self, st: SurfaceState, remaining: tuple[int, ...]):
        first, rest = remaining[0], remaining[1:]
        for block in _blocks_with(first, rest):
            for cand, new in self.choices(block, st, (), {}):
                yield block, cand, new

    def dfs(self, st, remaining, prefix, position):
        if not remaining:
            return st if self.accept is None or self.accept(st) else None
        first, rest = remaining[0], remaining[1:]
        for block in _blocks_with(first, rest):
            left = tuple(f for f in rest if f not in block)
            for cand, new in self.choices(block, st, prefix, position):
                pos = dict(position)
                pos.update({f: len(prefix) for f in block})
                found = self.dfs(new, left, prefix + (cand,), pos)
                if found is not None:
                    return found
        return None


def _outside(s: SpineList, c: int) -> tuple[int, ...]:
    return tuple(f.id for f in s.fragments if f.level not in (c, c + 1))


def _subtree(args):
    s, oracle, deadline, accept, same, new, left, cand, block = args
    w = _Walker(s, oracle, deadline, accept, same)
    pos = {f: 0 for f in block}
    try:
        found = w.dfs(new, left, (cand,), pos)
    except SearchTimeout:
        return "timeout", w.counts, w.nodes
    return found, w.counts, w.nodes


def _search_base(s, c, oracle, deadline, parallel, workers, accept=None, same=None):
    """Returns (final state or None, counts, nodes); raises SearchTimeout."""
    st0 = init_sphere(s, c)
    remaining = _outside(s, c)
    w = _Walker(s, oracle, deadline, accept, same)
    if not remaining:
        return (st0 if accept is None or accept(st0) else None), w.counts, 0
    if not parallel:
        return w.dfs(st0, remaining, (), {}), w.counts, w.nodes
    # snapshot top-level pruning so merged counters match the sequential walk
    jobs, deltas = [], []
    before = dict(w.counts)
    for block, cand, new in w.top_choices(st0, remaining):
        deltas.append({r: w.counts[r] - before[r] for r in RULES})
        before = dict(w.counts)
        left = tuple(f for f in remaining if f not in block)
        jobs.append((s, oracle, deadline, accept, same, new, left, cand, block))
    tail = {r: w.counts[r] - before[r] for r in RULES}
    counts = {r: 0 for r in RULES}
    nodes = w.nodes
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_subtree, jobs))
    for delta, (found, sub_counts, sub_nodes) in zip(deltas, results):
        for r in RULES:
            counts[r] += delta[r] + sub_counts[r]
        nodes += sub_nodes
        if found == "timeout":
            raise SearchTimeout()
        if found is not None:
            return found, counts, nodes
    for r in RULES:
        counts[r] += tail[r]
    return None, counts, nodes


def _base_levels(s: SpineList, cfg: SearchConfig) -> list[int]:
    n = s.n_levels
    if n == 1:
        return [1]
    if cfg.base_level is not None:
        if not 1 <= cfg.base_level < n:
            raise ValueError(f"base level {cfg.base_level} outside 1..{n - 1}")
        return [cfg.base_level]
    return list(range(1, n))


def _leaf_check(accept, sp: SpineList, c: int, offset: int, st: SurfaceState) -> bool:
    return accept(EmbeddingResult(sp, (c, c + 1), st, offset))


def _run(
    s: SpineList,
    cfg: SearchConfig,
    oracle: bool,
    cap: int,
    accept=None,
    normalize: bool = True,
    same_label: Sequence[Sequence[int]] = (),
) -> SearchOutcome:
    """Search every base level (and optional cyclic shifts).

    ``accept`` may reject complete embeddings, letting the search continue.
    Result offsets map result positions back to positions of ``s``.  With
    ``normalize`` off the given levels are searched as they are.  Each class
    in ``same_label`` (positions of ``s``) must receive a single label.
    """
    t0 = time.monotonic()
    deadline = t0 + cfg.time_budget if cfg.time_budget else None
    check_level_consistency(s)
    m = len(s)
    def norm(sp):
        return relevel(sp, representative_levels(sp)) if normalize else (sp, 0)

    s, off0 = norm(s)
    spines = [(0, s, off0)]
    if cfg.try_cyclic_shifts:
        n = s.n_levels
        for k in range(1, n):
            sh, o1 = relevel(s, [((f.level - 1 + k) % n) + 1 for f in s.fragments])
            rep, o2 = norm(sh)
            spines.append((k, rep, (off0 + o1 + o2) % m))
    counts = {r: 0 for r in RULES}
    nodes = 0
    tried = []
    for shift, sp, off in spines:
        for c in _base_levels(sp, cfg):
            n_out = len(_outside(sp, c))
            if n_out > cap:
                raise CapExceeded(f"{n_out} fragments outside levels {c},{c + 1} exceeds cap {cap}")
            tried.append({"shift": shift, "base_level": c})
            leaf = None if accept is None else functools.partial(_leaf_check, accept, sp, c, off)
            same = [tuple((q - off) % m for q in cls) for cls in same_label]
            try:
                found, cnt, nd = _search_base(
                    sp, c, oracle, deadline, cfg.parallel, cfg.workers, leaf, same
                )
            except SearchTimeout:
                return SearchOutcome(
                    TIMED_OUT, None, counts, {"tried": tried, "nodes": nodes, "elapsed": time.monotonic() - t0}
                )
            for r in RULES:
                counts[r] += cnt[r]
            nodes += nd
            log.debug("shift %d base %d: nodes=%d found=%s", shift, c, nd, found is not None)
            if found is not None:
                res = EmbeddingResult(sp, (c, c + 1), found, off)
                rep = verify(res)
                if not rep.ok:
                    raise RuntimeError(f"search produced an unverifiable embedding: {rep.problems}")
                stats = {"tried": tried, "nodes": nodes, "elapsed": time.monotonic() - t0}
                return SearchOutcome(SUCCESS, res, counts, stats)
    return SearchOutcome(FAILURE, None, counts, {"tried": tried, "nodes": nodes, "elapsed": time.monotonic() - t0})


def run_algorithm1(s: SpineList, cfg: SearchConfig | None = None) -> SearchOutcome:
    cfg = cfg or SearchConfig()
    return _run(s, cfg, False, cfg.max_fragments_outside_base)


ORACLE_CAP = 4


def exhaustive_oracle(s: SpineList, cfg: SearchConfig | None = None) -> SearchOutcome:
    """Same search space without discard rules 2-9; cellularity by Euler count."""
    cfg = cfg or SearchConfig(max_fragments_outside_base=ORACLE_CAP)
    return _run(s, cfg, True, min(cfg.max_fragments_outside_base, ORACLE_CAP))
