"""Non-hamiltonian inputs and the closed-form constructions for few levels.

A general leveled graph is reduced to a spine list by contracting, inside each
fragment, a breadth-first forest that hangs every interior vertex off one
attachment vertex; the remaining fragment edges become chords.  Vertices
carrying several chords are then split along the spine.  An embedding of the
reduced spine list is expanded back by undoing these moves on its rotation
system: contract the split edges, subdivide, and split off the interior
vertices again.
"""

from __future__ import annotations

import functools
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import networkx as nx

from .core import LevelConflictError, SpineList, canonicalize, cyclic_level_shift
from .patterns import LOWER, SIDES, UPPER, CylinderCandidate
from .search import SearchConfig, SearchOutcome, _run, separations
from .surface import (
    EmbeddingResult,
    GlueError,
    VerificationReport,
    SurfaceState,
    attach_punctured_sphere,
    glue_cylinder,
    sphere,
    verify,
)

Vertex = Any  # int or str, as read from JSON


class InvalidGraph(ValueError):
    pass


class ExpansionError(ValueError):
    """The embedding cannot be expanded (map/result mismatch or non-contiguous split)."""


def _vkey(v):
    return (isinstance(v, str), v if not isinstance(v, tuple) else str(v))


def _norm_edge(e):
    a, b = e
    return tuple(sorted((a, b), key=_vkey))


@dataclass(frozen=True, eq=False)
class GeneralFragment:
    vertices: tuple
    edges: tuple[tuple, ...]
    attachments: tuple
    level: int

    def key(self):
        return (
            tuple(sorted(self.vertices, key=_vkey)),
            tuple(sorted((_norm_edge(e) for e in self.edges), key=lambda e: tuple(map(_vkey, e)))),
            tuple(sorted(self.attachments, key=_vkey)),
            self.level,
        )

    def __eq__(self, other):
        return isinstance(other, GeneralFragment) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class GeneralLeveledGraph:
    spine: tuple
    fragments: tuple[GeneralFragment, ...]

    def key(self):
        return (self.spine, tuple(f.key() for f in self.fragments))

    def __eq__(self, other):
        return isinstance(other, GeneralLeveledGraph) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @functools.cached_property
    def spine_index(self) -> dict:
        return {v: i for i, v in enumerate(self.spine)}

    @classmethod
    def from_json(cls, data: Mapping | str) -> "GeneralLeveledGraph":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            frags = tuple(
                GeneralFragment(
                    tuple(f["vertices"]),
                    tuple(tuple(e) for e in f["edges"]),
                    tuple(f["attachments"]),
                    int(f["level"]),
                )
                for f in data["fragments"]
            )
            g = cls(tuple(data["spine"]), frags)
        except (KeyError, TypeError) as e:
            raise InvalidGraph(f"malformed graph: {e}") from e
        validate(g)
        return g

    def to_json(self) -> dict:
        return {
            "spine": list(self.spine),
            "fragments": [
                {
                    "vertices": list(f.vertices),
                    "edges": [list(e) for e in f.edges],
                    "attachments": list(f.attachments),
                    "level": f.level,
                }
                for f in self.fragments
            ],
        }

    @classmethod
    def from_spine_list(cls, s: SpineList) -> "GeneralLeveledGraph":
        frags = tuple(
            GeneralFragment(f.positions, (f.positions,), f.positions, f.level) for f in s.fragments
        )
        return cls(tuple(range(len(s))), frags)

    def is_hamiltonian(self) -> bool:
        return all(len(f.edges) == 1 and set(f.vertices) == set(f.attachments) for f in self.fragments)


def planarity_certificates(g: GeneralLeveledGraph) -> list[dict]:
    """Rotation system per fragment drawn in a disk bounded by the spine.

    The fragment is tested together with a cycle through its attachments in
    spine order and an apex joined to them, which forces that cycle to bound
    a face.
    """
    out = []
    idx = g.spine_index
    for k, f in enumerate(g.fragments):
        h = nx.Graph()
        h.add_nodes_from(("v", v) for v in f.vertices)
        h.add_edges_from((("v", a), ("v", b)) for a, b in f.edges if a != b)
        att = sorted(set(f.attachments), key=idx.get)
        if len(att) >= 2:
            for a, b in zip(att, att[1:] + att[:1]):
                if a != b:
                    h.add_edge(("v", a), ("v", b))
            for a in att:
                h.add_edge(("apex",), ("v", a))
        ok, emb = nx.check_planarity(h)
        if not ok:
            raise InvalidGraph(f"fragment {k} cannot be drawn in a disk bounded by the spine")
        out.append({v[1]: [w[1] if len(w) > 1 else "apex" for w in emb.neighbors_cw_order(v)] for v in emb if len(v) > 1})
    return out


def validate(g: GeneralLeveledGraph) -> None:
    if len(g.spine) < 2 or len(set(g.spine)) != len(g.spine):
        raise InvalidGraph("spine must list at least two distinct vertices")
    spine = set(g.spine)
    interior_seen: set = set()
    for k, f in enumerate(g.fragments):
        vs = set(f.vertices)
        if not f.attachments or not set(f.attachments) <= spine:
            raise InvalidGraph(f"fragment {k}: attachments must be spine vertices")
        if not set(f.attachments) <= vs:
            raise InvalidGraph(f"fragment {k}: attachments missing from vertices")
        interior = vs - set(f.attachments)
        if interior & spine or interior & interior_seen:
            raise InvalidGraph(f"fragment {k}: interior vertices must be private")
        interior_seen |= interior
        if f.level < 1:
            raise InvalidGraph(f"fragment {k}: level must be positive")
        if not f.edges:
            raise InvalidGraph(f"fragment {k} has no edges")
        for e in f.edges:
            if len(e) != 2 or not set(e) <= vs:
                raise InvalidGraph(f"fragment {k}: edge {e} leaves the fragment")
            if set(e) <= set(f.attachments) and len(f.edges) > 1:
                raise InvalidGraph(f"fragment {k}: an edge between attachments is its own fragment")
        h = nx.MultiGraph()
        h.add_nodes_from(f.vertices)
        h.add_edges_from(f.edges)
        if not nx.is_connected(h):
            raise InvalidGraph(f"fragment {k} is not connected")
    planarity_certificates(g)


def fragments_conflict(g: GeneralLeveledGraph, i: int, j: int) -> bool:
    """Alternating attachments, or at least three shared attachments."""
    idx = g.spine_index
    a = set(g.fragments[i].attachments)
    b = set(g.fragments[j].attachments)
    if len(a & b) >= 3:
        return True
    for a1, a2 in itertools.combinations(sorted(a, key=idx.get), 2):
        inside = {v for v in b if idx[a1] < idx[v] < idx[a2]}
        outside = {v for v in b if idx[v] < idx[a1] or idx[v] > idx[a2]}
        if inside and outside:
            return True
    return False


def conflict_edges(g: GeneralLeveledGraph) -> set[tuple[int, int]]:
    n = len(g.fragments)
    return {(i, j) for i in range(n) for j in range(i + 1, n) if fragments_conflict(g, i, j)}


def general_representative_levels(g: GeneralLeveledGraph) -> list[int]:
    """Longest conflict chain below each fragment; the input levels only orient conflicts."""
    nbrs: dict[int, set[int]] = {i: set() for i in range(len(g.fragments))}
    for i, j in conflict_edges(g):
        if g.fragments[i].level == g.fragments[j].level:
            raise LevelConflictError(f"conflicting fragments {i} and {j} share level {g.fragments[i].level}")
        nbrs[i].add(j)
        nbrs[j].add(i)
    new = [1] * len(g.fragments)
    for i in sorted(nbrs, key=lambda k: g.fragments[k].level):
        lv = g.fragments[i].level
        new[i] = 1 + max((new[j] for j in nbrs[i] if g.fragments[j].level < lv), default=0)
    return new


# --------------------------------------------------------------------------
# vertex splitting


def _incidence_order(g: GeneralLeveledGraph, v, groups: Sequence[int]) -> list[tuple[int, int, int]]:
    """Order of (fragment, edge, end) incidences at spine vertex v along the spine.

    Incidences of one group stay contiguous.  Groups reaching farther forward
    come first, which nests groups that do not conflict; inside a group the
    farther partner comes first.
    """
    idx = g.spine_index
    m = len(g.spine)
    i = idx[v]

    def fwd(u):
        return (idx[u] - i) % m

    reach: dict[int, list[int]] = {}
    for fi, f in enumerate(g.fragments):
        reach.setdefault(groups[fi], []).extend(fwd(a) for a in f.attachments if a != v)
    items = []
    for fi, f in enumerate(g.fragments):
        gi = groups[fi]
        r = reach[gi]
        lo, hi = (min(r), max(r)) if r else (0, 0)
        # parallel groups nest when the tie order flips between their two ends
        gkey = (-lo, -hi, gi if not r or i < (i + hi) % m else -gi)
        for ei, e in enumerate(f.edges):
            for end in (0, 1):
                if e[end] != v:
                    continue
                other = e[1 - end]
                if other == v:
                    ikey = (0, (fi, ei))  # loop ends stay adjacent
                elif other in idx:
                    ikey = (-fwd(other), (fi, ei) if i < idx[other] else (-fi, -ei))
                else:
                    ikey = (-lo, (fi, ei))
                items.append((gkey, ikey, end, (fi, ei, end)))
    items.sort()
    return [it[-1] for it in items]


@dataclass(frozen=True)
class SplitSchedule:
    copies: tuple[tuple[Vertex, tuple], ...]  # original vertex -> its copies along the spine

    def as_dict(self) -> dict:
        return dict(self.copies)


def _split(g: GeneralLeveledGraph, groups: Sequence[int] | None = None) -> tuple[GeneralLeveledGraph, SplitSchedule]:
    idx = g.spine_index
    groups = list(range(len(g.fragments))) if groups is None else groups
    new_spine = []
    new_end: dict[tuple[int, int, int], Vertex] = {}
    schedule = []
    for v in g.spine:
        order = _incidence_order(g, v, groups)
        if len(order) <= 1:
            new_spine.append(v)
            for inc in order:
                new_end[inc] = v
            continue
        copies = tuple(f"{v}#{k}" for k in range(len(order)))
        schedule.append((v, copies))
        new_spine.extend(copies)
        for inc, c in zip(order, copies):
            new_end[inc] = c
    frags = []
    for fi, f in enumerate(g.fragments):
        edges = []
        for ei, e in enumerate(f.edges):
            edges.append(tuple(new_end.get((fi, ei, end), e[end]) for end in (0, 1)))
        att = []
        for ei, e in enumerate(f.edges):
            for end in (0, 1):
                if e[end] in idx:
                    c = new_end[(fi, ei, end)]
                    if c not in att:
                        att.append(c)
        interior = [u for u in f.vertices if u not in idx]
        frags.append(GeneralFragment(tuple(att + interior), tuple(edges), tuple(att), f.level))
    for fi, f in enumerate(g.fragments):
        missing = [a for a in f.attachments if not any(a in e for e in f.edges)]
        if missing:
            raise InvalidGraph(f"fragment {fi}: attachment without an edge")
    return GeneralLeveledGraph(tuple(new_spine), tuple(frags)), SplitSchedule(tuple(schedule))


def split_vertices(g: GeneralLeveledGraph) -> GeneralLeveledGraph:
    """Give every spine vertex at most one fragment edge, keeping conflicts."""
    return _split(g)[0]


# --------------------------------------------------------------------------
# reduction to a spine list


@dataclass(frozen=True)
class ChordOrigin:
    fragment: int
    edge: int
    ends: tuple  # original endpoints of the chord's two ends


@dataclass(frozen=True)
class ContractionMap:
    """Everything needed to rebuild the input graph and expand embeddings."""

    original_spine: tuple
    levels: tuple[int, ...]
    chords: tuple[ChordOrigin, ...]  # indexed by fragment id of ``spine``
    trees: tuple[tuple[tuple, ...], ...]  # per fragment: (parent, child, edge, first end) in BFS order
    split: SplitSchedule
    split_spine: tuple
    split_chords: tuple[tuple[Vertex, Vertex], ...]  # chord ends on ``split_spine``
    positions: tuple  # spine-list position -> vertex of ``split_spine``
    spine: SpineList = field(repr=False)

    @property
    def dropped(self) -> tuple:
        """Split-spine vertices without a chord (suppressed in the spine list)."""
        used = set(self.positions)
        return tuple(v for v in self.split_spine if v not in used)

    @functools.cached_property
    def label_classes(self) -> tuple[tuple[int, ...], ...]:
        """Spine-list positions that must share a label for the expansion to exist.

        Chords leaving one subtree of a fragment's root sit on consecutive
        copies of the root; they can only be split off together when they
        leave the spine on the same side.
        """
        pos = {v: q for q, v in enumerate(self.positions)}
        out = []
        for fi, tree in enumerate(self.trees):
            parent = {w: u for u, w, _, _ in tree}
            groups: dict = {}
            for j, c in enumerate(self.chords):
                if c.fragment != fi:
                    continue
                for e in (0, 1):
                    x = c.ends[e]
                    if x not in parent:
                        continue
                    while parent[x] in parent:
                        x = parent[x]
                    groups.setdefault(x, []).append(pos[self.split_chords[j][e]])
            out += [tuple(sorted(g)) for g in groups.values() if len(g) > 1]
        return tuple(out)

    @property
    def is_identity(self) -> bool:
        return not self.split.copies and not any(self.trees) and not self.dropped


def reduce_to_hamiltonian(g: GeneralLeveledGraph) -> tuple[SpineList, ContractionMap]:
    """Contract a spanning forest of each fragment, split shared spine vertices."""
    validate(g)
    idx = g.spine_index
    levels = general_representative_levels(g)
    chords: list[ChordOrigin] = []
    chord_edges: list[tuple] = []
    chord_levels: list[int] = []
    chord_groups: list[int] = []
    trees = []
    for fi, f in enumerate(g.fragments):
        att = sorted(set(f.attachments), key=idx.get)
        adj: dict = {}
        for ei, (a, b) in enumerate(f.edges):
            adj.setdefault(a, []).append((b, ei))
            adj.setdefault(b, []).append((a, ei))
        root: dict = {a: a for a in att}
        tree = []
        tree_edges = set()
        for a in att:
            queue = deque([a])
            while queue:
                u = queue.popleft()
                for w, ei in sorted(adj.get(u, ()), key=lambda t: t[1]):
                    if w in root:
                        continue
                    root[w] = a
                    tree.append((u, w, ei, f.edges[ei][0]))
                    tree_edges.add(ei)
                    queue.append(w)
        trees.append(tuple(tree))
        for ei, (a, b) in enumerate(f.edges):
            if ei not in tree_edges:
                chords.append(ChordOrigin(fi, ei, (a, b)))
                chord_edges.append((root[a], root[b]))
                chord_levels.append(levels[fi])
                chord_groups.append(fi)
    if not chords:
        raise InvalidGraph("no fragment edge survives contraction")
    rank = {lv: k + 1 for k, lv in enumerate(sorted(set(chord_levels)))}
    h = GeneralLeveledGraph(
        g.spine,
        tuple(
            GeneralFragment(tuple(dict.fromkeys(e)), (e,), tuple(dict.fromkeys(e)), rank[lv])
            for e, lv in zip(chord_edges, chord_levels)
        ),
    )
    hs, schedule = _split(h, chord_groups)
    ends_at = {}
    for j, f in enumerate(hs.fragments):
        for v in f.edges[0]:
            ends_at[v] = j
    carrying = [v for v in hs.spine if v in ends_at]
    s, off = canonicalize([(hs.fragments[ends_at[v]].level, ends_at[v] + 1) for v in carrying])
    positions = tuple(carrying[(p + off) % len(carrying)] for p in range(len(carrying)))
    # the canonical form renumbers chords; follow them through their first position
    order = [ends_at[positions[f.positions[0]]] for f in s.fragments]
    cmap = ContractionMap(
        g.spine,
        tuple(f.level for f in g.fragments),
        tuple(chords[j] for j in order),
        tuple(trees),
        schedule,
        hs.spine,
        tuple(hs.fragments[j].edges[0] for j in order),
        positions,
        s,
    )
    return s, cmap


def expand_graph(m: ContractionMap) -> GeneralLeveledGraph:
    """Rebuild the input graph from the reduction record."""
    orig = {c: v for v, copies in m.split.copies for c in copies}
    spine = []
    for v in m.split_spine:
        o = orig.get(v, v)
        if not spine or spine[-1] != o:
            spine.append(o)
    spine_set = set(spine)
    edges: list[dict] = [{} for _ in m.levels]
    for c in m.chords:
        edges[c.fragment][c.edge] = tuple(c.ends)
    for fi, tree in enumerate(m.trees):
        for u, w, ei, first in tree:
            edges[fi][ei] = (u, w) if first == u else (w, u)
    frags = []
    for fi, level in enumerate(m.levels):
        verts = {v for e in edges[fi].values() for v in e}
        att = sorted((v for v in verts if v in spine_set), key=spine.index)
        interior = sorted((v for v in verts if v not in spine_set), key=_vkey)
        ordered = tuple(edges[fi][k] for k in sorted(edges[fi]))
        frags.append(GeneralFragment(tuple(att + interior), ordered, tuple(att), level))
    return GeneralLeveledGraph(tuple(spine), tuple(frags))


# --------------------------------------------------------------------------
# rotation systems


class RotationSystem:
    """Half-edges are (edge key, end); ``rot[v]`` lists half-edges leaving v in cyclic order."""

    def __init__(self):
        self.ends: dict[Any, list] = {}  # edge key -> [vertex at end 0, vertex at end 1]
        self.rot: dict[Any, list] = {}

    def copy(self) -> "RotationSystem":
        r = RotationSystem()
        r.ends = {k: list(v) for k, v in self.ends.items()}
        r.rot = {k: list(v) for k, v in self.rot.items()}
        return r

    def add_edge(self, key, u, v):
        """New edge; its half-edges go last in the rotations of u and v."""
        self.ends[key] = [u, v]
        self.rot.setdefault(u, []).append((key, 0))
        self.rot.setdefault(v, []).append((key, 1))

    @property
    def n_vertices(self) -> int:
        return len(self.rot)

    @property
    def n_edges(self) -> int:
        return len(self.ends)

    def contract(self, key):
        x, y = self.ends[key]
        if x == y:
            raise ValueError("cannot contract a loop")
        rx, ry = self.rot[x], self.rot[y]
        ix, iy = rx.index((key, 0)), ry.index((key, 1))
        a = rx[ix + 1 :] + rx[:ix]
        b = ry[iy + 1 :] + ry[:iy]
        for ek, end in b:
            self.ends[ek][end] = x
        self.rot[x] = a + b
        del self.rot[y]
        del self.ends[key]

    def split_off(self, v, block: Sequence, new_vertex, key):
        """Inverse of contraction: move a contiguous block of v's half-edges to a new vertex."""
        r = self.rot[v]
        n = len(r)
        members = set(block)
        if not members:
            self.rot[v] = [(key, 0)] + r
            self.rot[new_vertex] = [(key, 1)]
            self.ends[key] = [v, new_vertex]
            return
        if not members <= set(r):
            raise ExpansionError("block is not at the vertex")
        if len(members) == n:
            start = 0
        else:
            starts = [i for i in range(n) if r[i] in members and r[i - 1] not in members]
            if len(starts) != 1:
                raise ExpansionError(f"half-edges to move from {v!r} are not contiguous")
            start = starts[0]
        rr = r[start:] + r[:start]
        k = len(members)
        s_part, a_part = rr[:k], rr[k:]
        self.rot[v] = [(key, 0)] + a_part
        self.rot[new_vertex] = [(key, 1)] + s_part
        self.ends[key] = [v, new_vertex]
        for ek, end in s_part:
            self.ends[ek][end] = new_vertex

    def subdivide(self, key, new_vertex, k1, k2):
        u, v = self.ends.pop(key)
        self.ends[k1] = [u, new_vertex]
        self.ends[k2] = [new_vertex, v]
        self.rot[u] = [(k1, 0) if h == (key, 0) else h for h in self.rot[u]]
        self.rot[v] = [(k2, 1) if h == (key, 1) else h for h in self.rot[v]]
        self.rot[new_vertex] = [(k1, 1), (k2, 0)]

    def twin(self, h):
        return (h[0], 1 - h[1])

    def tail(self, h):
        return self.ends[h[0]][h[1]]

    def faces(self) -> list[list]:
        succ = {}
        for v, r in self.rot.items():
            for i, h in enumerate(r):
                succ[h] = r[(i + 1) % len(r)]
        seen = set()
        out = []
        for v in self.rot:
            for h in self.rot[v]:
                if h in seen:
                    continue
                walk = []
                x = h
                while x not in seen:
                    seen.add(x)
                    walk.append(x)
                    x = succ[self.twin(x)]
                out.append(walk)
        return out

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + len(self.faces())


@dataclass
class ExpandedEmbedding:
    graph: GeneralLeveledGraph
    rotation: RotationSystem = field(repr=False)
    reduced: EmbeddingResult = field(repr=False)

    @functools.cached_property
    def faces(self) -> list[list]:
        return self.rotation.faces()

    @property
    def euler_characteristic(self) -> int:
        return self.rotation.n_vertices - self.rotation.n_edges + len(self.faces)

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @property
    def cellular(self) -> bool:
        return self.reduced.cellular and self.genus == self.reduced.genus

    @property
    def circular(self) -> bool:
        where: dict = {}
        for k, face in enumerate(self.faces):
            tails = [self.rotation.tail(h) for h in face]
            if len(tails) != len(set(tails)):
                return False
            for h in face:
                where.setdefault(h[0], []).append(k)
        return all(len(v) == 2 and v[0] != v[1] for v in where.values())

    def to_json(self) -> dict:
        def e_json(key):
            return list(key)

        return {
            "genus": self.genus,
            "euler_characteristic": self.euler_characteristic,
            "cellular": self.cellular,
            "circular": self.circular,
            "faces": [
                [{"edge": e_json(h[0]), "from": self.rotation.tail(h)} for h in face]
                for face in self.faces
            ],
        }


def expand_embedding(r: EmbeddingResult, m: ContractionMap) -> ExpandedEmbedding:
    """Rotation system of the input graph from an embedding of its reduced spine list."""
    s = r.spine
    M = len(s)
    if M != len(m.positions):
        raise ExpansionError("result and contraction map describe different spines")
    to_map = [(p + r.offset) % M for p in range(M)]
    for f in s.fragments:
        a, b = (to_map[p] for p in f.positions)
        if m.spine.fragment_at[a] != m.spine.fragment_at[b]:
            raise ExpansionError("result chords do not match the contraction map")
    labels = {to_map[p]: lab for p, lab in r.state.label_map.items()}
    if len(labels) != M:
        raise ExpansionError("embedding is incomplete")

    # split chord graph, with its chord-free spine vertices
    rs = RotationSystem()
    sp = m.split_spine
    n = len(sp)
    carrying = {v: q for q, v in enumerate(m.positions)}
    end_at = {}
    for j, (a, b) in enumerate(m.split_chords):
        rs.add_edge(("c", j), a, b)
        end_at[a], end_at[b] = (j, 0), (j, 1)
    for i, v in enumerate(sp):
        rs.add_edge(("h", i), v, sp[(i + 1) % n])
    for i, v in enumerate(sp):
        rot = [(("h", (i - 1) % n), 1)]
        if v in carrying:
            j, e = end_at[v]
            lab = labels[carrying[v]]
            if lab == "u":
                rot.append((("c", j), e))
            rot.append((("h", i), 0))
            if lab == "l":
                rot.append((("c", j), e))
        else:
            rot.append((("h", i), 0))
        rs.rot[v] = rot

    # merge the copies of every split vertex
    orig = {c: v for v, copies in m.split.copies for c in copies}
    for i, v in enumerate(sp):
        w = sp[(i + 1) % n]
        if v in orig and orig.get(w) == orig[v]:
            rs.contract(("h", i))
    for v, copies in m.split.copies:
        _rename_vertex(rs, copies[0], v)
    sidx = {v: i for i, v in enumerate(m.original_spine)}
    for key in [k for k in rs.ends if k[0] == "h"]:
        _rename_edge(rs, key, ("spine", sidx[rs.ends[key][0]]))

    # chords become their input edges; split interior vertices back off, parents first
    origin = {}
    for j, c in enumerate(m.chords):
        key = ("frag", c.fragment, c.edge)
        _rename_edge(rs, ("c", j), key)
        origin[(key, 0)], origin[(key, 1)] = c.ends
    for fi, tree in enumerate(m.trees):
        children: dict = {}
        for u, w, _, _ in tree:
            children.setdefault(u, []).append(w)

        @functools.lru_cache(maxsize=None)
        def below(w):
            return frozenset({w}).union(*(below(x) for x in children.get(w, ())))

        for u, w, ei, first in tree:
            key = ("frag", fi, ei)
            sub = below(w)
            block = [h for h in rs.rot[u] if origin.get(h) in sub]
            rs.split_off(u, block, w, key)
            if first != u:
                _flip(rs, key)
            origin[(key, 0)], origin[(key, 1)] = rs.ends[key]
    return ExpandedEmbedding(expand_graph(m), rs, r)


def verify_expanded(e: ExpandedEmbedding) -> VerificationReport:
    """Rotation system covers the input graph exactly; faces partition darts; genus kept."""
    problems = []
    rs, g = e.rotation, e.graph
    want = {("spine", i): {g.spine[i], g.spine[(i + 1) % len(g.spine)]} for i in range(len(g.spine))}
    for fi, f in enumerate(g.fragments):
        for ei, (a, b) in enumerate(f.edges):
            want[("frag", fi, ei)] = {a, b}
    if {k: set(v) for k, v in rs.ends.items()} != want:
        problems.append("edges differ from the input graph")
    halves = [h for r in rs.rot.values() for h in r]
    if len(halves) != len(set(halves)) or set(halves) != {(k, x) for k in rs.ends for x in (0, 1)}:
        problems.append("rotations do not list every half-edge once")
    for v, r in rs.rot.items():
        if any(rs.tail(h) != v for h in r):
            problems.append(f"half-edge misplaced at {v!r}")
    darts = [h for f in e.faces for h in f]
    if len(darts) != len(set(darts)) or set(darts) != set(halves):
        problems.append("faces do not partition the darts")
    if e.euler_characteristic != 2 - 2 * e.reduced.genus:
        problems.append("expansion changed the Euler characteristic")
    if len(e.faces) != len(e.reduced.faces):
        problems.append("expansion changed the face count")
    return VerificationReport(problems)


def _rename_vertex(rs: RotationSystem, old, new):
    if old == new:
        return
    rs.rot[new] = rs.rot.pop(old)
    for ends in rs.ends.values():
        for k in (0, 1):
            if ends[k] == old:
                ends[k] = new


def _rename_edge(rs: RotationSystem, old, new):
    rs.ends[new] = rs.ends.pop(old)
    for v, r in rs.rot.items():
        rs.rot[v] = [(new, end) if k == old else (k, end) for k, end in r]


def _flip(rs: RotationSystem, key):
    rs.ends[key].reverse()
    for v, r in rs.rot.items():
        rs.rot[v] = [(k, 1 - e) if k == key else (k, e) for k, e in r]


# --------------------------------------------------------------------------
# pipeline


def _expandable(m: ContractionMap, result: EmbeddingResult) -> bool:
    try:
        e = expand_embedding(result, m)
    except ExpansionError:
        return False
    return e.euler_characteristic == 2 - 2 * result.genus


def run_algorithm2(g: GeneralLeveledGraph, cfg: SearchConfig | None = None) -> SearchOutcome:
    cfg = cfg or SearchConfig()
    s, m = reduce_to_hamiltonian(g)
    accept = functools.partial(_expandable, m)
    # chords keep their fragment's level so one fragment stays on one side
    out = _run(
        s,
        cfg,
        False,
        cfg.max_fragments_outside_base,
        accept=accept,
        normalize=False,
        same_label=m.label_classes,
    )
    out.contraction = m
    if out.success:
        out.expanded = expand_embedding(out.result, m)
    return out


# --------------------------------------------------------------------------
# few levels


class PreconditionError(ValueError):
    pass


def _glue_clusters(st: SurfaceState, frags: Sequence[int], side: str) -> SurfaceState:
    """One punctured sphere per cluster of disks joined by ``frags``."""
    s = st.spine
    lab = "u" if side == UPPER else "l"
    assign = {p: st.corner_face(p, lab) for f in frags for p in s.fragments[f].positions}
    parent = {k: k for k in set(assign.values())}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for f in frags:
        a, b = (assign[p] for p in s.fragments[f].positions)
        parent[find(a)] = find(b)
    clusters: dict[int, list[int]] = {}
    for f in sorted(frags):
        clusters.setdefault(find(assign[s.fragments[f].positions[0]]), []).append(f)
    # face ids before any glue identify each end
    plan = []
    for root, fs in sorted(clusters.items(), key=lambda kv: kv[1][0]):
        by_face: dict[int, list[int]] = {}
        for f in fs:
            for p in s.fragments[f].positions:
                by_face.setdefault(assign[p], []).append(p)
        ends = [tuple(sorted(ps)) for _, ps in sorted(by_face.items(), key=lambda kv: st.disk_id(kv[0]))]
        plan.append(ends)
    for ends in plan:
        labels = {p: lab for e in ends for p in e}
        st = attach_punctured_sphere(st, side, ends, labels)
    return st


def _four_level_state(s: SpineList, lower, upper, above, below) -> SurfaceState:
    st = sphere(s, lower, upper)
    if above:
        st = _glue_clusters(st, above, UPPER)
    if below:
        st = _glue_clusters(st, below, LOWER)
    return st


def four_level_embed(s: SpineList) -> EmbeddingResult:
    """Levels 1, 2 on the sphere; level 3 above and level 4 below on punctured spheres."""
    n = s.n_levels
    if n > 4:
        raise PreconditionError(f"{n} levels; at most 4 supported")
    lv = {k: s.fragments_at_level(k) for k in range(1, 5)}
    st = _four_level_state(s, lv[1], lv[2], lv[3], lv[4])
    res = EmbeddingResult(s, (1, 2) if n > 1 else None, st)
    rep = verify(res)
    if not rep.ok:
        raise RuntimeError(f"four-level construction failed to verify: {rep.problems}")
    return res


def _middle_level_options(st: SurfaceState, frags: Sequence[int]):
    yield from _one_cylinder(st, tuple(frags))
    if len(frags) == 2:
        for first in _one_cylinder(st, (frags[0],)):
            yield from _one_cylinder(first, (frags[1],))


def _one_cylinder(st: SurfaceState, block: tuple[int, ...]):
    s = st.spine
    pts = sorted(p for f in block for p in s.fragments[f].positions)
    for side in SIDES:
        for sub in separations(pts):
            order = sub[0] + sub[1]
            for k in range(2 ** len(order)):
                labels = {p: "ul"[(k >> (len(order) - 1 - i)) & 1] for i, p in enumerate(order)}
                try:
                    new = glue_cylinder(st, CylinderCandidate.build(s, side, sub, labels))
                except GlueError:
                    continue
                if new.records[-1].cellular:
                    yield new


def five_level_embed(s: SpineList) -> EmbeddingResult:
    """Four-level construction on levels 1, 2, 4, 5, then at most two cylinders for level 3."""
    if s.n_levels != 5:
        raise PreconditionError("five_level_embed needs exactly 5 levels")
    small = [k for k in range(1, 6) if len(s.fragments_at_level(k)) <= 2]
    if not small:
        raise PreconditionError("no level has at most two fragments")
    k = 3 if 3 in small else small[0]
    if k != 3:
        s = cyclic_level_shift(s, (3 - k) % 5)
    lv = {k: s.fragments_at_level(k) for k in range(1, 6)}
    st = _four_level_state(s, lv[1], lv[2], lv[4], lv[5])
    for final in _middle_level_options(st, lv[3]):
        res = EmbeddingResult(s, (1, 2), final)
        if verify(res).ok:
            return res
    raise RuntimeError("no placement of the middle level verified")


def four_level_genus(s: SpineList, lower, upper, above, below) -> int:
    return _four_level_state(s, lower, upper, above, below).genus
