"""The surface under construction, as a rotation system on the spine.

Spine vertex ``p`` sits between segments ``p-1`` and ``p``.  A dart is a
segment walked on one side of the spine: ``(p, "u")`` runs ``p -> p+1`` on the
upper side, ``(p, "l")`` runs ``p+1 -> p`` on the lower side, so every face
lies to the left of its walk.  A placed fragment leaves each endpoint either
upwards (``u``) or downwards (``l``); a walk arriving at such an endpoint on
that side turns onto the fragment.  Unplaced fragments are absent, their
endpoints are plain subdivision points with one corner per side.

Gluing a cylinder or punctured sphere identifies its ends with small circles
cut from faces.  Attachment points on each circle inherit the order of their
corners along the face walk, and the fragments drawn on the glued piece must
then form a plane graph with those circles as face boundaries; this is what
decides crossing and orientability of a glue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .core import SpineList
from .patterns import LOWER, UPPER, CylinderCandidate

Dart = tuple[int, str]
Face = tuple[Dart, ...]


class GlueError(ValueError):
    """A glue that cannot be realized."""

    rule = 1

    def __init__(self, message: str, **witness):
        super().__init__(message)
        self.witness = witness


class EndpointsNotOnDisk(GlueError):
    pass


class CrossingPlacement(GlueError):
    pass


class NonOrientableGluing(GlueError):
    pass


# --------------------------------------------------------------------------
# face tracing


def next_dart(s: SpineList, labels: Mapping[int, str], d: Dart) -> Dart:
    m = len(s)
    p, side = d
    if side == "u":
        q = (p + 1) % m
        if labels.get(q) == "u":
            r = s.partner[q]
            return (r, "u") if labels[r] == "u" else ((r - 1) % m, "l")
        return (q, "u")
    if labels.get(p) == "l":
        r = s.partner[p]
        return ((r - 1) % m, "l") if labels[r] == "l" else (r, "u")
    return ((p - 1) % m, "l")


def all_darts(s: SpineList) -> list[Dart]:
    return [(p, side) for p in range(len(s)) for side in ("l", "u")]


def trace_faces(s: SpineList, labels: Mapping[int, str]) -> tuple[Face, ...]:
    """Face walks of the placed subgraph; each starts at its smallest dart."""
    seen: set[Dart] = set()
    faces = []
    for start in all_darts(s):
        if start in seen:
            continue
        walk = []
        d = start
        while d not in seen:
            seen.add(d)
            walk.append(d)
            d = next_dart(s, labels, d)
        if d != start:
            raise RuntimeError("face tracing did not close up")  # pragma: no cover
        faces.append(tuple(walk))
    return tuple(sorted(faces))


def dart_steps(s: SpineList, labels: Mapping[int, str], d: Dart):
    """Edges traversed by a dart, as ``(tail_vertex, edge)`` with edge ``("s", p)`` or ``("f", fid)``."""
    m = len(s)
    p, side = d
    if side == "u":
        q = (p + 1) % m
        out = [(p, ("s", p))]
        if labels.get(q) == "u":
            out.append((q, ("f", s.fragment_at[q])))
        return out
    out = [((p + 1) % m, ("s", p))]
    if labels.get(p) == "l":
        out.append((p, ("f", s.fragment_at[p])))
    return out


def face_edges(s: SpineList, labels: Mapping[int, str], face: Face):
    return [step for d in face for step in dart_steps(s, labels, d)]


def euler_characteristic(s: SpineList, faces: Sequence[Face], n_fragments: int) -> int:
    m = len(s)
    return m - (m + n_fragments) + len(faces)


def euler_genus(s: SpineList, faces: Sequence[Face], n_fragments: int | None = None) -> int:
    """Genus from Euler's formula; ``n_fragments`` defaults to every fragment placed."""
    if n_fragments is None:
        n_fragments = len(s.fragments)
    chi = euler_characteristic(s, faces, n_fragments)
    if chi % 2:
        raise ValueError(f"odd Euler characteristic {chi}")
    return (2 - chi) // 2


def circularity(s: SpineList, labels: Mapping[int, str], faces: Sequence[Face]) -> bool:
    """Every edge on two distinct faces and every face boundary a cycle."""
    where: dict[tuple, list[int]] = {}
    for k, face in enumerate(faces):
        steps = face_edges(s, labels, face)
        tails = [v for v, _ in steps]
        if len(tails) != len(set(tails)):
            return False
        for _, e in steps:
            where.setdefault(e, []).append(k)
    return all(len(ks) == 2 and ks[0] != ks[1] for ks in where.values())


# --------------------------------------------------------------------------
# gluing data and state


@dataclass(frozen=True)
class GlueRecord:
    kind: str  # "cylinder" or "sphere"
    side: str
    fragments: tuple[int, ...]
    ends: tuple[tuple[int, ...], ...]  # endpoint positions per end, spine order
    labels: tuple[tuple[int, str], ...]
    targets: tuple[Dart, ...]  # disk ids (smallest dart of the face)
    handles: int
    cellular: bool
    disks_before: int
    disks_after: int
    orientable: bool = True
    candidate: CylinderCandidate | None = field(default=None, compare=False, repr=False)

    @property
    def single_disk(self) -> bool:
        return len(set(self.targets)) < len(self.targets)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "side": self.side,
            "fragments": list(self.fragments),
            "ends": [list(e) for e in self.ends],
            "labels": {str(p): lab for p, lab in self.labels},
            "targets": [dart_json(d) for d in self.targets],
            "handles": self.handles,
            "cellular": self.cellular,
            "orientable": self.orientable,
            "disks_before": self.disks_before,
            "disks_after": self.disks_after,
        }


def dart_json(d: Dart) -> dict:
    return {"pos": d[0], "side": d[1]}


def face_json(face: Face) -> list[dict]:
    return [dart_json(d) for d in face]


@dataclass(frozen=True)
class SurfaceState:
    spine: SpineList = field(repr=False)
    labels: tuple[tuple[int, str], ...]
    faces: tuple[Face, ...]
    records: tuple[GlueRecord, ...] = ()
    base_lower: frozenset[int] = frozenset()
    base_upper: frozenset[int] = frozenset()

    @cached_property
    def label_map(self) -> dict[int, str]:
        return dict(self.labels)

    @cached_property
    def face_of(self) -> dict[Dart, int]:
        return {d: k for k, face in enumerate(self.faces) for d in face}

    @cached_property
    def dart_index(self) -> dict[Dart, int]:
        return {d: i for face in self.faces for i, d in enumerate(face)}

    @property
    def disks(self) -> tuple[Face, ...]:
        return self.faces

    @property
    def disk_count(self) -> int:
        return len(self.faces)

    @property
    def genus(self) -> int:
        return sum(r.handles for r in self.records)

    @property
    def placed_fragments(self) -> frozenset[int]:
        return frozenset(self.spine.fragment_at[p] for p, _ in self.labels)

    @property
    def cellular(self) -> bool:
        return all(r.cellular for r in self.records)

    def disk_id(self, k: int) -> Dart:
        return self.faces[k][0]

    def face_index_by_id(self, disk: Dart) -> int:
        k = self.face_of[disk]
        if self.faces[k][0] != disk:
            raise KeyError(f"{disk} is not a disk id")
        return k

    def corner_face(self, pos: int, side: str) -> int:
        """Face holding the corner of unplaced endpoint ``pos`` on ``side``."""
        return self.face_of[(pos, side)]

    def corner_key(self, pos: int, side: str) -> int:
        i = self.dart_index[(pos, side)]
        return 2 * i - 1 if side == "u" else 2 * i + 1


def sphere(s: SpineList, lower: Iterable[int], upper: Iterable[int]) -> SurfaceState:
    lower, upper = frozenset(lower), frozenset(upper)
    if lower & upper:
        raise ValueError("a fragment cannot lie in both hemispheres")
    labels = {}
    for f, lab in [(f, "l") for f in lower] + [(f, "u") for f in upper]:
        for p in s.fragments[f].positions:
            labels[p] = lab
    return SurfaceState(s, tuple(sorted(labels.items())), trace_faces(s, labels), (), lower, upper)


def init_sphere(s: SpineList, c: int) -> SurfaceState:
    """Sphere with level ``c`` below and level ``c+1`` above the equator."""
    n = s.n_levels
    if n == 1 and c == 1:
        return sphere(s, s.fragments_at_level(1), ())
    if not 1 <= c < n:
        raise ValueError(f"base level must satisfy 1 <= c < {n}, got {c}")
    return sphere(s, s.fragments_at_level(c), s.fragments_at_level(c + 1))


# --------------------------------------------------------------------------
# realizability of the glued piece


def _plane_graph_genus(circles: Sequence[Sequence[int]], chords: Sequence[tuple[int, int]]):
    """(genus, components) of the graph drawn on the glued piece.

    Each circle passes through its attachment points in order; rotation at a
    point is (next on circle, chord, previous on circle).
    """
    hid = {}
    twin = {}
    rot_next = {}
    origin = {}

    def new(v, tag):
        h = len(hid)
        hid[(v, tag)] = h
        origin[h] = v
        return h

    for circle in circles:
        r = len(circle)
        for i, v in enumerate(circle):
            w = circle[(i + 1) % r]
            a, b = new(v, "next"), new(w, "prev")
            twin[a], twin[b] = b, a
    for p, q in chords:
        a, b = new(p, "frag"), new(q, "frag")
        twin[a], twin[b] = b, a
    for circle in circles:
        for v in circle:
            order = [hid[(v, "next")], hid[(v, "frag")], hid[(v, "prev")]]
            for i, h in enumerate(order):
                rot_next[h] = order[(i + 1) % 3]
    seen = set()
    n_faces = 0
    for h in hid.values():
        if h in seen:
            continue
        n_faces += 1
        x = h
        while x not in seen:
            seen.add(x)
            x = rot_next[twin[x]]
    verts = [v for c in circles for v in c]
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for circle in circles:
        for v in circle[1:]:
            parent[find(v)] = find(circle[0])
    for p, q in chords:
        parent[find(p)] = find(q)
    comps = len({find(v) for v in verts})
    n_edges = sum(len(c) for c in circles) + len(chords)
    chi = len(verts) - n_edges + n_faces
    return (2 * comps - chi) // 2, comps


def _alternating_pair(s: SpineList, frags: Sequence[int], key: Mapping[int, int]) -> bool:
    for i, f in enumerate(frags):
        a, b = sorted(key[p] for p in s.fragments[f].positions)
        for g in frags[i + 1 :]:
            inside = sum(1 for p in s.fragments[g].positions if a < key[p] < b)
            if inside == 1:
                return True
    return False


def _attach(
    st: SurfaceState,
    kind: str,
    side: str,
    ends: Sequence[Sequence[int]],
    labels: Mapping[int, str],
    targets: Sequence[Dart] | None = None,
    candidate: CylinderCandidate | None = None,
) -> SurfaceState:
    s = st.spine
    cur = st.label_map
    frags = sorted({s.fragment_at[p] for e in ends for p in e})
    allpos = [p for e in ends for p in e]
    if len(allpos) != len(set(allpos)) or set(allpos) != {
        p for f in frags for p in s.fragments[f].positions
    }:
        raise ValueError("ends must partition the endpoints of their fragments")
    if any(p in cur for p in allpos):
        raise ValueError("fragment already placed")
    if any(not e for e in ends):
        raise ValueError("every end needs an endpoint")
    ends = [tuple(e) for e in ends]

    face_idx = []
    for k, e in enumerate(ends):
        fs = {st.corner_face(p, labels[p]) for p in e}
        if len(fs) != 1:
            raise EndpointsNotOnDisk(
                f"endpoints of end {k} lie on {len(fs)} faces", end=k, positions=list(e)
            )
        face_idx.append(fs.pop())
    got = tuple(st.disk_id(k) for k in face_idx)
    if targets is not None and tuple(targets) != got:
        raise EndpointsNotOnDisk("endpoints do not lie on the requested disks", targets=got)

    key = {p: st.corner_key(p, labels[p]) for p in allpos}
    by_face: dict[int, list[int]] = {}
    for k, fi in enumerate(face_idx):
        by_face.setdefault(fi, []).append(k)
    for fi, ks in by_face.items():
        if len(ks) < 2:
            continue
        owner = {p: k for k in ks for p in ends[k]}
        seq = [owner[p] for p in sorted(owner, key=key.get)]
        blocks = sum(1 for i in range(len(seq)) if seq[i] != seq[i - 1])
        if blocks != len(ks):
            raise CrossingPlacement("ends interleave on one disk boundary", disk=st.disk_id(fi))

    circles = [sorted(e, key=key.get) for e in ends]
    chords = [s.fragments[f].positions for f in frags]
    genus, comps = _plane_graph_genus(circles, chords)
    if genus:
        if kind == "cylinder" and _plane_graph_genus([circles[0], circles[1][::-1]], chords)[0] == 0:
            raise NonOrientableGluing(
                "ends attach with the same rotational sense", fragments=frags
            )
        raise CrossingPlacement("fragments cannot be drawn on the glued piece", fragments=frags)

    if comps > 1:
        cellular = False
    elif len(set(face_idx)) == len(face_idx):
        cellular = True
    elif kind == "cylinder":
        cellular = _alternating_pair(s, frags, key)
    else:
        raise CrossingPlacement("punctured sphere with two ends on one disk")

    new_labels = dict(cur)
    new_labels.update({p: labels[p] for p in allpos})
    faces = trace_faces(s, new_labels)
    rec = GlueRecord(
        kind,
        side,
        tuple(frags),
        tuple(ends),
        tuple(sorted((p, labels[p]) for p in allpos)),
        got,
        len(ends) - 1,
        cellular,
        len(st.faces),
        len(faces),
        True,
        candidate,
    )
    return SurfaceState(
        s, tuple(sorted(new_labels.items())), faces, st.records + (rec,), st.base_lower, st.base_upper
    )


def glue_cylinder(
    st: SurfaceState, c: CylinderCandidate, targets: Sequence[Dart] | None = None
) -> SurfaceState:
    """Glue ``c`` to the disks its sublists lie on; the result may be non-cellular."""
    return _attach(st, "cylinder", c.side, c.spine_sublists, c.label_map, targets, c)


def attach_punctured_sphere(
    st: SurfaceState, side: str, ends: Sequence[Sequence[int]], labels: Mapping[int, str]
) -> SurfaceState:
    """Glue a sphere with ``len(ends)`` holes; each end must target a distinct disk."""
    if side not in (UPPER, LOWER):
        raise ValueError(side)
    return _attach(st, "sphere", side, ends, labels)


def cellularity_after_glue(
    st: SurfaceState, c: CylinderCandidate, targets: Sequence[Dart] | None = None
) -> bool:
    """Whether gluing ``c`` keeps the embedding cellular (raises if the glue is invalid)."""
    if targets is not None and len(set(targets)) == 2:
        return True
    return glue_cylinder(st, c, targets).records[-1].cellular


# --------------------------------------------------------------------------
# results and verification


@dataclass(frozen=True)
class EmbeddingResult:
    spine: SpineList = field(repr=False)
    base_levels: tuple[int, int] | None
    state: SurfaceState = field(repr=False)
    offset: int = 0  # position p here is position p + offset of the searched input

    @property
    def records(self) -> tuple[GlueRecord, ...]:
        return self.state.records

    @property
    def cylinders(self) -> list[GlueRecord]:
        return [r for r in self.state.records if r.kind == "cylinder"]

    @property
    def faces(self) -> tuple[Face, ...]:
        return self.state.faces

    @property
    def genus(self) -> int:
        return self.state.genus

    @property
    def cellular(self) -> bool:
        return self.state.cellular and euler_genus(
            self.spine, self.faces, len(self.state.placed_fragments)
        ) == self.genus

    @property
    def circular(self) -> bool:
        return circularity(self.spine, self.state.label_map, self.faces)

    def to_json(self) -> dict:
        st = self.state
        return {
            "spine": str(self.spine),
            "base_levels": list(self.base_levels) if self.base_levels else None,
            "input_offset": self.offset,
            "hemispheres": {"lower": sorted(st.base_lower), "upper": sorted(st.base_upper)},
            "glues": [r.to_json() for r in st.records],
            "faces": [face_json(f) for f in st.faces],
            "genus": self.genus,
            "euler_characteristic": euler_characteristic(
                self.spine, st.faces, len(st.placed_fragments)
            ),
            "cellular": self.cellular,
            "circular": self.circular,
        }


def replay_placement(s: SpineList, data: Mapping) -> SurfaceState:
    """Rebuild a state from the JSON placement of :meth:`EmbeddingResult.to_json`."""
    hemi = data.get("hemispheres", {})
    st = sphere(s, hemi.get("lower", ()), hemi.get("upper", ()))
    for g in data.get("glues", ()):
        labels = {int(p): lab for p, lab in g["labels"].items()}
        ends = [tuple(e) for e in g["ends"]]
        if g.get("kind", "cylinder") == "cylinder":
            c = CylinderCandidate.build(s, g["side"], ends, labels)
            st = glue_cylinder(st, c)
        else:
            st = attach_punctured_sphere(st, g["side"], ends, labels)
    return st


@dataclass
class VerificationReport:
    problems: list[str]

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_state(st: SurfaceState, complete: bool = True) -> VerificationReport:
    """Check a state from its labels alone: dart partition, Euler genus, orientability."""
    s = st.spine
    problems = []
    labels = st.label_map
    darts = [d for f in st.faces for d in f]
    if len(darts) != len(set(darts)) or set(darts) != set(all_darts(s)):
        problems.append("faces do not partition the darts")
    if tuple(st.faces) != trace_faces(s, labels):
        problems.append("faces differ from a fresh trace")
    placed = st.placed_fragments
    for f in placed:
        if any(p not in labels for p in s.fragments[f].positions):
            problems.append(f"fragment {f} half placed")
    if complete and len(placed) != len(s.fragments):
        problems.append("not every fragment is placed")
    chi = euler_characteristic(s, st.faces, len(placed))
    if chi % 2 or (2 - chi) // 2 != st.genus:
        problems.append(f"Euler characteristic {chi} does not match {st.genus} handles")
    if any(not r.orientable for r in st.records):
        problems.append("non-orientable glue recorded")
    seen = set(st.base_lower | st.base_upper)
    for r in st.records:
        if seen & set(r.fragments):
            problems.append("fragment glued twice")
        seen |= set(r.fragments)
        if r.kind == "cylinder" and r.handles != 1:
            problems.append("cylinder must add one handle")
    return VerificationReport(problems)


def verify(result: EmbeddingResult) -> VerificationReport:
    rep = verify_state(result.state)
    if not result.cellular:
        rep.problems.append("embedding is not cellular")
    return rep
