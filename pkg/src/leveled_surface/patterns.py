"""Legality of a set of fragments placed together on one cylinder.

Disk sublists are matched against the six admissible forms by first removing
mirrored one-end insertions (``x, x`` adjacent, innermost first), then peeling
enclosing one-end groups, then splitting the residual both-ends sequences
into the Latin/Greek/``c`` groups of each form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import Fragment, SpineList

UPPER, LOWER = "U", "L"
SIDES = (UPPER, LOWER)


class HalftwistClass(enum.Enum):
    ZERO = "zero"
    ONE = "one"
    TWO_OR_MORE = "two_or_more"
    THREE_OR_MORE = "three_or_more"

    @property
    def at_least_two(self) -> bool:
        return self in (HalftwistClass.TWO_OR_MORE, HalftwistClass.THREE_OR_MORE)


@dataclass(frozen=True)
class CylinderCandidate:
    """Fragments on one cylinder, with side and endpoint labels.

    ``spine_sublists`` hold endpoint positions in spine order (each sublist is
    a contiguous arc of the cylinder's endpoints).  ``roles`` optionally pins
    halftwist classes of both-ends fragments.
    """

    spine: SpineList = field(repr=False, compare=False)
    fragments: frozenset[int]
    side: str
    spine_sublists: tuple[tuple[int, ...], tuple[int, ...]]
    labels: tuple[tuple[int, str], ...]
    roles: tuple[tuple[int, HalftwistClass], ...] = ()

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be U or L, got {self.side!r}")
        seen = [p for sub in self.spine_sublists for p in sub]
        if len(seen) != len(set(seen)):
            raise ValueError("an endpoint appears twice in the sublists")
        want = {p for f in self.fragments for p in self.spine.fragments[f].positions}
        if set(seen) != want:
            raise ValueError("sublists must contain exactly the endpoints of the fragments")
        if {p for p, _ in self.labels} != want or any(
            lab not in ("u", "l") for _, lab in self.labels
        ):
            raise ValueError("every endpoint needs a u/l label")

    @classmethod
    def build(
        cls,
        spine: SpineList,
        side: str,
        sublists: Sequence[Sequence[int]],
        labels: Mapping[int, str],
        roles: Mapping[int, HalftwistClass] | None = None,
    ) -> "CylinderCandidate":
        frags = frozenset(spine.fragment_at[p] for sub in sublists for p in sub)
        return cls(
            spine,
            frags,
            side,
            (tuple(sublists[0]), tuple(sublists[1])),
            tuple(sorted(labels.items())),
            tuple(sorted((roles or {}).items(), key=lambda kv: kv[0])),
        )

    @property
    def label_map(self) -> dict[int, str]:
        return dict(self.labels)

    @property
    def t(self) -> int:
        return len(self.fragments)

    def sublist_of(self, pos: int) -> int:
        return 0 if pos in self.spine_sublists[0] else 1

    @property
    def both_ends(self) -> frozenset[int]:
        top = {self.spine.fragment_at[p] for p in self.spine_sublists[0]}
        bot = {self.spine.fragment_at[p] for p in self.spine_sublists[1]}
        return frozenset(top & bot)

    @property
    def one_end(self) -> frozenset[int]:
        return self.fragments - self.both_ends

    @property
    def disk_sublists(self) -> tuple[tuple[tuple[int, str], ...], tuple[tuple[int, str], ...]]:
        lab = self.label_map
        top, bot = spine_to_disk_sublists(self.spine_sublists)
        return (
            tuple((self.spine.fragment_at[p], lab[p]) for p in top),
            tuple((self.spine.fragment_at[p], lab[p]) for p in bot),
        )

    def fragment_sequences(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        top, bot = self.disk_sublists
        return tuple(f for f, _ in top), tuple(f for f, _ in bot)


def spine_to_disk_sublists(sublists):
    """Reverse the second spine sublist; the ends become naturally identified."""
    first, second = sublists
    return tuple(first), tuple(reversed(tuple(second)))


# --------------------------------------------------------------------------
# pattern matching

SYMMETRIES = ("id", "swap", "reverse", "swap_reverse")


def _apply_symmetry(sym: str, top, bot):
    if sym in ("swap", "swap_reverse"):
        top, bot = bot, top
    if sym in ("reverse", "swap_reverse"):
        top, bot = tuple(reversed(top)), tuple(reversed(bot))
    return tuple(top), tuple(bot)


def _undo_symmetry(sym: str, top, bot):
    if sym in ("reverse", "swap_reverse"):
        top, bot = tuple(reversed(top)), tuple(reversed(bot))
    if sym in ("swap", "swap_reverse"):
        top, bot = bot, top
    return tuple(top), tuple(bot)


@dataclass(frozen=True)
class PatternMatch:
    form: int
    symmetry: str
    roles: tuple[tuple[int, HalftwistClass], ...]
    # (fragment, tag) per entry, in the symmetry-transformed frame
    tagged: tuple[tuple[tuple[int, str], ...], tuple[tuple[int, str], ...]]

    @property
    def role_map(self) -> dict[int, HalftwistClass]:
        return dict(self.roles)

    @property
    def c_fragment(self) -> int | None:
        for f, r in self.roles:
            if r.at_least_two:
                return f
        return None


def _strip_insertions(seq: Sequence[int]) -> tuple[list[int], list[str]]:
    """Innermost-first removal of adjacent equal entries; returns residue and tags."""
    tags = ["core"] * len(seq)
    stack: list[int] = []  # indices
    for i, f in enumerate(seq):
        if stack and seq[stack[-1]] == f:
            tags[stack.pop()] = "ins"
            tags[i] = "ins"
        else:
            stack.append(i)
    return [seq[i] for i in stack], tags


def _peel(seq: list[int]) -> tuple[list[int], int]:
    k = 0
    while len(seq) - 2 * k >= 2 and seq[k] == seq[len(seq) - 1 - k]:
        k += 1
    return seq[k : len(seq) - k], k


ZERO, ONE, TWO = HalftwistClass.ZERO, HalftwistClass.ONE, HalftwistClass.TWO_OR_MORE


def _core_splits(form: int, c1: list[int], c2: list[int]):
    """Yield (group tags for core1 entries, role map) for every way ``form`` fits."""
    n = len(c1)
    if form in (1, 2):
        for with_c in (False, True):
            if with_c and n == 0:
                continue
            if form == 1:
                c = c1[-1] if with_c else None
                body = c1[:-1] if with_c else c1
                rebuilt = ([c] if with_c else []) + body
            else:
                c = c1[0] if with_c else None
                body = c1[1:] if with_c else c1
                rebuilt = body + ([c] if with_c else [])
            if rebuilt == c2:
                roles = {f: ZERO for f in body}
                tags = ["b"] * len(body)
                if with_c:
                    roles[c] = TWO
                    tags = tags + ["c"] if form == 1 else ["c"] + tags
                yield tags, roles
    elif form == 3:
        for k in range(n + 1):
            alpha, beta = c1[:k], c1[k:]
            if beta + alpha == c2:
                roles = {f: ONE for f in c1}
                yield ["alpha"] * k + ["beta"] * (n - k), roles
    elif form == 4:
        for i in range(n + 1):
            for j in range(i, n + 1):
                alpha, bz, beta = c1[:i], c1[i:j], c1[j:]
                if beta + alpha + bz == c2:
                    roles = {f: ONE for f in alpha + beta}
                    roles.update({f: ZERO for f in bz})
                    yield ["alpha"] * i + ["b"] * (j - i) + ["beta"] * (n - j), roles
    elif form == 5:
        for with_c in (False, True):
            if with_c and n == 0:
                continue
            rest = c1[1:] if with_c else c1
            for k in range(len(rest) + 1):
                alpha, bz = rest[:k], rest[k:]
                if alpha + bz + ([c1[0]] if with_c else []) == c2:
                    roles = {f: ONE for f in alpha}
                    roles.update({f: ZERO for f in bz})
                    tags = ["alpha"] * k + ["b"] * (len(rest) - k)
                    if with_c:
                        roles[c1[0]] = TWO
                        tags = ["c"] + tags
                    yield tags, roles
    elif form == 6:
        for with_c in (False, True):
            if with_c and n == 0:
                continue
            rest = c1[:-1] if with_c else c1
            for k in range(len(rest) + 1):
                bz, beta = rest[:k], rest[k:]
                if beta + ([c1[-1]] if with_c else []) + bz == c2:
                    roles = {f: ZERO for f in bz}
                    roles.update({f: ONE for f in beta})
                    tags = ["b"] * k + ["beta"] * (len(rest) - k)
                    if with_c:
                        roles[c1[-1]] = TWO
                        tags = tags + ["c"]
                    yield tags, roles


def _template(form: int, groups: Mapping[str, Sequence[int]], c):
    """Instantiate a form from its groups (core plus enclosing one-end groups)."""
    g = {k: list(v) for k, v in groups.items()}
    cc = [c] if c is not None else []
    A, D = g.get("a", []), g.get("d", [])
    b, al, be = g.get("b", []), g.get("alpha", []), g.get("beta", [])
    rA, rD = list(reversed(A)), list(reversed(D))
    if form == 1:
        return A + b + cc + rA, D + cc + b + rD
    if form == 2:
        return A + cc + b + rA, D + b + cc + rD
    if form == 3:
        return A + al + be + rA, D + be + al + rD
    if form == 4:
        return A + al + b + be + rA, be + al + b
    if form == 5:
        return A + cc + al + b + rA, al + b + cc
    if form == 6:
        return A + b + be + cc + rA, be + cc + b
    raise ValueError(form)


def _match_frame(top: tuple[int, ...], bot: tuple[int, ...], sym: str) -> list[PatternMatch]:
    out: list[PatternMatch] = []
    r1, tags1 = _strip_insertions(top)
    r2, tags2 = _strip_insertions(bot)
    c1, k1 = _peel(r1)
    c2, k2 = _peel(r2)
    if len(c1) != len(set(c1)) or sorted(c1) != sorted(c2) or not c1:
        return out
    # residues must consist of both-ends fragments only
    core_set = set(c1)
    if any(f in core_set for f in r1[:k1] + r2[:k2]):
        return out
    for form in range(1, 7):
        if form >= 4 and k2:
            continue
        for core_tags, roles in _core_splits(form, c1, c2):
            # re-tag the full sequences
            grp_top = _tag_sequence(tags1, r1, k1, "a", core_tags)
            core_of = dict(zip(c1, core_tags))
            grp_bot = _tag_sequence(tags2, r2, k2, "d", [core_of[f] for f in c2])
            variants = [roles]
            c = next((f for f, r in roles.items() if r is TWO), None)
            if c is not None and len(roles) == 1:
                variants.append({c: HalftwistClass.THREE_OR_MORE})
            for rl in variants:
                out.append(
                    PatternMatch(
                        form,
                        sym,
                        tuple(sorted(rl.items())),
                        (tuple(zip(top, grp_top)), tuple(zip(bot, grp_bot))),
                    )
                )
    return out


def _tag_sequence(tags, residue, k, enclose_tag, core_tags):
    """Combine insertion tags with enclosing-group and core tags for one sublist."""
    res_tags = [enclose_tag] * k + list(core_tags) + [enclose_tag] * k
    it = iter(res_tags)
    return tuple(t if t == "ins" else next(it) for t in tags)


def match_disk_sublists(c: CylinderCandidate) -> list[PatternMatch]:
    """All role assignments under which the disk sublists fit one of the six forms."""
    top, bot = c.fragment_sequences()
    pinned = dict(c.roles)
    if sum(1 for r in pinned.values() if r.at_least_two) > 1:
        return []
    if any(r is HalftwistClass.THREE_OR_MORE for r in pinned.values()) and len(c.both_ends) > 1:
        return []
    found: dict[tuple, PatternMatch] = {}
    for sym in SYMMETRIES:
        t, b = _apply_symmetry(sym, top, bot)
        for m in _match_frame(t, b, sym):
            rm = m.role_map
            if any(
                f in rm and not (rm[f] is want or (want is TWO and rm[f].at_least_two))
                for f, want in pinned.items()
            ):
                continue
            found.setdefault((m.form, m.symmetry, m.roles, m.tagged), m)
    return sorted(found.values(), key=_match_key)


def _match_key(m: PatternMatch):
    return (m.form, SYMMETRIES.index(m.symmetry), [(f, r.value) for f, r in m.roles], m.tagged)


def replay_match(m: PatternMatch) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Rebuild the fragment sequences of the disk sublists from a match.

    Raises ``ValueError`` if the match's groups do not instantiate its form.
    """
    seqs = []
    skeleton = []
    for tagged in m.tagged:
        stack: list[int] = []
        for f, tag in tagged:
            if tag == "ins":
                if stack and stack[-1] == f:
                    stack.pop()
                else:
                    stack.append(f)
        if stack:
            raise ValueError("insertions are not mirrored")
        seqs.append(tuple(f for f, _ in tagged))
        skeleton.append([(f, tag) for f, tag in tagged if tag != "ins"])
    top_sk, bot_sk = skeleton
    k = len([1 for _, tag in top_sk if tag == "a"]) // 2
    kd = len([1 for _, tag in bot_sk if tag == "d"]) // 2
    groups = {
        "a": [f for f, _ in top_sk[:k]],
        "d": [f for f, _ in bot_sk[:kd]],
        "b": [f for f, t in top_sk if t == "b"],
        "alpha": [f for f, t in top_sk if t == "alpha"],
        "beta": [f for f, t in top_sk if t == "beta"],
    }
    c = next((f for f, t in top_sk if t == "c"), None)
    want_top, want_bot = _template(m.form, groups, c)
    if [f for f, _ in top_sk] != want_top or [f for f, _ in bot_sk] != want_bot:
        raise ValueError("match does not instantiate its form")
    return _undo_symmetry(m.symmetry, seqs[0], seqs[1])


# --------------------------------------------------------------------------
# level order on one cylinder


@dataclass(frozen=True)
class LevelViolation:
    rule: int  # discard rule 3..6
    level_case: int  # 1..5
    fragments: tuple[int, int]


def _role_independent_violations(c: CylinderCandidate, s: SpineList) -> list[LevelViolation]:
    lab = c.label_map
    out = []
    both = c.both_ends
    for f in sorted(c.one_end):
        f_pos = s.fragments[f].positions
        k = c.sublist_of(f_pos[0])
        f_labels = {lab[p] for p in f_pos}
        for g in sorted(both):
            if g not in s.conflicting(f):
                continue
            g_here = next(p for p in s.fragments[g].positions if c.sublist_of(p) == k)
            if "u" in f_labels and lab[g_here] == "u" and s.level(f) > s.level(g):
                out.append(LevelViolation(3, 1 if c.side == UPPER else 3, (f, g)))
            if "l" in f_labels and lab[g_here] == "l" and s.level(f) < s.level(g):
                out.append(LevelViolation(5, 5, (f, g)))
    return out


def _role_violations(c: CylinderCandidate, s: SpineList, cfrag: int | None) -> list[LevelViolation]:
    if cfrag is None:
        return []
    lab = c.label_map
    out = []
    c_labels = {lab[p] for p in s.fragments[cfrag].positions}
    for h in sorted(c.both_ends - {cfrag}):
        h_labels = {lab[p] for p in s.fragments[h].positions}
        if "u" in c_labels and "u" in h_labels and s.level(cfrag) > s.level(h):
            out.append(LevelViolation(4, 2 if c.side == UPPER else 4, (cfrag, h)))
        if "l" in c_labels and "l" in h_labels and s.level(cfrag) < s.level(h):
            out.append(LevelViolation(6, 5, (cfrag, h)))
    return out


def check_level_order(
    c: CylinderCandidate,
    s: SpineList,
    matches: Iterable[PatternMatch] | None = None,
) -> list[LevelViolation]:
    """Level-order violations; empty iff some pattern match satisfies every case."""
    base = _role_independent_violations(c, s)
    if base:
        return base
    matches = list(match_disk_sublists(c) if matches is None else matches)
    first: list[LevelViolation] | None = None
    for m in matches:
        v = _role_violations(c, s, m.c_fragment)
        if not v:
            return []
        if first is None:
            first = v
    return first or []


# --------------------------------------------------------------------------
# in-between fragments


@dataclass(frozen=True)
class InBetweenContext:
    cylinder_side: str  # side of the cylinder carrying a and b
    endpoint_type: str  # common u/l type of the endpoints of a, b and x
    x_side: str  # side of the cylinder carrying x


def check_in_between(a: Fragment, b: Fragment, x: Fragment, ctx: InBetweenContext) -> bool:
    """Whether ``x`` may sit on ``ctx.x_side`` with an endpoint between those of a, b.

    ``a`` must be at lower level than ``b``.
    """
    if a.level >= b.level:
        raise ValueError("a must be at lower level than b")
    if ctx.x_side != ctx.cylinder_side:
        return True
    if ctx.cylinder_side == UPPER and ctx.endpoint_type == "u":
        return not x.level <= a.level
    if ctx.cylinder_side == LOWER and ctx.endpoint_type == "l":
        return not x.level >= b.level
    if ctx.cylinder_side == UPPER and ctx.endpoint_type == "l":
        return not x.level >= a.level
    return not x.level <= b.level
