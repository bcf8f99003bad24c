"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import itertools
import random
import time

import pytest

from conftest import FIG1, FIVE_LEVEL
from leveled_surface.core import conflict_graph, canonicalize, parse_spine_list
from leveled_surface.corpus import oracle_corpus, random_chord_spine, random_spines, tree_corpus
from leveled_surface.general import (
    expand_graph,
    five_level_embed,
    four_level_embed,
    four_level_genus,
    reduce_to_hamiltonian,
    run_algorithm2,
    verify_expanded,
)
from leveled_surface.patterns import LOWER, UPPER, CylinderCandidate
from leveled_surface.search import (
    Discard,
    LabeledPartition,
    SearchConfig,
    apply_discard_rules,
    enumerate_labelings,
    enumerate_partitions,
    exhaustive_oracle,
    run_algorithm1,
)
from leveled_surface.surface import (
    NonOrientableGluing,
    circularity,
    euler_characteristic,
    euler_genus,
    glue_cylinder,
    init_sphere,
    replay_placement,
    sphere,
    trace_faces,
    all_darts,
    verify,
)

RANDOM_SEED = 20240601


@pytest.fixture
def report(capsys):
    """Print one line per criterion straight to the terminal."""

    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {k:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def brute_alternation(s, i, j):
    a, b = s.fragments[i].positions, s.fragments[j].positions
    marks = {a[0]: "a", a[1]: "a", b[0]: "b", b[1]: "b"}
    seq = [marks[p] for p in sorted(marks)]
    return any(seq[r:] + seq[:r] == ["a", "b", "a", "b"] for r in range(4))


def bell(n):
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]


def test_criterion_01_bell_enumeration(report):
    t0 = time.monotonic()
    got = [sorted(map(frozenset, p), key=min) for p in enumerate_partitions("ABC")]
    want = [
        [{"A"}, {"B"}, {"C"}],
        [{"A"}, {"B", "C"}],
        [{"A", "C"}, {"B"}],
        [{"A", "B"}, {"C"}],
        [{"A", "B", "C"}],
    ]
    order_ok = got == [[frozenset(b) for b in p] for p in want]
    counts = {n: sum(1 for _ in enumerate_partitions(range(n))) for n in range(1, 9)}
    counts_ok = all(counts[n] == bell(n) for n in counts)
    dt = time.monotonic() - t0
    ok = order_ok and counts_ok and dt < 1
    assert report(1, ok, f"5 partitions in order={order_ok}, Bell counts N=1..8 {list(counts.values())}, {dt:.3f}s")


def test_criterion_02_labeled_enumeration(report):
    t0 = time.monotonic()
    s = parse_spine_list("(1^1, 1^1, 2^1, 2^1, 3^1, 3^1)")
    f = s.fragments_at_level(3)[0]
    a, b = s.fragments[f].positions
    lps = list(enumerate_labelings([[f]], s, 1))
    got = [(c.side, c.label_map[a], c.label_map[b]) for lp in lps for c in lp.cylinders]
    want = [(side, x, y) for side in (UPPER, LOWER) for x in "ul" for y in "ul"]
    seps = {c.spine_sublists for lp in lps for c in lp.cylinders}
    dt = time.monotonic() - t0
    ok = got == want and seps == {((a,), (b,))} and dt < 1
    assert report(2, ok, f"{len(lps)} labeled partitions, order matches={got == want}, {dt:.3f}s")


def test_criterion_03_fig1(report):
    t0 = time.monotonic()
    s = parse_spine_list(FIG1)
    shape = len(s.fragments) == 7 and s.n_levels == 3
    brute = {(i, j) for i, j in itertools.combinations(range(7), 2) if brute_alternation(s, i, j)}
    graph_ok = set(conflict_graph(s).edges) == brute
    r = four_level_embed(s)
    genus_ok = verify(r).ok and euler_genus(r.spine, r.faces) == r.genus
    dt = time.monotonic() - t0
    ok = shape and graph_ok and genus_ok and dt < 1
    assert report(
        3, ok, f"7 fragments/3 levels={shape}, conflicts={graph_ok}, genus {r.genus} by Euler and by handles, {dt:.3f}s"
    )


def test_criterion_04_non_cellular_witness(report):
    t0 = time.monotonic()
    s, _ = canonicalize([(k, 1) for k in (3, 1, 4, 2, 1, 3, 4, 2)])
    st = sphere(s, [], [3])  # fragment 2 in the upper hemisphere
    c1 = CylinderCandidate.build(s, LOWER, ((0,), (5,)), {0: "u", 5: "u"})
    merged = glue_cylinder(st, c1)
    c34 = CylinderCandidate.build(s, UPPER, ((1, 2), (4, 6)), {p: "u" for p in (1, 2, 4, 6)})
    d = apply_discard_rules(LabeledPartition(1, (c1, c34)), s, st)
    rule8 = isinstance(d, Discard) and d.rule == 8 and d.witness["cylinder"] == 1
    # both ends of the second cylinder sit on D and no pair of its fragments separates
    rec = glue_cylinder(merged, c34).records[-1]
    dt = time.monotonic() - t0
    ok = rule8 and rec.single_disk and not rec.cellular and dt < 1
    assert report(4, ok, f"verdict {d}, single disk={rec.single_disk}, {dt:.3f}s")


def test_criterion_05_orientability_obstruction(report):
    t0 = time.monotonic()
    s = parse_spine_list(FIVE_LEVEL)
    st = init_sphere(s, 1)
    pts = sorted(p for f in s.fragments_at_level(3) for p in s.fragments[f].positions)
    sub = (tuple(pts[:3]), tuple(pts[3:]))
    rejected = True
    for x, y in (("u", "l"), ("l", "u")):
        labels = {p: x for p in sub[0]} | {p: y for p in sub[1]}
        try:
            glue_cylinder(st, CylinderCandidate.build(s, UPPER, sub, labels))
            rejected = False
        except NonOrientableGluing:
            pass
    verdicts = {}
    for c in (1, 2, 3, 4):
        out = run_algorithm1(s, SearchConfig(base_level=c, time_budget=600))
        verdicts[c] = out.status
        if out.success:
            assert verify(out.result).ok
    dt = time.monotonic() - t0
    all_fail = all(v == "failure" for v in verdicts.values())
    ok = rejected and all_fail and dt < 600
    assert report(
        5,
        ok,
        f"cross-hemisphere cylinder rejected as non-orientable={rejected}; "
        f"run_algorithm1 verdicts {verdicts} (expected failure for every c), {dt:.1f}s",
    )


def test_criterion_06_disk_count_law(report):
    rng = random.Random(RANDOM_SEED)
    steps = violations = 0
    while steps < 500:
        s = random_chord_spine(rng, rng.randint(3, 8))
        out = run_algorithm1(s)
        if not out.success:
            continue
        r = out.result
        st = replay_placement(r.spine, {"hemispheres": r.to_json()["hemispheres"]})
        for rec in r.records:
            new = glue_cylinder(st, rec.candidate)
            if new.records[-1].cellular:
                steps += 1
                violations += new.disk_count - st.disk_count != rec.candidate.t - 2
            st = new
    ok = violations == 0
    assert report(6, ok, f"{steps} cellular glue steps, {violations} violations of the t-2 change")


def test_criterion_07_verifier(report):
    n_success = bad = 0
    for s in random_spines(RANDOM_SEED, 300, 2, 8):
        out = run_algorithm1(s)
        if not out.success:
            continue
        n_success += 1
        r = out.result
        faces = trace_faces(r.spine, r.state.label_map)
        darts = sorted(d for f in faces for d in f)
        chi = euler_characteristic(r.spine, faces, len(r.spine.fragments))
        fine = (
            darts == sorted(all_darts(r.spine))
            and chi == 2 - 2 * len(r.cylinders)
            and all(rec.orientable for rec in r.records)
            and verify(r).ok
        )
        bad += not fine
    ok = n_success > 0 and bad == 0
    assert report(7, ok, f"{n_success} successes checked, {bad} violations")


def test_criterion_08_oracle_equivalence(report):
    t0 = time.monotonic()
    corpus = oracle_corpus(size=200, max_outside=4)
    disagree = [str(s) for s in corpus if run_algorithm1(s).status != exhaustive_oracle(s).status]
    dt = time.monotonic() - t0
    ok = len(corpus) == 200 and not disagree and dt < 900
    assert report(8, ok, f"{len(corpus)} instances, {len(disagree)} disagreements, {dt:.1f}s")


def test_criterion_09_five_level_small_middle(report):
    rng = random.Random(RANDOM_SEED)
    got = bad = 0
    extras = set()
    while got < 40:
        s = random_chord_spine(rng, rng.randint(6, 11))
        if s.n_levels != 5 or not 1 <= len(s.fragments_at_level(3)) <= 2:
            continue
        got += 1
        r = five_level_embed(s)
        lv = {k: r.spine.fragments_at_level(k) for k in range(1, 6)}
        extra = len(r.cylinders)
        extras.add(extra)
        base = four_level_genus(r.spine, lv[1], lv[2], lv[4], lv[5])
        bad += not (verify(r).ok and extra in (1, 2) and r.genus == base + extra)
    ok = bad == 0
    assert report(9, ok, f"{got} instances, extra cylinders seen {sorted(extras)}, {bad} violations")


def test_criterion_10_algorithm2_round_trip(report):
    t0 = time.monotonic()
    corpus = tree_corpus(size=50)
    round_trip = chi_kept = 0
    for g in corpus:
        _, m = reduce_to_hamiltonian(g)
        round_trip += expand_graph(m) == g
        out = run_algorithm2(g)
        if out.success:
            e = out.expanded
            r = out.result
            chi_red = euler_characteristic(r.spine, r.faces, len(r.spine.fragments))
            chi_kept += verify_expanded(e).ok and e.euler_characteristic == chi_red
    dt = time.monotonic() - t0
    ok = round_trip == chi_kept == len(corpus) == 50 and dt < 120
    assert report(10, ok, f"round trips {round_trip}/50, Euler characteristic kept {chi_kept}/50, {dt:.1f}s")


def test_criterion_11_circularity(report):
    checked = violations = 0
    witness = None
    for s in random_spines(RANDOM_SEED, 300, 2, 8):
        out = run_algorithm1(s)
        if not out.success or any(rec.single_disk for rec in out.result.records):
            continue
        checked += 1
        r = out.result
        if not circularity(r.spine, r.state.label_map, r.faces):
            violations += 1
            witness = witness or str(r.spine)
    ok = checked > 0 and violations == 0
    assert report(
        11, ok, f"{checked} successes without single-disk glues, {violations} not circular (first: {witness})"
    )
