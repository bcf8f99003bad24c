"""Command-line front end.

Exit codes: 0 success, 1 failure of the search, 2 invalid input, 3 timeout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .core import SpineList, SpineListError, conflict_graph, parse_spine_list
from .corpus import DEFAULT_SEED, oracle_corpus
from .general import (
    ExpansionError,
    GeneralLeveledGraph,
    InvalidGraph,
    PreconditionError,
    conflict_edges,
    run_algorithm2,
)
from .search import (
    FAILURE,
    SUCCESS,
    TIMED_OUT,
    CapExceeded,
    SearchConfig,
    SearchOutcome,
    exhaustive_oracle,
    run_algorithm1,
)
from .surface import (
    EmbeddingResult,
    GlueError,
    euler_characteristic,
    face_edges,
    face_json,
    replay_placement,
)

EXIT = {SUCCESS: 0, FAILURE: 1, TIMED_OUT: 3}
EXIT_INVALID = 2
REPORT_SCHEMA = "leveled-surface/run-report/1"

log = logging.getLogger("leveled_surface")


class InputError(Exception):
    pass


def load_input(path: str) -> SpineList | GeneralLeveledGraph:
    """A spine list starts with "(", a general graph JSON with "{"."""
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as e:
        raise InputError(str(e)) from e
    head = text.lstrip()[:1]
    try:
        if head == "(":
            return parse_spine_list(text)
        if head == "{":
            return GeneralLeveledGraph.from_json(text)
    except (SpineListError, InvalidGraph, json.JSONDecodeError) as e:
        raise InputError(str(e)) from e
    raise InputError("input must start with '(' (spine list) or '{' (graph JSON)")


def digest(obj: SpineList | GeneralLeveledGraph) -> str:
    text = str(obj) if isinstance(obj, SpineList) else json.dumps(obj.to_json(), sort_keys=True)
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def config_from_args(a: argparse.Namespace) -> SearchConfig:
    return SearchConfig(
        base_level=a.base_level,
        max_fragments_outside_base=a.max_outside_base,
        time_budget=a.timeout_secs,
        parallel=a.parallel,
        try_cyclic_shifts=a.cyclic_shifts,
    )


def config_json(cfg: SearchConfig) -> dict:
    return {
        "base_level": cfg.base_level if cfg.base_level is not None else "all",
        "max_fragments_outside_base": cfg.max_fragments_outside_base,
        "time_budget": cfg.time_budget,
        "parallel": cfg.parallel,
        "try_cyclic_shifts": cfg.try_cyclic_shifts,
    }


def run_report(command: str, obj, cfg: SearchConfig | None, outcome: SearchOutcome | None, **extra) -> dict:
    rep = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "input": {
            "kind": "spine_list" if isinstance(obj, SpineList) else "general_graph",
            "digest": digest(obj),
        },
        "config": config_json(cfg) if cfg else None,
        "outcome": outcome.to_json(timings=False) if outcome else None,
        "timings": {"elapsed": outcome.stats.get("elapsed", 0.0)} if outcome else {},
        "discards": {str(k): v for k, v in sorted(outcome.explored.items())} if outcome else {},
    }
    rep.update(extra)
    return rep


def _emit(data: dict, out: str | None):
    text = json.dumps(data, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _search(obj, cfg: SearchConfig) -> SearchOutcome:
    if isinstance(obj, SpineList):
        return run_algorithm1(obj, cfg)
    return run_algorithm2(obj, cfg)


# --------------------------------------------------------------------------
# commands


def cmd_parse(a) -> int:
    obj = load_input(a.input)
    if isinstance(obj, SpineList):
        print(f"canonical: {obj}")
        print(f"levels: {obj.n_levels}  fragments: {len(obj.fragments)}")
        print("fragment  level  positions")
        for f in obj.fragments:
            print(f"{f.label:>8}  {f.level:>5}  {f.positions[0]},{f.positions[1]}")
        edges = sorted(conflict_graph(obj).edges)
        print("conflicts: " + (" ".join(f"{obj.label(i)}-{obj.label(j)}" for i, j in edges) or "none"))
        data = {
            "canonical": str(obj),
            "levels": obj.n_levels,
            "fragments": [{"label": f.label, "level": f.level, "positions": list(f.positions)} for f in obj.fragments],
            "conflicts": [[obj.label(i), obj.label(j)] for i, j in edges],
        }
    else:
        print(f"spine: {len(obj.spine)} vertices  fragments: {len(obj.fragments)}")
        for k, f in enumerate(obj.fragments):
            print(f"fragment {k}: level {f.level}, attachments {list(f.attachments)}, {len(f.edges)} edges")
        edges = sorted(conflict_edges(obj))
        print("conflicts: " + (" ".join(f"{i}-{j}" for i, j in edges) or "none"))
        data = {"graph": obj.to_json(), "conflicts": [list(e) for e in edges]}
    if a.out:
        _emit(run_report("parse", obj, None, None, parse=data), a.out)
    return 0


def cmd_search(a) -> int:
    obj = load_input(a.input)
    cfg = config_from_args(a)
    out = _search(obj, cfg)
    extra = {}
    if a.oracle:
        if not isinstance(obj, SpineList):
            raise InputError("--oracle needs a spine list")
        ocfg = SearchConfig(base_level=cfg.base_level, time_budget=cfg.time_budget)
        ref = exhaustive_oracle(obj, ocfg)
        extra["oracle"] = {"status": ref.status, "agree": ref.status == out.status}
        print(f"oracle: {ref.status} ({'agree' if ref.status == out.status else 'DISAGREE'})", file=sys.stderr)
    report = run_report("search", obj, cfg, out, **extra)
    genus = f" genus={out.result.genus}" if out.result else ""
    print(f"{out.status}{genus}", file=sys.stderr)
    _emit(report, a.out)
    if a.emit_dot and out.result:
        print(_faces_dot(out.result) if a.emit_dot == "faces" else _conflict_dot(obj), file=sys.stderr)
    return EXIT[out.status]


def _load_placement(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"placement: {e}") from e
    # accept a run report as well as a bare placement
    if "outcome" in data:
        data = (data.get("outcome") or {}).get("result") or {}
    if "hemispheres" not in data:
        raise InputError("placement has no hemispheres")
    return data


def cmd_faces(a) -> int:
    obj = load_input(a.input)
    if not isinstance(obj, SpineList):
        raise InputError("faces needs a spine list")
    data = _load_placement(a.placement)
    if data.get("spine") and parse_spine_list(data["spine"]) != obj:
        raise InputError("placement was made for a different spine list")
    try:
        st = replay_placement(obj, data)
    except (GlueError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"inconsistent placement: {e}") from e
    res = EmbeddingResult(obj, tuple(data["base_levels"]) if data.get("base_levels") else None, st)
    labels = st.label_map
    for k, face in enumerate(st.faces):
        walk = " ".join(f"{p}{d}" for p, d in face)
        print(f"face {k}: {walk}")
    chi = euler_characteristic(obj, st.faces, len(st.placed_fragments))
    print(f"euler={chi} genus={st.genus} cellular={str(res.cellular).lower()} circular={str(res.circular).lower()}")
    if a.out:
        _emit(
            {
                "faces": [face_json(f) for f in st.faces],
                "euler_characteristic": chi,
                "genus": st.genus,
                "cellular": res.cellular,
                "circular": res.circular,
                "edges_per_face": [len(face_edges(obj, labels, f)) for f in st.faces],
            },
            a.out,
        )
    return 0


def _conflict_dot(obj) -> str:
    lines = ["graph conflict {"]
    if isinstance(obj, SpineList):
        for f in obj.fragments:
            lines.append(f'  f{f.id} [label="{f.label}"];')
        for i, j in sorted(conflict_graph(obj).edges):
            lines.append(f"  f{i} -- f{j};")
    else:
        for k, f in enumerate(obj.fragments):
            lines.append(f'  f{k} [label="{k} (level {f.level})"];')
        for i, j in sorted(conflict_edges(obj)):
            lines.append(f"  f{i} -- f{j};")
    lines.append("}")
    return "\n".join(lines)


def _faces_dot(res: EmbeddingResult) -> str:
    """Face adjacency: one node per face, one edge per graph edge shared by two faces."""
    s, st = res.spine, res.state
    where: dict = {}
    for k, face in enumerate(st.faces):
        for _, e in face_edges(s, st.label_map, face):
            where.setdefault(e, []).append(k)
    lines = ["graph faces {"]
    for k in range(len(st.faces)):
        lines.append(f"  F{k};")
    for e, ks in sorted(where.items()):
        a, b = sorted(ks)
        lines.append(f'  F{a} -- F{b} [label="{e[0]}{e[1]}"];')
    lines.append("}")
    return "\n".join(lines)


def cmd_emit_dot(a) -> int:
    obj = load_input(a.input)
    if a.emit_dot == "conflict":
        print(_conflict_dot(obj))
        return 0
    if not isinstance(obj, SpineList):
        raise InputError("face adjacency needs a spine list")
    if a.placement:
        data = _load_placement(a.placement)
        try:
            st = replay_placement(obj, data)
        except (GlueError, ValueError, KeyError, TypeError) as e:
            raise InputError(f"inconsistent placement: {e}") from e
        res = EmbeddingResult(obj, None, st)
    else:
        out = run_algorithm1(obj, config_from_args(a))
        if not out.success:
            print(f"search: {out.status}", file=sys.stderr)
            return EXIT[out.status]
        res = out.result
    print(_faces_dot(res))
    return 0


def cmd_selftest(a) -> int:
    """Algorithm against the exhaustive oracle on a seeded corpus."""
    corpus = oracle_corpus(a.seed, a.count)
    bad = 0
    for k, s in enumerate(corpus):
        x, y = run_algorithm1(s).status, exhaustive_oracle(s).status
        if x != y:
            bad += 1
            print(f"disagreement on {s}: algorithm {x}, oracle {y}")
    print(f"seed={a.seed} instances={len(corpus)} disagreements={bad}")
    return 0 if bad == 0 else 1


# --------------------------------------------------------------------------
# argument parsing


def _search_flags(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--base-level", type=int, default=None, help="search only this base level c")
    g.add_argument(
        "--all-base-levels", action="store_true", help="try every base level (the default)"
    )
    p.add_argument("--cyclic-shifts", action="store_true", help="also search cyclic level shifts")
    p.add_argument("--max-outside-base", type=int, default=12, help="cap on fragments off the base levels")
    p.add_argument("--timeout-secs", type=int, default=None, help="wall-clock budget")
    p.add_argument("--parallel", action="store_true", help="split the top of the search over processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leveled-surface", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="canonical form, fragments and conflicts")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("search", help="search for a cellular consecutive embedding")
    p.add_argument("input")
    _search_flags(p)
    p.add_argument("--oracle", action="store_true", help="compare with the exhaustive oracle")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--emit-dot", choices=("conflict", "faces"), help="graph description on stderr")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("faces", help="trace faces of a placement")
    p.add_argument("input")
    p.add_argument("placement", help="placement JSON or a search report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_faces)

    p = sub.add_parser("emit-dot", help="graph description of conflicts or face adjacency")
    p.add_argument("input")
    p.add_argument("--emit-dot", choices=("conflict", "faces"), default="conflict")
    p.add_argument("--placement", help="placement to draw instead of searching")
    _search_flags(p)
    p.set_defaults(func=cmd_emit_dot)

    p = sub.add_parser("selftest", help="algorithm against the oracle on a seeded corpus")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--count", type=int, default=50)
    p.set_defaults(func=cmd_selftest)
    return ap


def _setup_logging():
    level = os.environ.get("LEVELED_SURFACE_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    a = build_parser().parse_args(argv)
    try:
        return a.func(a)
    except (InputError, SpineListError, InvalidGraph, CapExceeded, PreconditionError, ExpansionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as e:  # bad config values
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
