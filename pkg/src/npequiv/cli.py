"""``npequiv`` command line.

Exit codes: 0 equal or success, 1 distinguished or failed expectation,
2 usage or input error.  ``--format json`` output is sorted and versioned.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import DslSyntaxError, load, parse_raw
from .events import QuerySyntaxError, event_prob, extremal, parse_query, describe
from .model import Nplts, ValidationError, disjoint_union, export_dot, validate
from .relations import UnknownRelation, check, lookup
from .resolutions import BoundTooSmall, CyclicNeedsBound, enumerate_resolutions
from .sim import CtDisUnsupported, TooManyStates
from .spectrum import (
    CORPUS_DIR,
    SCHEMA_VERSION,
    SpectrumInconsistency,
    SpectrumOptions,
    fuzz,
    run_corpus,
    run_spectrum,
)
from .testing import PTE_VARIANTS, InvalidTest, check_pte, check_pte_search
from .verdict import show

GRAMMAR = """\
model file grammar:
  nplts NAME {
    designated STATE, STATE;      # optional
    success STATE;                # tests only
    state STATE { ACTION -> { STATE: PROB, STATE: PROB }; ... }
  }
probabilities are fractions (1/3) or decimals (0.25) and must sum to 1.
"""


class InputError(Exception):
    """Bad input files or selectors; reported with exit code 2."""


# ---------------------------------------------------------------- helpers


def _load(path: str) -> Nplts:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {path}")
    return load(p)


def _split(selector: str) -> tuple[str, str | None]:
    if ":" in selector:
        path, state = selector.rsplit(":", 1)
        return path, state or None
    return selector, None


def resolve_pair(left: str, right: str | None) -> tuple[Nplts, str, str]:
    """Turn ``file:state`` selectors into one model and two state ids.

    Selectors from different files are placed in a disjoint union.  A bare
    file stands for its designated states.
    """
    lpath, lstate = _split(left)
    if right is None:
        model = _load(lpath)
        if lstate is not None or len(model.designated) < 2:
            raise InputError("give two selectors, or one file with two designated states")
        return model, model.designated[0], model.designated[1]
    rpath, rstate = _split(right)
    lmodel = _load(lpath)
    if Path(lpath).resolve() == Path(rpath).resolve():
        model, inj1, inj2 = lmodel, None, None
        rmodel = lmodel
    else:
        rmodel = _load(rpath)
        model, inj1, inj2 = disjoint_union(lmodel, rmodel)
    picked = []
    for m, state, idx, inj in ((lmodel, lstate, 0, inj1), (rmodel, rstate, 1, inj2)):
        if state is None:
            if len(m.designated) <= idx:
                raise InputError(f"model '{m.name}' has no designated state #{idx + 1}")
            state = m.designated[idx]
        if not m.has_state(state):
            raise InputError(f"unknown state '{state}' in model '{m.name}'")
        picked.append(inj[state] if inj else state)
    return model, picked[0], picked[1]


def _single(selector: str) -> tuple[Nplts, str]:
    path, state = _split(selector)
    model = _load(path)
    if state is None:
        if not model.designated:
            raise InputError(f"model '{model.name}' has no designated state")
        state = model.designated[0]
    if not model.has_state(state):
        raise InputError(f"unknown state '{state}' in model '{model.name}'")
    return model, state


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "format", "text") == "json":
        payload = {"schema_version": SCHEMA_VERSION, **payload}
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _verdict_text(v) -> str:
    line = f"{v.relation}: {v.status}"
    if v.witness is not None:
        line += f"\n  witness: {v.witness.description}"
        if v.witness.test is not None:
            from .dsl import serialize

            line += "\n  test:\n" + "".join(f"    {x}\n" for x in serialize(v.witness.test).splitlines())
    if v.note:
        line += f"\n  note: {v.note}"
    return line.rstrip("\n")


# ------------------------------------------------------------ subcommands


def cmd_validate(args) -> int:
    bad = 0
    results = []
    for path in args.files:
        p = Path(path)
        if not p.exists():
            raise InputError(f"no such file: {path}")
        try:
            model = validate(parse_raw(p.read_text(encoding="utf-8")))
        except ValidationError as exc:
            bad += 1
            results.append({"file": path, "ok": False, "issues": [str(i) for i in exc.issues]})
            continue
        results.append({"file": path, "ok": True, "name": model.name, "states": len(model.states),
                        "transitions": len(model.transitions), "designated": list(model.designated)})
    lines = []
    for r in results:
        if r["ok"]:
            lines.append(f"{r['file']}: ok ({r['states']} states, {r['transitions']} transitions)")
        else:
            lines.append(f"{r['file']}: invalid")
            lines.extend(f"  {i}" for i in r["issues"])
    _emit(args, {"results": results}, "\n".join(lines))
    return 2 if bad else 0


def cmd_resolutions(args) -> int:
    model, state = _single(args.selector)
    alpha = tuple(args.alpha.split()) if args.alpha is not None else None
    maximal = args.maximal or args.kind == "max"
    kind = "alpha" if alpha is not None else ("max" if maximal else "all")
    rs = enumerate_resolutions(model, state, kind, args.depth, alpha)
    shown = list(rs)[: args.limit] if args.limit else list(rs)
    if args.dot:
        print("".join(export_dot(r.tree) for r in shown), end="")
        return 0
    items = [{"index": i, "maximal": r.is_maximal(model), "tree": repr(r.root_node)} for i, r in enumerate(shown)]
    lines = [f"{len(rs)} resolution(s) of {state} ({kind})"]
    lines += [f"  [{x['index']}]{' max' if x['maximal'] else ''} {x['tree']}" for x in items]
    if len(shown) < len(rs):
        lines.append(f"  ... {len(rs) - len(shown)} more")
    _emit(args, {"state": state, "kind": kind, "count": len(rs), "resolutions": items}, "\n".join(lines))
    return 0


def cmd_prob(args) -> int:
    model, state = _single(args.selector)
    query = parse_query(args.query)
    rs = enumerate_resolutions(model, state, "max" if args.maximal or args.kind == "max" else "all", args.depth)
    values = [event_prob(r, model, query).value for r in rs]
    env = extremal(model, state, query)
    if args.resolution is not None:
        if args.resolution >= len(values):
            raise InputError(f"resolution index {args.resolution} out of range (0..{len(values) - 1})")
        indices = [args.resolution]
    else:
        indices = list(range(min(len(values), args.limit) if args.limit else len(values)))
    lines = [f"{describe(query)} from {state}"]
    for i in indices:
        lines.append(f"  resolution {i}: {show(values[i])}")
    if env.nonempty:
        lines.append(f"  restricted envelope: min {show(env.low)}, max {show(env.high)}")
    else:
        lines.append("  restricted resolution set is empty")
    payload = {
        "state": state,
        "query": str(query),
        "values": [str(values[i]) for i in indices] if args.resolution is not None else [str(v) for v in values],
        "envelope": {"nonempty": env.nonempty, "min": str(env.low), "max": str(env.high)},
    }
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_check(args) -> int:
    model, s1, s2 = resolve_pair(args.left, args.right)
    info = lookup(args.equiv)
    suite = [_load(p) for p in args.suite] if args.suite else None
    verdict = check(info.id, model, s1, s2, ct=args.ct, depth=args.depth, suite=suite,
                    test_depth=args.test_depth, test_branch=args.branch)
    _emit(args, {"pair": [s1, s2], "result": verdict.to_json(with_relation=args.show_relation)},
          _verdict_text(verdict))
    return 0 if verdict.equivalent else 1


def cmd_test_check(args) -> int:
    model, s1, s2 = resolve_pair(args.left, args.right)
    if args.suite:
        verdict = check_pte(args.variant, model, s1, s2, [_load(p) for p in args.suite])
    else:
        verdict = check_pte_search(args.variant, model, s1, s2, args.depth, args.branch, args.initial_tau)
    _emit(args, {"pair": [s1, s2], "result": verdict.to_json()}, _verdict_text(verdict))
    return 0 if verdict.equivalent else 1


def cmd_spectrum(args) -> int:
    model, s1, s2 = resolve_pair(args.left, args.right)
    options = SpectrumOptions(testing=not args.no_testing, ct=not args.no_ct, depth=args.depth,
                              test_depth=args.test_depth, test_branch=args.branch, strict=not args.lenient)
    report = run_spectrum(model, s1, s2, options)
    lines = [f"spectrum for {s1} vs {s2}"]
    for rid, v in report.verdicts.items():
        lines.append(f"  {rid:<20} {v.status}")
    for rid, msg in report.errors.items():
        lines.append(f"  {rid:<20} error: {msg}")
    for imp, _, _ in report.broken:
        lines.append(f"  VIOLATION {imp.premise} => {imp.conclusion}")
    payload = report.to_json()
    payload.pop("schema_version")
    _emit(args, payload, "\n".join(lines))
    return 0 if all(v.equivalent for v in report.verdicts.values()) else 1


def cmd_corpus(args) -> int:
    directory = Path(args.dir) if args.dir else CORPUS_DIR
    rows = run_corpus(directory, args.filter, args.test_depth, args.branch)
    failed = [r for r in rows if not r.ok]
    lines = [f"{'PASS' if r.ok else 'FAIL'} {r.entry} {r.relation}: expected {r.expected}, got {r.got}"
             for r in rows]
    lines.append(f"{len(rows) - len(failed)}/{len(rows)} expectations hold")
    payload = {"rows": [{"entry": r.entry, "relation": r.relation, "expected": r.expected, "got": r.got,
                         "ok": r.ok, "witness": r.witness} for r in rows],
               "passed": len(rows) - len(failed), "total": len(rows)}
    _emit(args, payload, "\n".join(lines))
    return 1 if failed else 0


def cmd_fuzz(args) -> int:
    def progress(seed):
        if seed % 50 == 49:
            print(f"fuzz: {seed + 1}/{args.seeds}", file=sys.stderr)

    seeds = range(args.seed, args.seed + args.seeds)
    found = fuzz(seeds, args.states, Path(args.dump) if args.dump else None, progress)
    lines = [f"{args.seeds} random pairs, {len(found)} violation(s)"]
    for c in found:
        lines.append(f"seed {c.seed}: {c.label()}")
        lines.extend(f"  {x}" for x in c.dsl.splitlines())
    payload = {"seeds": args.seeds, "states": args.states,
               "violations": [{"seed": c.seed, "what": c.label(), "model": c.dsl} for c in found]}
    _emit(args, payload, "\n".join(lines))
    return 1 if found else 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npequiv", description="Equivalence checking for nondeterministic "
                                     "and probabilistic labelled transition systems.",
                                     epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, bounds=True):
        p.add_argument("--format", choices=("text", "json"), default="text")
        if bounds:
            p.add_argument("--depth", type=_positive, default=None, help="resolution depth bound (needed for cycles)")

    p = sub.add_parser("validate", help="parse and validate model files")
    p.add_argument("files", nargs="+")
    common(p, bounds=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("resolutions", help="list deterministic-scheduler resolutions of a state")
    p.add_argument("selector", help="file:state")
    p.add_argument("--max", dest="maximal", action="store_true", help="maximal resolutions only")
    p.add_argument("--kind", choices=("all", "max"), default="all")
    p.add_argument("--alpha", help="restrict to a trace, e.g. 'a b'")
    p.add_argument("--limit", type=int, default=50, help="list at most this many (0 = all)")
    p.add_argument("--dot", action="store_true", help="print the resolution trees as DOT")
    common(p)
    p.set_defaults(func=cmd_resolutions)

    p = sub.add_parser("prob", help="event probability per resolution and its extremes")
    p.add_argument("selector", help="file:state")
    p.add_argument("query", help="e.g. 'trace a b', 'ctrace a', 'fpair a {b}', 'rtrace (a,{b})'")
    p.add_argument("--max", dest="maximal", action="store_true")
    p.add_argument("--kind", choices=("all", "max"), default="all")
    p.add_argument("--resolution", type=int, help="report only this resolution index")
    p.add_argument("--limit", type=int, default=50)
    common(p)
    p.set_defaults(func=cmd_prob)

    def pair(p):
        p.add_argument("left", help="file:state, or a file whose two designated states are compared")
        p.add_argument("right", nargs="?", help="file:state")

    p = sub.add_parser("check", help="decide one relation for a pair of states")
    p.add_argument("--equiv", required=True, help="relation id, e.g. pctr-supinf, pb, pte-tbt")
    p.add_argument("--ct", action="store_true", help="randomized schedulers")
    p.add_argument("--suite", nargs="*", help="test files for testing relations")
    p.add_argument("--test-depth", type=_positive, default=3)
    p.add_argument("--branch", type=_positive, default=3)
    p.add_argument("--show-relation", action="store_true", help="include the computed relation in JSON")
    pair(p)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("test-check", help="testing equivalence with a suite or a bounded test search")
    p.add_argument("--variant", default="supinf", help=", ".join(PTE_VARIANTS) + " or forall-exists")
    p.add_argument("--suite", nargs="*")
    p.add_argument("--search", action="store_true", help="search for a test (default without --suite)")
    p.add_argument("--depth", type=_positive, default=3)
    p.add_argument("--branch", type=_positive, default=3)
    p.add_argument("--initial-tau", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    pair(p)
    p.set_defaults(func=cmd_test_check)

    p = sub.add_parser("spectrum", help="every relation for a pair, checked against the implications")
    pair(p)
    p.add_argument("--json", action="store_const", const="json", dest="format")
    p.add_argument("--no-testing", action="store_true")
    p.add_argument("--no-ct", action="store_true")
    p.add_argument("--test-depth", type=_positive, default=2)
    p.add_argument("--branch", type=_positive, default=2)
    p.add_argument("--lenient", action="store_true", help="report implication violations instead of aborting")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("corpus", help="bundled corpus of distinguishing examples")
    csub = p.add_subparsers(dest="corpus_command", required=True)
    r = csub.add_parser("run", help="check every recorded expectation")
    r.add_argument("--filter", help="only entries whose id contains this text")
    r.add_argument("--dir", help="corpus directory with manifest.json")
    r.add_argument("--test-depth", type=_positive, default=3)
    r.add_argument("--branch", type=_positive, default=3)
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.set_defaults(func=cmd_corpus)

    p = sub.add_parser("fuzz", help="random pairs against the implication table")
    p.add_argument("--seeds", type=_positive, default=500)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--states", type=_positive, default=6)
    p.add_argument("--dump", help="directory for shrunk counterexamples")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DslSyntaxError as exc:
        print(f"error: {exc}\n\n{GRAMMAR}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, UnknownRelation, QuerySyntaxError, InvalidTest, CyclicNeedsBound, BoundTooSmall,
            TooManyStates, CtDisUnsupported, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpectrumInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
