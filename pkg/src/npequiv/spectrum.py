"""Full-spectrum runner, bundled corpus and the random-model implication harness."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from .dsl import load, serialize
from .events import FAMILIES
from .model import Nplts, build
from .relations import RELATIONS, check
from .resolutions import count_resolutions
from .sim import SIM_FAMILIES, CtDisUnsupported
from .trace_equiv import SCHEMAS, TraceAnalyzer, relation_id
from .verdict import Verdict

SCHEMA_VERSION = 1
CORPUS_DIR = Path(__file__).parent / "corpus"


class SpectrumInconsistency(AssertionError):
    """Verdicts contradict a proved implication: an implementation bug."""


# ----------------------------------------------------------- implications


@dataclass(frozen=True)
class Implication:
    """``premise`` equal implies ``conclusion`` equal."""

    premise: str
    conclusion: str
    reason: str


def _implications() -> list[Implication]:
    out: list[Implication] = []

    def add(a, b, reason):
        out.append(Implication(a, b, reason))

    for fam in FAMILIES:
        add(relation_id(fam, "dis"), relation_id(fam, "tbt"), "schema chain")
        add(relation_id(fam, "tbt"), relation_id(fam, "supinf"), "schema chain")
    for schema in SCHEMAS:
        add(relation_id("f", schema), relation_id("ctr", schema), "family chain")
        add(relation_id("ctr", schema), relation_id("tr", schema), "family chain")
        add(relation_id("ftr", schema), relation_id("f", schema), "family chain")
    for a, b in (("rtr", "ftr"), ("r", "f")):
        add(relation_id(a, "dis"), relation_id(b, "dis"), "fully matching coincidence")
        add(relation_id(b, "dis"), relation_id(a, "dis"), "fully matching coincidence")
    for fam in SIM_FAMILIES:
        add(f"{fam}-dis", fam, "simulation variants")
        add(fam, f"{fam}-sup", "simulation variants")
        add(f"{fam}-sup", fam, "simulation variants")
    add("pb-dis", "pb", "bisimulation variants")
    add("pb", "pb-supinf", "bisimulation variants")
    for sigma, bis in (("-dis", "pb-dis"), ("", "pb"), ("-sup", "pb-supinf")):
        add(bis, f"prs{sigma}", "bisimulation below ready simulation")
        add(f"prs{sigma}", f"pfs{sigma}", "ready and failure simulation coincide")
        add(f"pfs{sigma}", f"prs{sigma}", "ready and failure simulation coincide")
        add(f"pfs{sigma}", f"pcs{sigma}", "simulation chain")
        add(f"pcs{sigma}", f"ps{sigma}", "simulation chain")
    add("ps-dis", "ptr-dis", "simulation to trace bridge")
    add("pcs-dis", "pctr-dis", "simulation to trace bridge")
    add("prs-dis", "pte-tbt-dis", "ready simulation below testing")
    # randomized schedulers
    for rid in RELATIONS:
        if rid.startswith("pte-"):
            continue
        add(rid, rid + "^ct", "randomized schedulers identify more")
    add("pb^ct", "pb-supinf", "randomized collapse")
    add("pb-supinf", "pb^ct", "randomized collapse")
    add("pb-dis^ct", "pb^ct", "randomized schema chain")
    for fam in SIM_FAMILIES:
        add(f"{fam}^ct", f"{fam}-sup", "randomized collapse")
        add(f"{fam}-sup", f"{fam}^ct", "randomized collapse")
        add(f"{fam}-dis^ct", f"{fam}^ct", "randomized schema chain")
    for fam in FAMILIES:
        base = relation_id(fam, "tbt")
        add(base + "^ct", relation_id(fam, "supinf"), "randomized collapse")
        add(relation_id(fam, "supinf"), base + "^ct", "randomized collapse")
    return out


IMPLICATIONS = _implications()

# Testing verdicts come from the same bounded search, so a test separating
# the coarser variant also separates the finer one.
BOUNDED_IMPLICATIONS = [
    Implication("pte-fe", "pte-supinf", "success-probability sets determine the envelope"),
    Implication("pte-tbt-dis", "pte-fe", "success maps determine their totals"),
    Implication("pte-tbt-dis", "pte-tbt", "schema chain"),
    Implication("pte-tbt", "pte-tbt-supinf", "schema chain"),
]


def violations(verdicts: dict[str, Verdict]) -> list[tuple[Implication, Verdict, Verdict]]:
    found = []
    for imp in IMPLICATIONS:
        a, b = verdicts.get(imp.premise), verdicts.get(imp.conclusion)
        if a is None or b is None:
            continue
        if a.equivalent and not a.bounded and not b.equivalent:
            found.append((imp, a, b))
    for imp in BOUNDED_IMPLICATIONS:
        a, b = verdicts.get(imp.premise), verdicts.get(imp.conclusion)
        if a is None or b is None:
            continue
        if a.equivalent and not b.equivalent:
            found.append((imp, a, b))
    return found


# ---------------------------------------------------------------- spectrum


@dataclass
class SpectrumOptions:
    testing: bool = True
    ct: bool = True
    depth: int | None = None
    test_depth: int = 2
    test_branch: int = 2
    strict: bool = True
    only: tuple[str, ...] | None = None


@dataclass
class SpectrumReport:
    s1: str
    s2: str
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    exercised: list[Implication] = field(default_factory=list)
    broken: list[tuple[Implication, Verdict, Verdict]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "pair": [self.s1, self.s2],
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "errors": dict(self.errors),
            "implications_exercised": [f"{i.premise} => {i.conclusion}" for i in self.exercised],
        }


def relation_ids(options: SpectrumOptions) -> list[str]:
    ids = []
    for rid, info in RELATIONS.items():
        if info.kind == "testing" and not options.testing:
            continue
        ids.append(rid)
    if options.ct:
        for rid, info in RELATIONS.items():
            if info.kind == "testing":
                continue
            if info.kind == "trace" and info.schema == "dis":
                continue
            ids.append(rid + "^ct")
    if options.only:
        ids = [r for r in ids if r in options.only]
    return ids


def run_spectrum(model: Nplts, s1: str, s2: str, options: SpectrumOptions | None = None) -> SpectrumReport:
    options = options or SpectrumOptions()
    report = SpectrumReport(s1, s2)
    analyzer = None
    for rid in relation_ids(options):
        base, ct = (rid[:-3], True) if rid.endswith("^ct") else (rid, False)
        try:
            if RELATIONS[base].kind == "trace" and analyzer is None:
                analyzer = TraceAnalyzer(model, s1, s2, options.depth)
            report.verdicts[rid] = check(base, model, s1, s2, ct=ct, depth=options.depth,
                                         test_depth=options.test_depth, test_branch=options.test_branch,
                                         analyzer=analyzer)
        except CtDisUnsupported as exc:
            report.errors[rid] = f"unsupported: {exc}"
        except Exception as exc:  # aggregated, other checks continue
            report.errors[rid] = f"{type(exc).__name__}: {exc}"
    for imp in IMPLICATIONS + BOUNDED_IMPLICATIONS:
        if imp.premise in report.verdicts and imp.conclusion in report.verdicts:
            report.exercised.append(imp)
    report.broken = violations(report.verdicts)
    if report.broken and options.strict:
        imp, a, b = report.broken[0]
        raise SpectrumInconsistency(
            f"{imp.premise} holds but {imp.conclusion} fails ({imp.reason}) for {s1}, {s2}")
    return report


# ------------------------------------------------------------------ corpus


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    model_file: Path
    s1: str
    s2: str
    expected: dict
    test_file: Path | None = None
    description: str = ""
    test_bounds: tuple[int, int] | None = None

    def model(self) -> Nplts:
        return load(self.model_file)

    def suite(self) -> list[Nplts] | None:
        return [load(self.test_file)] if self.test_file else None


def load_corpus(directory: Path | str = CORPUS_DIR) -> list[CorpusEntry]:
    directory = Path(directory)
    manifest = directory / "manifest.json"
    if not manifest.exists():
        return []
    data = json.loads(manifest.read_text(encoding="utf-8"))
    entries = []
    for slug, item in data["entries"].items():
        entries.append(CorpusEntry(
            slug,
            directory / item["model"],
            item.get("s1", "s1"),
            item.get("s2", "s2"),
            dict(item["expected"]),
            directory / item["test"] if item.get("test") else None,
            item.get("description", ""),
            tuple(item["test_bounds"]) if item.get("test_bounds") else None,
        ))
    return entries


@dataclass(frozen=True)
class CorpusRow:
    entry: str
    relation: str
    expected: str
    got: str
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.expected == self.got


def run_corpus(directory: Path | str = CORPUS_DIR, filter: str | None = None,
               test_depth: int = 3, test_branch: int = 3,
               kinds: tuple[str, ...] | None = None) -> list[CorpusRow]:
    """Check every expectation; testing relations with a bundled test use it
    as the suite, the others use the bounded search (entry bounds win)."""
    rows = []
    for entry in load_corpus(directory):
        if filter and filter not in entry.id:
            continue
        model = entry.model()
        analyzer = None
        for rid, expected in sorted(entry.expected.items()):
            base, ct = (rid[:-3], True) if rid.endswith("^ct") else (rid, False)
            if kinds is not None and RELATIONS[base].kind not in kinds:
                continue
            suite = entry.suite() if RELATIONS[base].kind == "testing" else None
            try:
                if RELATIONS[base].kind == "trace" and analyzer is None:
                    analyzer = TraceAnalyzer(model, entry.s1, entry.s2)
                depth, branch = entry.test_bounds or (test_depth, test_branch)
                verdict = check(base, model, entry.s1, entry.s2, ct=ct, suite=suite,
                                test_depth=depth, test_branch=branch, analyzer=analyzer)
                got = verdict.status
                witness = verdict.witness.description if verdict.witness else verdict.note
            except Exception as exc:
                got, witness = "error", f"{type(exc).__name__}: {exc}"
            rows.append(CorpusRow(entry.id, rid, expected, got, witness))
    return rows


# ------------------------------------------------------------ random models


MAX_DENOMINATOR = 12


def _random_prob_split(rng: random.Random, parts: int) -> list[Fraction]:
    if parts == 1:
        return [Fraction(1)]
    den = rng.randint(2, MAX_DENOMINATOR)
    num = rng.randint(1, den - 1)
    return [Fraction(num, den), 1 - Fraction(num, den)]


def _random_target(rng: random.Random, candidates: list[str], max_support: int = 2) -> dict:
    size = min(len(candidates), rng.randint(1, max_support))
    chosen = rng.sample(candidates, size)
    return dict(zip(chosen, _random_prob_split(rng, size)))


def random_model(seed: int, max_states: int = 6, max_branch: int = 2, acyclic: bool = True,
                 actions: tuple[str, ...] = ("a", "b", "c")) -> Nplts:
    """Reproducible random model; acyclic models only point to later states."""
    if max_states < 1 or max_branch < 1:
        raise ValueError("bounds must be at least 1")
    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    names = [f"s{i}" for i in range(n)]
    spec = {}
    for i, s in enumerate(names):
        later = names[i + 1:] if acyclic else names
        transitions = []
        if later:
            for _ in range(rng.randint(0, max_branch)):
                transitions.append((rng.choice(actions), _random_target(rng, later)))
        spec[s] = transitions
    return build(f"random{seed}", spec, designated=names[:2])


def _mutate(rng: random.Random, transitions: list, shared: list[str], actions) -> list:
    out = [(a, dict(d)) for a, d in transitions]
    choice = rng.randrange(6)
    if choice == 0 and out:  # duplicate-free convex combination of two same-labelled transitions
        a, d = rng.choice(out)
        mates = [(b, e) for b, e in out if b == a and e != d]
        if mates:
            _, e = rng.choice(mates)
            mix: dict = {}
            for k, v in d.items():
                mix[k] = mix.get(k, Fraction(0)) + v / 2
            for k, v in e.items():
                mix[k] = mix.get(k, Fraction(0)) + v / 2
            if all(v.denominator <= MAX_DENOMINATOR for v in mix.values()):
                out.append((a, mix))
    elif choice == 1 and out:
        out.pop(rng.randrange(len(out)))
    elif choice == 2 and out:
        i = rng.randrange(len(out))
        a, d = out[i]
        if len(d) == 2:
            (k1, v1), (k2, v2) = sorted(d.items())
            out[i] = (a, {k1: v2, k2: v1})
    elif choice == 3 and out:
        i = rng.randrange(len(out))
        out[i] = (rng.choice(actions), out[i][1])
    elif choice == 4 and shared:
        out.append((rng.choice(actions), _random_target(rng, shared)))
    return out


def random_pair(seed: int, max_states: int = 6, cap: int = 500,
                actions: tuple[str, ...] = ("a", "b", "c")) -> Nplts:
    """Acyclic model whose designated states ``s0`` and ``s1`` share the
    substructure ``s2..``; ``s1`` is a mutation of ``s0``."""
    attempt = 0
    while True:
        rng = random.Random(seed * 7919 + attempt)
        attempt += 1
        n = rng.randint(3, max(3, max_states))
        shared = [f"s{i}" for i in range(2, n)]
        spec: dict = {}
        for i, s in enumerate(shared):
            later = shared[i + 1:]
            trs = []
            if later:
                for _ in range(rng.randint(0, 2)):
                    trs.append((rng.choice(actions), _random_target(rng, later)))
            spec[s] = trs
        base = [(rng.choice(actions), _random_target(rng, shared)) for _ in range(rng.randint(1, 2))]
        mutated = _mutate(rng, base, shared, actions)
        if rng.randrange(2) == 0:
            mutated = _mutate(rng, mutated, shared, actions)
        model = build(f"pair{seed}", {"s0": base, "s1": mutated, **spec}, designated=["s0", "s1"])
        if max(count_resolutions(model, "s0"), count_resolutions(model, "s1")) <= cap or attempt > 50:
            return model


# ------------------------------------------------------------------- fuzz


@dataclass
class Counterexample:
    seed: int
    implication: Implication | None
    model: Nplts
    dsl: str
    error: str = ""

    def label(self) -> str:
        if self.implication is None:
            return f"error: {self.error}"
        return f"{self.implication.premise} => {self.implication.conclusion}"


def _violates(model: Nplts, imp: Implication, s1: str = "s0", s2: str = "s1") -> bool:
    opts = SpectrumOptions(testing=False, strict=False, only=(imp.premise, imp.conclusion))
    try:
        report = run_spectrum(model, s1, s2, opts)
    except Exception:
        return False
    return any(i == imp for i, _, _ in report.broken)


def shrink(model: Nplts, still_fails: Callable[[Nplts], bool]) -> Nplts:
    """Greedy: drop transitions, then unreachable or removable states."""
    current = model
    changed = True
    while changed:
        changed = False
        for i in range(len(current.transitions)):
            trs = current.transitions[:i] + current.transitions[i + 1:]
            candidate = Nplts(current.name, current.states, trs, current.designated)
            if still_fails(candidate):
                current, changed = candidate, True
                break
        if changed:
            continue
        for s in current.states:
            if s in current.designated:
                continue
            if any(s in t.target.support for t in current.transitions):
                continue
            trs = tuple(t for t in current.transitions if t.source != s)
            candidate = Nplts(current.name, tuple(x for x in current.states if x != s), trs, current.designated)
            if still_fails(candidate):
                current, changed = candidate, True
                break
    return current


def fuzz(seeds: Iterable[int], max_states: int = 6, dump_dir: Path | None = None,
         progress: Callable[[int], None] | None = None) -> list[Counterexample]:
    """Run the non-testing spectrum on random pairs; every broken implication
    is shrunk and reported, and so is any check that raised."""
    found = []
    for seed in seeds:
        model = random_pair(seed, max_states)
        report = run_spectrum(model, "s0", "s1", SpectrumOptions(testing=False, strict=False))
        if progress:
            progress(seed)
        for rid, message in sorted(report.errors.items()):
            if not message.startswith("unsupported"):
                found.append(Counterexample(seed, None, model, serialize(model), f"{rid}: {message}"))
        for imp, _, _ in report.broken:
            small = shrink(model, lambda m, imp=imp: _violates(m, imp))
            text = serialize(small)
            found.append(Counterexample(seed, imp, small, text))
            if dump_dir is not None:
                dump_dir.mkdir(parents=True, exist_ok=True)
                name = f"seed{seed}_{imp.premise}_{imp.conclusion}.nplts".replace("^", "ct")
                (dump_dir / name).write_text(text, encoding="utf-8")
    return found
