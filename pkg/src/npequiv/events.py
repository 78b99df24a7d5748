"""Observable events and their probabilities inside a resolution.

Every event is anchored on a trace ``alpha``; decorated events additionally
check the set of actions enabled, in the original model, at some of the
states visited along the computation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from .model import TAU, Nplts
from .resolutions import Computation, Resolution, RNode


class _AllActions:
    """The whole (unbounded) action set used as a refusal set."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "A"

    def __reduce__(self):
        return (_AllActions, ())


ALL = _AllActions()


def refuses(enabled: frozenset, refusal) -> bool:
    if refusal is ALL:
        return not enabled
    return not (enabled & refusal)


def format_set(dec) -> str:
    if dec is ALL:
        return "A"
    return "{" + ",".join(sorted(dec)) + "}"


def _dec_key(dec):
    return (1, ()) if dec is ALL else (0, (len(dec), tuple(sorted(dec))))


@dataclass(frozen=True)
class EventQuery:
    """Base class; ``actions`` is the underlying trace."""

    @property
    def actions(self) -> tuple[str, ...]:
        raise NotImplementedError

    def check(self, position: int, enabled: frozenset) -> bool:
        """Decoration test at ``position`` (0 is the root, ``len(actions)`` the end)."""
        return True

    def holds(self, enabled_along: Sequence[frozenset]) -> bool:
        return all(self.check(i, e) for i, e in enumerate(enabled_along))

    def sort_key(self):
        return (type(self).__name__, self.actions, str(self))


@dataclass(frozen=True)
class Trace(EventQuery):
    trace: tuple[str, ...] = ()

    @property
    def actions(self):
        return self.trace

    def __str__(self) -> str:
        return "trace " + " ".join(self.trace) if self.trace else "trace"


@dataclass(frozen=True)
class CompletedTrace(EventQuery):
    trace: tuple[str, ...] = ()

    @property
    def actions(self):
        return self.trace

    def check(self, position, enabled):
        return position < len(self.trace) or not enabled

    def __str__(self) -> str:
        return "ctrace " + " ".join(self.trace) if self.trace else "ctrace"


@dataclass(frozen=True)
class FailurePair(EventQuery):
    trace: tuple[str, ...] = ()
    refusal: object = frozenset()

    @property
    def actions(self):
        return self.trace

    def check(self, position, enabled):
        return position < len(self.trace) or refuses(enabled, self.refusal)

    def __str__(self) -> str:
        return f"fpair {' '.join(self.trace)} {format_set(self.refusal)}".replace("  ", " ")

    def sort_key(self):
        return ("FailurePair", self.trace, _dec_key(self.refusal))


@dataclass(frozen=True)
class ReadyPair(EventQuery):
    trace: tuple[str, ...] = ()
    ready: frozenset = frozenset()

    @property
    def actions(self):
        return self.trace

    def check(self, position, enabled):
        return position < len(self.trace) or enabled == self.ready

    def __str__(self) -> str:
        return f"rpair {' '.join(self.trace)} {format_set(self.ready)}".replace("  ", " ")

    def sort_key(self):
        return ("ReadyPair", self.trace, _dec_key(self.ready))


@dataclass(frozen=True)
class FailureTrace(EventQuery):
    steps: tuple[tuple[str, object], ...] = ()

    @property
    def actions(self):
        return tuple(a for a, _ in self.steps)

    def check(self, position, enabled):
        return position == 0 or refuses(enabled, self.steps[position - 1][1])

    def __str__(self) -> str:
        return "ftrace " + "".join(f"({a},{format_set(f)})" for a, f in self.steps)

    def sort_key(self):
        return ("FailureTrace", self.actions, tuple(_dec_key(f) for _, f in self.steps))


@dataclass(frozen=True)
class ReadyTrace(EventQuery):
    steps: tuple[tuple[str, frozenset], ...] = ()

    @property
    def actions(self):
        return tuple(a for a, _ in self.steps)

    def check(self, position, enabled):
        return position == 0 or enabled == self.steps[position - 1][1]

    def __str__(self) -> str:
        return "rtrace " + "".join(f"({a},{format_set(r)})" for a, r in self.steps)

    def sort_key(self):
        return ("ReadyTrace", self.actions, tuple(_dec_key(r) for _, r in self.steps))


@dataclass(frozen=True)
class Success(EventQuery):
    @property
    def actions(self):
        return ()

    def __str__(self) -> str:
        return "success"


@dataclass(frozen=True)
class SuccessTrace(EventQuery):
    trace: tuple[str, ...] = ()

    @property
    def actions(self):
        return self.trace

    def __str__(self) -> str:
        return "strace " + " ".join(self.trace) if self.trace else "strace"


@dataclass(frozen=True)
class EventProbability:
    query: EventQuery
    value: Fraction
    witness: tuple[Computation, ...] = field(default=(), compare=False)


# ---------------------------------------------------------------- query text

_ACTION = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")
_QUERY_WORDS = {"trace", "ctrace", "fpair", "rpair", "ftrace", "rtrace", "success", "strace"}


class QuerySyntaxError(ValueError):
    pass


def _parse_set(text: str):
    text = text.strip()
    if text in ("A", "*"):
        return ALL
    if not (text.startswith("{") and text.endswith("}")):
        raise QuerySyntaxError(f"expected a set like {{a,b}}, got {text!r}")
    body = text[1:-1].strip()
    return frozenset(_actions(x for x in body.split(",") if x.strip()))


def _actions(names: Iterable[str]) -> tuple[str, ...]:
    out = tuple(n.strip() for n in names)
    for n in out:
        if not _ACTION.fullmatch(n):
            raise QuerySyntaxError(f"{n!r} is not an action name")
    return out


def parse_query(text: str) -> EventQuery:
    """Parse e.g. ``trace a b``, ``fpair a {b,c}``, ``ftrace (a,{b})(c,{})``."""
    text = text.strip()
    word, _, rest = text.partition(" ")
    rest = rest.strip()
    if word not in _QUERY_WORDS:
        raise QuerySyntaxError(f"unknown query kind {word!r}; expected one of {sorted(_QUERY_WORDS)}")
    if word in ("trace", "ctrace", "strace"):
        trace = _actions(rest.split())
        return {"trace": Trace, "ctrace": CompletedTrace, "strace": SuccessTrace}[word](trace)
    if word == "success":
        return Success()
    if word in ("fpair", "rpair"):
        m = re.fullmatch(r"(.*?)\s*(\{[^}]*\}|A|\*)", rest)
        if not m:
            raise QuerySyntaxError("pair queries end with a set, e.g. 'fpair a b {c}'")
        trace = _actions(m.group(1).split())
        dec = _parse_set(m.group(2))
        if word == "rpair":
            if dec is ALL:
                raise QuerySyntaxError("a ready set must be explicit")
            return ReadyPair(trace, dec)
        return FailurePair(trace, dec)
    steps = []
    for m in re.finditer(r"\(\s*([^,\s()]+)\s*,\s*(\{[^}]*\}|A|\*)\s*\)", rest):
        steps.append((_actions([m.group(1)])[0], _parse_set(m.group(2))))
    if re.sub(r"\(\s*([^,\s()]+)\s*,\s*(\{[^}]*\}|A|\*)\s*\)", "", rest).strip():
        raise QuerySyntaxError(f"cannot parse decorated trace {rest!r}")
    if word == "rtrace":
        if any(d is ALL for _, d in steps):
            raise QuerySyntaxError("a ready set must be explicit")
        return ReadyTrace(tuple(steps))
    return FailureTrace(tuple(steps))


# ---------------------------------------------------------- probabilities


def _visible(trace: Iterable[str]) -> tuple[str, ...]:
    return tuple(a for a in trace if a != TAU)


def event_prob(resolution: Resolution, model: Nplts, query: EventQuery) -> EventProbability:
    """Probability of the computations of ``resolution`` compatible with ``query``.

    Decorations are evaluated on the model states the nodes correspond to.
    """
    comps = resolution.computations()
    if isinstance(query, (Success, SuccessTrace)):
        hits = [c for c in comps if c.states[-1] in model.success
                and not any(s in model.success for s in c.states[:-1])]
        if isinstance(query, SuccessTrace):
            hits = [c for c in hits if _visible(c.trace) == query.trace]
    else:
        alpha = query.actions
        hits = [c for c in comps if c.trace == alpha
                and query.holds([model.init(s) for s in c.states])]
    return EventProbability(query, sum((c.probability for c in hits), Fraction(0)), tuple(hits))


class ProfileCache:
    """Per-model memo of path profiles of resolution subtrees.

    A profile maps ``(trace, enabled sets along the path)`` to the total
    probability of the computations with that shape.
    """

    def __init__(self, model: Nplts):
        self.model = model
        self._memo: dict[RNode, dict] = {}

    def profile(self, node: RNode) -> dict:
        memo = self._memo
        if node in memo:
            return memo[node]
        here = self.model.init(node.state)
        out: dict = {((), (here,)): Fraction(1)}
        for _, p, child in node.branches:
            for (tr, ens), q in self.profile(child).items():
                key = ((node.label,) + tr, (here,) + ens)
                out[key] = out.get(key, Fraction(0)) + p * q
        memo[node] = out
        return out


def profile_value(profile: dict, query: EventQuery) -> Fraction:
    alpha = query.actions
    return sum((q for (tr, ens), q in profile.items() if tr == alpha and query.holds(ens)), Fraction(0))


# ------------------------------------------------------------- universes

FAMILIES = ("tr", "ctr", "f", "ftr", "r", "rtr")


def model_paths(model: Nplts, roots: Iterable[str], depth: int) -> dict[tuple, set]:
    """Map each trace realised from ``roots`` (length <= depth) to the set of
    enabled-set tuples observed along computations with that trace."""
    out: dict[tuple, set] = {}
    frontier = {(r, (), (model.init(r),)) for r in roots}
    for _ in range(depth + 1):
        nxt = set()
        for s, tr, ens in frontier:
            out.setdefault(tr, set()).add(ens)
            if len(tr) == depth:
                continue
            for t in model.outgoing(s):
                for x in t.target.support:
                    nxt.add((x, tr + (t.label,), ens + (model.init(x),)))
        frontier = nxt
    return out


def _refusal_reps(ready_sets: set) -> list:
    """One refusal set per distinct pattern of refused ready sets."""
    ready = sorted(ready_sets, key=lambda r: (len(r), sorted(r)))
    acts = sorted(set().union(*ready)) if ready else []

    def pattern(f):
        return frozenset(r for r in ready if refuses(r, f))

    reps: dict[frozenset, object] = {pattern(ALL): ALL}
    for k in range(len(acts) + 1):
        for combo in combinations(acts, k):
            f = frozenset(combo)
            reps.setdefault(pattern(f), f)
    return sorted(reps.values(), key=_dec_key)


@dataclass
class EventUniverse:
    """Events relevant for comparing two states, grouped by family."""

    realised: dict
    alphabet: frozenset
    depth: int

    def traces(self, extended: bool = False) -> list[tuple]:
        ts = set(self.realised)
        if extended:
            for tr in list(self.realised):
                for a in self.alphabet:
                    ts.add(tr + (a,))
        return sorted(ts, key=lambda t: (len(t), t))

    def events(self, family: str, extended: bool = False) -> list[EventQuery]:
        out: list[EventQuery] = []
        for tr in self.traces(extended):
            paths = self.realised.get(tr, set())
            n = len(tr)
            if family == "tr":
                out.append(Trace(tr))
            elif family == "ctr":
                out.extend((Trace(tr), CompletedTrace(tr)))
            elif family == "r":
                lasts = {ens[-1] for ens in paths} or {frozenset()}
                out.extend(ReadyPair(tr, r) for r in sorted(lasts, key=_dec_key))
            elif family == "f":
                out.extend(FailurePair(tr, f) for f in _refusal_reps({ens[-1] for ens in paths}))
            elif family == "rtr":
                seqs = {ens[1:] for ens in paths} or {tuple(frozenset() for _ in tr)}
                for seq in sorted(seqs, key=lambda q: [_dec_key(r) for r in q]):
                    out.append(ReadyTrace(tuple(zip(tr, seq))))
            elif family == "ftr":
                per_pos = [_refusal_reps({ens[i] for ens in paths}) for i in range(1, n + 1)]
                for combo in product(*per_pos):
                    out.append(FailureTrace(tuple(zip(tr, combo))))
            else:
                raise ValueError(f"unknown family {family!r}")
        return out


def relevant_universe(model: Nplts, s1: str, s2: str, depth: int) -> EventUniverse:
    return EventUniverse(model_paths(model, [s1, s2], depth), model.alphabet, depth)


def event_universe(model: Nplts, s1: str, s2: str, family: str, depth: int) -> list[EventQuery]:
    """Exhaustive event list: every trace up to ``depth`` over the alphabet of
    the model, decorated with every subset of it plus the full set ``A``."""
    acts = sorted(model.alphabet)
    subsets = [frozenset(c) for k in range(len(acts) + 1) for c in combinations(acts, k)]
    refusals = subsets + [ALL]
    traces = [()]
    level = [()]
    for _ in range(depth):
        level = [t + (a,) for t in level for a in acts]
        traces.extend(level)
    out: list[EventQuery] = []
    for tr in traces:
        if family == "tr":
            out.append(Trace(tr))
        elif family == "ctr":
            out.extend((Trace(tr), CompletedTrace(tr)))
        elif family == "f":
            out.extend(FailurePair(tr, f) for f in refusals)
        elif family == "r":
            out.extend(ReadyPair(tr, r) for r in subsets)
        elif family == "ftr":
            out.extend(FailureTrace(tuple(zip(tr, c))) for c in product(refusals, repeat=len(tr)))
        elif family == "rtr":
            out.extend(ReadyTrace(tuple(zip(tr, c))) for c in product(subsets, repeat=len(tr)))
        else:
            raise ValueError(f"unknown family {family!r}")
    return out


# --------------------------------------------------------- extremal values


@dataclass(frozen=True)
class Envelope:
    """Extremal probabilities of one event over the alpha-restricted resolutions.

    ``nonempty`` is false when no resolution qualifies; ``low``/``high`` are then 0.
    """

    nonempty: bool
    low: Fraction
    high: Fraction


def extremal(model: Nplts, state: str, query: EventQuery, policy: str = "event") -> Envelope:
    """Infimum and supremum of ``query`` over the alpha-restricted resolutions
    of ``state``, by dynamic programming over (state, position)."""
    if policy in ("positive", "event"):
        return _extremal_positive(model, state, query, policy == "event")
    alpha = query.actions
    n = len(alpha)
    feas_memo: dict[tuple[str, int], bool] = {}
    val_memo: dict[tuple[str, int], tuple[Fraction, Fraction] | None] = {}

    def feasible(s: str, k: int) -> bool:
        key = (s, k)
        if key in feas_memo:
            return feas_memo[key]
        if k == n:
            res = True
        else:
            res = False
            enabled = model.init(s)
            if policy == "enabled" and alpha[k] not in enabled:
                res = True
            for t in model.outgoing(s):
                if t.label != alpha[k] or all(feasible(x, k + 1) for x in t.target.support):
                    res = True
                    break
        feas_memo[key] = res
        return res

    def value(s: str, k: int):
        """(low, high) of the compatible mass from (s, k), or None if infeasible."""
        key = (s, k)
        if key in val_memo:
            return val_memo[key]
        if k == n:
            res = (Fraction(1), Fraction(1))
        else:
            options = []
            if policy == "enabled" and alpha[k] not in model.init(s):
                options.append((Fraction(0), Fraction(0)))
            for t in model.outgoing(s):
                if t.label != alpha[k]:
                    options.append((Fraction(0), Fraction(0)))
                    continue
                lo = hi = Fraction(0)
                ok = True
                for x, p in t.target.items:
                    if query.check(k + 1, model.init(x)):
                        sub = value(x, k + 1)
                        if sub is None:
                            ok = False
                            break
                        lo += p * sub[0]
                        hi += p * sub[1]
                    elif not feasible(x, k + 1):
                        ok = False
                        break
                if ok:
                    options.append((lo, hi))
            res = (min(o[0] for o in options), max(o[1] for o in options)) if options else None
        val_memo[key] = res
        return res

    if not feasible(state, 0):
        return Envelope(False, Fraction(0), Fraction(0))
    if not query.check(0, model.init(state)):
        return Envelope(True, Fraction(0), Fraction(0))
    lo, hi = value(state, 0)
    return Envelope(True, lo, hi)


def _extremal_positive(model: Nplts, state: str, query: EventQuery, on_event: bool = False) -> Envelope:
    """Extremes over the resolutions that perform ``alpha`` (or, with
    ``on_event``, the event itself) with positive probability.

    The maximum is the unrestricted one.  The minimum keeps one path alive
    and lets every other branch stop as early as possible.
    """
    alpha = query.actions
    n = len(alpha)
    memo: dict[tuple[str, int], tuple[Fraction, Fraction] | None] = {}

    def floor(x: str, k: int) -> Fraction:
        # least mass from (x, k) with no positivity requirement
        return Fraction(int(query.check(k, model.init(x)))) if k == n else Fraction(0)

    def walk(s: str, k: int):
        """(max mass, min mass under positivity) from (s, k); None without an alpha-path."""
        key = (s, k)
        if key in memo:
            return memo[key]
        holds = query.check(k, model.init(s))
        if on_event and not holds:
            res = None
        elif k == n:
            res = (Fraction(int(holds)),) * 2
        else:
            high, low, found = Fraction(0), None, False
            for t in model.outgoing(s):
                if t.label != alpha[k]:
                    continue
                subs = {x: walk(x, k + 1) for x in t.target.support}
                live = [x for x, sub in subs.items() if sub is not None]
                if not live:
                    continue
                found = True
                high = max(high, sum((t.target[x] * subs[x][0] for x in live), Fraction(0)))
                base = sum((t.target[x] * floor(x, k + 1) for x in t.target.support), Fraction(0))
                for x in live:
                    cand = base + t.target[x] * (subs[x][1] - floor(x, k + 1))
                    low = cand if low is None else min(low, cand)
            if not found:
                res = None
            elif not holds:
                res = (Fraction(0), Fraction(0))
            else:
                res = (high, low)
        memo[key] = res
        return res

    got = walk(state, 0)
    if got is None:
        return Envelope(False, Fraction(0), Fraction(0))
    return Envelope(True, got[1], got[0])


def describe(query: EventQuery) -> str:
    """Human-readable name of an event, used in witnesses."""
    if isinstance(query, (Trace, CompletedTrace, SuccessTrace)):
        word = {Trace: "trace", CompletedTrace: "completed trace", SuccessTrace: "success trace"}[type(query)]
        return f"{word} {' '.join(query.trace)}" if query.trace else f"{word} (empty)"
    if isinstance(query, FailurePair):
        return f"failure pair ({' '.join(query.trace)}, {format_set(query.refusal)})"
    if isinstance(query, ReadyPair):
        return f"ready pair ({' '.join(query.trace)}, {format_set(query.ready)})"
    if isinstance(query, FailureTrace):
        return "failure trace " + "".join(f"({a},{format_set(f)})" for a, f in query.steps)
    if isinstance(query, ReadyTrace):
        return "ready trace " + "".join(f"({a},{format_set(r)})" for a, r in query.steps)
    return str(query)
