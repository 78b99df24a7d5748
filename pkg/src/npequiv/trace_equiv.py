"""Trace-based equivalences.

Six event families (traces, completed traces, failure pairs, failure traces,
ready pairs, ready traces) are each compared in three ways:

* ``dis``: every resolution of one state has a resolution of the other with
  the same probability for every event of the family;
* ``tbt``: for every single event, the probabilities it gets across the
  resolutions of the two states form the same set;
* ``supinf``: for every event, the extremal probabilities over the
  alpha-restricted resolutions coincide.
"""

from __future__ import annotations

from fractions import Fraction

from .events import (
    CompletedTrace,
    EventUniverse,
    ProfileCache,
    Trace,
    describe,
    extremal,
    relevant_universe,
)
from .model import Nplts
from .resolutions import CyclicNeedsBound, resolution_trees
from .verdict import Verdict, Witness, pair_text, show

FAMILY_NAMES = {"tr": "ptr", "ctr": "pctr", "f": "pf", "ftr": "pftr", "r": "pr", "rtr": "prtr"}
SCHEMAS = ("dis", "tbt", "supinf")


def relation_id(family: str, schema: str) -> str:
    base = FAMILY_NAMES[family]
    return {"dis": f"{base}-dis", "tbt": base, "supinf": f"{base}-supinf"}[schema]


def _zero_free(d: dict) -> frozenset:
    return frozenset((k, v) for k, v in d.items() if v)


class TraceAnalyzer:
    """Caches resolutions, profiles and event maps for one pair of states."""

    def __init__(self, model: Nplts, s1: str, s2: str, depth: int | None = None, policy: str = "event"):
        for s in (s1, s2):
            if not model.has_state(s):
                raise KeyError(f"unknown state '{s}'")
        self.model = model
        self.states = (s1, s2)
        self.policy = policy
        self.bounded = depth is not None
        if depth is None:
            if not model.is_acyclic_from([s1, s2]):
                raise CyclicNeedsBound("a cycle is reachable; supply a depth bound")
            depth = max(model.height(s1), model.height(s2))
        self.depth = depth
        self.universe: EventUniverse = relevant_universe(model, s1, s2, depth)
        self._cache = ProfileCache(model)
        self._trees = None
        self._maps: dict[str, tuple[list, list]] = {}

    # -- resolutions -------------------------------------------------------

    def trees(self):
        if self._trees is None:
            d = self.depth if self.bounded else None
            self._trees = tuple(resolution_trees(self.model, s, False, d) for s in self.states)
        return self._trees

    def maps(self, family: str):
        """Per side, the list of event->probability maps (zero entries dropped)."""
        if family in self._maps:
            return self._maps[family]
        events = self.universe.events(family)
        by_trace: dict[tuple, list] = {}
        for e in events:
            by_trace.setdefault(e.actions, []).append(e)
        sides = []
        for trees in self.trees():
            maps = []
            for tree in trees:
                m: dict = {}
                for (tr, ens), q in self._cache.profile(tree).items():
                    for e in by_trace.get(tr, ()):
                        if e.holds(ens):
                            m[e] = m.get(e, Fraction(0)) + q
                maps.append(m)
            sides.append(maps)
        self._maps[family] = tuple(sides)
        return self._maps[family]

    # -- schemas ---------------------------------------------------------

    def dis(self, family: str) -> Verdict:
        rel = relation_id(family, "dis")
        sides = self.maps(family)
        if family == "ctr":
            parts = [("completed-trace", lambda e: isinstance(e, CompletedTrace)),
                     ("trace", lambda e: isinstance(e, Trace))]
        else:
            parts = [(family, lambda e: True)]
        for label, keep in parts:
            projected = [[_zero_free({e: v for e, v in m.items() if keep(e)}) for m in maps] for maps in sides]
            sets = [set(p) for p in projected]
            for side in (0, 1):
                other = sets[1 - side]
                for idx, m in enumerate(projected[side]):
                    if m not in other:
                        return Verdict(rel, False, Witness(
                            f"resolution {idx} of side {side + 1} has no match on the {label} distribution",
                            side=side + 1, resolution_index=idx), self.bounded)
        return Verdict(rel, True, bounded=self.bounded)

    def tbt(self, family: str) -> Verdict:
        rel = relation_id(family, "tbt")
        sides = self.maps(family)
        events = set()
        for maps in sides:
            for m in maps:
                events.update(m)
        for e in sorted(events, key=lambda x: x.sort_key()):
            vals = [sorted({m.get(e, Fraction(0)) for m in maps}) for maps in sides]
            if vals[0] != vals[1]:
                for side in (0, 1):
                    missing = [v for v in vals[side] if v not in vals[1 - side]]
                    if missing:
                        return Verdict(rel, False, Witness(
                            f"{describe(e)}: probability {show(missing[0])} on side {side + 1} is not matched",
                            event=e, side=side + 1, values=(tuple(vals[0]), tuple(vals[1]))), self.bounded)
        return Verdict(rel, True, bounded=self.bounded)

    def supinf(self, family: str) -> Verdict:
        rel = relation_id(family, "supinf")
        s1, s2 = self.states
        for e in self.universe.events(family, extended=True):
            a = extremal(self.model, s1, e, self.policy)
            b = extremal(self.model, s2, e, self.policy)
            if a != b:
                name = describe(e)
                if a.nonempty != b.nonempty:
                    desc = f"{name}: restricted resolution set empty on side {1 if not a.nonempty else 2} only"
                elif a.high != b.high:
                    desc = f"{name}: {pair_text(a.high, b.high, 'max')}"
                else:
                    desc = f"{name}: {pair_text(a.low, b.low, 'min')}"
                return Verdict(rel, False, Witness(desc, event=e, values=((a.low, a.high), (b.low, b.high))),
                               self.bounded)
        return Verdict(rel, True, bounded=self.bounded)

    def check(self, family: str, schema: str) -> Verdict:
        return {"dis": self.dis, "tbt": self.tbt, "supinf": self.supinf}[schema](family)


def check_dis(family: str, model: Nplts, s1: str, s2: str, depth: int | None = None) -> Verdict:
    return TraceAnalyzer(model, s1, s2, depth).dis(family)


def check_tbt(family: str, model: Nplts, s1: str, s2: str, depth: int | None = None) -> Verdict:
    return TraceAnalyzer(model, s1, s2, depth).tbt(family)


def check_supinf(family: str, model: Nplts, s1: str, s2: str, depth: int | None = None,
                 policy: str = "event") -> Verdict:
    return TraceAnalyzer(model, s1, s2, depth, policy).supinf(family)
