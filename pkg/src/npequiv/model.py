"""Exact-rational NPLTS data model.

A model is a finite set of states, a finite alphabet of action names, and a
list of transitions ``source --label--> distribution``.  Every probability is
a :class:`fractions.Fraction`; floats are rejected at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

TAU = "tau"


class ModelIssue(Exception):
    """One well-formedness violation found while validating a model."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(message)
        self.message = message
        self.where = where

    def __str__(self) -> str:
        return f"{self.where}: {self.message}" if self.where else self.message


class DistributionSum(ModelIssue):
    pass


class UnknownState(ModelIssue):
    pass


class EmptySupport(ModelIssue):
    pass


class DuplicateId(ModelIssue):
    pass


class NonPositiveProbability(ModelIssue):
    pass


class InvalidProbability(ModelIssue):
    pass


class ValidationError(Exception):
    """Raised with the complete list of violations of a model description."""

    def __init__(self, issues: list[ModelIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


def to_rational(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ``Fraction``, ``int`` and strings such as ``"0.4"`` or ``"2/5"``.
    Floats are refused because their binary expansion is not the number the
    author wrote.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"probabilities must be exact rationals, got {type(value).__name__}")


@dataclass(frozen=True)
class Distribution:
    """Finite-support probability distribution over state ids."""

    items: tuple[tuple[str, Fraction], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, object]) -> "Distribution":
        return cls(tuple(sorted((k, to_rational(v)) for k, v in mapping.items())))

    @classmethod
    def dirac(cls, state: str) -> "Distribution":
        return cls(((state, Fraction(1)),))

    def __getitem__(self, state: str) -> Fraction:
        for k, v in self.items:
            if k == state:
                return v
        return Fraction(0)

    def get(self, state: str, default=Fraction(0)) -> Fraction:
        for k, v in self.items:
            if k == state:
                return v
        return default

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def mass(self, states) -> Fraction:
        """Probability of the set ``states``."""
        return sum((v for k, v in self.items if k in states), Fraction(0))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.items)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Transition:
    source: str
    label: str
    target: Distribution

    def key(self):
        return (self.label, self.target.items)


@dataclass(frozen=True)
class Nplts:
    """A validated, immutable NPLTS.

    ``success`` is only used by test models and lists the states marked as
    successful.
    """

    name: str
    states: tuple[str, ...]
    transitions: tuple[Transition, ...]
    designated: tuple[str, ...] = ()
    success: frozenset = frozenset()
    _out: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        out: dict[str, list[Transition]] = {s: [] for s in self.states}
        for t in self.transitions:
            out[t.source].append(t)
        object.__setattr__(self, "_out", {s: tuple(ts) for s, ts in out.items()})

    @property
    def alphabet(self) -> frozenset:
        return frozenset(t.label for t in self.transitions)

    def outgoing(self, state: str) -> tuple[Transition, ...]:
        return self._out[state]

    def init(self, state: str) -> frozenset:
        """Labels of the outgoing transitions of ``state``."""
        return frozenset(t.label for t in self._out[state])

    def is_terminal(self, state: str) -> bool:
        return not self._out[state]

    def has_state(self, state: str) -> bool:
        return state in self._out

    def reachable(self, roots: Iterable[str]) -> list[str]:
        seen: list[str] = []
        stack = list(roots)
        marked = set()
        while stack:
            s = stack.pop()
            if s in marked:
                continue
            marked.add(s)
            seen.append(s)
            for t in self._out[s]:
                stack.extend(x for x in t.target.support if x not in marked)
        return seen

    def is_acyclic_from(self, roots: Iterable[str]) -> bool:
        colour: dict[str, int] = {}

        def visit(s: str) -> bool:
            stack = [(s, iter(self.successors(s)))]
            colour[s] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    colour[node] = 2
                    stack.pop()
                    continue
                c = colour.get(nxt, 0)
                if c == 1:
                    return False
                if c == 0:
                    colour[nxt] = 1
                    stack.append((nxt, iter(self.successors(nxt))))
            return True

        return all(colour.get(r, 0) == 2 or visit(r) for r in roots)

    def successors(self, state: str) -> list[str]:
        out = []
        for t in self._out[state]:
            for x in t.target.support:
                if x not in out:
                    out.append(x)
        return out

    def height(self, state: str) -> int:
        """Length of the longest path from ``state`` (acyclic models only)."""
        memo: dict[str, int] = {}

        def go(s: str) -> int:
            if s not in memo:
                memo[s] = max((1 + go(x) for x in self.successors(s)), default=0)
            return memo[s]

        return go(state)


def validate(raw: Mapping) -> Nplts:
    """Build an :class:`Nplts` from a plain description or raise ``ValidationError``.

    ``raw`` holds ``name``, ``states`` (list of ids), ``transitions`` (list of
    ``(source, label, {target: prob})``) and optionally ``designated`` and
    ``success``.  All violations are collected before raising.
    """
    issues: list[ModelIssue] = []
    name = str(raw.get("name", "model"))
    states: list[str] = []
    for s in raw.get("states", ()):
        if s in states:
            issues.append(DuplicateId(f"state '{s}' declared twice", s))
        else:
            states.append(s)
    known = set(states)
    transitions: list[Transition] = []
    seen_keys = set()
    for idx, entry in enumerate(raw.get("transitions", ())):
        source, label, target = entry
        where = f"{source} -{label}->"
        if source not in known:
            issues.append(UnknownState(f"unknown source state '{source}'", where))
        if not target:
            issues.append(EmptySupport("transition target has empty support", where))
            continue
        dist: dict[str, Fraction] = {}
        ok = True
        for tgt, p in target.items():
            if tgt not in known:
                issues.append(UnknownState(f"unknown target state '{tgt}'", where))
                ok = False
            try:
                q = to_rational(p)
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                issues.append(InvalidProbability(str(exc), where))
                ok = False
                continue
            if q <= 0:
                issues.append(NonPositiveProbability(f"probability {q} of '{tgt}' is not positive", where))
                ok = False
            dist[tgt] = dist.get(tgt, Fraction(0)) + q
        total = sum(dist.values(), Fraction(0))
        if ok and total != 1:
            issues.append(DistributionSum(f"probabilities sum to {total}, not 1", where))
            ok = False
        if ok:
            t = Transition(source, label, Distribution.of(dist))
            key = (source, t.key())
            # identical transitions denote the same element of the relation
            if key not in seen_keys:
                seen_keys.add(key)
                transitions.append(t)
    designated = tuple(raw.get("designated", ()))
    for d in designated:
        if d not in known:
            issues.append(UnknownState(f"designated state '{d}' is not declared", "designated"))
    success = frozenset(raw.get("success", ()))
    for d in success:
        if d not in known:
            issues.append(UnknownState(f"success state '{d}' is not declared", "success"))
    if issues:
        raise ValidationError(issues)
    return Nplts(name, tuple(states), tuple(transitions), designated, success)


def build(name: str, spec: Mapping[str, Iterable], designated: Iterable[str] = (), success=()) -> Nplts:
    """Compact constructor used by tests and the generator.

    ``spec`` maps each state to a list of ``(label, {target: prob})`` pairs.
    """
    transitions = [(s, a, d) for s, ts in spec.items() for a, d in ts]
    return validate({
        "name": name,
        "states": list(spec),
        "transitions": transitions,
        "designated": list(designated),
        "success": list(success),
    })


def to_raw(model: Nplts) -> dict:
    return {
        "name": model.name,
        "states": list(model.states),
        "transitions": [(t.source, t.label, t.target.as_dict()) for t in model.transitions],
        "designated": list(model.designated),
        "success": sorted(model.success),
    }


def disjoint_union(m1: Nplts, m2: Nplts, prefixes=("l.", "r.")) -> tuple[Nplts, dict, dict]:
    """Place two models side by side.

    Returns the union and the two injections from original ids to new ids.
    Designated states of both sides stay designated.
    """
    inj1 = {s: prefixes[0] + s for s in m1.states}
    inj2 = {s: prefixes[1] + s for s in m2.states}
    transitions = []
    for model, inj in ((m1, inj1), (m2, inj2)):
        for t in model.transitions:
            transitions.append((inj[t.source], t.label, {inj[k]: v for k, v in t.target.items}))
    union = validate({
        "name": f"{m1.name}+{m2.name}",
        "states": [inj1[s] for s in m1.states] + [inj2[s] for s in m2.states],
        "transitions": transitions,
        "designated": [inj1[d] for d in m1.designated] + [inj2[d] for d in m2.designated],
        "success": [inj1[s] for s in m1.success] + [inj2[s] for s in m2.success],
    })
    return union, inj1, inj2


def export_dot(model: Nplts) -> str:
    """Render ``model`` in Graphviz DOT.

    Each probabilistic transition gets a small point node for its
    distribution; sibling targets are tied by a dashed undirected edge.
    """
    lines = [f'digraph "{model.name}" {{', "  rankdir=TB;", "  node [shape=circle, label=\"\", width=0.15];"]
    for s in sorted(model.states):
        attrs = [f'xlabel="{s}"']
        if s in model.designated:
            attrs.append("style=filled, fillcolor=gray")
        if s in model.success:
            attrs.append("shape=doublecircle")
        lines.append(f'  "{s}" [{", ".join(attrs)}];')
    ordered = sorted(model.transitions, key=lambda t: (t.source, t.label, t.target.items))
    for i, t in enumerate(ordered):
        if len(t.target) == 1:
            (tgt, _), = t.target.items
            lines.append(f'  "{t.source}" -> "{tgt}" [label="{t.label}"];')
            continue
        hub = f"__d{i}"
        lines.append(f'  "{hub}" [shape=point, width=0.05];')
        lines.append(f'  "{t.source}" -> "{hub}" [label="{t.label}", arrowhead=none];')
        for tgt, p in t.target.items:
            lines.append(f'  "{hub}" -> "{tgt}" [label="{p}"];')
        sup = t.target.support
        for a, b in zip(sup, sup[1:]):
            lines.append(f'  "{a}" -> "{b}" [style=dashed, dir=none, constraint=false];')
    lines.append("}")
    return "\n".join(lines) + "\n"
