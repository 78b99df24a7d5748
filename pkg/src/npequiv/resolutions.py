"""Resolutions of nondeterminism.

A deterministic scheduler picks at most one outgoing transition at every
node of the unfolding of a state.  The result is a tree-shaped fully
probabilistic system whose nodes carry the model state they correspond to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .model import Distribution, Nplts, Transition


class CyclicNeedsBound(Exception):
    """The unfolding is infinite and no depth bound was given."""


class BoundTooSmall(Exception):
    pass


class NotPrefixFree(Exception):
    pass


class RNode:
    """Node of a resolution tree.

    ``label`` is ``None`` for a node where the scheduler stops; otherwise
    ``branches`` lists ``(target state, probability, child)`` sorted by target
    state, which makes structural equality coincide with isomorphism of the
    labelled trees.
    """

    __slots__ = ("state", "label", "branches", "_hash")

    def __init__(self, state: str, label: str | None = None, branches: tuple = ()):
        self.state = state
        self.label = label
        self.branches = branches
        self._hash = hash((state, label, branches))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, RNode) or self._hash != other._hash:
            return False
        return self.state == other.state and self.label == other.label and self.branches == other.branches

    def __repr__(self) -> str:
        if self.label is None:
            return f"<{self.state}>"
        inner = ", ".join(f"{p}:{c!r}" for _, p, c in self.branches)
        return f"<{self.state} -{self.label}-> {{{inner}}}>"

    @property
    def is_leaf(self) -> bool:
        return self.label is None

    def distribution(self) -> Distribution:
        return Distribution(tuple((s, p) for s, p, _ in self.branches))

    def size(self) -> int:
        return 1 + sum(c.size() for _, _, c in self.branches)

    def depth(self) -> int:
        return 1 + max((c.depth() for _, _, c in self.branches), default=-1)


@dataclass(frozen=True)
class Computation:
    """A path from the root; ``steps`` are ``(node, action, node)`` with node ids."""

    steps: tuple[tuple[str, str, str], ...]
    probability: Fraction
    states: tuple[str, ...]

    @property
    def trace(self) -> tuple[str, ...]:
        return tuple(a for _, a, _ in self.steps)

    @property
    def last(self) -> str:
        return self.steps[-1][2] if self.steps else "z0"


class Resolution:
    """A resolution tree together with its state correspondence."""

    def __init__(self, root: RNode):
        self.root_node = root
        self._tree = None

    def __eq__(self, other) -> bool:
        return isinstance(other, Resolution) and self.root_node == other.root_node

    def __hash__(self) -> int:
        return hash(self.root_node)

    def __repr__(self) -> str:
        return f"Resolution({self.root_node!r})"

    def _materialise(self):
        """Breadth-first numbering: returns ``[(zid, node, child zids)]`` and corr."""
        if self._tree is not None:
            return self._order, self._corr
        order: list[tuple[str, RNode, list[str]]] = []
        corr: dict[str, str] = {}
        queue: list[tuple[RNode, list[str] | None]] = [(self.root_node, None)]
        head = 0
        while head < len(queue):
            node, parent_slot = queue[head]
            head += 1
            zid = f"z{len(order)}"
            if parent_slot is not None:
                parent_slot.append(zid)
            corr[zid] = node.state
            slot: list[str] = []
            order.append((zid, node, slot))
            queue.extend((c, slot) for _, _, c in node.branches)
        transitions = []
        for zid, node, kids in order:
            if node.label is not None:
                dist = {k: p for k, (_, p, _) in zip(kids, node.branches)}
                transitions.append(Transition(zid, node.label, Distribution.of(dist)))
        self._order, self._corr = order, corr
        self._tree = Nplts("resolution", tuple(z for z, _, _ in order), tuple(transitions), ("z0",))
        return order, corr

    @property
    def root(self) -> str:
        return "z0"

    @property
    def corr(self) -> dict[str, str]:
        return dict(self._materialise()[1])

    @property
    def tree(self) -> Nplts:
        """The resolution as a fully probabilistic NPLTS over node ids."""
        self._materialise()
        return self._tree

    def computations(self, maximal_only: bool = False) -> list[Computation]:
        """All computations from the root (every path, including the empty one)."""
        order, _ = self._materialise()
        info = {zid: (node, kids) for zid, node, kids in order}
        result: list[Computation] = []

        def walk(zid: str, steps: tuple, prob: Fraction, states: tuple):
            node, kids = info[zid]
            if not maximal_only or node.is_leaf:
                result.append(Computation(steps, prob, states))
            for kid, (_, p, child) in zip(kids, node.branches):
                walk(kid, steps + ((zid, node.label, kid),), prob * p, states + (child.state,))

        walk("z0", (), Fraction(1), (self.root_node.state,))
        return result

    def is_maximal(self, model: Nplts) -> bool:
        def ok(node: RNode) -> bool:
            if node.is_leaf:
                return model.is_terminal(node.state)
            return all(ok(c) for _, _, c in node.branches)

        return ok(self.root_node)


@dataclass(frozen=True)
class ResolutionSet:
    items: tuple[Resolution, ...]
    kind: str
    alpha: tuple[str, ...] | None = None
    bounded: bool = False

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i: int) -> Resolution:
        return self.items[i]


def _ordered_transitions(model: Nplts, state: str) -> list[Transition]:
    return sorted(model.outgoing(state), key=lambda t: (t.label, t.target.items))


def _check_bound(model: Nplts, state: str, depth_bound: int | None) -> None:
    if depth_bound is None and not model.is_acyclic_from([state]):
        raise CyclicNeedsBound(f"a cycle is reachable from '{state}'; supply a depth bound")


def resolution_trees(model: Nplts, state: str, maximal: bool, depth: int | None) -> list[RNode]:
    """Canonical, duplicate-free resolution trees of ``state``.

    With ``depth`` set, nodes at that depth are forced to stop.
    """
    memo: dict[tuple[str, int | None], list[RNode]] = {}

    def go(s: str, d: int | None) -> list[RNode]:
        key = (s, d)
        if key in memo:
            return memo[key]
        out: list[RNode] = []
        ts = _ordered_transitions(model, s)
        if not maximal or not ts or d == 0:
            out.append(RNode(s))
        if d != 0:
            nd = None if d is None else d - 1
            for t in ts:
                targets = t.target.items
                for combo in product(*(go(x, nd) for x, _ in targets)):
                    out.append(RNode(s, t.label, tuple((x, p, c) for (x, p), c in zip(targets, combo))))
        memo[key] = out
        return out

    return go(state, depth)


def count_resolutions(model: Nplts, state: str, maximal: bool = False, depth: int | None = None) -> int:
    """Number of resolutions, computed without building them."""
    _check_bound(model, state, depth)
    memo: dict[tuple[str, int | None], int] = {}

    def go(s: str, d: int | None) -> int:
        key = (s, d)
        if key not in memo:
            ts = model.outgoing(s)
            total = 1 if (not maximal or not ts or d == 0) else 0
            if d != 0:
                nd = None if d is None else d - 1
                for t in ts:
                    prod = 1
                    for x in t.target.support:
                        prod *= go(x, nd)
                    total += prod
            memo[key] = total
        return memo[key]

    return go(state, depth)


def in_res_alpha(node: RNode, model: Nplts, alpha: Sequence[str], policy: str = "positive") -> bool:
    """Whether a resolution tree belongs to the alpha-restricted set.

    ``"positive"`` (default): the resolution performs ``alpha`` with positive
    probability.  ``"prefix"``: no maximal computation has a trace that is a
    proper prefix of ``alpha``.  ``"enabled"``: as ``"prefix"``, but only
    counting stops where the model could still perform the next action.
    """
    n = len(alpha)
    if policy == "positive":
        def reaches(z: RNode, k: int) -> bool:
            if k >= n:
                return True
            if z.is_leaf or z.label != alpha[k]:
                return False
            return any(reaches(c, k + 1) for _, _, c in z.branches)

        return reaches(node, 0)

    def ok(z: RNode, k: int) -> bool:
        if k >= n:
            return True
        if z.is_leaf:
            if policy == "enabled":
                return alpha[k] not in model.init(z.state)
            return False
        if z.label != alpha[k]:
            return True
        return all(ok(c, k + 1) for _, _, c in z.branches)

    return ok(node, 0)


def enumerate_resolutions(model: Nplts, state: str, kind: str = "all", depth_bound: int | None = None,
                          alpha: Sequence[str] | None = None, policy: str = "positive") -> ResolutionSet:
    """Enumerate the deterministic-scheduler resolutions of ``state``.

    ``kind`` is ``"all"``, ``"max"`` or ``"alpha"`` (which needs ``alpha``).
    """
    if kind not in ("all", "max", "alpha"):
        raise ValueError(f"unknown resolution kind {kind!r}")
    _check_bound(model, state, depth_bound)
    if kind == "alpha":
        if alpha is None:
            raise ValueError("kind 'alpha' needs a trace")
        if depth_bound is not None and len(alpha) > depth_bound:
            raise BoundTooSmall(f"trace of length {len(alpha)} exceeds depth bound {depth_bound}")
    trees = resolution_trees(model, state, kind == "max", depth_bound)
    items = tuple(Resolution(t) for t in trees)
    result = ResolutionSet(items, kind, None, depth_bound is not None)
    if kind == "alpha":
        return alpha_restrict(result, model, alpha, policy)
    return result


def alpha_restrict(resolutions: ResolutionSet, model: Nplts, alpha: Sequence[str],
                   policy: str = "positive") -> ResolutionSet:
    alpha = tuple(alpha)
    kept = tuple(r for r in resolutions.items if in_res_alpha(r.root_node, model, alpha, policy))
    return ResolutionSet(kept, "alpha", alpha, resolutions.bounded)


def prob_of(computations: Iterable[Computation]) -> Fraction:
    """Probability of a prefix-free set of computations of one resolution."""
    comps = list(computations)
    keys = sorted({c.steps for c in comps})
    for a, b in zip(keys, keys[1:]):
        if b[: len(a)] == a:
            raise NotPrefixFree(f"computation of length {len(a)} is a prefix of one of length {len(b)}")
    return sum((c.probability for c in {c.steps: c for c in comps}.values()), Fraction(0))


@dataclass(frozen=True)
class CombinedTransition:
    """Convex combination of equally labelled transitions of one state."""

    source: str
    label: str
    components: tuple[tuple[Transition, Fraction], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("a combined transition needs at least one component")
        if any(c <= 0 for _, c in self.components) or sum(c for _, c in self.components) != 1:
            raise ValueError("coefficients must be positive and sum to 1")
        for t, _ in self.components:
            if t.source != self.source or t.label != self.label:
                raise ValueError("components must share source and label")

    @property
    def distribution(self) -> Distribution:
        acc: dict[str, Fraction] = {}
        for t, c in self.components:
            for s, p in t.target.items:
                acc[s] = acc.get(s, Fraction(0)) + c * p
        return Distribution.of({s: p for s, p in acc.items() if p})


def combined_transitions_basis(model: Nplts, state: str, action: str) -> list[Transition]:
    return [t for t in _ordered_transitions(model, state) if t.label == action]


def combine(model: Nplts, state: str, action: str, coefficients: Sequence[Fraction]) -> CombinedTransition:
    basis = combined_transitions_basis(model, state, action)
    if len(coefficients) != len(basis):
        raise ValueError(f"expected {len(basis)} coefficients")
    parts = tuple((t, Fraction(c)) for t, c in zip(basis, coefficients) if c)
    return CombinedTransition(state, action, parts)
