"""Testing equivalences: tests, interaction systems, success probabilities.

A test is an acyclic model whose ``success`` states are terminal; it may use
the internal action ``tau``.  Process and test synchronise on visible
actions; ``tau`` moves the test alone.  All variants look at the maximal
resolutions of the interaction system.

The success behaviour of one resolution is summarised by its *success map*
(visible trace of a success computation -> probability).  A configuration is
summarised by the set of success maps of its maximal resolutions, which is
computed compositionally.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .model import TAU, Nplts, validate
from .verdict import Verdict, Witness, pair_text, show

PTE_VARIANTS = ("supinf", "fe", "tbt-dis", "tbt", "tbt-supinf")
VARIANT_ALIASES = {"forall-exists": "fe"}


class InvalidTest(ValueError):
    pass


def pte_relation_id(variant: str) -> str:
    return f"pte-{variant}"


def check_test_model(test: Nplts) -> str:
    """Validate a test and return its initial state."""
    if not test.designated:
        raise InvalidTest(f"test '{test.name}' has no designated initial state")
    for s in test.success:
        if not test.is_terminal(s):
            raise InvalidTest(f"success state '{s}' has outgoing transitions")
    if not test.is_acyclic_from([test.designated[0]]):
        raise InvalidTest(f"test '{test.name}' is cyclic")
    return test.designated[0]


@dataclass(frozen=True)
class InteractionSystem:
    """Synchronised product; ``configuration`` maps ids to (process, test) states."""

    model: Nplts
    root: str
    configuration: dict

    @property
    def success(self) -> frozenset:
        return self.model.success


def _config_id(s: str, o: str) -> str:
    return f"({s},{o})"


def interact(model: Nplts, s: str, test: Nplts, o: str) -> InteractionSystem:
    if TAU in model.alphabet:
        raise InvalidTest("process models must not use the internal action")
    root = (s, o)
    seen = {root: _config_id(*root)}
    order = [root]
    transitions = []
    head = 0
    while head < len(order):
        ps, ts = order[head]
        head += 1
        src = seen[(ps, ts)]
        moves = []
        for u in test.outgoing(ts):
            if u.label == TAU:
                moves.append((TAU, {(ps, y): q for y, q in u.target.items}))
                continue
            for t in model.outgoing(ps):
                if t.label == u.label:
                    moves.append((t.label, {(x, y): p * q for x, p in t.target.items for y, q in u.target.items}))
        for label, dist in moves:
            for cfg in dist:
                if cfg not in seen:
                    seen[cfg] = _config_id(*cfg)
                    order.append(cfg)
            transitions.append((src, label, {seen[c]: p for c, p in dist.items()}))
    raw = {
        "name": f"{model.name}||{test.name}",
        "states": [seen[c] for c in order],
        "transitions": transitions,
        "designated": [seen[root]],
        "success": [seen[c] for c in order if c[1] in test.success],
    }
    return InteractionSystem(validate(raw), seen[root], {seen[c]: c for c in order})


def success_envelope(system: InteractionSystem) -> tuple[Fraction, Fraction]:
    """``(sup, inf)`` of the success probability over maximal resolutions."""
    m = system.model
    memo: dict[str, tuple[Fraction, Fraction]] = {}

    def go(c: str):
        if c not in memo:
            if c in m.success:
                memo[c] = (Fraction(1), Fraction(1))
            elif m.is_terminal(c):
                memo[c] = (Fraction(0), Fraction(0))
            else:
                opts = []
                for t in m.outgoing(c):
                    hi = sum((p * go(x)[0] for x, p in t.target.items), Fraction(0))
                    lo = sum((p * go(x)[1] for x, p in t.target.items), Fraction(0))
                    opts.append((hi, lo))
                memo[c] = (max(o[0] for o in opts), min(o[1] for o in opts))
        return memo[c]

    return go(system.root)


# ------------------------------------------------------------ success maps

EMPTY_MAP = frozenset()
SUCCEED = frozenset({((), Fraction(1))})


def _combine(label: str, weighted: list[tuple[Fraction, frozenset]]) -> frozenset:
    acc: dict = {}
    prefix = () if label == TAU else (label,)
    for weight, smap in weighted:
        for trace, q in smap:
            key = prefix + trace
            acc[key] = acc.get(key, Fraction(0)) + weight * q
    return frozenset((k, v) for k, v in acc.items() if v)


def _fan(label: str, parts: list[tuple[Fraction, frozenset]]) -> frozenset:
    """All success maps obtained by choosing one map per weighted part."""
    weights = [w for w, _ in parts]
    out = set()
    for choice in product(*(sorted(options, key=_map_key) for _, options in parts)):
        out.add(_combine(label, list(zip(weights, choice))))
    return frozenset(out)


def _map_key(smap: frozenset):
    return sorted(smap)


def success_maps(system: InteractionSystem) -> frozenset:
    """Set of success maps of the maximal resolutions of the interaction."""
    m = system.model
    memo: dict[str, frozenset] = {}

    def go(c: str) -> frozenset:
        if c not in memo:
            if c in m.success:
                memo[c] = frozenset({SUCCEED})
            elif m.is_terminal(c):
                memo[c] = frozenset({EMPTY_MAP})
            else:
                out = set()
                for t in m.outgoing(c):
                    out |= _fan(t.label, [(p, go(x)) for x, p in t.target.items])
                memo[c] = frozenset(out)
        return memo[c]

    return go(system.root)


def total(smap: frozenset) -> Fraction:
    return sum((q for _, q in smap), Fraction(0))


def compare_maps(variant: str, left: frozenset, right: frozenset) -> str | None:
    """``None`` when the two sets of success maps agree under ``variant``;
    otherwise a description of the difference."""
    if variant == "supinf":
        a = sorted(total(x) for x in left)
        b = sorted(total(x) for x in right)
        if a[-1] != b[-1]:
            return f"success probability: {pair_text(a[-1], b[-1], 'max')}"
        if a[0] != b[0]:
            return f"success probability: {pair_text(a[0], b[0], 'min')}"
        return None
    if variant == "fe":
        a = {total(x) for x in left}
        b = {total(x) for x in right}
        if a != b:
            odd = sorted(a ^ b)[0]
            side = 1 if odd in a else 2
            return f"success probability {show(odd)} occurs only on side {side}"
        return None
    if variant == "tbt-dis":
        if left != right:
            side, odd = (1, sorted(left - right, key=_map_key)) if left - right else (2, sorted(right - left, key=_map_key))
            return f"success map {_show_map(odd[0])} occurs only on side {side}"
        return None
    traces = sorted({tr for group in (left, right) for smap in group for tr, _ in smap}, key=lambda t: (len(t), t))
    for tr in traces:
        a = sorted({dict(x).get(tr, Fraction(0)) for x in left})
        b = sorted({dict(x).get(tr, Fraction(0)) for x in right})
        name = " ".join(tr) if tr else "(empty)"
        if variant == "tbt" and a != b:
            return f"success trace {name}: probabilities {_show_values(a)} vs {_show_values(b)}"
        if variant == "tbt-supinf":
            if a[-1] != b[-1]:
                return f"success trace {name}: {pair_text(a[-1], b[-1], 'max')}"
            if a[0] != b[0]:
                return f"success trace {name}: {pair_text(a[0], b[0], 'min')}"
    return None


def _show_values(values) -> str:
    return "{" + ", ".join(str(v) for v in values) + "}"


def _show_map(smap: frozenset) -> str:
    items = sorted(smap, key=lambda kv: (len(kv[0]), kv[0]))
    return "{" + ", ".join(f"{' '.join(k) or 'ε'}: {v}" for k, v in items) + "}"


def normalise_variant(variant: str) -> str:
    variant = VARIANT_ALIASES.get(variant, variant)
    if variant not in PTE_VARIANTS:
        raise ValueError(f"unknown testing variant {variant!r}; expected one of {PTE_VARIANTS}")
    return variant


def check_pte(variant: str, model: Nplts, s1: str, s2: str, suite) -> Verdict:
    """Suite-relative check: distinct only with a certificate test."""
    variant = normalise_variant(variant)
    suite = list(suite)
    if not suite:
        raise ValueError("the test suite is empty")
    rel = pte_relation_id(variant)
    for test in suite:
        o = check_test_model(test)
        left = success_maps(interact(model, s1, test, o))
        right = success_maps(interact(model, s2, test, o))
        diff = compare_maps(variant, left, right)
        if diff is not None:
            return Verdict(rel, False, Witness(f"test {test.name}: {diff}", test=test))
    return Verdict(rel, True, bounded=True, note=f"not distinguished by a suite of {len(suite)} test(s)")


# ------------------------------------------------------------------ search


@dataclass(frozen=True)
class _Tree:
    """Test skeleton: ``kind`` is ``omega``, ``dead`` or ``node``."""

    kind: str
    moves: tuple = ()  # (label, ((prob, _Tree), ...))


def _to_test(tree: _Tree, name: str) -> Nplts:
    states: list[str] = []
    transitions = []
    success = []

    def emit(node: _Tree) -> str:
        sid = f"o{len(states)}"
        states.append(sid)
        if node.kind == "omega":
            success.append(sid)
        for label, fan in node.moves:
            target = {}
            for p, child in fan:
                target[emit(child)] = p
            transitions.append((sid, label, target))
        return sid

    emit(tree)
    return validate({"name": name, "states": states, "transitions": transitions,
                     "designated": ["o0"], "success": success})


class _Observation:
    """What one variant can see of a set of success maps, with the two
    operations tests are built from: fans over branches and unions over
    alternative synchronisations.  Both commute with the projection, so the
    search can work on projections alone.
    """

    def __init__(self, variant: str):
        self.variant = variant
        # observations are interned as small ints so vectors hash cheaply
        self.values: list = []
        self.ids: dict = {}
        self.unions: dict = {}
        # supinf pairs hold canonical Fractions and are keyed by identity,
        # which spares rehashing them on every union
        self.canon: dict = {}
        self.zero = (Fraction(0), Fraction(0)) if variant == "tbt-supinf" else frozenset({Fraction(0)})

    def intern(self, value) -> int:
        if self.variant == "supinf":
            lo, hi = value
            value = (self.canon.setdefault(lo, lo), self.canon.setdefault(hi, hi))
            key = (id(value[0]), id(value[1]))
        else:
            key = value
        got = self.ids.get(key)
        if got is None:
            got = self.ids[key] = len(self.values)
            self.values.append(value)
        return got

    def of(self, maps: frozenset) -> int:
        return self.intern(self._of(maps))

    def fan(self, label: str, parts: list) -> int:
        return self.intern(self._fan([(w, self.values[x]) for w, x in parts], label))

    def union(self, a: int, b: int) -> int:
        if a == b:
            return a
        key = (a, b) if a < b else (b, a)
        got = self.unions.get(key)
        if got is None:
            value = self._union(self.values[a], self.values[b])
            if self.variant == "supinf":
                # min and max return canonical operands
                got = self.ids.get((id(value[0]), id(value[1])))
            if got is None:
                got = self.intern(value)
            self.unions[key] = got
        return got

    def _of(self, maps: frozenset):
        v = self.variant
        if v == "tbt-dis":
            return maps
        if v in ("supinf", "fe"):
            totals = {total(m) for m in maps}
            return (min(totals), max(totals)) if v == "supinf" else frozenset(totals)
        out = {}
        for tr in {tr for m in maps for tr, _ in m}:
            values = {dict(m).get(tr, Fraction(0)) for m in maps}
            out[tr] = (min(values), max(values)) if v == "tbt-supinf" else frozenset(values)
        return self._pack(out)

    def _zero(self):
        return self.zero

    def _pack(self, table: dict) -> tuple:
        zero = self._zero()
        return tuple(sorted((tr, x) for tr, x in table.items() if x != zero))

    def _fan(self, parts: list, label: str):
        v = self.variant
        if v == "tbt-dis":
            return _fan(label, parts)
        if v == "supinf":
            return (sum((w * x[0] for w, x in parts), Fraction(0)), sum((w * x[1] for w, x in parts), Fraction(0)))
        if v == "fe":
            return frozenset(sum((w * t for w, t in zip([w for w, _ in parts], combo)), Fraction(0))
                             for combo in product(*(sorted(x) for _, x in parts)))
        prefix = () if label == TAU else (label,)
        tables = [(w, dict(x)) for w, x in parts]
        zero = self._zero()
        out = {}
        for tr in {tr for _, t in tables for tr in t}:
            entries = [(w, t.get(tr, zero)) for w, t in tables]
            if v == "tbt-supinf":
                out[prefix + tr] = (sum((w * e[0] for w, e in entries), Fraction(0)),
                                    sum((w * e[1] for w, e in entries), Fraction(0)))
            else:
                out[prefix + tr] = frozenset(sum((w * c for (w, _), c in zip(entries, combo)), Fraction(0))
                                             for combo in product(*(sorted(e) for _, e in entries)))
        return self._pack(out)

    def _union(self, a, b):
        v = self.variant
        if v == "tbt-dis" or v == "fe":
            return a | b
        if v == "supinf":
            return (min(a[0], b[0]), max(a[1], b[1]))
        ta, tb = dict(a), dict(b)
        zero = self._zero()
        out = {}
        for tr in set(ta) | set(tb):
            x, y = ta.get(tr, zero), tb.get(tr, zero)
            if x is y:
                out[tr] = x
            else:
                out[tr] = (min(x[0], y[0]), max(x[1], y[1])) if v == "tbt-supinf" else x | y
        return self._pack(out)


class _Searcher:
    """Enumerates test behaviours by signature over a context of process states.

    The signature of a test node in context ``C`` is the tuple, over the
    sorted states of ``C``, of what the variant observes of the success
    maps.  Equal signatures are interchangeable, so one representative test
    is kept per signature.
    """

    def __init__(self, model: Nplts, branch: int, variant: str = "tbt-dis"):
        self.model = model
        self.branch = branch
        self.obs = _Observation(variant)
        self.omega = self.obs.of(frozenset({SUCCEED}))
        self.dead = self.obs.of(frozenset({EMPTY_MAP}))
        self.memo: dict = {}

    def successors(self, context: tuple, label: str) -> tuple:
        out = set()
        for s in context:
            for t in self.model.outgoing(s):
                if t.label == label:
                    out.update(t.target.support)
        return tuple(sorted(out))

    def fans(self, children: dict) -> list:
        """Dirac and half/half fans over distinct child signatures."""
        items = list(children.items())
        fans = [((Fraction(1), sig, tree),) for sig, tree in items]
        half = Fraction(1, 2)
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                fans.append(((half, items[i][0], items[i][1]), (half, items[j][0], items[j][1])))
        return fans

    def contribution(self, context: tuple, label: str, child_context: tuple, fan) -> tuple:
        """Per context state: what one test transition contributes, or None if it cannot fire."""
        index = {s: i for i, s in enumerate(child_context)}
        out = []
        for s in context:
            if label == TAU:
                out.append(self.obs.fan(TAU, [(q, sig[index[s]]) for q, sig, _ in fan]))
                continue
            acc = None
            for t in self.model.outgoing(s):
                if t.label != label:
                    continue
                parts = [(p * q, sig[index[x]]) for x, p in t.target.items for q, sig, _ in fan]
                got = self.obs.fan(label, parts)
                acc = got if acc is None else self.obs.union(acc, got)
            out.append(acc)
        return tuple(out)

    def build(self, context: tuple, depth: int, allow_tau: bool = False, stop=None) -> dict:
        """Signatures of tests of height ``depth`` over ``context``.

        With ``stop``, returns as soon as a signature satisfies it (the
        partial result is then not memoised).
        """
        key = (context, depth, allow_tau)
        if key in self.memo:
            return self.memo[key]
        found: dict = {}
        n = len(context)
        found[(self.omega,) * n] = _Tree("omega")
        found.setdefault((self.dead,) * n, _Tree("dead"))
        if depth > 0:
            options = []
            if allow_tau:
                children = self.build(context, depth - 1)
                for fan in self.fans(children):
                    options.append((self.contribution(context, TAU, context, fan), (TAU, fan)))
                for contrib, move in options:
                    sig = self._add(found, contrib, move)
                    if stop is not None and stop(sig):
                        return {sig: found[sig]}
            else:
                labels = sorted({t.label for s in context for t in self.model.outgoing(s)})
                seen = set()
                for label in labels:
                    child_context = self.successors(context, label)
                    children = self.build(child_context, depth - 1)
                    for fan in self.fans(children):
                        contrib = self.contribution(context, label, child_context, fan)
                        if contrib not in seen:
                            seen.add(contrib)
                            options.append((contrib, (label, fan)))
                # merged contributions of up to ``branch`` transitions, each
                # set of options visited in increasing index order; a merged
                # value keeps the smallest last index, which loses nothing
                frontier: dict = {(): ((), -1)}
                for _ in range(self.branch):
                    grown: dict = {}
                    for acc, (moves, last) in frontier.items():
                        for j in range(last + 1, len(options)):
                            contrib, move = options[j]
                            merged = self._merge(acc, contrib)
                            if merged not in grown or grown[merged][1] > j:
                                grown[merged] = (moves + (move,), j)
                    for merged, (moves, _) in grown.items():
                        sig = self._add(found, merged, *moves)
                        if stop is not None and stop(sig):
                            return {sig: found[sig]}
                    frontier = grown
        self.memo[key] = found
        return found

    def _merge(self, acc: tuple, contrib: tuple) -> tuple:
        if not acc:
            return contrib
        union, cache = self.obs.union, self.obs.unions
        out = []
        for a, b in zip(acc, contrib):
            if a is None or a == b:
                out.append(b)
            elif b is None:
                out.append(a)
            else:
                got = cache.get((a, b) if a < b else (b, a))
                out.append(union(a, b) if got is None else got)
        return tuple(out)

    def _add(self, found: dict, contrib: tuple, *moves) -> tuple:
        sig = tuple(self.dead if m is None else m for m in contrib)
        found.setdefault(sig, _Tree("node", moves))
        return sig


def _strip(tree: _Tree) -> _Tree:
    """Drop signatures from fans so the tree only holds structure."""
    if tree.kind != "node":
        return tree
    moves = []
    for label, fan in tree.moves:
        moves.append((label, tuple((p, _strip(child)) for p, _, child in fan)))
    return _Tree("node", tuple(moves))


def search_distinguishing_test(model: Nplts, s1: str, s2: str, variant: str, depth: int, branch: int,
                               initial_tau: bool = False) -> Nplts | None:
    """First test (in canonical order) distinguishing ``s1`` from ``s2``, or ``None``."""
    variant = normalise_variant(variant)
    if depth < 1 or branch < 1:
        raise ValueError("bounds must be at least 1")
    if TAU in model.alphabet:
        raise InvalidTest("process models must not use the internal action")
    searcher = _Searcher(model, branch, variant)
    context = tuple(sorted({s1, s2}))
    pos = {s: i for i, s in enumerate(context)}

    def differs(sig):
        return sig[pos[s1]] != sig[pos[s2]]

    for d in range(1, depth + 1):
        layers = [searcher.build(context, d, stop=differs)]
        if initial_tau:
            layers.append(searcher.build(context, d, allow_tau=True, stop=differs))
        for found in layers:
            for sig, tree in found.items():
                if differs(sig):
                    test = _to_test(_strip(tree), "found")
                    if check_pte(variant, model, s1, s2, [test]).equivalent:
                        raise AssertionError("search produced a test that does not distinguish")
                    return test
    return None


def check_pte_search(variant: str, model: Nplts, s1: str, s2: str, depth: int, branch: int,
                     initial_tau: bool = False) -> Verdict:
    variant = normalise_variant(variant)
    test = search_distinguishing_test(model, s1, s2, variant, depth, branch, initial_tau)
    if test is None:
        return Verdict(pte_relation_id(variant), True, bounded=True,
                       note=f"no distinguishing test up to depth {depth}, branching {branch}")
    return check_pte(variant, model, s1, s2, [test])
