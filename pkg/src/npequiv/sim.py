"""Simulation preorders and bisimulation equivalences.

Both are computed as greatest fixpoints.  Simulations quantify over the sets
closed under the relation being built; a set is closed exactly when it is
upward closed for the reflexive-transitive closure of the relation, so only
its intersection with the supports at hand matters.
"""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import combinations

from .lp import LinearFeasibilityProblem, lp_feasible
from .model import Nplts, Transition
from .verdict import Verdict, Witness, format_set_of_states

DEFAULT_STATE_CAP = 20
SIM_FAMILIES = ("ps", "pcs", "pfs", "prs")
SIM_VARIANTS = ("dis", "plain", "sup")
BISIM_VARIANTS = ("dis", "plain", "supinf")


class TooManyStates(Exception):
    pass


class CtDisUnsupported(Exception):
    """Randomized-scheduler variant with no finite characterisation here."""


def state_cap() -> int:
    raw = os.environ.get("NPEQUIV_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


def sim_relation_id(family: str, variant: str) -> str:
    return {"dis": f"{family}-dis", "plain": family, "sup": f"{family}-sup"}[variant]


def bisim_relation_id(variant: str) -> str:
    return {"dis": "pb-dis", "plain": "pb", "supinf": "pb-supinf"}[variant]


# ------------------------------------------------------------ closed sets


def image(relation, members) -> set:
    return {t for (s, t) in relation if s in members}


def closed_sets(relation, states) -> list[frozenset]:
    """Every subset ``X`` of ``states`` with ``relation(X) ⊆ X`` (subset scan)."""
    states = sorted(states)
    cap = state_cap()
    if len(states) > cap:
        raise TooManyStates(f"{len(states)} states exceed the cap of {cap}")
    rel = {(s, t) for (s, t) in relation}
    out = []
    for k in range(len(states) + 1):
        for combo in combinations(states, k):
            members = frozenset(combo)
            if image(rel, members) <= members:
                out.append(members)
    return out


def _upward(relation, states) -> dict[str, frozenset]:
    """For each state, the states reachable through the relation (itself included)."""
    succ: dict[str, set] = {s: set() for s in states}
    for s, t in relation:
        succ[s].add(t)
    out = {}
    for s in states:
        seen = {s}
        stack = [s]
        while stack:
            for t in succ[stack.pop()]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        out[s] = frozenset(seen)
    return out


def _closed_traces(up: dict, universe) -> list[frozenset]:
    """Intersections with ``universe`` of all closed sets."""
    universe = frozenset(universe)
    cap = state_cap()
    if len(universe) > cap:
        raise TooManyStates(f"{len(universe)} relevant states exceed the cap of {cap}")
    generators = {up[v] & universe for v in universe}
    found = {frozenset()}
    for g in generators:
        found |= {f | g for f in found}
    return sorted(found, key=lambda f: (len(f), sorted(f)))


# ----------------------------------------------------------- simulation


def _init_ok(model: Nplts, family: str, s: str, t: str) -> bool:
    a, b = model.init(s), model.init(t)
    if family == "ps":
        return True
    if family == "pcs":
        return bool(a) or not b
    if family == "pfs":
        return b <= a
    return a == b


def _by_label(model: Nplts, s: str) -> dict[str, list[Transition]]:
    out: dict[str, list[Transition]] = {}
    for t in model.outgoing(s):
        out.setdefault(t.label, []).append(t)
    return out


def _hull_covers(targets: list, point, geq: bool) -> bool:
    """Whether some convex combination of ``targets`` (vectors) equals (or
    dominates, with ``geq``) ``point`` in every coordinate."""
    n = len(targets)
    if n == 0:
        return False
    problem = LinearFeasibilityProblem.convex(n)
    for i, value in enumerate(point):
        problem.add([vec[i] for vec in targets], ">=" if geq else "==", value)
    return lp_feasible(problem) is not None


def _sim_step_ok(model, variant, ct, s, t, up) -> tuple[bool, str]:
    ts, tt = _by_label(model, s), _by_label(model, t)
    universe = set()
    for group in (ts, tt):
        for trs in group.values():
            for tr in trs:
                universe.update(tr.target.support)
    sets = _closed_traces(up, universe)
    for label in sorted(ts):
        left = ts[label]
        right = tt.get(label, [])
        if not right:
            return False, f"{t} has no {label}-transition"
        if variant == "dis":
            for d1 in left:
                point = [d1.target.mass(x) for x in sets]
                vectors = [[d2.target.mass(x) for x in sets] for d2 in right]
                if ct:
                    ok = _hull_covers(vectors, point, geq=True)
                else:
                    ok = any(all(a <= b for a, b in zip(point, vec)) for vec in vectors)
                if not ok:
                    return False, f"{label}-transition of {s} unmatched"
        else:
            for x in sets:
                best = max(d2.target.mass(x) for d2 in right)
                for d1 in left:
                    need = d1.target.mass(x)
                    if variant == "plain" and ct:
                        ok = _hull_covers([[d2.target.mass(x)] for d2 in right], [need], geq=True)
                    else:
                        ok = need <= best
                    if not ok:
                        return False, f"{label}-mass of {format_set_of_states(x)}: {need} exceeds {best}"
    return True, ""


def largest_simulation(model: Nplts, family: str, variant: str, roots, ct: bool = False) -> set:
    states = model.reachable(roots)
    relation = {(s, t) for s in states for t in states if _init_ok(model, family, s, t)}
    while True:
        up = _upward(relation, states)
        drop = {(s, t) for (s, t) in relation if s != t and not _sim_step_ok(model, variant, ct, s, t, up)[0]}
        if not drop:
            return relation
        relation -= drop


def check_simulation(family: str, variant: str, model: Nplts, s1: str, s2: str, ct: bool = False) -> Verdict:
    """Kernel verdict for ``(s1, s2)`` with the largest preorder attached."""
    if family not in SIM_FAMILIES or variant not in SIM_VARIANTS:
        raise ValueError(f"unknown simulation {family}/{variant}")
    rel_id = sim_relation_id(family, variant) + ("^ct" if ct else "")
    if ct and variant == "sup":
        ct = False
    relation = largest_simulation(model, family, variant, [s1, s2], ct)
    pairs = tuple(sorted(relation))
    if (s1, s2) in relation and (s2, s1) in relation:
        return Verdict(rel_id, True, relation_pairs=pairs)
    s, t = (s1, s2) if (s1, s2) not in relation else (s2, s1)
    if not _init_ok(model, family, s, t):
        reason = f"initial actions {format_set_of_states(model.init(s))} vs {format_set_of_states(model.init(t))}"
    else:
        final = relation
        up = _upward(final, model.reachable([s1, s2]))
        reason = _sim_step_ok(model, variant, ct, s, t, up)[1] or "not related in the greatest fixpoint"
    return Verdict(rel_id, False, Witness(f"{s} is not simulated by {t}: {reason}"), relation_pairs=pairs)


# ---------------------------------------------------------- bisimulation


def _signature(model: Nplts, state: str, block_of: dict, variant: str, groups: list) -> object:
    by_label = _by_label(model, state)
    if variant == "dis":
        return frozenset(
            (label, tuple(sorted(_class_vector(tr, block_of).items())))
            for label, trs in by_label.items() for tr in trs
        )
    sig = []
    for label in sorted(by_label):
        for g in groups:
            masses = [sum((p for x, p in tr.target.items if block_of[x] in g), Fraction(0))
                      for tr in by_label[label]]
            if variant == "plain":
                sig.append((label, g, frozenset(masses)))
            else:
                sig.append((label, g, min(masses), max(masses)))
    return (frozenset(by_label), tuple(sig))


def _class_vector(tr: Transition, block_of: dict) -> dict:
    vec: dict = {}
    for x, p in tr.target.items:
        vec[block_of[x]] = vec.get(block_of[x], Fraction(0)) + p
    return vec


def _ct_related(model: Nplts, s: str, t: str, block_of: dict, variant: str, groups: list) -> bool:
    """Equal convex hulls (per action) of class-mass vectors, or of group masses."""
    ls, lt = _by_label(model, s), _by_label(model, t)
    if set(ls) != set(lt):
        return False
    blocks = sorted(set(block_of.values()))
    for label in ls:
        for a, b in ((ls[label], lt[label]), (lt[label], ls[label])):
            if variant == "dis":
                vectors = [[_class_vector(tr, block_of).get(k, Fraction(0)) for k in blocks] for tr in b]
                for tr in a:
                    point = [_class_vector(tr, block_of).get(k, Fraction(0)) for k in blocks]
                    if not _hull_covers(vectors, point, geq=False):
                        return False
            else:
                for g in groups:
                    masses = [[sum((p for x, p in tr.target.items if block_of[x] in g), Fraction(0))] for tr in b]
                    for tr in a:
                        need = [sum((p for x, p in tr.target.items if block_of[x] in g), Fraction(0))]
                        if not _hull_covers(masses, need, geq=False):
                            return False
    return True


def largest_bisimulation(model: Nplts, variant: str, roots, ct: bool = False) -> list[frozenset]:
    """Partition of the states reachable from ``roots`` into bisimilarity classes."""
    states = model.reachable(roots)
    block_of = {s: 0 for s in states}
    while True:
        new_block: dict[str, tuple] = {}
        for b in sorted(set(block_of.values())):
            members = sorted(s for s in states if block_of[s] == b)
            groups = _groups(model, members, block_of) if variant != "dis" else []
            if ct and variant != "supinf":
                parts: list[list[str]] = []
                for s in members:
                    for part in parts:
                        if _ct_related(model, s, part[0], block_of, variant, groups):
                            part.append(s)
                            break
                    else:
                        parts.append([s])
                for i, part in enumerate(parts):
                    for s in part:
                        new_block[s] = (b, i)
            else:
                keyed: dict = {}
                for s in members:
                    keyed.setdefault(_signature(model, s, block_of, variant, groups), []).append(s)
                ordered = sorted(keyed.values())
                for i, part in enumerate(ordered):
                    for s in part:
                        new_block[s] = (b, i)
        names = {k: i for i, k in enumerate(sorted(set(new_block.values())))}
        refined = {s: names[new_block[s]] for s in states}
        if len(names) == len(set(block_of.values())):
            break
        block_of = refined
    classes: dict[int, list] = {}
    for s in states:
        classes.setdefault(block_of[s], []).append(s)
    return sorted((frozenset(c) for c in classes.values()), key=lambda c: sorted(c))


def _groups(model: Nplts, members, block_of) -> list[frozenset]:
    touched = sorted({block_of[x] for s in members for tr in model.outgoing(s) for x in tr.target.support})
    cap = state_cap()
    if len(touched) > cap:
        raise TooManyStates(f"{len(touched)} classes exceed the cap of {cap}")
    return [frozenset(c) for k in range(1, len(touched) + 1) for c in combinations(touched, k)]


def check_bisimulation(variant: str, model: Nplts, s1: str, s2: str, ct: bool = False) -> Verdict:
    if variant not in BISIM_VARIANTS:
        raise ValueError(f"unknown bisimulation variant {variant!r}")
    rel_id = bisim_relation_id(variant) + ("^ct" if ct else "")
    partition = largest_bisimulation(model, variant, [s1, s2], ct and variant != "supinf")
    pairs = tuple(sorted((s, t) for c in partition for s in c for t in c))
    same = any(s1 in c and s2 in c for c in partition)
    if same:
        return Verdict(rel_id, True, relation_pairs=pairs)
    return Verdict(rel_id, False, Witness(_split_reason(model, variant, s1, s2)), relation_pairs=pairs)


def _split_reason(model: Nplts, variant: str, s1: str, s2: str) -> str:
    a, b = model.init(s1), model.init(s2)
    if a != b:
        return f"{s1} and {s2} enable {format_set_of_states(a)} vs {format_set_of_states(b)}"
    return f"{s1} and {s2} are separated during {variant} partition refinement"


# ------------------------------------------------------ randomized schedulers


def check_ct_variant(kind: str, variant: str, model: Nplts, s1: str, s2: str, family: str = "ps") -> Verdict:
    """Randomized-scheduler (bi)simulation: transitions may be matched by
    convex combinations of equally labelled transitions."""
    if kind == "bisim":
        return check_bisimulation(variant, model, s1, s2, ct=True)
    if kind == "sim":
        return check_simulation(family, variant, model, s1, s2, ct=True)
    raise CtDisUnsupported(f"no randomized-scheduler variant for {kind!r}")
