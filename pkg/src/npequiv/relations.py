"""Registry of relation ids and a single dispatch entry point."""

from __future__ import annotations

from dataclasses import dataclass

from .model import Nplts
from .sim import (
    BISIM_VARIANTS,
    SIM_FAMILIES,
    SIM_VARIANTS,
    CtDisUnsupported,
    bisim_relation_id,
    check_bisimulation,
    check_simulation,
    sim_relation_id,
)
from .testing import PTE_VARIANTS, check_pte, check_pte_search, pte_relation_id
from .trace_equiv import SCHEMAS, TraceAnalyzer, relation_id
from .events import FAMILIES
from .verdict import Verdict


@dataclass(frozen=True)
class RelationInfo:
    id: str
    kind: str  # trace | testing | simulation | bisimulation
    family: str
    schema: str


def _registry() -> dict[str, RelationInfo]:
    out: dict[str, RelationInfo] = {}
    for family in FAMILIES:
        for schema in SCHEMAS:
            rid = relation_id(family, schema)
            out[rid] = RelationInfo(rid, "trace", family, schema)
    for variant in PTE_VARIANTS:
        rid = pte_relation_id(variant)
        out[rid] = RelationInfo(rid, "testing", "pte", variant)
    for family in SIM_FAMILIES:
        for variant in SIM_VARIANTS:
            rid = sim_relation_id(family, variant)
            out[rid] = RelationInfo(rid, "simulation", family, variant)
    for variant in BISIM_VARIANTS:
        rid = bisim_relation_id(variant)
        out[rid] = RelationInfo(rid, "bisimulation", "pb", variant)
    return out


RELATIONS = _registry()
ALIASES = {"pb-sup": "pb-supinf", "pte-forall-exists": "pte-fe"}
for _fam in SIM_FAMILIES:
    ALIASES[f"{_fam}-supinf"] = f"{_fam}-sup"


class UnknownRelation(ValueError):
    pass


def lookup(relation: str) -> RelationInfo:
    rid = ALIASES.get(relation, relation)
    if rid not in RELATIONS:
        raise UnknownRelation(f"unknown relation {relation!r}; known: {', '.join(RELATIONS)}")
    return RELATIONS[rid]


def _rename(verdict: Verdict, rid: str, note: str) -> Verdict:
    return Verdict(rid, verdict.equivalent, verdict.witness, verdict.bounded,
                   "; ".join(x for x in (verdict.note, note) if x), verdict.relation_pairs)


def check(relation: str, model: Nplts, s1: str, s2: str, *, ct: bool = False, depth: int | None = None,
          suite=None, test_depth: int = 3, test_branch: int = 3, initial_tau: bool = False,
          analyzer: TraceAnalyzer | None = None) -> Verdict:
    """Decide ``relation`` for the pair ``(s1, s2)`` of ``model``.

    Testing relations use ``suite`` when given, otherwise a bounded search
    for a distinguishing test.  ``analyzer`` lets callers share trace caches.
    """
    info = lookup(relation)
    for s in (s1, s2):
        if not model.has_state(s):
            raise KeyError(f"unknown state '{s}'")
    if info.kind == "trace":
        schema = info.schema
        if ct:
            if schema == "dis":
                raise CtDisUnsupported(f"{info.id}^ct has no finite characterisation")
            schema = "supinf"
        an = analyzer or TraceAnalyzer(model, s1, s2, depth)
        verdict = an.check(info.family, schema)
        if ct:
            return _rename(verdict, info.id + "^ct", f"decided as {relation_id(info.family, 'supinf')}")
        return verdict
    if info.kind == "testing":
        variant = info.schema
        if ct:
            variant = "tbt-supinf" if variant == "tbt" else "supinf"
        if suite is not None:
            verdict = check_pte(variant, model, s1, s2, suite)
        else:
            verdict = check_pte_search(variant, model, s1, s2, test_depth, test_branch, initial_tau)
        if ct:
            return _rename(verdict, info.id + "^ct", f"decided as {pte_relation_id(variant)}")
        return verdict
    if info.kind == "simulation":
        return check_simulation(info.family, info.schema, model, s1, s2, ct=ct)
    return check_bisimulation(info.schema, model, s1, s2, ct=ct)
