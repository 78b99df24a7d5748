"""Verdicts shared by all checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


@dataclass(frozen=True)
class Witness:
    """Evidence that two states are distinguished.

    ``values`` holds exact numbers for the two sides in the order described by
    ``description``.
    """

    description: str
    event: Any = None
    side: int | None = None
    resolution_index: int | None = None
    values: tuple = ()
    test: Any = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"description": self.description}
        if self.event is not None:
            out["event"] = str(self.event)
        if self.side is not None:
            out["side"] = self.side
        if self.resolution_index is not None:
            out["resolution_index"] = self.resolution_index
        if self.values:
            out["values"] = [_jsonable(v) for v in self.values]
        if self.test is not None:
            from .dsl import serialize

            out["test"] = serialize(self.test)
        return out


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


@dataclass(frozen=True)
class Verdict:
    relation: str
    equivalent: bool
    witness: Witness | None = None
    bounded: bool = False
    note: str = ""
    relation_pairs: tuple = field(default=(), compare=False)

    def __bool__(self) -> bool:
        return self.equivalent

    @property
    def status(self) -> str:
        if self.equivalent:
            return "not-distinguished" if self.bounded else "equal"
        return "distinct"

    def to_json(self, with_relation: bool = False) -> dict:
        out: dict[str, Any] = {"relation": self.relation, "verdict": self.status, "bounded": self.bounded}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.note:
            out["note"] = self.note
        if with_relation and self.relation_pairs:
            out["pairs"] = [list(p) for p in self.relation_pairs]
        return out


def decimal_string(q: Fraction, digits: int = 6) -> str:
    """Decimal approximation computed with integer arithmetic only."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = (q.numerator * 10 ** digits * 2 + q.denominator) // (2 * q.denominator)
    whole, frac = divmod(scaled, 10 ** digits)
    text = f"{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")
    return sign + text


def show(q: Fraction) -> str:
    """Exact fraction with a decimal approximation alongside."""
    exact = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    approx = decimal_string(q)
    return exact if approx == exact else f"{exact} (~{approx})"


def pair_text(left: Fraction, right: Fraction, tag: str = "") -> str:
    """``"6/25 vs 21/100 (max, ~0.24 vs ~0.21)"``: exact values first."""
    def exact(q):
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    lead = f"{tag}, " if tag else ""
    return f"{exact(left)} vs {exact(right)} ({lead}~{decimal_string(left)} vs ~{decimal_string(right)})"


def format_set_of_states(items) -> str:
    return "{" + ",".join(sorted(items)) + "}"
