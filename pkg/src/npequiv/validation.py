"""Input checks shared by the estimator front end."""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

from .dsl import load, parse_dsl
from .model import Nplts, validate
from .relations import lookup


def check_model(model) -> Nplts:
    """Accept an ``Nplts``, a raw mapping, DSL text or a path to a model file."""
    if isinstance(model, Nplts):
        return model
    if isinstance(model, Mapping):
        return validate(model)
    if isinstance(model, Path):
        return load(model)
    if isinstance(model, str):
        if model.lstrip().startswith("nplts"):
            return parse_dsl(model)
        return load(model)
    raise TypeError(f"expected a model, mapping, DSL text or path, got {type(model).__name__}")


def check_pairs(pairs, model: Nplts) -> list[tuple[str, str]]:
    """Pairs of state ids; a bare pair is promoted to a one-element list."""
    if isinstance(pairs, tuple) and len(pairs) == 2 and all(isinstance(x, str) for x in pairs):
        pairs = [pairs]
    out = []
    for item in pairs:
        if isinstance(item, str) or len(item) != 2:
            raise ValueError(f"expected (state, state) pairs, got {item!r}")
        s1, s2 = item
        for s in (s1, s2):
            if not model.has_state(s):
                raise ValueError(f"unknown state '{s}' in model '{model.name}'")
        out.append((s1, s2))
    if not out:
        raise ValueError("no pairs given")
    return out


def check_relation(relation: str) -> str:
    return lookup(relation).id


def check_bound(value, name: str):
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a positive integer or None, got {value!r}")
    return value
