"""Exact linear feasibility by substitution and Fourier-Motzkin elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

OPS = ("==", "<=", ">=")


@dataclass(frozen=True)
class Constraint:
    """``sum(coefficients[i] * p_i) op rhs``."""

    coefficients: tuple[Fraction, ...]
    op: str
    rhs: Fraction

    def satisfied(self, values: Sequence[Fraction]) -> bool:
        lhs = sum((c * v for c, v in zip(self.coefficients, values)), Fraction(0))
        return {"==": lhs == self.rhs, "<=": lhs <= self.rhs, ">=": lhs >= self.rhs}[self.op]


@dataclass
class LinearFeasibilityProblem:
    size: int
    constraints: list[Constraint] = field(default_factory=list)

    @classmethod
    def convex(cls, size: int) -> "LinearFeasibilityProblem":
        """Problem over coefficients ``p_1..p_n`` with ``p_i >= 0`` and ``sum p_i = 1``."""
        prob = cls(size)
        prob.add([1] * size, "==", 1)
        for i in range(size):
            prob.add([1 if j == i else 0 for j in range(size)], ">=", 0)
        return prob

    def add(self, coefficients: Sequence, op: str, rhs) -> None:
        if op not in OPS:
            raise ValueError(f"unknown operator {op!r}")
        if len(coefficients) != self.size:
            raise ValueError(f"expected {self.size} coefficients")
        for c in list(coefficients) + [rhs]:
            if not isinstance(c, (int, Fraction)) or isinstance(c, bool):
                raise TypeError("coefficients must be exact rationals")
        self.constraints.append(Constraint(tuple(Fraction(c) for c in coefficients), op, Fraction(rhs)))


# A row is (dict var -> coefficient, rhs) meaning sum <= rhs (or == rhs for equalities).


def _normalise(row: dict, rhs: Fraction):
    row = {k: v for k, v in row.items() if v}
    if not row:
        return (), rhs
    scale = abs(row[min(row)])
    return tuple(sorted((k, v / scale) for k, v in row.items())), rhs / scale


def _substitute(row: dict, rhs: Fraction, var: int, expr: dict, const: Fraction):
    """Replace ``var`` by ``const + sum(expr)`` in ``row <= rhs``."""
    c = row.get(var)
    if not c:
        return row, rhs
    out = {k: v for k, v in row.items() if k != var}
    for k, v in expr.items():
        out[k] = out.get(k, Fraction(0)) + c * v
    return out, rhs - c * const


def lp_feasible(problem: LinearFeasibilityProblem) -> tuple[Fraction, ...] | None:
    """Return an exact satisfying assignment, or ``None`` when infeasible."""
    equalities: list[tuple[dict, Fraction]] = []
    inequalities: list[tuple[dict, Fraction]] = []
    for con in problem.constraints:
        row = {i: c for i, c in enumerate(con.coefficients) if c}
        if con.op == "==":
            equalities.append((row, con.rhs))
        elif con.op == "<=":
            inequalities.append((row, con.rhs))
        else:
            inequalities.append(({i: -c for i, c in row.items()}, -con.rhs))

    # Gaussian substitution of equalities, in the order given.
    solved: list[tuple[int, dict, Fraction]] = []
    pending = list(equalities)
    while pending:
        row, rhs = pending.pop(0)
        row = {k: v for k, v in row.items() if v}
        if not row:
            if rhs != 0:
                return None
            continue
        var = min(row)
        coef = row[var]
        expr = {k: -v / coef for k, v in row.items() if k != var}
        const = rhs / coef
        solved.append((var, expr, const))
        pending = [_substitute(r, b, var, expr, const) for r, b in pending]
        inequalities = [_substitute(r, b, var, expr, const) for r, b in inequalities]

    # Fourier-Motzkin over the remaining variables.
    current = _dedupe(inequalities)
    if current is None:
        return None
    eliminated: list[tuple[int, list, list]] = []
    while True:
        variables = sorted({k for row, _ in current for k, _ in row})
        if not variables:
            break
        var = min(variables, key=lambda v: _cost(current, v))
        upper, lower, rest = [], [], []
        for row, rhs in current:
            c = dict(row).get(var, Fraction(0))
            (upper if c > 0 else lower if c < 0 else rest).append((dict(row), rhs))
        eliminated.append((var, upper, lower))
        combined = list((dict(r), b) for r, b in rest)
        for ur, ub in upper:
            for lr, lb in lower:
                cu, cl = ur[var], -lr[var]
                row: dict = {}
                for k, v in ur.items():
                    row[k] = row.get(k, Fraction(0)) + v * cl
                for k, v in lr.items():
                    row[k] = row.get(k, Fraction(0)) + v * cu
                row.pop(var, None)
                combined.append((row, ub * cl + lb * cu))
        current = _dedupe(combined)
        if current is None:
            return None

    values: dict[int, Fraction] = {}
    for var, upper, lower in reversed(eliminated):
        hi = min((_bound(r, b, var, values) for r, b in upper), default=None)
        lo = max((_bound(r, b, var, values) for r, b in lower), default=None)
        values[var] = lo if lo is not None else hi if hi is not None else Fraction(0)
    for var, expr, const in reversed(solved):
        values[var] = const + sum((c * values.get(k, Fraction(0)) for k, c in expr.items()), Fraction(0))
    result = tuple(values.get(i, Fraction(0)) for i in range(problem.size))
    if not all(c.satisfied(result) for c in problem.constraints):
        raise ArithmeticError("back-substitution produced an infeasible point")
    return result


def _cost(rows, var) -> int:
    pos = sum(1 for row, _ in rows if dict(row).get(var, 0) > 0)
    neg = sum(1 for row, _ in rows if dict(row).get(var, 0) < 0)
    return pos * neg - pos - neg


def _bound(row: dict, rhs: Fraction, var: int, values: dict) -> Fraction:
    rest = sum((c * values.get(k, Fraction(0)) for k, c in row.items() if k != var), Fraction(0))
    return (rhs - rest) / row[var]


def _dedupe(rows):
    """Normalise rows, drop dominated duplicates; ``None`` if a constant row fails."""
    best: dict[tuple, Fraction] = {}
    for row, rhs in rows:
        key, b = _normalise(row, rhs)
        if not key:
            if b < 0:
                return None
            continue
        if key not in best or b < best[key]:
            best[key] = b
    return [(key, b) for key, b in sorted(best.items())]
