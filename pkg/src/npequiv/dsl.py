"""Reader and writer for the ``.nplts`` text format.

::

    nplts Example {
      designated s1;
      state s1 { a -> { t: 1/2, u: 0.5 }; }
      state t { }
      state u { }
    }

Test models may additionally mark states with ``success o3, o4;`` and use the
internal action ``tau``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .model import Nplts, validate

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<sym>[{}:;,/])
    """,
    re.VERBOSE,
)

KEYWORDS = {"nplts", "state", "designated", "success"}


class DslSyntaxError(Exception):
    """Parse failure with 1-based position and the tokens that would have fit."""

    def __init__(self, line: int, column: int, expected: list[str], found: str):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"line {line}, column {column}: expected {' or '.join(expected)}, found {found!r}")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(line, pos - line_start + 1, ["a token"], text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: list[str]):
        t = self.peek()
        raise DslSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def take(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            self.fail([repr(text) if text else kind])
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.peek()
        if t.kind != "ident":
            self.fail(["identifier"])
        self.i += 1
        return t.text

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def prob(self) -> Fraction:
        t = self.peek()
        if t.kind != "number":
            self.fail(["probability"])
        self.i += 1
        if "." in t.text:
            return Fraction(t.text)
        if self.at("sym", "/"):
            self.i += 1
            den = self.take("number")
            if "." in den.text or int(den.text) == 0:
                raise DslSyntaxError(den.line, den.col, ["positive integer denominator"], den.text)
            return Fraction(int(t.text), int(den.text))
        return Fraction(int(t.text))

    def model(self) -> dict:
        self.take("ident", "nplts")
        name = self.ident()
        self.take("sym", "{")
        raw = {"name": name, "states": [], "transitions": [], "designated": [], "success": []}
        while not self.at("sym", "}"):
            if self.at("ident", "designated") or self.at("ident", "success"):
                key = self.ident()
                raw[key].append(self.ident())
                while self.at("sym", ","):
                    self.i += 1
                    raw[key].append(self.ident())
                self.take("sym", ";")
            elif self.at("ident", "state"):
                self.i += 1
                state = self.ident()
                raw["states"].append(state)
                self.take("sym", "{")
                while not self.at("sym", "}"):
                    raw["transitions"].append(self.transition(state))
                self.take("sym", "}")
            else:
                self.fail(["'state'", "'designated'", "'success'", "'}'"])
        self.take("sym", "}")
        if not self.at("eof"):
            self.fail(["end of input"])
        return raw

    def transition(self, source: str):
        label = self.ident()
        self.take("arrow")
        self.take("sym", "{")
        target: dict[str, Fraction] = {}
        while True:
            tgt = self.ident()
            self.take("sym", ":")
            target[tgt] = target.get(tgt, Fraction(0)) + self.prob()
            if self.at("sym", ","):
                self.i += 1
                continue
            break
        self.take("sym", "}")
        self.take("sym", ";")
        return (source, label, target)


def parse_raw(text: str) -> dict:
    """Parse without validating; useful for reporting every semantic issue."""
    return _Parser(text).model()


def parse_dsl(text: str) -> Nplts:
    return validate(parse_raw(text))


def load(path) -> Nplts:
    return parse_dsl(Path(path).read_text(encoding="utf-8"))


def format_prob(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def serialize(model: Nplts) -> str:
    lines = [f"nplts {model.name} {{"]
    if model.designated:
        lines.append(f"  designated {', '.join(model.designated)};")
    if model.success:
        lines.append(f"  success {', '.join(sorted(model.success))};")
    for s in model.states:
        ts = model.outgoing(s)
        if not ts:
            lines.append(f"  state {s} {{ }}")
            continue
        lines.append(f"  state {s} {{")
        for t in ts:
            body = ", ".join(f"{k}: {format_prob(v)}" for k, v in t.target.items)
            lines.append(f"    {t.label} -> {{ {body} }};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
