"""Parsing of the expression language and of ``.vp`` problem files.

Expression grammar (whitespace-insensitive, ``#`` comments to end of line)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?            # right-associative
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-u^2`` is ``-(u^2)``; the
exponent must reduce to an integer constant.  A jet coordinate is written
as a dependent name, an underscore and the list of differentiation
variables, e.g. ``u1_x1x1x2``.  The variable list is sorted on input, so
``u_x2x1`` and ``u_x1x2`` name the same coordinate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    BadBounds,
    ExpressionSyntaxError,
    MissingKey,
    MissingSection,
    OrderExceeded,
    ParseError,
    UnknownIdentifier,
)
from .expr import FUNCTIONS, Constant, Expression, IndepVar, JetCoord, free_coordinates, func, power, simplify, to_text
from .jet import JetCoordinate, JetSpec
from .numerics import BoxDomain

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Vocabulary:
    """Names accepted for a jet space: the declared names, the canonical
    ``x<i>`` / ``u<j>``, and the aliases ``x`` (n = 1) and ``u`` (m = 1)."""

    def __init__(self, spec: JetSpec):
        self.spec = spec
        self.indep = {}
        self.dep = {}
        for i in range(1, spec.n + 1):
            self.indep[f"x{i}"] = i
        for j in range(1, spec.m + 1):
            self.dep[f"u{j}"] = j
        if spec.n == 1:
            self.indep["x"] = 1
        if spec.m == 1:
            self.dep["u"] = 1
        for i, name in enumerate(spec.indep_names or (), 1):
            self.indep[name] = i
        for j, name in enumerate(spec.dep_names or (), 1):
            self.dep[name] = j
        clash = set(self.indep) & set(self.dep)
        if clash:
            raise ParseError(f"names used for both independent and dependent variables: {sorted(clash)}")
        # longest names first so that x10 wins over x1 when splitting suffixes
        self._indep_sorted = sorted(self.indep, key=len, reverse=True)

    def split_suffix(self, suffix: str):
        """Decompose a derivative suffix into independent-variable indices,
        or None if it cannot be done."""

        def go(rest):
            if not rest:
                return []
            for name in self._indep_sorted:
                if rest.startswith(name):
                    tail = go(rest[len(name):])
                    if tail is not None:
                        return [self.indep[name]] + tail
            return None

        return go(suffix)

    def resolve(self, name: str, offset: int) -> Expression:
        if name in FUNCTIONS:
            raise ExpressionSyntaxError(f"function {name!r} needs an argument list", offset)
        base, _, suffix = name.partition("_")
        if not suffix:
            if name in self.indep:
                return IndepVar(self.indep[name])
            if name in self.dep:
                return JetCoord(JetCoordinate(self.dep[name], (0,) * self.spec.n))
            raise UnknownIdentifier(f"unknown identifier {name!r} (at offset {offset})")
        if base not in self.dep:
            raise UnknownIdentifier(f"unknown dependent variable {base!r} in {name!r} (at offset {offset})")
        axes = self.split_suffix(suffix)
        if axes is None:
            raise UnknownIdentifier(f"cannot read derivative suffix {suffix!r} of {name!r} (at offset {offset})")
        if len(axes) > self.spec.s:
            raise OrderExceeded(f"{name!r} has order {len(axes)} > declared order {self.spec.s} (at offset {offset})")
        k = [0] * self.spec.n
        for i in axes:
            k[i - 1] += 1
        return JetCoord(JetCoordinate(self.dep[base], tuple(k)))


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary):
        self.tokens = tokenize(text)
        self.pos = 0
        self.vocab = vocab

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind == "end":
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", t.offset)
        return self.advance()

    def parse(self) -> Expression:
        if self.tok.kind == "end":
            raise ExpressionSyntaxError("empty expression", self.tok.offset)
        e = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            operand = self.unary()
            return -operand if op == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            at = self.advance().offset
            exponent = simplify(self.unary())
            if not isinstance(exponent, Constant) or not exponent.value.is_integer():
                raise ExpressionSyntaxError("exponent must be an integer constant", at + 1)
            return power(base, int(exponent.value))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Constant(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(t.text, arg)
            return self.vocab.resolve(t.text, t.offset)
        if t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"unexpected {found}", t.offset)


def parse_expression(text: str, vocab: JetSpec | Vocabulary) -> Expression:
    """Parse ``text`` against the names of a jet space."""
    if not text.isascii():
        bad = next(i for i, ch in enumerate(text) if not ch.isascii())
        raise ExpressionSyntaxError("only ASCII input is supported", bad)
    if isinstance(vocab, JetSpec):
        vocab = Vocabulary(vocab)
    return _Parser(text, vocab).parse()


# -- problem files -------------------------------------------------------------

REQUIRED_SECTIONS = ("problem", "domain", "candidate")
_SECTION_RE = re.compile(r"\[\s*([A-Za-z_]+)\s*\]\Z")


@dataclass(frozen=True)
class Entry:
    value: str
    line: int


@dataclass(frozen=True)
class ProblemSource:
    text: str
    sections: dict  # name -> {key: Entry}
    section_lines: dict


def read_sections(text: str) -> ProblemSource:
    sections = {}
    section_lines = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1).lower()
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            section_lines[current] = lineno
            continue
        if current is None:
            raise ParseError("key/value line before any [section]", lineno)
        key, eq, value = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = Entry(value.strip(), lineno)
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            raise MissingSection(f"missing section [{name}]")
    return ProblemSource(text, sections, section_lines)


def _require(src: ProblemSource, section: str, key: str) -> Entry:
    try:
        return src.sections[section][key]
    except KeyError:
        raise MissingKey(f"missing key {key!r} in [{section}]", src.section_lines.get(section)) from None


def _int(entry: Entry, what: str) -> int:
    try:
        return int(entry.value)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {entry.value!r}", entry.line) from None


def _float(text: str, what: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{what} must be a number, got {text!r}", line) from None


def _expression(entry: Entry, spec: JetSpec) -> Expression:
    try:
        return parse_expression(entry.value, spec)
    except ParseError as exc:
        exc.line = entry.line
        raise


def parse_problem(text: str):
    """Parse a ``.vp`` problem file into a :class:`varcond.analysis.Problem`.

    Missing ``[numerics]`` keys take the defaults grid = 9 per axis,
    quad_nodes = 16, tol_pd = 1e-9, tol_residual = 1e-7, seed = 42.
    """
    from .analysis import DEFAULT_GRID, Numerics, Problem

    src = read_sections(text)
    indep_e = _require(src, "problem", "independent")
    dep_e = _require(src, "problem", "dependent")
    order_e = _require(src, "problem", "order")
    lag_e = _require(src, "problem", "lagrangian")
    indep = tuple(indep_e.value.split())
    dep = tuple(dep_e.value.split())
    if not indep:
        raise ParseError("no independent variables declared", indep_e.line)
    if not dep:
        raise ParseError("no dependent variables declared", dep_e.line)
    s = _int(order_e, "order")
    if s < 1:
        raise ParseError(f"order must be >= 1, got {s}", order_e.line)
    try:
        spec = JetSpec(len(indep), len(dep), s, indep, dep)
        Vocabulary(spec)
    except ValueError as exc:
        raise ParseError(str(exc), indep_e.line) from None
    lagrangian = _expression(lag_e, spec)

    bounds = []
    for name in indep:
        entry = _require(src, "domain", name)
        parts = entry.value.split()
        if len(parts) != 2:
            raise ParseError(f"domain of {name} needs two numbers 'a b', got {entry.value!r}", entry.line)
        a, b = (_float(v, f"bound of {name}", entry.line) for v in parts)
        if not a < b:
            raise BadBounds(f"domain of {name}: lower bound {a} must be < upper bound {b}", entry.line)
        bounds.append((a, b))
    extra = set(src.sections["domain"]) - set(indep)
    if extra:
        key = sorted(extra)[0]
        raise ParseError(f"[domain] names unknown variable {key!r}", src.sections["domain"][key].line)
    domain = BoxDomain(tuple(bounds))

    candidate = []
    for name in dep:
        entry = _require(src, "candidate", name)
        e = _expression(entry, spec)
        if free_coordinates(e):
            raise ParseError(f"candidate for {name} must depend on {', '.join(indep)} only", entry.line)
        candidate.append(e)

    num = src.sections.get("numerics", {})
    known = {"grid", "quad_nodes", "tol_pd", "tol_residual", "seed"}
    for key, entry in num.items():
        if key not in known:
            raise ParseError(f"unknown [numerics] key {key!r}", entry.line)
    grid = (DEFAULT_GRID,) * spec.n
    if "grid" in num:
        grid = parse_grid(num["grid"].value.replace(",", " ").split(), spec.n, num["grid"].line)
    kwargs = {"grid": grid}
    if "quad_nodes" in num:
        kwargs["quad_nodes"] = _int(num["quad_nodes"], "quad_nodes")
    if "seed" in num:
        kwargs["seed"] = _int(num["seed"], "seed")
    for key in ("tol_pd", "tol_residual"):
        if key in num:
            kwargs[key] = _float(num[key].value, key, num[key].line)
    try:
        numerics = Numerics(**kwargs)
        return Problem(spec, lagrangian, domain, tuple(candidate), numerics)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_grid(parts, n: int, line=None) -> tuple[int, ...]:
    """Grid counts: one per axis, or a single count used for every axis."""
    try:
        counts = tuple(int(v) for v in parts)
    except ValueError:
        raise ParseError(f"grid counts must be integers, got {' '.join(parts)!r}", line) from None
    if len(counts) == 1:
        counts = counts * n
    if len(counts) != n or any(g < 1 for g in counts):
        raise ParseError(f"grid needs {n} positive counts, got {' '.join(parts)!r}", line)
    return counts


def format_expression(e: Expression, spec: JetSpec | None = None) -> str:
    return to_text(e, spec)

