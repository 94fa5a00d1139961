"""Equational surface syntax: lexer, parser, and canonical rendering.

Programs are sequences of ``definition <name>.`` and ``method <name>(...).``
sections; queries look like ``prolog(permutation){true = perm([a,b,c],L)}.``;
directives are ``restype(...)``, ``load(...)`` and ``halt``.  ``%`` starts a
line comment and every clause ends with ``.``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .definitions import Equation
from .methods import (
    All,
    Guard,
    MethodDefinition,
    MethodEquation,
    MethodWord,
    Not,
    Side,
    SideMatches,
    SideStep,
    Some,
    Step,
)
from .terms import (
    TRUE,
    Atom,
    Compound,
    Condition,
    Conj,
    Const,
    Term,
    TrueCondition,
    Var,
    as_condition,
    conjoin,
    list_term,
)

__all__ = [
    "ParseError",
    "Token",
    "tokenize",
    "DataDefinitionDecl",
    "MethodDefinitionDecl",
    "SourceItem",
    "QueryExpr",
    "RestypeDirective",
    "LoadDirective",
    "HaltDirective",
    "Directive",
    "RESULT_KINDS",
    "parse_program",
    "parse_query",
    "parse_directive",
    "parse_term",
    "parse_condition",
    "render",
]

RESULT_KINDS = ("vars_only", "final", "trace")


class ParseError(Exception):
    """A syntax error with a 1-based line/column position inside the input."""

    def __init__(self, message: str, line: int, column: int, token: str = "") -> None:
        where = f"line {line}, column {column}"
        near = f" (near {token!r})" if token else ""
        super().__init__(f"{message} at {where}{near}")
        self.message = message
        self.line = line
        self.column = column
        self.token = token


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>%[^\n]*)
    | (?P<NAME>[a-z][A-Za-z0-9_]*)
    | (?P<VAR>[A-Z_][A-Za-z0-9_]*)
    | (?P<INT>\d+)
    | (?P<QUOTED>'[^'\n]*')
    | (?P<PUNCT>[=\#,.(){}\[\]|:])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        hit = _TOKEN_RE.match(text, pos)
        if hit is None:
            raise ParseError(
                "unexpected character", line, pos - line_start + 1, text[pos]
            )
        kind = hit.lastgroup or ""
        value = hit.group()
        if kind not in ("WS", "COMMENT"):
            column = pos - line_start + 1
            if kind == "PUNCT":
                kind = value
            tokens.append(Token(kind, value, line, column))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = hit.start() + value.rfind("\n") + 1
        pos = hit.end()
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


@dataclass
class DataDefinitionDecl:
    """A parsed ``definition <name>.`` section with its equations."""

    name: str
    equations: list[Equation]
    line: int = 0
    column: int = 0


@dataclass
class MethodDefinitionDecl:
    """A parsed ``method <name>(<params>).`` section with its equations."""

    name: str
    params: tuple[str, ...]
    equations: list[MethodEquation]
    line: int = 0
    column: int = 0

    def to_method(self) -> MethodDefinition:
        return MethodDefinition(self.name, self.params, tuple(self.equations))


SourceItem = DataDefinitionDecl | MethodDefinitionDecl


@dataclass
class QueryExpr:
    """``method(defs...){ l = r, ... }.`` ready for resolution against a session."""

    method_name: str
    args: tuple[str, ...]
    initial_state: list[tuple[Condition, Condition]] = field(default_factory=list)
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class RestypeDirective:
    kind: str


@dataclass(frozen=True)
class LoadDirective:
    path: str


@dataclass(frozen=True)
class HaltDirective:
    pass


Directive = RestypeDirective | LoadDirective | HaltDirective


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        index = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "EOF":
            self.pos += 1
        return token

    def expect(self, kind: str, what: str | None = None) -> Token:
        token = self.peek()
        if token.kind != kind:
            wanted = what or f"'{kind}'"
            self.fail(f"expected {wanted}", token)
        return self.advance()

    def fail(self, message: str, token: Token | None = None) -> None:
        token = token or self.peek()
        raise ParseError(message, token.line, token.column, token.text)

    def at_end(self) -> bool:
        return self.peek().kind == "EOF"

    def expect_end(self) -> None:
        if not self.at_end():
            self.fail("unexpected input after clause")

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        token = self.peek()
        if token.kind == "VAR":
            self.advance()
            return Var(token.text)
        if token.kind == "INT":
            self.advance()
            return Const(int(token.text))
        if token.kind == "NAME":
            self.advance()
            if self.peek().kind == "(":
                self.advance()
                args = [self.term()]
                while self.peek().kind == ",":
                    self.advance()
                    args.append(self.term())
                self.expect(")")
                return Compound(token.text, tuple(args))
            return Const(token.text)
        if token.kind == "[":
            return self.list_literal()
        self.fail("expected a term", token)
        raise AssertionError  # unreachable

    def list_literal(self) -> Term:
        self.expect("[")
        if self.peek().kind == "]":
            self.advance()
            return Const("nil")
        items = [self.term()]
        while self.peek().kind == ",":
            self.advance()
            items.append(self.term())
        tail: Term = Const("nil")
        if self.peek().kind == "|":
            self.advance()
            tail = self.term()
        self.expect("]")
        return list_term(items, tail)

    # -- conditions ----------------------------------------------------------

    def condition_item(self) -> Condition:
        """A single condition: an atom, ``true``, or a parenthesized conjunction."""
        if self.peek().kind == "(":
            self.advance()
            inner = self.condition()
            self.expect(")")
            return inner
        return as_condition(self.term())

    def condition(self) -> Condition:
        items = [self.condition_item()]
        while self.peek().kind == ",":
            self.advance()
            items.append(self.condition_item())
        return conjoin(items)

    # -- programs ------------------------------------------------------------

    def program(self) -> list[SourceItem]:
        items: list[SourceItem] = []
        while not self.at_end():
            token = self.peek()
            if token.kind != "NAME" or token.text not in ("definition", "method"):
                self.fail("expected 'definition' or 'method'", token)
            if token.text == "definition":
                items.append(self.data_section())
            else:
                items.append(self.method_section())
        return items

    def _at_section_header(self) -> bool:
        token = self.peek()
        return (
            token.kind == "NAME"
            and token.text in ("definition", "method")
            and self.peek(1).kind in ("NAME", "VAR")
            and self.peek(2).kind in (".", "(")
        )

    def data_section(self) -> DataDefinitionDecl:
        header = self.expect("NAME")
        name = self.expect("NAME", "a definition name").text
        self.expect(".")
        equations: list[Equation] = []
        while not self.at_end() and not self._at_section_header():
            equations.append(self.data_equation(len(equations)))
        return DataDefinitionDecl(name, equations, header.line, header.column)

    def data_equation(self, clause_id: int) -> Equation:
        head_token = self.peek()
        head = self.term()
        if isinstance(head, Var):
            self.fail("equation heads cannot be variables", head_token)
        head_condition = as_condition(head)
        if isinstance(head_condition, TrueCondition):
            self.fail("'true' cannot be defined", head_token)
        body: Condition = TRUE
        if self.peek().kind == "=":
            self.advance()
            body = self.condition()
        self.expect(".")
        return Equation(head_condition, body, clause_id)

    def method_section(self) -> MethodDefinitionDecl:
        header = self.expect("NAME")
        name = self.expect("NAME", "a method name").text
        params: list[str] = []
        if self.peek().kind == "(":
            self.advance()
            params.append(self.def_ref())
            while self.peek().kind == ",":
                self.advance()
                params.append(self.def_ref())
            self.expect(")")
        if len(set(params)) != len(params):
            self.fail(f"duplicate parameters in method '{name}'", header)
        self.expect(".")
        equations: list[MethodEquation] = []
        while not self.at_end() and not self._at_section_header():
            equations.append(self.method_equation(name))
        return MethodDefinitionDecl(
            name, tuple(params), equations, header.line, header.column
        )

    def def_ref(self) -> str:
        token = self.peek()
        if token.kind not in ("NAME", "VAR"):
            self.fail("expected a definition reference", token)
        return self.advance().text

    def method_equation(self, method_name: str) -> MethodEquation:
        head = self.expect("NAME", "a method word")
        if head.text != method_name:
            self.fail(
                f"equation head '{head.text}' does not match method "
                f"'{method_name}'",
                head,
            )
        self.expect("=")
        self.expect("[")
        steps: list[Step] = []
        if self.peek().kind != "]":
            steps.append(self.step())
            while self.peek().kind == ",":
                self.advance()
                steps.append(self.step())
        self.expect("]")
        guard: Guard | None = None
        if self.peek().kind == "#":
            self.advance()
            guard = self.guard()
        self.expect(".")
        return MethodEquation(head.text, tuple(steps), guard)

    def step(self) -> Step:
        token = self.peek()
        if token.kind == "NAME" and token.text in ("r", "l") and self.peek(1).kind == ":":
            if token.text == "l":
                self.fail("left-side computation steps are not supported", token)
            self.advance()
            self.advance()
            return SideStep(Side.RIGHT, self.def_ref())
        if token.kind != "NAME":
            self.fail("expected a step", token)
        self.advance()
        args: list[str] = []
        if self.peek().kind == "(":
            self.advance()
            args.append(self.def_ref())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.def_ref())
            self.expect(")")
        return MethodWord(token.text, tuple(args))

    def guard(self) -> Guard:
        token = self.peek()
        if token.kind == "NAME" and token.text in ("some", "all"):
            self.advance()
            inner = self.guard_predicate()
            return Some(inner) if token.text == "some" else All(inner)
        return self.guard_predicate()

    def guard_predicate(self) -> Guard:
        token = self.peek()
        if token.kind == "NAME" and token.text == "not":
            self.advance()
            self.expect("(")
            inner = self.guard_predicate()
            self.expect(")")
            return Not(inner)
        if token.kind == "NAME" and token.text in ("r", "l"):
            self.advance()
            self.expect(":")
            word = self.expect("NAME", "'matches'")
            if word.text != "matches":
                self.fail("expected 'matches'", word)
            self.expect("(")
            pattern = self.condition()
            self.expect(")")
            side = Side.RIGHT if token.text == "r" else Side.LEFT
            return SideMatches(side, pattern)
        self.fail("expected a guard predicate", token)
        raise AssertionError  # unreachable

    # -- queries and directives -----------------------------------------------

    def query(self) -> QueryExpr:
        start = self.expect("NAME", "a method name")
        args: list[str] = []
        if self.peek().kind == "(":
            self.advance()
            args.append(self.def_ref())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.def_ref())
            self.expect(")")
        self.expect("{")
        state: list[tuple[Condition, Condition]] = []
        if self.peek().kind != "}":
            state.append(self.state_equation())
            while self.peek().kind == ",":
                self.advance()
                state.append(self.state_equation())
        self.expect("}")
        self.expect(".")
        return QueryExpr(start.text, tuple(args), state, start.line, start.column)

    def state_equation(self) -> tuple[Condition, Condition]:
        left = self.condition_item()
        self.expect("=")
        right = self.condition_item()
        return left, right

    def directive(self) -> Directive:
        token = self.expect("NAME", "a directive")
        if token.text == "halt":
            self.expect(".")
            return HaltDirective()
        if token.text == "restype":
            self.expect("(")
            kind = self.expect("NAME", "a result type")
            if kind.text not in RESULT_KINDS:
                self.fail(f"unknown result type '{kind.text}'", kind)
            self.expect(")")
            self.expect(".")
            return RestypeDirective(kind.text)
        if token.text == "load":
            self.expect("(")
            path_token = self.peek()
            if path_token.kind == "QUOTED":
                path = self.advance().text[1:-1]
            elif path_token.kind == "NAME":
                path = self.advance().text
            else:
                self.fail("expected a path", path_token)
            self.expect(")")
            self.expect(".")
            return LoadDirective(path)
        self.fail(f"unknown directive '{token.text}'", token)
        raise AssertionError  # unreachable


def parse_program(text: str) -> list[SourceItem]:
    """Parse a whole resource of definition and method sections."""
    parser = _Parser(tokenize(text))
    items = parser.program()
    parser.expect_end()
    return items


def parse_query(text: str) -> QueryExpr:
    parser = _Parser(tokenize(text))
    query = parser.query()
    parser.expect_end()
    return query


def parse_directive(text: str) -> Directive:
    parser = _Parser(tokenize(text))
    directive = parser.directive()
    parser.expect_end()
    return directive


def parse_term(text: str) -> Term:
    parser = _Parser(tokenize(text))
    term = parser.term()
    parser.expect_end()
    return term


def parse_condition(text: str) -> Condition:
    parser = _Parser(tokenize(text))
    condition = parser.condition()
    parser.expect_end()
    return condition


def _render_state_side(condition: Condition) -> str:
    if isinstance(condition, Conj):
        return f"({condition})"
    return str(condition)


def render(x) -> str:
    """Canonical text for any syntax object; parsing it back is the identity."""
    if isinstance(x, (Var, Const, Compound, TrueCondition, Atom, Conj)):
        return str(x)
    if isinstance(x, (Equation, MethodEquation, MethodWord, SideStep)):
        return str(x)
    if isinstance(x, (Some, All, Not, SideMatches)):
        return str(x)
    if isinstance(x, DataDefinitionDecl):
        lines = [f"definition {x.name}.", ""]
        lines.extend(str(equation) for equation in x.equations)
        return "\n".join(lines) + "\n"
    if isinstance(x, MethodDefinitionDecl):
        params = f"({','.join(x.params)})" if x.params else ""
        lines = [f"method {x.name}{params}.", ""]
        lines.extend(str(equation) for equation in x.equations)
        return "\n".join(lines) + "\n"
    if isinstance(x, MethodDefinition):
        return render(MethodDefinitionDecl(x.name, x.params, list(x.equations)))
    if isinstance(x, QueryExpr):
        args = f"({','.join(x.args)})" if x.args else ""
        inside = ", ".join(
            f"{_render_state_side(left)} = {_render_state_side(right)}"
            for left, right in x.initial_state
        )
        return f"{x.method_name}{args}{{{inside}}}."
    if isinstance(x, RestypeDirective):
        return f"restype({x.kind})."
    if isinstance(x, LoadDirective):
        return f"load('{x.path}')."
    if isinstance(x, HaltDirective):
        return "halt."
    if isinstance(x, list):
        return "\n".join(render(item) for item in x)
    raise TypeError(f"cannot render {x!r}")
