"""Concrete ``.dlfd`` syntax: tokenizer, recursive-descent parser and printer.

Grammar (``#`` starts a comment running to the end of the line)::

    terminology := axiom*
    axiom       := expr '<=' expr ';'
    expr        := conj ('|' conj)*
    conj        := unary ('&' unary)*
    unary       := '~' unary | 'all' FEATURE '.' unary | atom
    atom        := NAME | 'Top' | 'Bot' | '(' expr ')'
                 | 'fd' '(' expr ':' path (',' path)* '->' path ')'
    path        := 'id' | FEATURE ('.' FEATURE)*

``&`` and ``|`` associate to the left.  ``fd(...)`` is accepted by the
grammar anywhere, then rejected unless it sits on the right of ``<=`` under
conjunctions only.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    All,
    And,
    Axiom,
    Bot,
    Concept,
    Not,
    Or,
    Pfd,
    Plain,
    Prim,
    RhsAnd,
    RhsConcept,
    Terminology,
    Top,
    RESERVED_CONCEPTS,
    RESERVED_FEATURES,
    path_to_str,
)


class DLFDSyntaxError(ValueError):
    """Raised for malformed ``.dlfd`` text; carries a 1-based line and column."""

    kind = "syntax error"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {self.kind}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(DLFDSyntaxError):
    kind = "lexical error"


class PfdPositionError(DLFDSyntaxError):
    kind = "PFD in forbidden position"


class EmptyPathListError(DLFDSyntaxError):
    kind = "empty left-hand path list"


@dataclass(frozen=True)
class Token:
    kind: str  # 'name', 'op' or 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|->|[&|~.():,;])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("name", "op"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# Intermediate tree: D constructors plus a positional fd marker.  Conversion to
# the two AST grammars happens once the whole side of an axiom is known.
@dataclass(frozen=True)
class _Fd:
    over: object
    lhs: tuple
    rhs: tuple
    tok: Token


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=DLFDSyntaxError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def name(self, what: str) -> Token:
        tok = self.tok
        if tok.kind != "name":
            found = tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        self.i += 1
        return tok

    # -- grammar ----------------------------------------------------------

    def terminology(self) -> Terminology:
        axioms = []
        while self.tok.kind != "eof":
            axioms.append(self.axiom())
        return Terminology(axioms)

    def axiom(self) -> Axiom:
        lhs = self.expr()
        self.expect("<=")
        rhs = self.expr()
        self.expect(";")
        return Axiom(to_concept(lhs, "on the left of '<='"), to_rhs(rhs))

    def expr(self):
        node = self.conj()
        while self.at("|"):
            self.i += 1
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.unary()
        while self.at("&"):
            self.i += 1
            node = And(node, self.unary())
        return node

    def unary(self):
        if self.at("~"):
            self.i += 1
            return Not(self.unary())
        if self.at("all"):
            self.i += 1
            f = self.feature()
            self.expect(".")
            return All(f, self.unary())
        return self.atom()

    def atom(self):
        tok = self.tok
        if self.at("("):
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if self.at("fd"):
            self.i += 1
            self.expect("(")
            over = to_concept(self.expr(), "inside another PFD")
            self.expect(":")
            if self.at("->"):
                raise self.error("a PFD needs at least one path before '->'", cls=EmptyPathListError)
            lhs = [self.path()]
            while self.at(","):
                self.i += 1
                lhs.append(self.path())
            self.expect("->")
            rhs = self.path()
            self.expect(")")
            return _Fd(over, tuple(lhs), rhs, tok)
        tok = self.name("a concept")
        if tok.text == "Top":
            return Top()
        if tok.text == "Bot":
            return Bot()
        if tok.text in RESERVED_CONCEPTS:
            raise self.error(f"{tok.text!r} is reserved", tok)
        return Prim(tok.text)

    def feature(self) -> str:
        tok = self.name("a feature name")
        if tok.text in RESERVED_FEATURES:
            raise self.error(f"{tok.text!r} is not a feature name", tok)
        return tok.text

    def path(self) -> tuple:
        if self.at("id"):
            self.i += 1
            return ()
        steps = [self.feature()]
        while self.at("."):
            self.i += 1
            steps.append(self.feature())
        return tuple(steps)


def _find_fd(node):
    if isinstance(node, _Fd):
        return node
    if isinstance(node, (And, Or)):
        return _find_fd(node.left) or _find_fd(node.right)
    if isinstance(node, (Not, All)):
        return _find_fd(node.arg)
    return None


def to_concept(node, where: str) -> Concept:
    fd = _find_fd(node)
    if fd is not None:
        raise PfdPositionError(f"fd(...) may not appear {where}", fd.tok.line, fd.tok.col)
    return node


def to_rhs(node) -> RhsConcept:
    if isinstance(node, _Fd):
        return Pfd(node.over, node.lhs, node.rhs)
    if _find_fd(node) is None:
        return Plain(node)
    if isinstance(node, And):
        return RhsAnd(to_rhs(node.left), to_rhs(node.right))
    return to_concept(node, "under '~', '|' or 'all'")


def parse_terminology(text: str) -> Terminology:
    """Parse ``.dlfd`` text into a :class:`Terminology`."""
    return _Parser(text).terminology()


def _parse_single(text: str, rule: str):
    p = _Parser(text)
    node = getattr(p, rule)()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after {rule}")
    return node


def parse_concept(text: str) -> Concept:
    """Parse a single D-concept (no PFDs), e.g. a goal given on the command line."""
    return to_concept(_parse_single(text, "expr"), "in a D-concept")


def parse_rhs(text: str) -> RhsConcept:
    return to_rhs(_parse_single(text, "expr"))


def parse_axiom(text: str) -> Axiom:
    text = text.strip()
    if not text.endswith(";"):
        text += ";"
    return _parse_single(text, "axiom")


# --------------------------------------------------------------------------
# Printing

_OR, _AND, _UNARY = 1, 2, 3


def _prec(c: Concept) -> int:
    if isinstance(c, Or):
        return _OR
    if isinstance(c, And):
        return _AND
    return _UNARY


def render_concept(c: Concept, ctx: int = 0) -> str:
    if isinstance(c, Prim):
        s = c.name
    elif isinstance(c, Top):
        s = "Top"
    elif isinstance(c, Bot):
        s = "Bot"
    elif isinstance(c, Not):
        s = "~" + render_concept(c.arg, _UNARY)
    elif isinstance(c, All):
        s = f"all {c.feature} . " + render_concept(c.arg, _UNARY)
    elif isinstance(c, (And, Or)):
        p = _prec(c)
        op = " & " if p == _AND else " | "
        # left-associative: the right operand needs parentheses at equal precedence
        s = render_concept(c.left, p) + op + render_concept(c.right, p + 1)
    else:
        raise TypeError(f"not a concept: {c!r}")
    return f"({s})" if _prec(c) < ctx else s


def render_path(p) -> str:
    return path_to_str(p)


def render_rhs(e: RhsConcept, ctx: int = 0) -> str:
    if isinstance(e, Plain):
        return render_concept(e.concept, ctx)
    if isinstance(e, Pfd):
        paths = ", ".join(render_path(p) for p in e.lhs)
        return f"fd({render_concept(e.over)} : {paths} -> {render_path(e.rhs)})"
    if isinstance(e, RhsAnd):
        s = render_rhs(e.left, _AND) + " & " + render_rhs(e.right, _UNARY)
        return f"({s})" if ctx > _AND else s
    raise TypeError(f"not a right-hand side: {e!r}")


def render_axiom(a: Axiom) -> str:
    return f"{render_concept(a.lhs)} <= {render_rhs(a.rhs)};"


def render_terminology(t: Terminology) -> str:
    return "".join(render_axiom(a) + "\n" for a in t.axioms)
