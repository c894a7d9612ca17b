"""Syntax of first-order modal xi-calculus formulas.

ASCII grammar (whitespace-insensitive):

    formula := imp
    imp     := or ("->" imp)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "~" unary | "[]" unary | "<>" unary
             | "forall" LIDENT "." unary
             | "exists" LIDENT "." unary
             | "xi" UIDENT "." unary
             | "?[" formula "]" term
             | atom
    atom    := "T" | "F" | LIDENT | UIDENT | "(" formula ")"
    term    := LIDENT | "#" LIDENT

    LIDENT = [a-z][a-zA-Z0-9_]*     UIDENT = [A-Z][a-zA-Z0-9_]*

Binders parse as prefix operators, so `[] exists x. ?[r] x & p` is a
conjunction whose left operand is the boxed existential; a binder body
containing `&`, `|` or `->` must be parenthesized.  Lowercase identifiers
are propositions (atom position) or model variables (term and binder
position); uppercase identifiers are formula variables.  `?[ phi ] t`
applies `phi` as a unary predicate to the child process named by the
term `t`; `#name` is a model constant, a bare name a model variable.

Derived forms (`F`, `|`, `->`, `<>`, `exists`) expand to the primitive
connectives at parse time and never appear in stored trees.  Formula
values are immutable, hashable and compare structurally; there is no
alpha-equivalence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class FormulaVar(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Xi(Formula):
    """Binds a formula variable to the body, enabling self-reference."""

    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class QueryVar(Formula):
    """`?[body] var`: evaluate body in the child process named by a model variable."""

    body: Formula
    var: str


@dataclass(frozen=True, slots=True)
class QueryConst(Formula):
    """`?[body] #const`: evaluate body in the child process a constant points to."""

    body: Formula
    const: str


def bot() -> Formula:
    return Not(Top())


def or_(left: Formula, right: Formula) -> Formula:
    return Not(And(Not(left), Not(right)))


def imp(left: Formula, right: Formula) -> Formula:
    return Not(And(left, Not(right)))


def diamond(operand: Formula) -> Formula:
    return Not(Box(Not(operand)))


def exists(var: str, body: Formula) -> Formula:
    return Not(Forall(var, Not(body)))


KEYWORDS = frozenset({"forall", "exists", "xi"})
_LIDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


def is_valid_name(name: str) -> bool:
    """A usable proposition/constant/model-variable name: LIDENT, not a keyword."""
    return bool(_LIDENT_RE.match(name)) and name not in KEYWORDS


@dataclass(frozen=True)
class Vocabulary:
    """The fixed proposition and constant names formulas may mention.

    The two namespaces never clash at the surface level because constants
    are always written with a `#` sigil.
    """

    props: frozenset[str]
    constants: frozenset[str]

    @classmethod
    def of(cls, props=(), constants=()) -> "Vocabulary":
        props = frozenset(props)
        constants = frozenset(constants)
        for name in sorted(props | constants):
            if not is_valid_name(name):
                raise ValueError(f"invalid vocabulary name: {name!r}")
        return cls(props, constants)


# --------------------------------------------------------------------------
# Lexer / parser


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


class LexError(ParseError):
    pass


class GrammarError(ParseError):
    pass


class UnknownNameError(ParseError):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<arrow>->)
    | (?P<box>\[\])
    | (?P<diamond><>)
    | (?P<qopen>\?\[)
    | (?P<rbrack>\])
    | (?P<lparen>\()
    | (?P<rparen>\))
    | (?P<dot>\.)
    | (?P<tilde>~)
    | (?P<amp>&)
    | (?P<pipe>\|)
    | (?P<hash>\#)
    | (?P<lident>[a-z][a-zA-Z0-9_]*)
    | (?P<uident>[A-Z][a-zA-Z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        raw = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, raw, line, m.start() - line_start + 1))
        else:
            nl = raw.count("\n")
            if nl:
                line += nl
                line_start = m.start() + raw.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], vocab: Optional[Vocabulary]):
        self.tokens = tokens
        self.pos = 0
        self.vocab = vocab

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise GrammarError(f"expected {what}, found {tok.text!r}" if tok.text else f"expected {what}, found end of input", tok.line, tok.col)
        return self.advance()

    def formula(self) -> Formula:
        left = self.or_level()
        if self.peek().kind == "arrow":
            self.advance()
            return imp(left, self.formula())
        return left

    def or_level(self) -> Formula:
        node = self.and_level()
        while self.peek().kind == "pipe":
            self.advance()
            node = or_(node, self.and_level())
        return node

    def and_level(self) -> Formula:
        node = self.unary()
        while self.peek().kind == "amp":
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "tilde":
            self.advance()
            return Not(self.unary())
        if tok.kind == "box":
            self.advance()
            return Box(self.unary())
        if tok.kind == "diamond":
            self.advance()
            return diamond(self.unary())
        if tok.kind == "qopen":
            self.advance()
            body = self.formula()
            self.expect("rbrack", "']'")
            return self.query_term(body)
        if tok.kind == "lident" and tok.text in ("forall", "exists"):
            self.advance()
            var = self.binder_name("lident", "a model variable")
            self.expect("dot", "'.'")
            body = self.unary()
            return Forall(var, body) if tok.text == "forall" else exists(var, body)
        if tok.kind == "lident" and tok.text == "xi":
            self.advance()
            var = self.binder_name("uident", "a formula variable")
            self.expect("dot", "'.'")
            return Xi(var, self.unary())
        return self.atom()

    def binder_name(self, kind: str, what: str) -> str:
        tok = self.expect(kind, what)
        if kind == "lident" and tok.text in KEYWORDS:
            raise GrammarError(f"keyword {tok.text!r} cannot be a variable", tok.line, tok.col)
        if kind == "uident" and tok.text in ("T", "F"):
            raise GrammarError(f"{tok.text!r} cannot be a formula variable", tok.line, tok.col)
        return tok.text

    def query_term(self, body: Formula) -> Formula:
        tok = self.peek()
        if tok.kind == "hash":
            self.advance()
            name = self.expect("lident", "a constant name")
            if name.text in KEYWORDS:
                raise GrammarError(f"keyword {name.text!r} cannot be a constant", name.line, name.col)
            if self.vocab is not None and name.text not in self.vocab.constants:
                raise UnknownNameError(f"unknown constant #{name.text}", name.line, name.col)
            return QueryConst(body, name.text)
        if tok.kind == "lident":
            if tok.text in KEYWORDS:
                raise GrammarError(f"keyword {tok.text!r} cannot be a term", tok.line, tok.col)
            self.advance()
            return QueryVar(body, tok.text)
        raise GrammarError(f"expected a term, found {tok.text!r}" if tok.text else "expected a term, found end of input", tok.line, tok.col)

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "lparen":
            self.advance()
            node = self.formula()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "uident":
            self.advance()
            if tok.text == "T":
                return Top()
            if tok.text == "F":
                return bot()
            return FormulaVar(tok.text)
        if tok.kind == "lident":
            if tok.text in KEYWORDS:
                raise GrammarError(f"unexpected keyword {tok.text!r}", tok.line, tok.col)
            self.advance()
            if self.vocab is not None and tok.text not in self.vocab.props:
                raise UnknownNameError(f"unknown proposition {tok.text!r}", tok.line, tok.col)
            return Prop(tok.text)
        raise GrammarError(f"expected a formula, found {tok.text!r}" if tok.text else "expected a formula, found end of input", tok.line, tok.col)


def parse(text: str, vocab: Optional[Vocabulary] = None) -> Formula:
    """Parse `text`; names are checked against `vocab` unless it is None."""
    parser = _Parser(_tokenize(text), vocab)
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise GrammarError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return node


# --------------------------------------------------------------------------
# Printer

_LEVEL_AND = 1
_LEVEL_UNARY = 2

_F = Not(Top())


def _level(f: Formula) -> int:
    return _LEVEL_AND if isinstance(f, And) else _LEVEL_UNARY


def format_formula(f: Formula) -> str:
    """Canonical text; `parse(format_formula(f))` is structurally equal to `f`."""
    return _fmt(f, 0)


def _fmt(f: Formula, required: int) -> str:
    if f == _F:
        return "F"
    if isinstance(f, Top):
        return "T"
    if isinstance(f, (Prop, FormulaVar)):
        return f.name
    if _level(f) < required:
        return "(" + _fmt(f, 0) + ")"
    if isinstance(f, Not):
        return "~" + _fmt(f.operand, _LEVEL_UNARY)
    if isinstance(f, Box):
        return "[]" + _fmt(f.operand, _LEVEL_UNARY)
    if isinstance(f, And):
        return _fmt(f.left, _LEVEL_AND) + " & " + _fmt(f.right, _LEVEL_UNARY)
    if isinstance(f, Forall):
        return f"forall {f.var}. " + _fmt(f.body, _LEVEL_UNARY)
    if isinstance(f, Xi):
        return f"xi {f.var}. " + _fmt(f.body, _LEVEL_UNARY)
    if isinstance(f, QueryVar):
        return "?[" + _fmt(f.body, 0) + "] " + f.var
    if isinstance(f, QueryConst):
        return "?[" + _fmt(f.body, 0) + "] #" + f.const
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# Structure and variable analysis

NodePath = tuple[int, ...]


def subformulas(f: Formula) -> Iterator[tuple[NodePath, Formula]]:
    """All subformulas in preorder, each with its position path from the root."""
    stack = [((), f)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, (Not, Box)):
            stack.append((path + (0,), node.operand))
        elif isinstance(node, And):
            stack.append((path + (1,), node.right))
            stack.append((path + (0,), node.left))
        elif isinstance(node, (Forall, Xi)):
            stack.append((path + (0,), node.body))
        elif isinstance(node, (QueryVar, QueryConst)):
            stack.append((path + (0,), node.body))


@dataclass(frozen=True)
class Occurrence:
    path: NodePath
    kind: str  # "model" | "formula"
    name: str
    free: bool


def occurrences(f: Formula) -> list[Occurrence]:
    """Every variable occurrence with its freeness, relative to `f` as root.

    A model variable is bound by any enclosing `forall` of the same name.
    A formula variable occurrence is bound only when it sits inside a
    `?[ ]` application whose innermost such application is itself in the
    scope of a matching `xi`; `xi X. X` therefore leaves X free.
    """
    out: list[Occurrence] = []
    # xi_outer: xi binders above the innermost enclosing query application;
    # xi_inner: xi binders seen since that application (not yet effective).
    stack = [(f, (), frozenset(), frozenset(), frozenset(), False)]
    while stack:
        node, path, mvars, xi_outer, xi_inner, in_query = stack.pop()
        if isinstance(node, FormulaVar):
            free = not (in_query and node.name in xi_outer)
            out.append(Occurrence(path, "formula", node.name, free))
        elif isinstance(node, (Not, Box)):
            stack.append((node.operand, path + (0,), mvars, xi_outer, xi_inner, in_query))
        elif isinstance(node, And):
            stack.append((node.right, path + (1,), mvars, xi_outer, xi_inner, in_query))
            stack.append((node.left, path + (0,), mvars, xi_outer, xi_inner, in_query))
        elif isinstance(node, Forall):
            stack.append((node.body, path + (0,), mvars | {node.var}, xi_outer, xi_inner, in_query))
        elif isinstance(node, Xi):
            stack.append((node.body, path + (0,), mvars, xi_outer, xi_inner | {node.var}, in_query))
        elif isinstance(node, QueryVar):
            out.append(Occurrence(path, "model", node.var, node.var not in mvars))
            stack.append((node.body, path + (0,), mvars, xi_outer | xi_inner, frozenset(), True))
        elif isinstance(node, QueryConst):
            stack.append((node.body, path + (0,), mvars, xi_outer | xi_inner, frozenset(), True))
    out.sort(key=lambda o: o.path)
    return out


def free_model_vars(f: Formula) -> set[str]:
    return {o.name for o in occurrences(f) if o.kind == "model" and o.free}


def free_formula_vars(f: Formula) -> set[str]:
    return {o.name for o in occurrences(f) if o.kind == "formula" and o.free}


# --------------------------------------------------------------------------
# Sentence check

C1_FREE_VAR = "C1-free-var"
C2_XI_SUBFORMULA = "C2-xi-subformula"
C3_QUERY_BODY = "C3-query-body"


@dataclass(frozen=True)
class SentenceViolation:
    tag: str
    node: NodePath
    message: str


@dataclass(frozen=True)
class SentenceDiagnostics:
    verdict: bool
    violations: tuple[SentenceViolation, ...]


def check_sentence(f: Formula) -> SentenceDiagnostics:
    """Decide whether `f` is a sentence, i.e. admissible for evaluation.

    Three conditions, freeness always computed relative to the subformula
    under inspection: the whole formula is closed; every `xi`-subformula
    is closed; every `?[ ]` body has no free model variables.
    """
    violations: list[SentenceViolation] = []
    for occ in occurrences(f):
        if occ.free:
            word = "model" if occ.kind == "model" else "formula"
            violations.append(
                SentenceViolation(C1_FREE_VAR, occ.path, f"free {word} variable {occ.name!r}")
            )
    for path, node in subformulas(f):
        if isinstance(node, Xi):
            loose = sorted({o.name for o in occurrences(node) if o.free})
            if loose:
                violations.append(
                    SentenceViolation(
                        C2_XI_SUBFORMULA,
                        path,
                        f"xi {node.var}. subformula has free variable(s): " + ", ".join(loose),
                    )
                )
        elif isinstance(node, (QueryVar, QueryConst)):
            loose = sorted(free_model_vars(node.body))
            if loose:
                violations.append(
                    SentenceViolation(
                        C3_QUERY_BODY,
                        path,
                        "query body has free model variable(s): " + ", ".join(loose),
                    )
                )
    violations.sort(key=lambda v: (v.node, v.tag))
    return SentenceDiagnostics(not violations, tuple(violations))
