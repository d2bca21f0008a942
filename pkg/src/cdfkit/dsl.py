"""Concrete syntax for recursive numeric functions and rewrite systems.

Function files hold a single defining equation::

    f(n) = if n = 0 then 1 else n * f(n - 1)

with optional domain annotation ``f(x): real = 4 * x * (1 - x)``.  Without an
annotation the domain is Real when any real literal occurs, else Integer.

Rewrite files hold one rule per line (or ``;``-separated)::

    S -> "(" S ")" | ""

Bare identifiers are nonterminals, quoted strings are terminals, ``""`` or
``ε`` is the empty alternative.  ``#`` starts a comment in both formats.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

INTEGER = "Integer"
REAL = "Real"

ARITH_OPS = ("+", "-", "*", "/", "mod", "^")
COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")
KEYWORDS = {"if", "then", "else", "mod", "div"}


class ParseError(Exception):
    """Malformed input; carries a 1-based ``line:col`` position."""

    def __init__(self, message, line=0, col=0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")

    @property
    def kind(self):
        return type(self).__name__


class DSLSyntaxError(ParseError):
    pass


class UnboundVariable(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class DuplicateDefinition(ParseError):
    pass


class UndefinedNonterminal(ParseError):
    pass


class EmptySystem(ParseError):
    pass


# Expression tree.  Positions are kept for diagnostics only and never take
# part in equality.

_pos = dict(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class RealLit:
    value: float
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class If:
    cond: Compare
    then: "Expr"
    orelse: "Expr"
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: tuple | None = field(**_pos)


@dataclass(frozen=True)
class Neg:
    expr: "Expr"
    pos: tuple | None = field(**_pos)


Expr = Union[IntLit, RealLit, Var, BinOp, Compare, If, Call, Neg]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple
    body: Expr
    domain_tag: str = INTEGER

    @property
    def arity(self):
        return len(self.params)

    @property
    def is_recursive(self):
        return any(isinstance(e, Call) and e.name == self.name for e in walk(self.body))

    def __str__(self):
        return format_function(self)


@dataclass(frozen=True)
class Symbol:
    text: str
    terminal: bool

    def __str__(self):
        if self.terminal:
            return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return self.text


@dataclass(frozen=True)
class RewriteSystem:
    start_symbol: str
    rules: dict  # nonterminal -> tuple of alternatives (tuples of Symbol)

    def alternatives(self, nonterminal):
        return self.rules[nonterminal]

    def __str__(self):
        return format_rewrite_system(self)


def walk(expr):
    """Yield every node of an expression tree in preorder."""
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, (BinOp, Compare)):
            stack.extend((e.rhs, e.lhs))
        elif isinstance(e, If):
            stack.extend((e.orelse, e.then, e.cond))
        elif isinstance(e, Call):
            stack.extend(reversed(e.args))
        elif isinstance(e, Neg):
            stack.append(e.expr)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_OP_ALIASES = {
    "**": "^", "×": "*", "·": "*", "÷": "/", "−": "-", "%": "mod", "div": "/",
    "≠": "!=", "<>": "!=", "==": "=", "≤": "<=", "≥": ">=",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<op>\*\*|<=|>=|!=|<>|==|[-+*/^%()=<>,:×·÷−≠≤≥])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # real | int | ident | op | kw | eof
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, line_start, i = 1, 0, 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        col = i - line_start + 1
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "ws":
            for j, ch in enumerate(lexeme):
                if ch == "\n":
                    line += 1
                    line_start = i + j + 1
        elif kind == "ident" and lexeme in KEYWORDS:
            if lexeme in ("mod", "div"):
                tokens.append(Token("op", _OP_ALIASES.get(lexeme, lexeme), line, col))
            else:
                tokens.append(Token("kw", lexeme, line, col))
        elif kind == "op":
            tokens.append(Token("op", _OP_ALIASES.get(lexeme, lexeme), line, col))
        else:
            tokens.append(Token(kind, lexeme, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Function parser (recursive descent, precedence climbing)
# ---------------------------------------------------------------------------

class _FunctionParser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return DSLSyntaxError(msg, tok.line, tok.col)

    def accept(self, kind, text=None):
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind, text=None):
        t = self.accept(kind, text)
        if t is None:
            want = repr(text) if text else kind
            got = repr(self.tok.text) if self.tok.kind != "eof" else "end of input"
            raise self.error(f"expected {want}, found {got}")
        return t

    def definitions(self):
        defs = []
        while self.tok.kind != "eof":
            defs.append(self.definition())
        if not defs:
            raise self.error("empty input: expected a function definition")
        return defs

    def definition(self):
        name_tok = self.expect("ident")
        self.expect("op", "(")
        params = [self.expect("ident")]
        while self.accept("op", ","):
            params.append(self.expect("ident"))
        self.expect("op", ")")
        domain = None
        if self.accept("op", ":"):
            dt = self.expect("ident")
            key = dt.text.lower()
            if key in ("int", "integer", "z", "n", "nat"):
                domain = INTEGER
            elif key in ("real", "float", "r"):
                domain = REAL
            else:
                raise self.error(f"unknown domain {dt.text!r}", dt)
        self.expect("op", "=")
        body = self.expr()
        return name_tok, params, domain, body

    def expr(self):
        if self.tok.kind == "kw" and self.tok.text == "if":
            return self.if_expr()
        return self.arith()

    def if_expr(self):
        t = self.expect("kw", "if")
        cond = self.condition()
        self.expect("kw", "then")
        then = self.expr()
        self.expect("kw", "else")
        orelse = self.expr()
        return If(cond, then, orelse, pos=(t.line, t.col))

    def condition(self):
        lhs = self.arith()
        t = self.tok
        if t.kind == "op" and t.text in COMPARE_OPS:
            self.i += 1
            rhs = self.arith()
            return Compare(t.text, lhs, rhs, pos=(t.line, t.col))
        raise self.error("expected a comparison in if-condition")

    def arith(self):
        lhs = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            t = self.tok
            self.i += 1
            lhs = BinOp(t.text, lhs, self.term(), pos=(t.line, t.col))
        return lhs

    def term(self):
        lhs = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "mod"):
            t = self.tok
            self.i += 1
            lhs = BinOp(t.text, lhs, self.unary(), pos=(t.line, t.col))
        return lhs

    def unary(self):
        t = self.accept("op", "-")
        if t:
            return Neg(self.unary(), pos=(t.line, t.col))
        return self.power()

    def power(self):
        base = self.atom()
        t = self.accept("op", "^")
        if t:
            return BinOp("^", base, self.unary(), pos=(t.line, t.col))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return IntLit(int(t.text), pos=(t.line, t.col))
        if t.kind == "real":
            self.i += 1
            return RealLit(float(t.text), pos=(t.line, t.col))
        if t.kind == "ident":
            self.i += 1
            if self.accept("op", "("):
                args = [self.expr()]
                while self.accept("op", ","):
                    args.append(self.expr())
                self.expect("op", ")")
                return Call(t.text, tuple(args), pos=(t.line, t.col))
            return Var(t.text, pos=(t.line, t.col))
        if t.kind == "kw" and t.text == "if":
            return self.if_expr()
        if self.accept("op", "("):
            e = self.expr()
            self.expect("op", ")")
            return e
        got = repr(t.text) if t.kind != "eof" else "end of input"
        raise self.error(f"expected an expression, found {got}")


def _check_function(name_tok, params, domain, body):
    name = name_tok.text
    seen = set()
    for p in params:
        if p.text in seen:
            raise DSLSyntaxError(f"duplicate parameter {p.text!r}", p.line, p.col)
        if p.text == name:
            raise DSLSyntaxError("parameter shadows the function name", p.line, p.col)
        seen.add(p.text)
    has_real = False
    for e in walk(body):
        line, col = e.pos or (0, 0)
        if isinstance(e, Var):
            if e.name == name:
                raise ArityMismatch(f"{name!r} used without arguments", line, col)
            if e.name not in seen:
                raise UnboundVariable(f"unbound variable {e.name!r}", line, col)
        elif isinstance(e, Call):
            if e.name != name:
                raise UnboundVariable(f"call to undefined function {e.name!r}", line, col)
            if len(e.args) != len(params):
                raise ArityMismatch(
                    f"{name!r} expects {len(params)} argument(s), got {len(e.args)}", line, col)
        elif isinstance(e, RealLit):
            if domain == INTEGER:
                raise DSLSyntaxError("real literal in an integer-domain function", line, col)
            has_real = True
    if domain is None:
        domain = REAL if has_real else INTEGER
    return FunctionDef(name, tuple(p.text for p in params), body, domain)


def parse_function(text, domain=None):
    """Parse a single function definition.

    ``domain`` (``"Integer"``/``"Real"``) overrides the in-text annotation
    and literal-based inference.
    """
    text = text.lstrip("﻿")
    parser = _FunctionParser(text)
    defs = parser.definitions()
    first = defs[0]
    for name_tok, *_ in defs[1:]:
        if name_tok.text == first[0].text:
            raise DuplicateDefinition(
                f"second definition of {name_tok.text!r}", name_tok.line, name_tok.col)
        raise DSLSyntaxError(
            "only one function per file is supported", name_tok.line, name_tok.col)
    name_tok, params, annotated, body = first
    if domain is not None and domain not in (INTEGER, REAL):
        raise ValueError(f"unknown domain {domain!r}")
    return _check_function(name_tok, params, domain or annotated, body)


# ---------------------------------------------------------------------------
# Rewrite-system parser
# ---------------------------------------------------------------------------

_RULE_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n|;)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<eps>ε)
  | (?P<arrow>->|→|::=)
  | (?P<bar>\|)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9']*)
    """,
    re.VERBOSE,
)


def _rule_tokens(text):
    line, line_start, i = 1, 0, 0
    out = []
    while i < len(text):
        m = _RULE_TOKEN_RE.match(text, i)
        col = i - line_start + 1
        if m is None:
            if text[i] == '"':
                raise DSLSyntaxError("unterminated string", line, col)
            raise DSLSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), line, col))
        if m.group() == "\n":
            line += 1
            line_start = m.end()
        i = m.end()
    out.append(("nl", "", line, i - line_start + 1))
    return out


def _unquote(lexeme):
    return re.sub(r"\\(.)", r"\1", lexeme[1:-1])


def parse_rewrite_system(text):
    """Parse ``Nonterminal -> alt | alt`` rules; the first rule's left side is the start symbol."""
    text = text.lstrip("﻿")
    tokens = _rule_tokens(text)
    rules = {}
    uses = []  # (name, line, col) for every nonterminal occurrence on a right side
    statement = []
    for tok in tokens:
        if tok[0] != "nl":
            statement.append(tok)
            continue
        if not statement:
            continue
        if len(statement) < 2 or statement[0][0] != "ident" or statement[1][0] != "arrow":
            _, lexeme, line, col = statement[0]
            raise DSLSyntaxError("expected 'Nonterminal -> alternatives'", line, col)
        lhs = statement[0][1]
        alts = []
        current = []
        empty_marked = False
        pending = statement[2:] + [("bar", "|", tok[2], tok[3])]
        for kind, lexeme, line, col in pending:
            if kind == "bar":
                if not current and not empty_marked:
                    raise DSLSyntaxError("empty alternative (write \"\" for the empty string)",
                                         line, col)
                alts.append(tuple(current))
                current, empty_marked = [], False
            elif kind == "string":
                s = _unquote(lexeme)
                if s:
                    current.append(Symbol(s, True))
                else:
                    empty_marked = True
            elif kind == "eps":
                empty_marked = True
            elif kind == "ident":
                current.append(Symbol(lexeme, False))
                uses.append((lexeme, line, col))
            else:
                raise DSLSyntaxError(f"unexpected {lexeme!r}", line, col)
        rules.setdefault(lhs, [])
        rules[lhs].extend(alts)
        statement = []
    if not rules:
        raise EmptySystem("no rules defined", 1, 1)
    for name, line, col in uses:
        if name not in rules:
            raise UndefinedNonterminal(f"nonterminal {name!r} has no rule", line, col)
    start = next(iter(rules))
    return RewriteSystem(start, {k: tuple(v) for k, v in rules.items()})


def looks_like_rewrite_system(text):
    """True when ``->`` (or ``→``/``::=``) occurs outside quotes and comments."""
    for line in text.splitlines():
        stripped = re.sub(r'"(?:[^"\\]|\\.)*"', '""', line).split("#", 1)[0]
        if "->" in stripped or "→" in stripped or "::=" in stripped:
            return True
    return False


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "mod": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _fmt(e):
    """Return (text, precedence) for an expression."""
    if isinstance(e, IntLit):
        return str(e.value), _ATOM_PREC
    if isinstance(e, RealLit):
        return repr(float(e.value)), _ATOM_PREC
    if isinstance(e, Var):
        return e.name, _ATOM_PREC
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})", _ATOM_PREC
    if isinstance(e, Neg):
        inner, p = _fmt(e.expr)
        # -x^2 parses as -(x^2), so a power operand needs no parentheses
        if p < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}", _NEG_PREC
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        lhs, lp = _fmt(e.lhs)
        rhs, rp = _fmt(e.rhs)
        if e.op == "^":
            if lp <= prec:
                lhs = f"({lhs})"
            if rp < _NEG_PREC:
                rhs = f"({rhs})"
        else:
            if lp < prec:
                lhs = f"({lhs})"
            if rp <= prec:
                rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}", prec
    if isinstance(e, Compare):
        sides = []
        for side in (e.lhs, e.rhs):
            text, p = _fmt(side)
            sides.append(f"({text})" if p == 0 else text)
        return f"{sides[0]} {e.op} {sides[1]}", 0
    if isinstance(e, If):
        text = f"if {format_expr(e.cond)} then {format_expr(e.then)} else {format_expr(e.orelse)}"
        return text, 0
    raise TypeError(f"not an expression: {e!r}")


def format_expr(e):
    text, _ = _fmt(e)
    return text


def format_function(f):
    annotation = ": real" if f.domain_tag == REAL else ""
    return f"{f.name}({', '.join(f.params)}){annotation} = {format_expr(f.body)}"


def format_rewrite_system(g):
    lines = []
    for lhs, alts in g.rules.items():
        rendered = [" ".join(str(s) for s in alt) if alt else '""' for alt in alts]
        lines.append(f"{lhs} -> {' | '.join(rendered)}")
    return "\n".join(lines)
