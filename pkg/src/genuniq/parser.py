"""Recursive-descent parser for expressions and the line-oriented model file format.

Document grammar (one directive per line, ``#`` starts a comment)::

    [dims] K=<int> N=<int> R=<int> l=<int>
    [domain] real|complex
    [A] generic
    [transform] f<j> = id|exp|exp(<k>)|tan_half|cos|sin|affine(<a>,<b>)
    [column] b_n = <expression>        # template for every row
    [column] b_<k> = <expression>      # explicit row k, overrides the template
    [scaling_invariant] true|false|unknown
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ModelError, ModelSyntaxError
from .expr import BUILTINS, BinOp, Call, Const, Expr, Neg, Pow, Row, Var, evaluate, to_text

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass
class Token:
    kind: str  # num | ident | op | end
    text: str
    col: int  # 1-based
    imag: bool = False


def tokenize(text: str, line: int = 0, col0: int = 0) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos + 1)
        start = pos
        if m.group("num") is not None:
            tokens.append(Token("num", m.group("num"), col0 + start + 1, m.group("imag") is not None))
        elif m.group("ident") is not None:
            tokens.append(Token("ident", m.group("ident"), col0 + start + 1))
        else:
            tokens.append(Token("op", m.group("op"), col0 + start + 1))
        pos = m.end()
    tokens.append(Token("end", "", col0 + len(text) + 1))
    return tokens


class ExprParser:
    """expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)* ;
    unary := ('-'|'+') unary | power ; power := atom ('^' unary)?"""

    def __init__(self, text: str, line: int = 0, col0: int = 0):
        self.tokens = tokenize(text, line, col0)
        self.pos = 0
        self.line = line

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ModelSyntaxError(msg, self.line, tok.col)

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        tok = self.take()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            op = self.take().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("-", "+"):
            self.take()
            arg = self.unary()
            return Neg(arg) if tok.text == "-" else arg
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^" and self.peek().kind == "op":
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            v = float(tok.text)
            return Const(complex(0, v) if tok.imag else complex(v))
        if tok.kind == "ident":
            name = tok.text
            if name == "i":
                return Const(1j)
            if name == "n":
                return Row()
            if re.fullmatch(r"x[1-9][0-9]*", name):
                return Var(int(name[1:]))
            if name in BUILTINS:
                self.expect("(")
                row = self.expr()
                self.expect(",")
                arg = self.expr()
                self.expect(")")
                return Call(name, row, arg)
            self.error(f"unknown primitive {name!r}", tok)
        if tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_expr(text: str, line: int = 0, col0: int = 0) -> Expr:
    return ExprParser(text, line, col0).parse()


def const_value(e: Expr) -> complex:
    """Evaluate an expression free of variables and row tokens."""
    value, bad = evaluate(e, [])
    if bad.any():
        raise ModelError("division by zero in constant")
    return complex(value)


# -- document -----------------------------------------------------------------

_DIRECTIVE = re.compile(r"\s*\[(?P<name>[A-Za-z_]+)\]\s*(?P<rest>.*)$")
_DIM = re.compile(r"(?P<key>K|N|R|l)\s*=\s*(?P<val>\S+)")


def _strip_comment(line: str) -> str:
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def parse_model(text: str):
    """Parse a model file into a validated :class:`FactorModel`."""
    from .model import ColumnModel, FactorModel, GenericDense, Transform, parse_primitive

    dims: dict[str, int] = {}
    domain = "complex"
    scaling = "unknown"
    prims: dict[int, object] = {}
    templates: list[tuple[int | None, Expr]] = []
    saw_column = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _DIRECTIVE.match(line)
        if not m:
            raise ModelSyntaxError("expected a [directive]", lineno, len(line) - len(line.lstrip()) + 1)
        name, rest = m.group("name"), m.group("rest")
        rest_col = m.start("rest") + 1
        if name == "dims":
            pos = 0
            for dm in _DIM.finditer(rest):
                if rest[pos:dm.start()].strip():
                    raise ModelSyntaxError("malformed [dims] entry", lineno, rest_col + pos)
                try:
                    dims[dm.group("key")] = int(dm.group("val"))
                except ValueError:
                    raise ModelSyntaxError(
                        f"{dm.group('key')} must be an integer", lineno, rest_col + dm.start("val")
                    ) from None
                pos = dm.end()
            if rest[pos:].strip():
                raise ModelSyntaxError("malformed [dims] entry", lineno, rest_col + pos)
        elif name == "domain":
            domain = rest.strip()
            if domain not in ("real", "complex"):
                raise ModelSyntaxError("domain must be real or complex", lineno, rest_col)
        elif name == "A":
            if rest.strip() != "generic":
                raise ModelSyntaxError("only '[A] generic' is supported in files", lineno, rest_col)
        elif name == "scaling_invariant":
            scaling = rest.strip()
            if scaling not in ("true", "false", "unknown"):
                raise ModelSyntaxError("scaling_invariant must be true, false or unknown", lineno, rest_col)
        elif name == "transform":
            tm = re.match(r"\s*f([1-9][0-9]*)\s*=\s*(.*?)\s*$", rest)
            if not tm:
                raise ModelSyntaxError("expected f<j> = <primitive>", lineno, rest_col)
            try:
                prims[int(tm.group(1))] = parse_primitive(tm.group(2), lineno, rest_col + tm.start(2))
            except ModelError as exc:
                raise ModelSyntaxError(str(exc), lineno, rest_col + tm.start(2)) from None
        elif name == "column":
            cm_ = re.match(r"\s*b_(n|[1-9][0-9]*)\s*=\s*", rest)
            if not cm_:
                raise ModelSyntaxError("expected b_n = <expression> or b_<k> = <expression>", lineno, rest_col)
            label = None if cm_.group(1) == "n" else int(cm_.group(1))
            body = rest[cm_.end():]
            templates.append((label, parse_expr(body, lineno, rest_col - 1 + cm_.end())))
            saw_column = True
        else:
            raise ModelSyntaxError(f"unknown directive [{name}]", lineno, m.start("name"))

    missing = [k for k in ("K", "N", "R", "l") if k not in dims]
    if missing:
        raise ModelSyntaxError(f"[dims] is missing {', '.join(missing)}", 0, 0)
    if not saw_column:
        raise ModelSyntaxError("no [column] directive", 0, 0)
    l = dims["l"]
    bad = [j for j in prims if j > l]
    if bad:
        raise ModelError(f"transform coordinate f{bad[0]} exceeds l={l}")
    transform = Transform.from_mapping(prims, l)
    column = ColumnModel(N=dims["N"], l=l, templates=tuple(templates), transform=transform)
    return FactorModel(
        K=dims["K"], N=dims["N"], R=dims["R"], l=l,
        a_spec=GenericDense(), column=column, domain=domain, scaling_invariant=scaling,
    )


def serialize_model(model) -> str:
    """Model file text for ``model``; structured A matrices are written as generic."""
    from .model import GenericDense

    lines = [f"[dims] K={model.K} N={model.N} R={model.R} l={model.l}", f"[domain] {model.domain}"]
    if not isinstance(model.a_spec, GenericDense):
        lines.append("# structured A is library-only; written as generic")
    lines.append("[A] generic")
    for j, prim in enumerate(model.column.transform.prims, start=1):
        if prim.name != "id":
            lines.append(f"[transform] f{j} = {prim.text()}")
    for label, e in model.column.templates:
        lines.append(f"[column] b_{'n' if label is None else label} = {to_text(e)}")
    lines.append(f"[scaling_invariant] {model.scaling_invariant}")
    return "\n".join(lines) + "\n"
