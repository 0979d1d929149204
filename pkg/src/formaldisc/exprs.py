"""Expression grammar for polynomials, forms and Weyl words.

    expr     := wedge (('+'|'-') wedge)*
    wedge    := product ('/\\' product)*
    product  := unary ('*' unary)*
    unary    := '-' unary | power
    power    := atom ('^' NUMBER)?
    atom     := NUMBER ('/' NUMBER)? | NAME | '(' expr ')'

Names are x1..xd, y1..yd, h and the coordinate 1-forms dx1..dyd; rationals
are written p/q.  '^' binds tighter than '*', which binds tighter than the
wedge, which binds tighter than '+'/'-'.  Syntax errors carry the offending
position; unknown variables are reported against the session dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UsageError
from .series import DifferentialForm, TruncatedPoly
from .weyl import TruncationSpec, WeylElement, star


class ParseError(UsageError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/\\'
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


def tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if text.startswith("/\\", i):
            tokens.append(("wedge", "/\\", i))
            i += 2
            continue
        if ch in "+-*^/()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.wedge()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.wedge())
        return node

    def wedge(self):
        node = self.product()
        while self.peek()[0] == "wedge":
            self.take()
            node = BinOp("/\\", node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.peek()[0] == "*":
            self.take()
            node = BinOp("*", node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("num")
            return Pow(base, int(tok[1]))
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            if self.peek()[0] == "/":
                self.take()
                den = self.take("num")
                if int(den[1]) == 0:
                    raise ParseError("zero denominator", den[2])
                return Num(Fraction(int(tok[1]), int(den[1])))
            return Num(Fraction(int(tok[1])))
        if tok[0] == "name":
            self.take()
            return Sym(tok[1], tok[2])
        if tok[0] == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected {tok[1]!r}", tok[2])


def parse(text: str):
    return _Parser(text).parse()


def to_text(node, parent_level=0) -> str:
    """Print an expression; parse(to_text(e)) reproduces e's value."""
    levels = {"+": 1, "-": 1, "/\\": 2, "*": 3}
    if isinstance(node, Num):
        txt = (
            str(node.value)
            if node.value.denominator == 1
            else f"{node.value.numerator}/{node.value.denominator}"
        )
        return f"({txt})" if node.value < 0 and parent_level > 1 else txt
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.arg, 4)
        return f"-{inner}" if parent_level <= 1 else f"(-{inner})"
    if isinstance(node, Pow):
        return f"{to_text(node.base, 5)}^{node.exponent}"
    if isinstance(node, BinOp):
        level = levels[node.op]
        op = node.op if node.op != "/\\" else "/\\"
        text = f"{to_text(node.left, level)} {op} {to_text(node.right, level + 1)}"
        return f"({text})" if level < parent_level else text
    raise UsageError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    d: int
    cutoff: int


def _resolve_symbol(sym: Sym, ctx: EvalContext):
    name = sym.name
    if name == "h":
        return TruncatedPoly.h(ctx.d, ctx.cutoff)
    form = name.startswith("d") and len(name) > 1
    body = name[1:] if form else name
    if len(body) >= 2 and body[0] in "xy" and body[1:].isdigit():
        index = int(body[1:]) - 1
        if not 0 <= index < ctx.d:
            raise UsageError(
                f"unknown variable {name} for d={ctx.d} (at position {sym.pos})"
            )
        flat = index if body[0] == "x" else ctx.d + index
        if form:
            return DifferentialForm.d_coordinate(flat, ctx.d, ctx.cutoff)
        return TruncatedPoly.coordinate(flat, ctx.d, ctx.cutoff)
    raise UsageError(f"unknown variable {name} (at position {sym.pos})")


def evaluate(node, ctx: EvalContext):
    """Evaluate to a TruncatedPoly or a DifferentialForm."""
    from .series import wedge as wedge_forms

    if isinstance(node, Num):
        return TruncatedPoly.constant(node.value, ctx.d, ctx.cutoff)
    if isinstance(node, Sym):
        return _resolve_symbol(node, ctx)
    if isinstance(node, Neg):
        return -evaluate(node.arg, ctx)
    if isinstance(node, Pow):
        base = evaluate(node.base, ctx)
        if not isinstance(base, TruncatedPoly):
            raise UsageError("exponentiation applies to polynomials only")
        return base ** node.exponent
    if isinstance(node, BinOp):
        left = evaluate(node.left, ctx)
        right = evaluate(node.right, ctx)
        if node.op in ("+", "-"):
            if isinstance(left, TruncatedPoly) != isinstance(right, TruncatedPoly):
                raise UsageError("cannot add a polynomial and a form")
            return left + right if node.op == "+" else left - right
        if node.op == "*":
            if isinstance(left, TruncatedPoly) and isinstance(right, TruncatedPoly):
                return left * right
            if isinstance(left, TruncatedPoly):
                return right.poly_mul(left)
            if isinstance(right, TruncatedPoly):
                return left.poly_mul(right)
            raise UsageError("use /\\ to multiply two forms")
        if node.op == "/\\":
            if isinstance(left, TruncatedPoly):
                left = DifferentialForm.from_poly(left)
            if isinstance(right, TruncatedPoly):
                right = DifferentialForm.from_poly(right)
            return wedge_forms(left, right)
    raise UsageError(f"not an expression node: {node!r}")


def eval_poly(text: str, ctx: EvalContext) -> TruncatedPoly:
    value = evaluate(parse(text), ctx)
    if not isinstance(value, TruncatedPoly):
        raise UsageError(f"expected a polynomial, got a degree-{value.degree} form")
    return value


def eval_form(text: str, ctx: EvalContext) -> DifferentialForm:
    value = evaluate(parse(text), ctx)
    if isinstance(value, TruncatedPoly):
        return DifferentialForm.from_poly(value)
    return value


def eval_weyl(text: str, spec: TruncationSpec) -> WeylElement:
    """Evaluate a Weyl word/expression left to right in the noncommutative
    algebra; form symbols are rejected."""

    def walk(node):
        if isinstance(node, Num):
            return WeylElement.scalar(node.value, spec)
        if isinstance(node, Sym):
            if node.name.startswith("d") and node.name != "h":
                raise UsageError(
                    f"form symbol {node.name} is not a Weyl generator "
                    f"(at position {node.pos})"
                )
            return WeylElement.generator(node.name, spec)
        if isinstance(node, Neg):
            return -walk(node.arg)
        if isinstance(node, Pow):
            base = walk(node.base)
            out = WeylElement.one(spec)
            for _ in range(node.exponent):
                out = star(out, base)
            return out
        if isinstance(node, BinOp):
            left, right = walk(node.left), walk(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return star(left, right)
            raise UsageError("wedge is not a Weyl operation")
        raise UsageError(f"not an expression node: {node!r}")

    return walk(parse(text))
