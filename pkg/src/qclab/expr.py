"""Minimal complex-expression language for motion families phi_alpha(z).

Grammar: complex literals "(re,im)", real number literals, variables alpha
and z, conj(.), exp(.), binary + - * / and ^ with integer exponent,
parentheses.  Precedence: ^  >  unary -  >  * /  >  + -, binary operators of
equal precedence associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError, ValidationError

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
""", re.VERBOSE)

_VARIABLES = ("alpha", "z")
_FUNCTIONS = ("conj", "exp")


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(src: str) -> list[Token]:
    tokens = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[i]!r}", i)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), i))
        i = m.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: complex
    pos: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: int = 0


@dataclass(frozen=True)
class Call:
    fn: str  # conj | exp
    arg: "Expr"
    pos: int = 0


@dataclass(frozen=True)
class Bin:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"
    pos: int = 0


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    pos: int = 0


Expr = Lit | Var | Neg | Call | Bin | Pow


def _same_tree(a: Expr, b: Expr) -> bool:
    """Structural equality ignoring source positions."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Lit):
        return a.value == b.value
    if isinstance(a, Var):
        return a.name == b.name
    if isinstance(a, Neg):
        return _same_tree(a.arg, b.arg)
    if isinstance(a, Call):
        return a.fn == b.fn and _same_tree(a.arg, b.arg)
    if isinstance(a, Bin):
        return a.op == b.op and _same_tree(a.left, b.left) and _same_tree(a.right, b.right)
    return a.exponent == b.exponent and _same_tree(a.base, b.base)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.next()
        raise ExprSyntaxError(f"expected {text!r}", tok.pos)

    # additive <- multiplicative {(+|-) multiplicative}
    def additive(self) -> Expr:
        node = self.multiplicative()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next()
            node = Bin(op.text, node, self.multiplicative(), op.pos)
        return node

    def multiplicative(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next()
            node = Bin(op.text, node, self.unary(), op.pos)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            return Neg(self.unary(), tok.pos)
        return self.power()

    # power binds tighter than unary minus; exponent is a signed integer literal
    def power(self) -> Expr:
        node = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            caret = self.next()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.next()
                sign = -1
            tok = self.peek()
            if tok.kind != "num":
                raise ExprSyntaxError("expected integer exponent after '^'", tok.pos)
            value = float(tok.text)
            if value != int(value):
                raise ExprSyntaxError(f"non-integer exponent {tok.text}", tok.pos)
            self.next()
            node = Pow(node, sign * int(value), caret.pos)
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return Lit(complex(float(tok.text)), tok.pos)
        if tok.kind == "ident":
            self.next()
            if tok.text in _VARIABLES:
                return Var(tok.text, tok.pos)
            if tok.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.additive()
                self.expect_op(")")
                return Call(tok.text, arg, tok.pos)
            raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            lit = self._try_complex_literal()
            if lit is not None:
                return lit
            self.next()
            node = self.additive()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {tok.text!r}" if tok.kind != "end"
                              else "unexpected end of input", tok.pos)

    def _try_complex_literal(self) -> Lit | None:
        """Match '(' [-]num ',' [-]num ')' without consuming on failure."""
        save = self.i
        open_tok = self.next()  # '('

        def signed_number() -> float | None:
            sign = 1.0
            if self.peek().kind == "op" and self.peek().text == "-":
                self.next()
                sign = -1.0
            if self.peek().kind != "num":
                return None
            return sign * float(self.next().text)

        re_part = signed_number()
        if re_part is not None and self.peek().kind == "op" and self.peek().text == ",":
            self.next()
            im_part = signed_number()
            if im_part is not None and self.peek().kind == "op" and self.peek().text == ")":
                self.next()
                return Lit(complex(re_part, im_part), open_tok.pos)
        self.i = save
        return None


def parse(src: str) -> Expr:
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(src))
    node = parser.additive()
    tail = parser.peek()
    if tail.kind != "end":
        raise ExprSyntaxError(f"unexpected trailing input {tail.text!r}", tail.pos)
    return node


# --- printing ---------------------------------------------------------------

def _precedence(node: Expr) -> int:
    if isinstance(node, Bin):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def unparse(node: Expr) -> str:
    """Print with minimal parentheses; parse(unparse(e)) equals e."""
    prec = _precedence(node)
    if isinstance(node, Lit):
        v = node.value
        if v.imag == 0 and v.real >= 0:
            return _fmt_real(v.real)
        return f"({_fmt_real(v.real)},{_fmt_real(v.imag)})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({unparse(node.arg)})"
    if isinstance(node, Neg):
        inner = unparse(node.arg)
        if _precedence(node.arg) < prec:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = unparse(node.base)
        if _precedence(node.base) <= prec:
            base = f"({base})"
        exp = str(node.exponent) if node.exponent >= 0 else f"-{-node.exponent}"
        return f"{base}^{exp}"
    left = unparse(node.left)
    right = unparse(node.right)
    if _precedence(node.left) < prec:
        left = f"({left})"
    # left associativity: right operand needs parens at equal precedence
    if _precedence(node.right) <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation --------------------------------------------------------------

def evaluate(node: Expr, alpha, z):
    """Complex arithmetic over the tree; alpha/z may be scalars or arrays."""
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Var):
        return alpha if node.name == "alpha" else z
    if isinstance(node, Neg):
        return -evaluate(node.arg, alpha, z)
    if isinstance(node, Call):
        val = evaluate(node.arg, alpha, z)
        return np.conj(val) if node.fn == "conj" else np.exp(val)
    if isinstance(node, Pow):
        base = evaluate(node.base, alpha, z)
        if node.exponent < 0:
            if np.any(base == 0):
                raise ExprEvalError("zero raised to a negative power", node.pos)
        with np.errstate(invalid="ignore"):
            return base ** node.exponent
    left = evaluate(node.left, alpha, z)
    right = evaluate(node.right, alpha, z)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if np.any(right == 0):
        raise ExprEvalError("division by zero", node.pos)
    return left / right


def division_positions(node: Expr) -> list[int]:
    """Offsets of every division node (potential singularities)."""
    out = []
    if isinstance(node, Bin):
        if node.op == "/":
            out.append(node.pos)
        out += division_positions(node.left) + division_positions(node.right)
    elif isinstance(node, (Neg, Call)):
        out += division_positions(node.arg)
    elif isinstance(node, Pow):
        if node.exponent < 0:
            out.append(node.pos)
        out += division_positions(node.base)
    return sorted(out)


def uses_variable(node: Expr, name: str) -> bool:
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, (Neg, Call)):
        return uses_variable(node.arg, name)
    if isinstance(node, Bin):
        return uses_variable(node.left, name) or uses_variable(node.right, name)
    if isinstance(node, Pow):
        return uses_variable(node.base, name)
    return False


def substitute_scaled_z(node: Expr, factor: float) -> Expr:
    """Replace the variable z by (factor * z) throughout the tree."""
    if isinstance(node, Var):
        if node.name == "z":
            return Bin("*", Lit(complex(factor), node.pos), node, node.pos)
        return node
    if isinstance(node, Lit):
        return node
    if isinstance(node, Neg):
        return Neg(substitute_scaled_z(node.arg, factor), node.pos)
    if isinstance(node, Call):
        return Call(node.fn, substitute_scaled_z(node.arg, factor), node.pos)
    if isinstance(node, Pow):
        return Pow(substitute_scaled_z(node.base, factor), node.exponent, node.pos)
    return Bin(node.op, substitute_scaled_z(node.left, factor),
               substitute_scaled_z(node.right, factor), node.pos)


@dataclass(frozen=True)
class HolomorphyReport:
    passed: bool
    max_abs_dzbar: float
    worst_alpha: complex
    worst_z: complex
    tolerance: float


def check_leaf_holomorphy(node: Expr, alpha_samples, z_samples,
                          step: float = 1e-5, tol: float = 1e-6) -> HolomorphyReport:
    """Estimate d/d(conj z) by centered differences at each sample pair; the
    check passes iff the largest estimate is <= tol."""
    alphas = np.atleast_1d(np.asarray(alpha_samples, dtype=np.complex128))
    zs = np.atleast_1d(np.asarray(z_samples, dtype=np.complex128))
    if alphas.size == 0 or zs.size == 0:
        raise ValidationError("holomorphy check needs nonempty sample sets")
    if np.max(np.abs(zs)) >= 1.0:
        raise ValidationError("z samples must lie inside the unit disk")
    A, Z = np.meshgrid(alphas, zs)
    fxp = evaluate(node, A, Z + step)
    fxm = evaluate(node, A, Z - step)
    fyp = evaluate(node, A, Z + 1j * step)
    fym = evaluate(node, A, Z - 1j * step)
    dzbar = 0.5 * ((fxp - fxm) + 1j * (fyp - fym)) / (2.0 * step)
    mags = np.abs(np.broadcast_to(dzbar, A.shape))
    k = int(np.argmax(mags))
    return HolomorphyReport(
        passed=bool(mags.flat[k] <= tol),
        max_abs_dzbar=float(mags.flat[k]),
        worst_alpha=complex(A.flat[k]),
        worst_z=complex(Z.flat[k]),
        tolerance=tol,
    )
