"""
DSL, parser and evaluator for functions f: R+ -> R^alpha.

Grammar
    fexpr  := fterm (('+'|'-') fterm)*
    fterm  := ffact ('*' ffact)*
    ffact  := 'fb(' num ')' | 'fv(' num ')' | 'mono(' kexpr ')'
            | 'max(' fexpr ',' fexpr ')' | 'subst(' fexpr ';' sexpr ')'
            | 'pw(' branch (';' branch)* ')' | '(' fexpr ')'
    branch := guard '->' fexpr
    guard  := 'u' ('=='|'<'|'<='|'>'|'>=') num | 'else'
    kexpr  := arithmetic over num and 's'
    sexpr  := arithmetic over 'u' and num, 'pow(' sexpr ',' num ')', 'pw(...)'

Evaluation happens in base space on numpy arrays; evaluate() wraps single
points into FractalScalar.
"""

import logging
import re
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Union

import numpy as np

from fractal_core.exceptions import (
    CombineError,
    EvaluationError,
    ExpressionSyntaxError,
    NonTotalPiecewise,
    UnknownIdentifier,
)
from fractal_core.models import (
    AlphaContext,
    Branch,
    FractalConst,
    FractalScalar,
    FunctionAdapter,
    Guard,
    KBinary,
    KNeg,
    KNum,
    KSym,
    Max,
    Mono,
    Piecewise,
    Product,
    SBinary,
    SBranch,
    SLiteral,
    SNeg,
    SPiecewise,
    SPow,
    Subst,
    Sum,
    SVar,
)
from fractal_core.services.algebra import to_base

logger = logging.getLogger(__name__)

FunctionNode = Union[FractalConst, Mono, Sum, Product, Max, Piecewise, Subst]
ScalarNode = Union[SLiteral, SVar, SBinary, SNeg, SPow, SPiecewise]
KNode = Union[KNum, KSym, KBinary, KNeg]
BaseFunction = Callable[[np.ndarray], np.ndarray]

FUNCTION_WORDS = {"fb", "fv", "mono", "max", "subst", "pw"}
GUARD_OPS = {"==", "<", "<=", ">", ">="}

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|==|<=|>=|[-+*/(),;<>])
  | (?P<ws>[ \t\r\n]+)
    """,
    re.VERBOSE,
)


# === Tokenizer ===
@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position, line, line_start = 0, 1, 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        column = position - line_start + 1
        if match is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[position]!r}", line, column
            )
        kind = match.lastgroup
        lexeme = match.group()
        if kind == "ws":
            for offset, char in enumerate(lexeme):
                if char == "\n":
                    line += 1
                    line_start = position + offset + 1
        else:
            tokens.append(Token(kind, lexeme, line, column))
        position = match.end()
    column = position - line_start + 1
    tokens.append(Token("eof", "", line, column))
    return tokens


# === Parser ===
class Parser:
    """Recursive descent over the token stream, one method per rule"""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def error(self, message: str, token: Optional[Token] = None):
        token = token or self.current
        return ExpressionSyntaxError(message, token.line, token.column)

    def accept(self, text: str) -> bool:
        if self.current.text == text and self.current.kind != "num":
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.current.text != text or self.current.kind == "num":
            found = self.current.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_end(self):
        if self.current.kind != "eof":
            raise self.error(f"unexpected {self.current.text!r}")

    def number(self) -> float:
        sign = -1.0 if self.accept("-") else 1.0
        if not sign < 0:
            self.accept("+")
        token = self.current
        if token.kind != "num":
            raise self.error("expected a number")
        self.advance()
        return sign * float(token.text)

    # --- fractal expressions ---
    def fexpr(self) -> FunctionNode:
        terms, signs = [self.fterm()], [1]
        while self.current.text in ("+", "-") and self.current.kind == "op":
            signs.append(1 if self.advance().text == "+" else -1)
            terms.append(self.fterm())
        if len(terms) == 1:
            return terms[0]
        return Sum(terms=tuple(terms), signs=tuple(signs))

    def fterm(self) -> FunctionNode:
        factors = [self.ffact()]
        while self.accept("*"):
            factors.append(self.ffact())
        if len(factors) == 1:
            return factors[0]
        return Product(factors=tuple(factors))

    def ffact(self) -> FunctionNode:
        token = self.current
        if self.accept("("):
            inner = self.fexpr()
            self.expect(")")
            return inner
        if token.kind != "ident":
            raise self.error(f"expected a function term, found {token.text or 'end of input'!r}")
        if token.text not in FUNCTION_WORDS:
            raise UnknownIdentifier(
                f"unknown identifier {token.text!r}", token.line, token.column
            )
        self.advance()
        self.expect("(")
        match token.text:
            case "fb":
                node = FractalConst(mode="base", literal=self.number())
            case "fv":
                node = FractalConst(mode="value", literal=self.number())
            case "mono":
                node = Mono(k=self.kexpr())
            case "max":
                left = self.fexpr()
                self.expect(",")
                node = Max(left=left, right=self.fexpr())
            case "subst":
                outer = self.fexpr()
                self.expect(";")
                node = Subst(outer=outer, inner=self.sexpr())
            case "pw":
                node = self.piecewise(self.fexpr, Branch, Piecewise, token)
        self.expect(")")
        return node

    def piecewise(self, body, branch_type, node_type, start: Token):
        branches = [self.branch(body, branch_type)]
        while self.accept(";"):
            branches.append(self.branch(body, branch_type))
        node = node_type(branches=tuple(branches))
        check_total([branch.guard for branch in branches], start)
        return node

    def branch(self, body, branch_type):
        guard = self.guard()
        self.expect("->")
        return branch_type(guard=guard, expr=body())

    def guard(self) -> Guard:
        token = self.current
        if self.accept("else"):
            return Guard(op="else")
        if token.text != "u":
            if token.kind == "ident":
                raise UnknownIdentifier(
                    f"unknown identifier {token.text!r} in guard", token.line, token.column
                )
            raise self.error("expected a guard on 'u' or 'else'")
        self.advance()
        op = self.current
        if op.text not in GUARD_OPS:
            raise self.error("expected a comparison operator")
        self.advance()
        return Guard(op=op.text, threshold=self.number())

    # --- exponent coefficients ---
    def kexpr(self) -> KNode:
        node = self.kterm()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            node = KBinary(op=op, left=node, right=self.kterm())
        return node

    def kterm(self) -> KNode:
        node = self.kunary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            node = KBinary(op=op, left=node, right=self.kunary())
        return node

    def kunary(self) -> KNode:
        if self.accept("-"):
            if self.current.kind == "num":
                return KNum(value=-float(self.advance().text))
            return KNeg(operand=self.kunary())
        token = self.current
        if token.kind == "num":
            self.advance()
            return KNum(value=float(token.text))
        if self.accept("("):
            node = self.kexpr()
            self.expect(")")
            return node
        if token.kind == "ident":
            if token.text != "s":
                raise UnknownIdentifier(
                    f"unknown identifier {token.text!r} in exponent", token.line, token.column
                )
            self.advance()
            return KSym()
        raise self.error("expected an exponent expression")

    # --- real-valued expressions ---
    def sexpr(self) -> ScalarNode:
        node = self.sterm()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            node = SBinary(op=op, left=node, right=self.sterm())
        return node

    def sterm(self) -> ScalarNode:
        node = self.sunary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            node = SBinary(op=op, left=node, right=self.sunary())
        return node

    def sunary(self) -> ScalarNode:
        if self.accept("-"):
            if self.current.kind == "num":
                return SLiteral(value=-float(self.advance().text))
            return SNeg(operand=self.sunary())
        token = self.current
        if token.kind == "num":
            self.advance()
            return SLiteral(value=float(token.text))
        if self.accept("("):
            node = self.sexpr()
            self.expect(")")
            return node
        if token.kind == "ident":
            self.advance()
            match token.text:
                case "u":
                    return SVar()
                case "pow":
                    self.expect("(")
                    operand = self.sexpr()
                    self.expect(",")
                    node = SPow(operand=operand, exponent=self.number())
                    self.expect(")")
                    return node
                case "pw":
                    self.expect("(")
                    node = self.piecewise(self.sexpr, SBranch, SPiecewise, token)
                    self.expect(")")
                    return node
                case _:
                    raise UnknownIdentifier(
                        f"unknown identifier {token.text!r}", token.line, token.column
                    )
        raise self.error("expected a real expression")


def _guard_covers(guard: Guard, u: float) -> bool:
    match guard.op:
        case "else":
            return True
        case "==":
            return u == guard.threshold
        case "<":
            return u < guard.threshold
        case "<=":
            return u <= guard.threshold
        case ">":
            return u > guard.threshold
        case ">=":
            return u >= guard.threshold


def check_total(guards: Sequence[Guard], where: Optional[Token] = None):
    """
    Guards must cover R+. Coverage only changes at thresholds, so checking
    each threshold and one point inside every gap between them is enough.
    """
    points = sorted({0.0, *(g.threshold for g in guards if g.op != "else" and g.threshold >= 0)})
    probes = list(points)
    probes += [(left + right) / 2 for left, right in zip(points, points[1:])]
    probes.append(points[-1] + 1.0)
    for probe in probes:
        if not any(_guard_covers(guard, probe) for guard in guards):
            line, column = (where.line, where.column) if where else (1, 1)
            raise NonTotalPiecewise(
                f"piecewise guards do not cover u = {probe:g}; add an 'else' branch",
                line,
                column,
            )


def parse(text: str, ctx: Optional[AlphaContext] = None) -> FunctionNode:
    """
    Parses DSL text into a FunctionExpr AST
    """
    parser = Parser(text)
    node = parser.fexpr()
    parser.expect_end()
    logger.debug("parsed %r", text)
    return node


def parse_scalar(text: str) -> ScalarNode:
    """
    Parses a real-valued expression in u (classical functions, inner maps)
    """
    parser = Parser(text)
    node = parser.sexpr()
    parser.expect_end()
    return node


# === Pretty printing ===
def _num(x: float) -> str:
    return repr(float(x))


def k_to_text(node: KNode) -> str:
    match node:
        case KNum():
            return _num(node.value) if node.value >= 0 else f"({_num(node.value)})"
        case KSym():
            return "s"
        case KNeg():
            return f"-({k_to_text(node.operand)})"
        case KBinary():
            return f"({k_to_text(node.left)} {node.op} {k_to_text(node.right)})"


def _guard_text(guard: Guard) -> str:
    return "else" if guard.op == "else" else f"u {guard.op} {_num(guard.threshold)}"


def scalar_to_text(node: ScalarNode) -> str:
    match node:
        case SLiteral():
            return _num(node.value) if node.value >= 0 else f"({_num(node.value)})"
        case SVar():
            return "u"
        case SNeg():
            return f"-({scalar_to_text(node.operand)})"
        case SBinary():
            return f"({scalar_to_text(node.left)} {node.op} {scalar_to_text(node.right)})"
        case SPow():
            return f"pow({scalar_to_text(node.operand)}, {_num(node.exponent)})"
        case SPiecewise():
            body = "; ".join(
                f"{_guard_text(b.guard)} -> {scalar_to_text(b.expr)}" for b in node.branches
            )
            return f"pw({body})"


def to_text(node: FunctionNode) -> str:
    """
    Canonical DSL text; parse(to_text(f)) rebuilds f
    """
    match node:
        case FractalConst():
            word = "fb" if node.mode == "base" else "fv"
            return f"{word}({_num(node.literal)})"
        case Mono():
            return f"mono({k_to_text(node.k)})"
        case Sum():
            parts = [f"({to_text(node.terms[0])})"]
            for sign, term in zip(node.signs[1:], node.terms[1:]):
                parts.append(f"{'+' if sign > 0 else '-'} ({to_text(term)})")
            if node.signs[0] < 0:
                parts[0] = f"fb(0.0) - {parts[0]}"
            return " ".join(parts)
        case Product():
            return " * ".join(f"({to_text(factor)})" for factor in node.factors)
        case Max():
            return f"max({to_text(node.left)}, {to_text(node.right)})"
        case Piecewise():
            body = "; ".join(
                f"{_guard_text(b.guard)} -> {to_text(b.expr)}" for b in node.branches
            )
            return f"pw({body})"
        case Subst():
            return f"subst({to_text(node.outer)}; {scalar_to_text(node.inner)})"


def to_json(node: FunctionNode) -> dict:
    return FunctionAdapter.dump_python(node, mode="json")


# === Evaluation ===
def resolve_k(node: KNode, s: float) -> float:
    match node:
        case KNum():
            return node.value
        case KSym():
            return s
        case KNeg():
            return -resolve_k(node.operand, s)
        case KBinary():
            left, right = resolve_k(node.left, s), resolve_k(node.right, s)
            match node.op:
                case "+":
                    return left + right
                case "-":
                    return left - right
                case "*":
                    return left * right
                case "/":
                    if right == 0:
                        raise EvaluationError("division by zero in exponent")
                    return left / right


def _guard_mask(guard: Guard, u: np.ndarray) -> np.ndarray:
    match guard.op:
        case "else":
            return np.ones_like(u, dtype=bool)
        case "==":
            return u == guard.threshold
        case "<":
            return u < guard.threshold
        case "<=":
            return u <= guard.threshold
        case ">":
            return u > guard.threshold
        case ">=":
            return u >= guard.threshold


def _select(branches, u: np.ndarray, evaluate_branch) -> np.ndarray:
    masks = [_guard_mask(branch.guard, u) for branch in branches]
    values = [evaluate_branch(branch.expr, u) for branch in branches]
    # np.select keeps the first true condition, matching document order
    return np.select(masks, values, default=np.nan)


def scalar_array(node: ScalarNode, u: np.ndarray) -> np.ndarray:
    match node:
        case SLiteral():
            return np.full_like(u, node.value, dtype=float)
        case SVar():
            return u
        case SNeg():
            return -scalar_array(node.operand, u)
        case SBinary():
            left, right = scalar_array(node.left, u), scalar_array(node.right, u)
            match node.op:
                case "+":
                    return left + right
                case "-":
                    return left - right
                case "*":
                    return left * right
                case "/":
                    return np.divide(left, right)
        case SPow():
            return np.power(scalar_array(node.operand, u), node.exponent)
        case SPiecewise():
            return _select(node.branches, u, scalar_array)


def _base_array(node: FunctionNode, u: np.ndarray, ctx: AlphaContext) -> np.ndarray:
    match node:
        case FractalConst():
            literal = node.literal if node.mode == "base" else to_base(node.literal, ctx.alpha)
            return np.full_like(u, literal, dtype=float)
        case Mono():
            return np.power(u, resolve_k(node.k, ctx.s))
        case Sum():
            total = np.zeros_like(u, dtype=float)
            for sign, term in zip(node.signs, node.terms):
                total = total + sign * _base_array(term, u, ctx)
            return total
        case Product():
            total = np.ones_like(u, dtype=float)
            for factor in node.factors:
                total = total * _base_array(factor, u, ctx)
            return total
        case Max():
            return np.maximum(_base_array(node.left, u, ctx), _base_array(node.right, u, ctx))
        case Piecewise():
            return _select(node.branches, u, lambda expr, at: _base_array(expr, at, ctx))
        case Subst():
            return _base_array(node.outer, scalar_array(node.inner, u), ctx)
        case _:
            raise CombineError(f"not a function expression: {type(node).__name__}")


def base_array(node: FunctionNode, u, ctx: AlphaContext) -> np.ndarray:
    """
    Bases of f on an array of points u >= 0; raises on poles or invalid powers
    """
    points = np.asarray(u, dtype=float)
    if np.any(points < 0):
        raise EvaluationError("functions are defined on u >= 0 only")
    with np.errstate(all="ignore"):
        bases = _base_array(node, points, ctx)
    if not np.all(np.isfinite(bases)):
        bad = points[~np.isfinite(bases)] if bases.ndim else points
        raise EvaluationError(f"pole or invalid power at u = {np.ravel(bad)[0]:g}")
    return bases


def evaluate(node: FunctionNode, u: float, ctx: AlphaContext) -> FractalScalar:
    """
    f(u) as an element of R^alpha
    """
    return FractalScalar(base=float(base_array(node, np.array([u]), ctx)[0]))


def base_view(node: FunctionNode, ctx: AlphaContext) -> BaseFunction:
    """
    u -> base(f(u)), exact and vectorized
    """

    def view(u):
        points = np.asarray(u, dtype=float)
        bases = base_array(node, np.atleast_1d(points), ctx)
        return bases if points.ndim else float(bases[0])

    return view


def scalar_view(node: Union[ScalarNode, Callable]) -> BaseFunction:
    """
    Turns a ScalarExpr (or an existing array-aware callable) into a callable
    """
    if callable(node):
        return node

    def view(u):
        points = np.atleast_1d(np.asarray(u, dtype=float))
        with np.errstate(all="ignore"):
            values = scalar_array(node, points)
        if not np.all(np.isfinite(values)):
            raise EvaluationError("pole or invalid power in real expression")
        return values if np.ndim(u) else float(values[0])

    return view


# === Structure helpers ===
def bind_s(node, s: float):
    """
    Replaces the symbol s in every exponent by the literal s, so the function
    stays the same object when the convexity order changes
    """
    match node:
        case KSym():
            return KNum(value=s)
        case KNum():
            return node
        case KNeg():
            return KNeg(operand=bind_s(node.operand, s))
        case KBinary():
            return KBinary(op=node.op, left=bind_s(node.left, s), right=bind_s(node.right, s))
        case Mono():
            return Mono(k=KNum(value=resolve_k(node.k, s)))
        case FractalConst():
            return node
        case Sum():
            return Sum(terms=tuple(bind_s(t, s) for t in node.terms), signs=node.signs)
        case Product():
            return Product(factors=tuple(bind_s(f, s) for f in node.factors))
        case Max():
            return Max(left=bind_s(node.left, s), right=bind_s(node.right, s))
        case Piecewise():
            return Piecewise(
                branches=tuple(Branch(guard=b.guard, expr=bind_s(b.expr, s)) for b in node.branches)
            )
        case Subst():
            return Subst(outer=bind_s(node.outer, s), inner=node.inner)


def breakpoints(node) -> List[float]:
    """Guard thresholds of every piecewise node, sorted"""
    found = set()

    def walk(item):
        match item:
            case Piecewise() | SPiecewise():
                for branch in item.branches:
                    if branch.guard.op != "else":
                        found.add(branch.guard.threshold)
                    walk(branch.expr)
            case Sum():
                for term in item.terms:
                    walk(term)
            case Product():
                for factor in item.factors:
                    walk(factor)
            case Max():
                walk(item.left)
                walk(item.right)
            case Subst():
                walk(item.outer)
                walk(item.inner)
            case SBinary():
                walk(item.left)
                walk(item.right)
            case SNeg() | SPow():
                walk(item.operand)

    walk(node)
    return sorted(found)


# === Combinators ===
def _is_unit(node) -> bool:
    return isinstance(node, FractalConst) and node.literal == 1.0


def _merge_product(factors: Sequence[FunctionNode]) -> FunctionNode:
    flat = []
    for factor in factors:
        flat.extend(factor.factors if isinstance(factor, Product) else [factor])
    monos = [f for f in flat if isinstance(f, Mono)]
    rest = [f for f in flat if not isinstance(f, Mono) and not _is_unit(f)]
    merged = []
    if monos:
        k = monos[0].k
        for mono in monos[1:]:
            if isinstance(k, KNum) and isinstance(mono.k, KNum):
                k = KNum(value=k.value + mono.k.value)
            else:
                k = KBinary(op="+", left=k, right=mono.k)
        merged.append(Mono(k=k))
    merged.extend(rest)
    if not merged:
        return FractalConst(mode="base", literal=1.0)
    if len(merged) == 1:
        return merged[0]
    return Product(factors=tuple(merged))


def _is_function(node) -> bool:
    return isinstance(node, (FractalConst, Mono, Sum, Product, Max, Piecewise, Subst))


def _is_scalar(node) -> bool:
    return isinstance(node, (SLiteral, SVar, SBinary, SNeg, SPow, SPiecewise))


def combine(
    kind: Literal["sum", "product", "max", "compose", "thm35_pattern"],
    *args,
    s: Optional[float] = None,
) -> FunctionNode:
    """
    Builds the function constructions used by the convexity theorems
    """
    match kind:
        case "sum" | "product" | "max":
            if len(args) < 2 or not all(_is_function(arg) for arg in args):
                raise CombineError(f"{kind} needs at least two function expressions")
            if kind == "sum":
                return Sum(terms=tuple(args), signs=(1,) * len(args))
            if kind == "product":
                return _merge_product(args)
            node = args[0]
            for arg in args[1:]:
                node = Max(left=node, right=arg)
            return node
        case "compose":
            if len(args) != 2 or not _is_function(args[0]) or not _is_scalar(args[1]):
                raise CombineError("compose needs (function expression, real expression)")
            return Subst(outer=args[0], inner=args[1])
        case "thm35_pattern":
            if len(args) != 1 or not _is_function(args[0]):
                raise CombineError("thm35_pattern needs exactly one function expression p")
            if s is None or not 0 < s < 1:
                raise CombineError("thm35_pattern needs 0 < s < 1")
            return _merge_product([Mono(k=KNum(value=s / (1.0 - s))), args[0]])
        case _:
            raise CombineError(f"unknown combination {kind!r}")
