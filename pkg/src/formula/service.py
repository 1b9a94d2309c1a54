"""
Formula ASTs for Ł, QŁ and RŁ.

Immutable node dataclasses, the text grammar (a lark LALR parser with a
transformer building nodes), the printer, desugaring of derived
connectives, the recursive reference evaluator, classification by scalar
content, substitution, and a seeded random formula generator.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from ..core.abstractions import (
    DimensionError,
    FormulaSyntaxError,
    ScalarRangeError,
    ValidationError
)
from ..core.utils import RationalCodec
from ..scalar.service import CReal, Interval, Scalar, approx, is_rational

logger = logging.getLogger(__name__)


class SignatureClass(Enum):
    """Signature of a formula by the scalars it uses."""
    L = "L"
    QL = "QL"
    RL = "RL"


def _check_scalar(scalar: Scalar) -> Scalar:
    if isinstance(scalar, CReal):
        return scalar
    value = Fraction(scalar)
    if not 0 <= value <= 1:
        raise ScalarRangeError(f"scalar {RationalCodec.to_text(value)} outside [0,1]")
    return value


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValidationError(f"variable index must be positive, got {self.index}")


@dataclass(frozen=True)
class Const1:
    pass


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Neg:
    child: 'Formula'


@dataclass(frozen=True)
class Oplus:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Nabla:
    scalar: Scalar
    child: 'Formula'

    def __post_init__(self):
        object.__setattr__(self, 'scalar', _check_scalar(self.scalar))


@dataclass(frozen=True)
class Delta:
    scalar: Scalar
    child: 'Formula'

    def __post_init__(self):
        object.__setattr__(self, 'scalar', _check_scalar(self.scalar))


@dataclass(frozen=True)
class Eta:
    scalar: Scalar

    def __post_init__(self):
        object.__setattr__(self, 'scalar', _check_scalar(self.scalar))


@dataclass(frozen=True)
class Imp:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Equiv:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Odot:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Vee:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Wedge:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class ChangDist:
    left: 'Formula'
    right: 'Formula'


Formula = Union[Var, Const1, Zero, Neg, Oplus, Nabla, Delta, Eta, Imp, Equiv, Odot, Vee, Wedge, ChangDist]
BINARY = (Oplus, Imp, Equiv, Odot, Vee, Wedge, ChangDist)
SCALED = (Nabla, Delta)


def div_by(k: int, formula: Formula) -> Formula:
    """φ/k as Δ_{1/k}φ."""
    if k < 1:
        raise ValidationError(f"divisor must be >= 1, got {k}")
    return Delta(Fraction(1, k), formula)


def ntimes(k: int, formula: Formula) -> Formula:
    """k-fold truncated sum φ ⊕ … ⊕ φ; 0 for k = 0."""
    if k < 0:
        raise ValidationError(f"multiplier must be >= 0, got {k}")
    if k == 0:
        return Zero()
    result = formula
    for _ in range(k - 1):
        result = Oplus(result, formula)
    return result


def children(formula: Formula) -> Tuple[Formula, ...]:
    if isinstance(formula, BINARY):
        return formula.left, formula.right
    if isinstance(formula, (Neg,) + SCALED):
        return (formula.child,)
    return ()


def walk(formula: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [formula]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def arity(formula: Formula) -> int:
    """Largest variable index occurring, 0 for closed formulas."""
    return max((node.index for node in walk(formula) if isinstance(node, Var)), default=0)


def scalars(formula: Formula) -> List[Scalar]:
    return [node.scalar for node in walk(formula) if isinstance(node, SCALED + (Eta,))]


def scalar_count(formula: Formula) -> int:
    """Number of scalar nodes S(φ)."""
    return len(scalars(formula))


def classify(formula: Formula) -> SignatureClass:
    """L without scalar connectives, QL with rational scalars only, RL otherwise."""
    found = scalars(formula)
    if not found:
        return SignatureClass.L
    if all(is_rational(s) for s in found):
        return SignatureClass.QL
    return SignatureClass.RL


def desugar(formula: Formula) -> Formula:
    """Rewrite derived connectives into ¬, ⊕, ∇_r and 1."""
    if isinstance(formula, (Var, Const1)):
        return formula
    if isinstance(formula, Zero):
        return Neg(Const1())
    if isinstance(formula, Neg):
        return Neg(desugar(formula.child))
    if isinstance(formula, Oplus):
        return Oplus(desugar(formula.left), desugar(formula.right))
    if isinstance(formula, Nabla):
        return Nabla(formula.scalar, desugar(formula.child))
    if isinstance(formula, Delta):
        return Neg(Nabla(formula.scalar, Neg(desugar(formula.child))))
    if isinstance(formula, Eta):
        return desugar(Delta(formula.scalar, Const1()))
    left, right = desugar(formula.left), desugar(formula.right)
    if isinstance(formula, Imp):
        return Oplus(Neg(left), right)
    if isinstance(formula, Odot):
        return _odot(left, right)
    if isinstance(formula, Vee):
        return _vee(left, right)
    if isinstance(formula, Wedge):
        return Neg(_vee(Neg(left), Neg(right)))
    if isinstance(formula, Equiv):
        return _odot(Oplus(Neg(left), right), Oplus(Neg(right), left))
    if isinstance(formula, ChangDist):
        return Oplus(_odot(Neg(left), right), _odot(left, Neg(right)))
    raise ValidationError(f"unknown formula node {formula!r}")


def _odot(x: Formula, y: Formula) -> Formula:
    return Neg(Oplus(Neg(x), Neg(y)))


def _vee(x: Formula, y: Formula) -> Formula:
    # x ∨ y = x ⊕ (y ⊙ ¬x)
    return Oplus(x, _odot(y, Neg(x)))


def substitute(formula: Formula, mapping: Mapping[int, Formula]) -> Formula:
    """Replace every variable v_i in the mapping by mapping[i]."""
    if isinstance(formula, Var):
        return mapping.get(formula.index, formula)
    if isinstance(formula, (Const1, Zero, Eta)):
        return formula
    if isinstance(formula, Neg):
        return Neg(substitute(formula.child, mapping))
    if isinstance(formula, SCALED):
        return type(formula)(formula.scalar, substitute(formula.child, mapping))
    return type(formula)(substitute(formula.left, mapping), substitute(formula.right, mapping))


# ---------------------------------------------------------------- evaluation

def _check_evaluation_point(formula: Formula, point: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    needed = arity(formula)
    if len(point) < needed:
        raise DimensionError(f"point of dimension {len(point)} for a formula of arity {needed}")
    coords = tuple(Fraction(x) for x in point)
    if any(x < 0 or x > 1 for x in coords):
        raise ValidationError(f"coordinates outside [0,1]: {RationalCodec.point_to_text(coords)}")
    return coords


def _eval_exact(formula: Formula, x: Tuple[Fraction, ...]) -> Fraction:
    if isinstance(formula, Var):
        return x[formula.index - 1]
    if isinstance(formula, Const1):
        return Fraction(1)
    if isinstance(formula, Zero):
        return Fraction(0)
    if isinstance(formula, Eta):
        return formula.scalar
    if isinstance(formula, Neg):
        return 1 - _eval_exact(formula.child, x)
    if isinstance(formula, Nabla):
        return 1 - formula.scalar * (1 - _eval_exact(formula.child, x))
    if isinstance(formula, Delta):
        return formula.scalar * _eval_exact(formula.child, x)
    a, b = _eval_exact(formula.left, x), _eval_exact(formula.right, x)
    if isinstance(formula, Oplus):
        return min(Fraction(1), a + b)
    if isinstance(formula, Odot):
        return max(Fraction(0), a + b - 1)
    if isinstance(formula, Imp):
        return min(Fraction(1), 1 - a + b)
    if isinstance(formula, Vee):
        return max(a, b)
    if isinstance(formula, Wedge):
        return min(a, b)
    if isinstance(formula, Equiv):
        return 1 - abs(a - b)
    if isinstance(formula, ChangDist):
        return abs(a - b)
    raise ValidationError(f"unknown formula node {formula!r}")


def eval_interval(formula: Formula, x: Tuple[Fraction, ...], k: int) -> Interval:
    """Monotone interval evaluation with every scalar enclosed at index k."""
    if isinstance(formula, Var):
        return x[formula.index - 1], x[formula.index - 1]
    if isinstance(formula, Const1):
        return Fraction(1), Fraction(1)
    if isinstance(formula, Zero):
        return Fraction(0), Fraction(0)
    if isinstance(formula, Eta):
        return approx(formula.scalar, k)
    if isinstance(formula, Neg):
        lo, hi = eval_interval(formula.child, x, k)
        return 1 - hi, 1 - lo
    if isinstance(formula, Nabla):
        rlo, rhi = approx(formula.scalar, k)
        lo, hi = eval_interval(formula.child, x, k)
        return 1 - rhi * (1 - lo), 1 - rlo * (1 - hi)
    if isinstance(formula, Delta):
        rlo, rhi = approx(formula.scalar, k)
        lo, hi = eval_interval(formula.child, x, k)
        return rlo * lo, rhi * hi
    (l1, h1), (l2, h2) = eval_interval(formula.left, x, k), eval_interval(formula.right, x, k)
    one, zero = Fraction(1), Fraction(0)
    if isinstance(formula, Oplus):
        return min(one, l1 + l2), min(one, h1 + h2)
    if isinstance(formula, Odot):
        return max(zero, l1 + l2 - 1), max(zero, h1 + h2 - 1)
    if isinstance(formula, Imp):
        return min(one, 1 - h1 + l2), min(one, 1 - l1 + h2)
    if isinstance(formula, Vee):
        return max(l1, l2), max(h1, h2)
    if isinstance(formula, Wedge):
        return min(l1, l2), min(h1, h2)
    dist_lo = max(zero, l1 - h2, l2 - h1)
    dist_hi = max(h1 - l2, h2 - l1)
    if isinstance(formula, ChangDist):
        return dist_lo, dist_hi
    if isinstance(formula, Equiv):
        return 1 - dist_hi, 1 - dist_lo
    raise ValidationError(f"unknown formula node {formula!r}")


def evaluate(formula: Formula, point: Sequence[Fraction]) -> Union[Fraction, CReal]:
    """
    Evaluate a formula at a rational point of [0,1]^n.

    Args:
        formula: Formula to evaluate
        point: Rational coordinates, at least arity(formula) of them

    Returns:
        Exact rational for L/QL formulas; for RL formulas a computable real
        whose enclosure at index k comes from interval evaluation

    Raises:
        DimensionError: If the point is too short
        ValidationError: If a coordinate lies outside [0,1]
    """
    coords = _check_evaluation_point(formula, point)
    if classify(formula) != SignatureClass.RL:
        return _eval_exact(formula, coords)
    # enclosure width is at most S(φ)·2^-j at scalar index j
    shift = scalar_count(formula).bit_length()

    def generator(k: int) -> Interval:
        lo, hi = eval_interval(formula, coords, k + shift)
        return max(Fraction(0), lo), min(Fraction(1), hi)

    return CReal(generator, name="eval", audit_depth=0)


# ---------------------------------------------------------------- grammar

GRAMMAR = r"""
    ?start: imp

    ?imp: oplus
        | oplus "->" imp        -> implication
        | oplus "<->" imp       -> equivalence

    ?oplus: unary
        | oplus "+" unary       -> oplus
        | oplus "." unary       -> odot
        | oplus "\\/" unary     -> vee
        | oplus "/\\" unary     -> wedge

    ?unary: atom
        | "~" unary                     -> neg
        | "nabla[" scalar "]" unary     -> nabla
        | "delta[" scalar "]" unary     -> delta

    ?atom: VAR                          -> var
        | "1"                           -> one
        | "0"                           -> zero
        | "eta[" scalar "]"             -> eta
        | "dist(" imp "," imp ")"       -> dist
        | "(" imp ")"

    scalar: INT "/" INT     -> ratio
          | INT             -> integer
          | NAME            -> named

    VAR: /v[1-9][0-9]*/
    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(GRAMMAR, parser="lalr", propagate_positions=False)


class _FormulaBuilder(Transformer):
    """Turns parse trees into formula nodes, resolving scalar names."""

    def __init__(self, registry: Mapping[str, CReal]):
        super().__init__()
        self.registry = registry

    def ratio(self, items):
        numerator, denominator = items
        if int(denominator) == 0:
            raise ScalarRangeError("zero denominator in scalar", numerator.line, numerator.column)
        return self._in_range(Fraction(int(numerator), int(denominator)), numerator)

    def integer(self, items):
        return self._in_range(Fraction(int(items[0])), items[0])

    def named(self, items):
        token: Token = items[0]
        if str(token) not in self.registry:
            raise ScalarRangeError(f"unknown scalar name {str(token)!r}", token.line, token.column)
        return self.registry[str(token)]

    @staticmethod
    def _in_range(value: Fraction, token: Token) -> Fraction:
        if not 0 <= value <= 1:
            raise ScalarRangeError(f"scalar {RationalCodec.to_text(value)} outside [0,1]",
                                   token.line, token.column)
        return value

    def var(self, items):
        return Var(int(str(items[0])[1:]))

    def one(self, _):
        return Const1()

    def zero(self, _):
        return Zero()

    def eta(self, items):
        return Eta(items[0])

    def dist(self, items):
        return ChangDist(items[0], items[1])

    def neg(self, items):
        return Neg(items[0])

    def nabla(self, items):
        return Nabla(items[0], items[1])

    def delta(self, items):
        return Delta(items[0], items[1])

    def oplus(self, items):
        return Oplus(items[0], items[1])

    def odot(self, items):
        return Odot(items[0], items[1])

    def vee(self, items):
        return Vee(items[0], items[1])

    def wedge(self, items):
        return Wedge(items[0], items[1])

    def implication(self, items):
        return Imp(items[0], items[1])

    def equivalence(self, items):
        return Equiv(items[0], items[1])


def _error_position(text: str, error: UnexpectedInput) -> Tuple[int, int]:
    line = getattr(error, 'line', -1)
    column = getattr(error, 'column', -1)
    at_end = isinstance(error, UnexpectedEOF) or (
        isinstance(error, UnexpectedToken) and error.token.type == '$END')
    if at_end or line is None or line < 1:
        lines = text.split('\n')
        return len(lines), len(lines[-1]) + 1
    return line, column


def parse(text: str, registry: Optional[Mapping[str, CReal]] = None) -> Formula:
    """
    Parse formula source text.

    Args:
        text: Source conforming to the formula grammar
        registry: Named computable-real handles usable as scalars

    Returns:
        The formula AST

    Raises:
        FormulaSyntaxError: On grammar violations, with line and column
        ScalarRangeError: On scalar literals outside [0,1] or unknown names
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        line, column = _error_position(text, e)
        raise FormulaSyntaxError("syntax error in formula", line, column) from e
    try:
        return _FormulaBuilder(registry or {}).transform(tree)
    except VisitError as e:
        raise e.orig_exc from e


# ---------------------------------------------------------------- printing

_IMP_LEVEL, _OPLUS_LEVEL, _UNARY_LEVEL = 0, 1, 2
_INFIX = {Oplus: "+", Odot: ".", Vee: "\\/", Wedge: "/\\", Imp: "->", Equiv: "<->"}


def _level(formula: Formula) -> int:
    if isinstance(formula, (Imp, Equiv)):
        return _IMP_LEVEL
    if isinstance(formula, (Oplus, Odot, Vee, Wedge)):
        return _OPLUS_LEVEL
    return _UNARY_LEVEL


def _scalar_text(scalar: Scalar) -> str:
    if isinstance(scalar, CReal):
        if not scalar.name:
            raise ValidationError("cannot print an unnamed computable real")
        return scalar.name
    return RationalCodec.to_text(scalar)


def _wrapped(formula: Formula, minimum: int) -> str:
    text = to_text(formula)
    return f"({text})" if _level(formula) < minimum else text


def to_text(formula: Formula) -> str:
    """Print a formula in the grammar's concrete syntax."""
    if isinstance(formula, Var):
        return f"v{formula.index}"
    if isinstance(formula, Const1):
        return "1"
    if isinstance(formula, Zero):
        return "0"
    if isinstance(formula, Eta):
        return f"eta[{_scalar_text(formula.scalar)}]"
    if isinstance(formula, ChangDist):
        return f"dist({to_text(formula.left)}, {to_text(formula.right)})"
    if isinstance(formula, Neg):
        return "~" + _wrapped(formula.child, _UNARY_LEVEL)
    if isinstance(formula, SCALED):
        keyword = "nabla" if isinstance(formula, Nabla) else "delta"
        operand = _wrapped(formula.child, _UNARY_LEVEL)
        separator = "" if operand.startswith("(") else " "
        return f"{keyword}[{_scalar_text(formula.scalar)}]{separator}{operand}"
    symbol = _INFIX[type(formula)]
    if isinstance(formula, (Imp, Equiv)):
        return f"{_wrapped(formula.left, _OPLUS_LEVEL)} {symbol} {_wrapped(formula.right, _IMP_LEVEL)}"
    return f"{_wrapped(formula.left, _OPLUS_LEVEL)} {symbol} {_wrapped(formula.right, _UNARY_LEVEL)}"


# ---------------------------------------------------------------- generation

class FormulaGenerator:
    """Seeded random formulas for the property suites."""

    DENOMINATORS = (1, 2, 3, 4, 5, 6, 8)

    def __init__(self,
                 seed: int,
                 max_depth: int = 5,
                 max_arity: int = 3,
                 with_scalars: bool = True,
                 scalar_pool: Optional[Sequence[Scalar]] = None):
        """
        Args:
            seed: Seed of the private random stream
            max_depth: Maximal nesting depth
            max_arity: Variables are drawn from v1..v{max_arity}
            with_scalars: Whether ∇/Δ/η nodes may appear
            scalar_pool: Scalars to draw from instead of random rationals
        """
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.max_arity = max_arity
        self.with_scalars = with_scalars
        self.scalar_pool = list(scalar_pool) if scalar_pool else None

    def rational(self) -> Fraction:
        denominator = self.rng.choice(self.DENOMINATORS)
        return Fraction(self.rng.randint(0, denominator), denominator)

    def scalar(self) -> Scalar:
        if self.scalar_pool:
            return self.rng.choice(self.scalar_pool)
        return self.rational()

    def point(self, n: int) -> Tuple[Fraction, ...]:
        return tuple(self.rational() for _ in range(n))

    def formula(self, depth: Optional[int] = None) -> Formula:
        depth = self.max_depth if depth is None else depth
        # leaves get likelier as depth is used up, keeping sizes moderate
        if depth <= 0 or self.rng.random() < 0.3 + 0.1 * (self.max_depth - depth):
            return self._leaf()
        choices = [Neg, Oplus, Odot, Imp, Vee, Wedge, Equiv, ChangDist]
        if self.with_scalars:
            choices += [Nabla, Delta]
        node = self.rng.choice(choices)
        if node is Neg:
            return Neg(self.formula(depth - 1))
        if node in SCALED:
            return node(self.scalar(), self.formula(depth - 1))
        return node(self.formula(depth - 1), self.formula(depth - 1))

    def _leaf(self) -> Formula:
        roll = self.rng.random()
        if roll < 0.08:
            return Const1()
        if roll < 0.12:
            return Zero()
        if self.with_scalars and roll < 0.2:
            return Eta(self.scalar())
        return Var(self.rng.randint(1, self.max_arity))
