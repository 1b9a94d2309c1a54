"""
Scalar domains of the rational and real extensions.

Rationals are plain ``fractions.Fraction`` values. Computable reals are
``CReal`` objects: a pure generator mapping a precision index k to a nested
rational interval of width at most 2^-k, audited when constructed.
"""

import logging
import re
import threading
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple, Union

from ..core.abstractions import ScalarRangeError, ValidationError
from ..core.utils import RationalCodec

logger = logging.getLogger(__name__)

Interval = Tuple[Fraction, Fraction]
DEFAULT_AUDIT_DEPTH = 32


class CReal:
    """Computable real in [0,1] given by a monotone rational sandwich."""

    def __init__(self,
                 generator: Callable[[int], Interval],
                 name: Optional[str] = None,
                 audit_depth: int = DEFAULT_AUDIT_DEPTH,
                 exact: Optional[Fraction] = None):
        """
        Build and audit a computable real.

        Args:
            generator: Pure map k -> (lo_k, hi_k)
            name: Handle used when printing formulas
            audit_depth: Indices 0..audit_depth checked at construction
            exact: The rational value, when the real is an embedded rational

        Raises:
            ScalarRangeError: If the generator breaks monotonicity, the width
                schedule or the [0,1] bounds
        """
        self.name = name
        self.exact = exact
        self.audit_depth = audit_depth
        self._generator = generator
        self._cache: Dict[int, Interval] = {}
        self._lock = threading.Lock()
        for k in range(audit_depth + 1):
            self.approx(k)

    def approx(self, k: int) -> Interval:
        """
        Return the enclosure (lo_k, hi_k).

        Args:
            k: Precision index, k >= 0

        Returns:
            Pair of rationals with hi_k - lo_k <= 2^-k
        """
        if k < 0:
            raise ValidationError(f"precision index must be >= 0, got {k}")
        with self._lock:
            cached = self._cache.get(k)
            if cached is not None:
                return cached
            lo, hi = self._generator(k)
            lo, hi = Fraction(lo), Fraction(hi)
            self._check(k, lo, hi)
            self._cache[k] = (lo, hi)
            return lo, hi

    def _check(self, k: int, lo: Fraction, hi: Fraction) -> None:
        label = self.name or "creal"
        if lo > hi:
            raise ScalarRangeError(f"{label}: lo_{k} > hi_{k}")
        if hi - lo > Fraction(1, 2 ** k):
            raise ScalarRangeError(f"{label}: width at index {k} exceeds 2^-{k}")
        if lo < 0 or hi > 1:
            raise ScalarRangeError(f"{label}: enclosure at index {k} leaves [0,1]")
        # nesting against the closest cached neighbours
        below = [j for j in self._cache if j < k]
        above = [j for j in self._cache if j > k]
        if below:
            plo, phi = self._cache[max(below)]
            if lo < plo or hi > phi:
                raise ScalarRangeError(f"{label}: enclosure at index {k} is not nested")
        if above:
            nlo, nhi = self._cache[min(above)]
            if nlo < lo or nhi > hi:
                raise ScalarRangeError(f"{label}: enclosure at index {k} is not nested")

    def __repr__(self) -> str:
        return f"CReal({self.name or '?'})"


Scalar = Union[Fraction, CReal]


def creal_of_rational(value: Fraction, name: Optional[str] = None,
                      audit_depth: int = DEFAULT_AUDIT_DEPTH) -> CReal:
    """Embed a rational of [0,1] as a computable real."""
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ScalarRangeError(f"scalar {RationalCodec.to_text(value)} outside [0,1]")
    return CReal(lambda k: (value, value), name=name or RationalCodec.to_text(value),
                 audit_depth=audit_depth, exact=value)


def sqrt_creal(value: Fraction, name: Optional[str] = None, audit_depth: int = DEFAULT_AUDIT_DEPTH) -> CReal:
    """
    Square root of a rational of [0,1] by bisection.

    The interval at index k is the k-th bisection interval of [0,1], so
    widths are exactly 2^-k until a perfect square collapses it.
    """
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ScalarRangeError(f"sqrt argument {RationalCodec.to_text(value)} outside [0,1]")

    def generator(k: int) -> Interval:
        lo, hi = Fraction(0), Fraction(1)
        for _ in range(k):
            mid = (lo + hi) / 2
            square = mid * mid
            if square == value:
                return mid, mid
            if square < value:
                lo = mid
            else:
                hi = mid
        if lo * lo == value:
            return lo, lo
        if hi * hi == value:
            return hi, hi
        return lo, hi

    return CReal(generator, name=name or f"sqrt({RationalCodec.to_text(value)})", audit_depth=audit_depth)


SQRT2_OVER_2 = sqrt_creal(Fraction(1, 2), name="sqrt2_over_2")


def is_rational(scalar: Scalar) -> bool:
    """True for plain rationals."""
    return isinstance(scalar, Fraction)


def approx(scalar: Scalar, k: int) -> Interval:
    """Enclosure of any scalar at index k; rationals are their own enclosure."""
    if isinstance(scalar, CReal):
        return scalar.approx(k)
    value = Fraction(scalar)
    return value, value


def _clamp(interval: Interval) -> Interval:
    lo, hi = interval
    return max(Fraction(0), lo), min(Fraction(1), hi)


def _lift(name: str, operation: Callable[[Interval, Interval], Interval], a: Scalar, b: Scalar) -> CReal:
    # operands at k+1 keep the result width within 2^-k
    return CReal(lambda k: _clamp(operation(approx(a, k + 1), approx(b, k + 1))), name=name)


def _label(scalar: Scalar) -> str:
    if isinstance(scalar, CReal):
        return scalar.name or "?"
    return RationalCodec.to_text(scalar)


def product(a: Scalar, b: Scalar) -> Scalar:
    """Product a·b."""
    if is_rational(a) and is_rational(b):
        return Fraction(a) * Fraction(b)
    return _lift(f"({_label(a)}*{_label(b)})",
                 lambda x, y: (x[0] * y[0], x[1] * y[1]), a, b)


def complement(a: Scalar) -> Scalar:
    """Complement 1 - a."""
    if is_rational(a):
        return 1 - Fraction(a)
    return CReal(lambda k: _clamp((1 - approx(a, k)[1], 1 - approx(a, k)[0])), name=f"(1-{_label(a)})")


def truncated_diff(a: Scalar, b: Scalar) -> Scalar:
    """Truncated difference a⊙b* = max(0, a - b)."""
    if is_rational(a) and is_rational(b):
        return max(Fraction(0), Fraction(a) - Fraction(b))
    return _lift(f"({_label(a)}-.{_label(b)})",
                 lambda x, y: (max(Fraction(0), x[0] - y[1]), max(Fraction(0), x[1] - y[0])), a, b)


_SQRT_EXPR = re.compile(r'^sqrt\(\s*([^()]+?)\s*\)$')
_NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')


def parse_scalar_expr(expression: str, name: Optional[str] = None,
                      audit_depth: int = DEFAULT_AUDIT_DEPTH) -> CReal:
    """
    Parse a registry expression: ``sqrt(p/q)`` or a rational ``p/q``.

    Args:
        expression: Expression text
        name: Handle for the resulting real
        audit_depth: Indices checked when the real is built

    Returns:
        The computable real
    """
    expression = expression.strip()
    match = _SQRT_EXPR.match(expression)
    if match:
        return sqrt_creal(RationalCodec.from_text(match.group(1)), name=name, audit_depth=audit_depth)
    return creal_of_rational(RationalCodec.from_text(expression), name=name, audit_depth=audit_depth)


def parse_registry(text: str, audit_depth: int = DEFAULT_AUDIT_DEPTH) -> Dict[str, CReal]:
    """
    Parse a registry table of ``name = expr`` lines.

    Blank lines and ``#`` comments are ignored.

    Raises:
        ValidationError: On malformed lines, bad names or duplicates
    """
    registry: Dict[str, CReal] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValidationError(f"scalar registry line {number}: expected 'name = expr'")
        name, expression = (part.strip() for part in line.split('=', 1))
        if not _NAME.match(name):
            raise ValidationError(f"scalar registry line {number}: invalid name {name!r}")
        if name in registry:
            raise ValidationError(f"scalar registry line {number}: duplicate name {name!r}")
        registry[name] = parse_scalar_expr(expression, name=name, audit_depth=audit_depth)
        logger.debug("registered scalar %s = %s", name, expression)
    return registry


def load_registry(path: Optional[str], audit_depth: int = DEFAULT_AUDIT_DEPTH) -> Dict[str, CReal]:
    """
    Load a registry file, always including the built-in ``sqrt2_over_2``.

    Args:
        path: Registry file path, or None/empty for the built-ins only
        audit_depth: Indices checked for every registered real
    """
    builtin = SQRT2_OVER_2
    if audit_depth != DEFAULT_AUDIT_DEPTH:
        builtin = sqrt_creal(Fraction(1, 2), name=SQRT2_OVER_2.name, audit_depth=audit_depth)
    registry: Dict[str, CReal] = {builtin.name: builtin}
    if path:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                registry.update(parse_registry(f.read(), audit_depth))
        except FileNotFoundError:
            raise ValidationError(f"scalar registry file not found: {path}")
    return registry
