"""
Semantic analyses of formulas and compiled functions.

Truth degree, provability degree, unit norm and the integral state are
exact on L/QL inputs (affine pieces attain their extrema at vertices and
integrate to volume times vertex mean). RL inputs answer with the interval
spanned by the two envelopes at a precision index.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

from ..core.abstractions import InvariantViolation, UnsupportedClassError, ValidationError
from ..core.utils import RationalCodec
from ..duality.service import zero_set
from ..formula import service as formulas
from ..formula.service import Formula, SignatureClass
from ..geometry.service import Point, RationalPolyhedron, simplex_volume
from ..pwl.service import (
    DEFAULT_CELL_CAP,
    Connective,
    IntervalPwl,
    PwlFunction,
    apply_connective,
    compile_envelopes,
    compile_exact,
    compile_formula,
    restrict
)

logger = logging.getLogger(__name__)

Subject = Union[Formula, PwlFunction, IntervalPwl]


class Verdict(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DegreeResult:
    """Exact value with witness, or an interval (lo, hi) at a precision index."""
    value: Optional[Fraction] = None
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    precision: Optional[int] = None
    witness: Optional[Point] = None

    def __post_init__(self):
        if self.value is None and (self.lo is None or self.hi is None or self.lo > self.hi):
            raise InvariantViolation("degree interval needs lo <= hi")

    @classmethod
    def exact(cls, value: Fraction, witness: Optional[Point] = None) -> 'DegreeResult':
        return cls(value=value, witness=witness)

    @classmethod
    def interval(cls, lo: Fraction, hi: Fraction, precision: int) -> 'DegreeResult':
        if lo == hi:
            return cls(value=lo, lo=lo, hi=hi, precision=precision)
        return cls(lo=lo, hi=hi, precision=precision)

    @property
    def kind(self) -> str:
        return "exact" if self.value is not None else "interval"

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.value is not None:
            data["value"] = RationalCodec.to_text(self.value)
        else:
            data["lo"] = RationalCodec.to_text(self.lo)
            data["hi"] = RationalCodec.to_text(self.hi)
        if self.witness is not None:
            data["witness"] = RationalCodec.point_to_text(self.witness)
        if self.precision is not None:
            data["precision"] = self.precision
        return data


@dataclass(frozen=True)
class ConsequenceResult:
    verdict: Verdict
    value: Optional[Fraction] = None
    witness: Optional[Point] = None
    precision: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.YES

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"verdict": self.verdict.value}
        if self.value is not None:
            data["value"] = RationalCodec.to_text(self.value)
        if self.witness is not None:
            data["witness"] = RationalCodec.point_to_text(self.witness)
        if self.precision is not None:
            data["precision"] = self.precision
        return data


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    model: Optional[Point] = None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"consistent": self.consistent}
        if self.model is not None:
            data["model"] = RationalCodec.point_to_text(self.model)
        return data


def _compiled(subject: Subject, precision: Optional[int], cap: int) -> Union[PwlFunction, IntervalPwl]:
    if isinstance(subject, (PwlFunction, IntervalPwl)):
        return subject
    return compile_formula(subject, precision=precision, cap=cap)


def integral(f: PwlFunction) -> Fraction:
    """Exact ∫ f over [0,1]^n: Σ volume(cell) · mean of the vertex values."""
    total = Fraction(0)
    for cell, piece in f.cells:
        values = [piece(v) for v in cell.vertices]
        total += simplex_volume(cell) * sum(values, Fraction(0)) / len(values)
    return total


def truth_degree(subject: Subject, precision: Optional[int] = None, cap: int = DEFAULT_CELL_CAP) -> DegreeResult:
    """
    Minimum of the term function over the cube.

    Args:
        subject: Formula or compiled function
        precision: Index for RL formulas
        cap: Cell-count guard

    Returns:
        Exact minimum with the lexicographically least minimizing vertex, or
        [min lower envelope, min upper envelope] for RL inputs
    """
    f = _compiled(subject, precision, cap)
    if isinstance(f, IntervalPwl):
        return DegreeResult.interval(f.lower.minimum()[0], f.upper.minimum()[0], f.precision)
    value, witness = f.minimum()
    return DegreeResult.exact(value, witness)


def unit_norm(subject: Subject, precision: Optional[int] = None, cap: int = DEFAULT_CELL_CAP) -> DegreeResult:
    """Maximum of the term function over the cube, with the lexicographically least maximizer."""
    f = _compiled(subject, precision, cap)
    if isinstance(f, IntervalPwl):
        return DegreeResult.interval(f.lower.maximum()[0], f.upper.maximum()[0], f.precision)
    value, witness = f.maximum()
    return DegreeResult.exact(value, witness)


def integral_state(subject: Subject, precision: Optional[int] = None, cap: int = DEFAULT_CELL_CAP) -> DegreeResult:
    """Integral of the term function over the cube."""
    f = _compiled(subject, precision, cap)
    if isinstance(f, IntervalPwl):
        return DegreeResult.interval(integral(f.lower), integral(f.upper), f.precision)
    return DegreeResult.exact(integral(f))


def provability_degree(subject: Subject, precision: Optional[int] = None,
                       cap: int = DEFAULT_CELL_CAP) -> DegreeResult:
    """
    Largest r with ⊢ η_r → φ.

    The candidate is the minimum of the term function; it is certified by
    compiling η_r → φ and checking that its truth degree is exactly 1.

    Raises:
        InvariantViolation: If the certificate fails
    """
    f = _compiled(subject, precision, cap)
    if isinstance(f, IntervalPwl):
        lo, hi = f.lower.minimum()[0], f.upper.minimum()[0]
        if isinstance(subject, (PwlFunction, IntervalPwl)):
            certified = apply_connective(Connective.IMP, PwlFunction.constant(f.dim, lo), f.lower).minimum()[0]
        else:
            lifted = compile_envelopes(formulas.Imp(formulas.Eta(lo), subject), f.precision, dim=f.dim, cap=cap)
            certified = lifted.lower.minimum()[0]
        if certified != 1:
            raise InvariantViolation(f"η_{RationalCodec.to_text(lo)} → φ is not provable")
        return DegreeResult.interval(lo, hi, f.precision)
    candidate, witness = f.minimum()
    if isinstance(subject, PwlFunction):
        implication = apply_connective(Connective.IMP, PwlFunction.constant(f.dim, candidate), f, cap=cap)
    else:
        implication = compile_exact(formulas.Imp(formulas.Eta(candidate), subject), dim=f.dim, cap=cap)
    if implication.minimum()[0] != 1:
        raise InvariantViolation(f"η_{RationalCodec.to_text(candidate)} → φ is not provable")
    return DegreeResult.exact(candidate, witness)


def _ambient(formulas_list: Sequence[Formula]) -> int:
    return max([formulas.arity(phi) for phi in formulas_list] + [1])


def _premise_generator(premises: Sequence[Formula]) -> Formula:
    # zero set of ¬θ_1 ⊕ … ⊕ ¬θ_m is where every premise evaluates to 1
    generator: Formula = formulas.Neg(premises[0])
    for theta in premises[1:]:
        generator = formulas.Oplus(generator, formulas.Neg(theta))
    return generator


def one_set(premises: Sequence[Formula], dim: int, cap: int = DEFAULT_CELL_CAP) -> RationalPolyhedron:
    """Polyhedron of points where every (exact) premise evaluates to 1."""
    if not premises:
        return RationalPolyhedron.cube(dim)
    return zero_set(compile_exact(_premise_generator(premises), dim=dim, cap=cap))


def consequence(premises: Sequence[Formula], conclusion: Formula,
                precision: Optional[int] = None, cap: int = DEFAULT_CELL_CAP) -> ConsequenceResult:
    """
    Semantic consequence Θ ⊨ φ over [0,1]-evaluations.

    Exact inputs answer yes or no; a no carries a countermodel where every
    premise is 1 and the conclusion is below 1. RL inputs need a precision
    index and may answer unknown.

    Raises:
        UnsupportedClassError: If an RL formula arrives without a precision index
    """
    everything = list(premises) + [conclusion]
    n = _ambient(everything)
    if any(formulas.classify(phi) == SignatureClass.RL for phi in everything):
        if precision is None:
            raise UnsupportedClassError("RL formulas need a precision index for consequence")
        return _interval_consequence(premises, conclusion, n, precision, cap)
    domain = one_set(premises, n, cap)
    if domain.is_empty:
        logger.info("premises are inconsistent; consequence holds vacuously")
        return ConsequenceResult(Verdict.YES)
    value, witness = restrict(compile_exact(conclusion, dim=n, cap=cap), domain).minimum()
    if value == 1:
        return ConsequenceResult(Verdict.YES, value)
    return ConsequenceResult(Verdict.NO, value, witness)


def _interval_consequence(premises: Sequence[Formula], conclusion: Formula, n: int,
                          precision: int, cap: int) -> ConsequenceResult:
    target = compile_envelopes(conclusion, precision, dim=n, cap=cap)
    if premises:
        enclosure = zero_set(compile_envelopes(_premise_generator(premises), precision, dim=n, cap=cap))
        outer, inner = enclosure.outer, enclosure.inner
    else:
        outer = inner = RationalPolyhedron.cube(n)
    if outer.is_empty:
        return ConsequenceResult(Verdict.YES, precision=precision)
    lowest, _ = restrict(target.lower, outer).minimum()
    if lowest == 1:
        return ConsequenceResult(Verdict.YES, lowest, precision=precision)
    if not inner.is_empty:
        highest, witness = restrict(target.upper, inner).minimum()
        if highest < 1:
            return ConsequenceResult(Verdict.NO, highest, witness, precision)
    return ConsequenceResult(Verdict.UNKNOWN, precision=precision)


def consistent(premises: Sequence[Formula], cap: int = DEFAULT_CELL_CAP) -> ConsistencyResult:
    """
    Decide whether some evaluation sends every premise to 1.

    Returns:
        Result with the lexicographically least vertex of the one-set as model
    """
    if any(formulas.classify(theta) == SignatureClass.RL for theta in premises):
        raise UnsupportedClassError("consistency is decided on exact premises only")
    domain = one_set(premises, _ambient(premises), cap)
    if domain.is_empty:
        return ConsistencyResult(False)
    return ConsistencyResult(True, domain.vertices()[0])


def grid_minimum(f: PwlFunction, points: List[Point]) -> Fraction:
    """Brute-force minimum over a finite point set."""
    if not points:
        raise ValidationError("empty grid")
    return min(f(p) for p in points)
