"""
Syntactic limits: envelope sequences of RL formulas, the limit checker and
PWL approximation of continuous functions sampled on a grid.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.abstractions import (
    CellCapExceeded,
    DimensionError,
    InvariantViolation,
    SequenceError,
    UnsupportedClassError,
    ValidationError
)
from ..core.utils import RationalCodec
from ..analysis.service import integral
from ..formula import service as formulas
from ..formula.service import Formula, SignatureClass
from ..geometry.service import AffineFn, Point, Simplex, SimplicialComplex, kuhn_chain
from ..pwl.service import (
    DEFAULT_CELL_CAP,
    Connective,
    PwlFunction,
    apply_connective,
    compile_envelopes,
    compile_exact,
    pwl_leq
)
from ..scalar.service import CReal, creal_of_rational

logger = logging.getLogger(__name__)

Term = Union[Formula, PwlFunction]
Rate = Callable[[int], Fraction]

SCHEDULES: Dict[str, Rate] = {
    "1-2^-n": lambda n: 1 - Fraction(1, 2 ** n),
    "n/(n+1)": lambda n: Fraction(n, n + 1),
}

PLACEHOLDER = "q"


@dataclass(frozen=True)
class FormulaSequence:
    """Deterministic index -> exact formula (or compiled function), with an optional rate."""
    generator: Callable[[int], Term]
    rate: Optional[Rate] = None
    name: str = "sequence"

    def term(self, n: int, dim: int, cap: int = DEFAULT_CELL_CAP) -> PwlFunction:
        """
        Compiled n-th term on [0,1]^dim.

        Raises:
            SequenceError: If the generator fails at n
        """
        try:
            item = self.generator(n)
        except Exception as e:
            raise SequenceError(n, e)
        if isinstance(item, PwlFunction):
            if item.dim != dim:
                raise DimensionError(f"term {n} lives on [0,1]^{item.dim}, expected {dim}")
            return item
        if formulas.classify(item) == SignatureClass.RL:
            raise UnsupportedClassError(f"term {n} has real scalars")
        return compile_exact(item, dim=dim, cap=cap)

    def rate_at(self, n: int) -> Fraction:
        try:
            return Fraction(self.rate(n))
        except Exception as e:
            raise SequenceError(n, e)


@dataclass(frozen=True)
class LimitRow:
    index: int
    distance: Fraction
    integral_gap: Fraction
    rate: Optional[Fraction] = None
    holds: Optional[bool] = None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.index,
                                "delta": RationalCodec.to_text(self.distance),
                                "integral_gap": RationalCodec.to_text(self.integral_gap)}
        if self.rate is not None:
            data["rate"] = RationalCodec.to_text(self.rate)
            data["holds"] = self.holds
        return data


@dataclass(frozen=True)
class LimitReport:
    """Per-index verdicts of a limit check up to `upto`."""
    mode: str
    upto: int
    rows: Tuple[LimitRow, ...]
    threshold: Optional[Fraction] = None
    settled_from: Optional[int] = None

    @property
    def holds(self) -> bool:
        if self.mode == "rate":
            return all(row.holds for row in self.rows)
        return self.settled_from is not None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"mode": self.mode, "upto": self.upto, "holds": self.holds}
        if self.threshold is not None:
            data["threshold"] = RationalCodec.to_text(self.threshold)
            data["settled_from"] = self.settled_from
        data["rows"] = [row.to_json() for row in self.rows]
        return data


def _target_function(target: Term, dim: Optional[int], cap: int) -> PwlFunction:
    if isinstance(target, PwlFunction):
        return target
    if formulas.classify(target) == SignatureClass.RL:
        raise UnsupportedClassError("limit targets must be exact")
    return compile_exact(target, dim=dim, cap=cap)


def check_limit(sequence: FormulaSequence,
                target: Term,
                upto: int,
                threshold: Optional[Fraction] = None,
                dim: Optional[int] = None,
                cap: int = DEFAULT_CELL_CAP) -> LimitReport:
    """
    Check a syntactic limit on the prefix 0..upto.

    δ_n = ‖d(φ_n, φ)‖_u is computed exactly. In rate mode index n holds iff
    δ_n <= 1 - r_n; in threshold mode the report names the least k with
    δ_m <= 1 - r for every checked m >= k.

    Args:
        sequence: The sequence φ_n
        target: The limit φ
        upto: Last index N checked
        threshold: Target r in [0,1) for threshold mode; rate mode otherwise
        dim: Ambient dimension (default: target arity)
        cap: Cell-count guard

    Raises:
        ValidationError: Without a rate or threshold, or on a non-monotone rate
        SequenceError: If the generator fails at some index
    """
    if upto < 0:
        raise ValidationError(f"upto must be >= 0, got {upto}")
    if threshold is None and sequence.rate is None:
        raise ValidationError("no rate declared; supply a threshold")
    if threshold is not None and not 0 <= threshold < 1:
        raise ValidationError(f"threshold must lie in [0,1), got {RationalCodec.to_text(threshold)}")
    phi = _target_function(target, dim, cap)
    phi_integral = integral(phi)
    rows: List[LimitRow] = []
    previous: Optional[Fraction] = None
    for n in range(upto + 1):
        term = sequence.term(n, phi.dim, cap)
        distance = apply_connective(Connective.CHANG_DIST, term, phi, cap=cap).maximum()[0]
        gap = abs(integral(term) - phi_integral)
        if gap > distance:
            raise InvariantViolation(f"integral drift {gap} exceeds distance {distance} at index {n}")
        if threshold is not None:
            rows.append(LimitRow(n, distance, gap))
            continue
        rate = sequence.rate_at(n)
        if not 0 <= rate <= 1 or (previous is not None and rate < previous):
            raise ValidationError(f"rate must be nondecreasing in [0,1]; broken at index {n}")
        previous = rate
        rows.append(LimitRow(n, distance, gap, rate, distance <= 1 - rate))
    if threshold is None:
        report = LimitReport("rate", upto, tuple(rows))
    else:
        settled = None
        for row in reversed(rows):
            if row.distance > 1 - threshold:
                break
            settled = row.index
        report = LimitReport("threshold", upto, tuple(rows), Fraction(threshold), settled)
    logger.debug("limit check %s up to %d: holds=%s", sequence.name, upto, report.holds)
    return report


def sandwich(formula: Formula, precision: int, dim: Optional[int] = None,
             cap: int = DEFAULT_CELL_CAP) -> Tuple[PwlFunction, PwlFunction]:
    """Lower and upper rational envelopes of a formula at a precision index."""
    envelopes = compile_envelopes(formula, precision, dim=dim, cap=cap)
    return envelopes.lower, envelopes.upper


def sandwich_sequence(formula: Formula, dim: Optional[int] = None,
                      cap: int = DEFAULT_CELL_CAP) -> FormulaSequence:
    """Lower envelopes as a sequence, with rate max(0, 1 - S(φ)·2^-n)."""
    count = formulas.scalar_count(formula)
    return FormulaSequence(
        generator=lambda n: sandwich(formula, n, dim, cap)[0],
        rate=lambda n: max(Fraction(0), 1 - Fraction(count, 2 ** n)),
        name=f"sandwich({formulas.to_text(formula)})"
    )


def rate_from_dominators(sequence: FormulaSequence, target: Term, dominators: FormulaSequence,
                         upto: int, dim: Optional[int] = None, cap: int = DEFAULT_CELL_CAP) -> List[Fraction]:
    """
    Rates r_n = 1 - ‖ψ_n‖_u from dominators ψ_n >= d(φ_n, φ).

    Raises:
        ValidationError: If some ψ_n does not dominate or the rates decrease
    """
    phi = _target_function(target, dim, cap)
    rates: List[Fraction] = []
    for n in range(upto + 1):
        bound = dominators.term(n, phi.dim, cap)
        distance = apply_connective(Connective.CHANG_DIST, sequence.term(n, phi.dim, cap), phi, cap=cap)
        if not pwl_leq(distance, bound):
            raise ValidationError(f"dominator {n} does not bound the distance")
        rate = 1 - bound.maximum()[0]
        if rates and rate < rates[-1]:
            raise ValidationError(f"dominator rates decrease at index {n}")
        rates.append(rate)
    return rates


@dataclass(frozen=True)
class Approximation:
    function: PwlFunction
    error_bound: Fraction


def _grid_index(coords: Sequence[int], m: int) -> int:
    index = 0
    for c in coords:
        index = index * (m + 1) + c
    return index


def sample_grid(fn: Callable[[Point], Fraction], m: int, n: int) -> List[Fraction]:
    """Values of fn on the mesh-1/m grid of [0,1]^n, first coordinate varying slowest."""
    if m < 1 or n < 1:
        raise ValidationError("grid needs m >= 1 and n >= 1")
    return [Fraction(fn(tuple(Fraction(c, m) for c in coords)))
            for coords in itertools.product(range(m + 1), repeat=n)]


def approximate_continuous(samples: Sequence[Fraction], m: int, n: int, lipschitz: Fraction,
                           cap: int = DEFAULT_CELL_CAP) -> Approximation:
    """
    PWL interpolant of grid samples, affine on every Kuhn cell of the mesh.

    Args:
        samples: (m+1)^n values in [0,1], in sample_grid order
        m: Mesh denominator
        n: Dimension
        lipschitz: Lipschitz bound L of the sampled function
        cap: Cell-count guard

    Returns:
        The interpolant and the sup-norm error bound L·n/m

    Raises:
        ValidationError: On a sample count mismatch or out-of-range data
    """
    if m < 1 or n < 1:
        raise ValidationError("grid needs m >= 1 and n >= 1")
    values = [Fraction(s) for s in samples]
    if len(values) != (m + 1) ** n:
        raise ValidationError(f"expected {(m + 1) ** n} samples for mesh 1/{m} in dimension {n}, got {len(values)}")
    if any(not 0 <= v <= 1 for v in values):
        raise ValidationError("samples must lie in [0,1]")
    lipschitz = Fraction(lipschitz)
    if lipschitz < 0:
        raise ValidationError("Lipschitz bound must be >= 0")
    cells = m ** n * math.factorial(n)
    if cells > cap:
        raise CellCapExceeded(cells, cap)
    step = Fraction(1, m)
    simplices, pieces = [], []
    for corner in itertools.product(range(m), repeat=n):
        for order in itertools.permutations(range(n)):
            chain = kuhn_chain([Fraction(c, m) for c in corner], order, step)
            lattice = list(corner)
            heights = [values[_grid_index(lattice, m)]]
            for axis in order:
                lattice[axis] += 1
                heights.append(values[_grid_index(lattice, m)])
            coeffs = [Fraction(0)] * n
            for j, axis in enumerate(order):
                coeffs[axis] = m * (heights[j + 1] - heights[j])
            base = AffineFn(tuple(coeffs), Fraction(0))
            simplices.append(Simplex(chain))
            pieces.append(base.shift(heights[0] - base(chain[0])))
    function = PwlFunction(SimplicialComplex(n, tuple(simplices)), tuple(pieces))
    return Approximation(function, lipschitz * n / m)


def _instantiate(formula: Formula, placeholder: CReal, value: Fraction) -> Formula:
    if isinstance(formula, formulas.Eta):
        return formulas.Eta(value) if formula.scalar is placeholder else formula
    if isinstance(formula, formulas.SCALED):
        scalar = value if formula.scalar is placeholder else formula.scalar
        return type(formula)(scalar, _instantiate(formula.child, placeholder, value))
    if isinstance(formula, formulas.Neg):
        return formulas.Neg(_instantiate(formula.child, placeholder, value))
    if isinstance(formula, formulas.BINARY):
        return type(formula)(_instantiate(formula.left, placeholder, value),
                             _instantiate(formula.right, placeholder, value))
    return formula


def _schedule(name: str) -> Rate:
    if name not in SCHEDULES:
        raise ValidationError(f"unknown schedule {name!r}; expected one of {sorted(SCHEDULES)}")
    return SCHEDULES[name]


def scalar_ramp(template: Formula, placeholder: CReal, schedule: str,
                rate: Optional[str] = None) -> FormulaSequence:
    """φ_n = template with the placeholder scalar set to q_n."""
    values = _schedule(schedule)
    return FormulaSequence(
        generator=lambda n: _instantiate(template, placeholder, values(n)),
        rate=_schedule(rate) if rate else None,
        name=f"ramp[{schedule}]"
    )


def load_sequence_spec(data: Union[Dict[str, Any], List[str]],
                       registry: Optional[Mapping[str, CReal]] = None) -> FormulaSequence:
    """
    Read a sequence spec.

    Either {"kind": "scalar-ramp", "formula": …, "schedule": …, "rate": schedule?}
    with the placeholder scalar `q`, or a list of formula strings (optionally
    {"kind": "explicit", "formulas": [...], "rate": ["p/q", …]}).
    """
    if isinstance(data, list):
        data = {"kind": "explicit", "formulas": data}
    kind = data.get("kind")
    if kind == "scalar-ramp":
        placeholder = creal_of_rational(Fraction(0), name=PLACEHOLDER)
        scope = dict(registry or {})
        scope[PLACEHOLDER] = placeholder
        try:
            template = formulas.parse(data["formula"], scope)
            schedule = data["schedule"]
        except KeyError as e:
            raise ValidationError(f"scalar-ramp spec is missing {e}")
        return scalar_ramp(template, placeholder, schedule, data.get("rate"))
    if kind == "explicit":
        terms = [formulas.parse(text, registry) for text in data.get("formulas", [])]
        if not terms:
            raise ValidationError("explicit sequence needs at least one formula")
        rates = [RationalCodec.from_text(r) for r in data["rate"]] if data.get("rate") else None
        return FormulaSequence(
            generator=lambda n: terms[n],
            rate=(lambda n: rates[n]) if rates else None,
            name="explicit"
        )
    raise ValidationError(f"unknown sequence kind {kind!r}")
