"""
Finitely presented algebras and their polyhedra.

A presentation is a principal ideal of the free algebra on n generators,
given by one generating function. Its zero set is a rational polyhedron;
conversely every rational polyhedron is the zero set of a hat-function
generator built on a triangulation that has it as a subcomplex.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from ..core.abstractions import (
    CellCapExceeded,
    DimensionError,
    UnsupportedClassError,
    ValidationError
)
from ..formula import service as formulas
from ..formula.service import Formula, SignatureClass
from ..geometry.service import (
    DEFAULT_MAX_DIMENSION,
    AffineFn,
    Point,
    RationalPolyhedron,
    Simplex,
    SimplicialComplex,
    polyhedron_equal,
    simplex_frame,
    slice_simplex,
    split_by_hyperplane,
    triangulate_cube
)
from ..pwl.service import (
    DEFAULT_CELL_CAP,
    CoefficientClass,
    IntervalPwl,
    PwlFunction,
    compile_exact,
    compile_formula,
    dump_interval,
    dump_pwl,
    load_pwl,
    multiple,
    pwl_equal,
    pwl_leq
)
from ..scalar.service import CReal

logger = logging.getLogger(__name__)

Generator = Union[PwlFunction, IntervalPwl]


class AlgebraClass(Enum):
    """Variety of the presented algebra."""
    MV = "MV"
    DMV = "DMV"
    RMV = "RMV"

    @property
    def rank(self) -> int:
        return {AlgebraClass.MV: 0, AlgebraClass.DMV: 1, AlgebraClass.RMV: 2}[self]


class GenerationVerdict(Enum):
    YES = "yes"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Presentation:
    """Principal ideal (generator] of the free algebra of the given class on n generators."""
    algebra: AlgebraClass
    arity: int
    generator: Generator

    def __post_init__(self):
        if self.generator.dim != self.arity:
            raise DimensionError(f"generator on [0,1]^{self.generator.dim} for arity {self.arity}")
        if isinstance(self.generator, IntervalPwl):
            if self.algebra != AlgebraClass.RMV:
                raise ValidationError(f"{self.algebra.value} presentations need an exact generator")
        elif self.algebra == AlgebraClass.MV and self.generator.coefficient_class != CoefficientClass.INTEGER:
            raise ValidationError("MV presentations need an integer-coefficient generator")

    @property
    def is_exact(self) -> bool:
        return isinstance(self.generator, PwlFunction)


@dataclass(frozen=True)
class Substitution:
    """Map v_i -> σ(v_i) for i = 1..m, images over the target variables."""
    images: Tuple[Formula, ...]
    target_arity: int

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Formula], target_arity: Optional[int] = None) -> 'Substitution':
        """
        Build a substitution, checking it is total on v1..vm.

        Raises:
            ValidationError: If a source variable between v1 and the largest one is missing
        """
        if not mapping:
            raise ValidationError("a substitution needs at least one variable")
        m = max(mapping)
        missing = [i for i in range(1, m + 1) if i not in mapping]
        if missing:
            raise ValidationError(f"substitution is not total: no image for v{missing[0]}")
        images = tuple(mapping[i] for i in range(1, m + 1))
        needed = max(max(formulas.arity(image) for image in images), 1)
        if target_arity is not None and target_arity < needed:
            raise DimensionError(f"target arity {target_arity} below image arity {needed}")
        return cls(images, target_arity or needed)

    @property
    def source_arity(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class ZeroSetEnclosure:
    """Inner ⊆ true zero set ⊆ outer, from the upper and lower envelopes at one index."""
    precision: int
    outer: RationalPolyhedron
    inner: RationalPolyhedron


@dataclass(frozen=True)
class DominationCertificate:
    """Mutual ideal domination f <= b <= k·f, plus equal zero sets."""
    source_below_witness: bool
    witness_below_multiple: bool
    zero_sets_equal: bool

    @property
    def valid(self) -> bool:
        return self.source_below_witness and self.witness_below_multiple and self.zero_sets_equal


@dataclass(frozen=True)
class MvGenerator:
    source: PwlFunction
    witness: PwlFunction
    multiplier: int
    certificate: DominationCertificate


@dataclass(frozen=True)
class GenerationReport:
    verdict: GenerationVerdict
    generator: Optional[MvGenerator] = None
    enclosure: Optional[ZeroSetEnclosure] = None


@dataclass(frozen=True)
class PreservationReport:
    preserving: bool
    offender: Optional[int] = None
    classes: Dict[int, CoefficientClass] = field(default_factory=dict)


def _exact_zero_set(f: PwlFunction) -> RationalPolyhedron:
    simplices: List[Simplex] = []
    for cell, piece in f.cells:
        if all(piece(v) > 0 for v in cell.vertices):
            continue
        simplices.extend(slice_simplex(cell, piece, Fraction(0)))
    return RationalPolyhedron(f.dim, tuple(simplices))


def zero_set(p: Union[Presentation, Generator]) -> Union[RationalPolyhedron, ZeroSetEnclosure]:
    """
    Zero set of a presentation's generator.

    Returns:
        The polyhedron f⁻¹(0) for exact generators; for envelope generators
        the enclosure (zero set of the lower envelope, zero set of the upper)
    """
    generator = p.generator if isinstance(p, Presentation) else p
    if isinstance(generator, IntervalPwl):
        return ZeroSetEnclosure(generator.precision,
                                _exact_zero_set(generator.lower),
                                _exact_zero_set(generator.upper))
    return _exact_zero_set(generator)


def _supporting_hyperplanes(polyhedron: RationalPolyhedron) -> List[AffineFn]:
    found: Dict[Tuple[Tuple[Fraction, ...], Fraction], AffineFn] = {}
    for simplex in polyhedron.simplices:
        frame = simplex_frame(simplex)
        for h in frame.equations + frame.barycentric:
            plane = h.normalized()
            if plane is not None:
                found.setdefault((plane.coeffs, plane.const), plane)
    return [found[key] for key in sorted(found)]


def _barycenter(points: Tuple[Point, ...]) -> Point:
    count = len(points)
    return tuple(sum(column, Fraction(0)) / count for column in zip(*points))


def _stellar_refine(cells: List[Tuple[Point, ...]], polyhedron: RationalPolyhedron,
                    cap: int) -> List[Tuple[Point, ...]]:
    """Subdivide until every cell meets the polyhedron in the hull of its vertices lying there."""
    membership: Dict[Point, bool] = {}

    def inside(point: Point) -> bool:
        if point not in membership:
            membership[point] = polyhedron.contains(point)
        return membership[point]

    while True:
        target = None
        for verts in cells:
            hits = tuple(v for v in verts if inside(v))
            if len(hits) >= 2 and not inside(_barycenter(hits)):
                target = hits
                break
        if target is None:
            return cells
        center = _barycenter(target)
        membership[center] = False
        refined = []
        for verts in cells:
            if all(g in verts for g in target):
                refined.extend(tuple(center if v == g else v for v in verts) for g in target)
            else:
                refined.append(verts)
        cells = refined
        if len(cells) > cap:
            raise CellCapExceeded(len(cells), cap)


def hat_generator(polyhedron: RationalPolyhedron,
                  cap: int = DEFAULT_CELL_CAP,
                  max_dimension: int = DEFAULT_MAX_DIMENSION) -> PwlFunction:
    """
    PWL function with zero set exactly the polyhedron.

    The cube triangulation is cut by every hyperplane supporting a face of a
    simplex of the polyhedron, then stellar subdivisions remove cells whose
    in-polyhedron vertices span a face leaving it. The function interpolates
    0 on vertices in the polyhedron and 1 elsewhere.
    """
    n = polyhedron.dim
    if polyhedron.is_empty:
        return PwlFunction.constant(n, Fraction(1), max_dimension)
    complex_ = triangulate_cube(n, max_dimension)
    for plane in _supporting_hyperplanes(polyhedron):
        complex_ = split_by_hyperplane(complex_, plane)
        if len(complex_.cells) > cap:
            raise CellCapExceeded(len(complex_.cells), cap)
    cells = _stellar_refine([cell.vertices for cell in complex_.cells], polyhedron, cap)
    simplices = tuple(Simplex(verts) for verts in cells)
    pieces = []
    for simplex in simplices:
        labels = [Fraction(0) if polyhedron.contains(v) else Fraction(1) for v in simplex.vertices]
        pieces.append(AffineFn.combine(labels, simplex_frame(simplex).barycentric, n))
    return PwlFunction(SimplicialComplex(n, simplices), tuple(pieces))


def presentation_of(polyhedron: RationalPolyhedron,
                    algebra: AlgebraClass = AlgebraClass.DMV,
                    cap: int = DEFAULT_CELL_CAP,
                    max_dimension: int = DEFAULT_MAX_DIMENSION) -> Presentation:
    """
    Presentation whose zero set is the given polyhedron.

    Args:
        polyhedron: Rational polyhedron inside [0,1]^n
        algebra: Target class; MV presentations use the MV generator of the hat function
        cap: Cell-count guard
        max_dimension: Largest cube dimension accepted

    Returns:
        Presentation with zero_set(result) equal to the polyhedron
    """
    generator = hat_generator(polyhedron, cap, max_dimension)
    if algebra == AlgebraClass.MV:
        generator = mv_generator(generator, cap).witness
    logger.debug("presented %d simplices with %d cells", len(polyhedron.simplices), len(generator.pieces))
    return Presentation(algebra, polyhedron.dim, generator)


def domination_certificate(source: PwlFunction, witness: PwlFunction, k: int) -> DominationCertificate:
    """
    Check source <= witness <= k·source and equal zero sets.

    The upper bound is the unclipped k·source on the source's own complex,
    so a witness built some other way is checked against the generator itself.
    """
    scaled = PwlFunction(source.complex, tuple(piece.scale(Fraction(k)) for piece in source.pieces))
    return DominationCertificate(
        source_below_witness=pwl_leq(source, witness),
        witness_below_multiple=pwl_leq(witness, scaled),
        zero_sets_equal=polyhedron_equal(_exact_zero_set(source), _exact_zero_set(witness))
    )


def mv_generator(f: Union[PwlFunction, IntervalPwl], cap: int = DEFAULT_CELL_CAP) -> MvGenerator:
    """
    Integer-coefficient generator of the same principal ideal.

    k is the lcm of every coefficient denominator of f, and the witness is
    the k-fold truncated sum min(1, k·f).

    Raises:
        UnsupportedClassError: If f is an envelope pair
    """
    if isinstance(f, IntervalPwl):
        raise UnsupportedClassError("real-coefficient generator; use is_mv_generated")
    k = 1
    for piece in f.pieces:
        for denominator in piece.denominators():
            k = math.lcm(k, denominator)
    witness = multiple(f, k, cap)
    certificate = domination_certificate(f, witness, k)
    if witness.coefficient_class != CoefficientClass.INTEGER:
        raise ValidationError(f"multiplier {k} did not clear the denominators")
    return MvGenerator(f, witness, k, certificate)


def is_mv_generated(p: Presentation) -> GenerationReport:
    """
    Decide MV-generation of a presentation's ideal.

    Exact generators always answer yes with the MV generator as witness.
    Envelope pairs answer yes only when both envelopes coincide; otherwise
    the answer is unknown at their index, with the zero-set enclosure.
    """
    generator = p.generator
    if isinstance(generator, IntervalPwl):
        if not pwl_equal(generator.lower, generator.upper):
            return GenerationReport(GenerationVerdict.UNKNOWN, enclosure=zero_set(generator))
        generator = generator.lower
    return GenerationReport(GenerationVerdict.YES, generator=mv_generator(generator))


def extend_scalars(p: Presentation, target: AlgebraClass) -> Presentation:
    """
    Extend a presentation to a larger scalar class; the generator is kept.

    Raises:
        ValidationError: If the target class is smaller than the source class
    """
    if target.rank < p.algebra.rank:
        raise ValidationError(f"cannot narrow {p.algebra.value} to {target.value}")
    return Presentation(target, p.arity, p.generator)


def is_mv_preserving(substitution: Substitution, cap: int = DEFAULT_CELL_CAP) -> PreservationReport:
    """True iff every image compiles to an integer-coefficient function; reports the first offender."""
    classes: Dict[int, CoefficientClass] = {}
    for index, image in enumerate(substitution.images, 1):
        if formulas.classify(image) == SignatureClass.RL:
            raise UnsupportedClassError(f"image of v{index} has real scalars")
        compiled = compile_exact(image, dim=substitution.target_arity, cap=cap)
        classes[index] = compiled.coefficient_class
        if classes[index] != CoefficientClass.INTEGER:
            return PreservationReport(False, index, classes)
    return PreservationReport(True, None, classes)


def l_generated_witness(formula: Formula, cap: int = DEFAULT_CELL_CAP) -> MvGenerator:
    """
    Pure Łukasiewicz witness for the theory of a QŁ formula.

    Raises:
        UnsupportedClassError: For RL formulas, which go through is_mv_generated
    """
    if formulas.classify(formula) == SignatureClass.RL:
        raise UnsupportedClassError("RL formula; use is_mv_generated on its presentation")
    return mv_generator(compile_exact(formula, cap=cap), cap)


def load_presentation(data: Dict[str, Any],
                      registry: Optional[Mapping[str, CReal]] = None,
                      precision: int = 20,
                      cap: int = DEFAULT_CELL_CAP) -> Presentation:
    """
    Read a presentation file: {"class": …, "n": …, "generator": formula text | PWL dump}.

    Raises:
        ValidationError: On unknown classes or malformed generators
    """
    try:
        algebra = AlgebraClass(data["class"])
        n = int(data["n"])
        source = data["generator"]
    except (KeyError, ValueError, TypeError) as e:
        raise ValidationError(f"malformed presentation: {e}")
    if isinstance(source, str):
        formula = formulas.parse(source, registry)
        generator = compile_formula(formula, precision=precision, dim=n, cap=cap)
    elif isinstance(source, dict):
        generator = load_pwl(source)
    else:
        raise ValidationError("presentation generator must be a formula string or a PWL dump")
    return Presentation(algebra, n, generator)


def dump_presentation(p: Presentation) -> Dict[str, Any]:
    generator = dump_pwl(p.generator) if p.is_exact else dump_interval(p.generator)
    return {"class": p.algebra.value, "n": p.arity, "generator": generator}


def load_substitution(data: Dict[str, Any],
                      registry: Optional[Mapping[str, CReal]] = None) -> Substitution:
    """Read a substitution file {"v1": "formula", …}."""
    mapping: Dict[int, Formula] = {}
    for key, text in data.items():
        if not (isinstance(key, str) and key.startswith("v") and key[1:].isdigit() and int(key[1:]) >= 1):
            raise ValidationError(f"substitution key {key!r} is not a variable")
        if not isinstance(text, str):
            raise ValidationError(f"image of {key} must be a formula string")
        mapping[int(key[1:])] = formulas.parse(text, registry)
    return Substitution.from_mapping(mapping)
