"""
Exact piecewise-linear function engine.

Formulas compile bottom-up onto one shared simplicial complex of [0,1]^n.
Every cell carries a register file of affine functions, one register per
evaluated subterm; connectives either derive a new register affinely or
select between two affine candidates after splitting the cells by their
difference. The same machinery serves pointwise connectives on compiled
functions (after overlaying their complexes) and composition f∘λ.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx

from ..core.abstractions import (
    CellCapExceeded,
    DimensionError,
    InvariantViolation,
    UnsupportedClassError,
    ValidationError
)
from ..core.utils import RationalCodec
from ..formula import service as formulas
from ..formula.service import Formula, SignatureClass
from ..geometry.service import (
    DEFAULT_MAX_DIMENSION,
    AffineFn,
    Point,
    RationalPolyhedron,
    Simplex,
    SimplicialComplex,
    bisect_simplex,
    boxes_overlap,
    clip_to_simplex,
    complex_to_json,
    polyhedron_equal,
    sign_on,
    simplex_frame,
    simplex_from_json,
    triangulate_cube
)
from ..scalar.service import Scalar, approx, is_rational

logger = logging.getLogger(__name__)

DEFAULT_CELL_CAP = 1_000_000
ZERO = Fraction(0)
ONE = Fraction(1)

Registers = Tuple[AffineFn, ...]
Cell = Tuple[Tuple[Point, ...], Registers]


class CoefficientClass(Enum):
    """Coefficient ring of a PWL function's maximal linearity regions."""
    INTEGER = "integer"
    RATIONAL = "rational"


class Connective(Enum):
    """Pointwise operations on PWL functions."""
    NEG = "neg"
    OPLUS = "oplus"
    ODOT = "odot"
    IMP = "imp"
    EQUIV = "equiv"
    MIN = "min"
    MAX = "max"
    SCALAR = "scalar"
    CHANG_DIST = "chang_dist"


def _bounds(vertices: Sequence[Point]) -> Tuple[Point, Point]:
    columns = list(zip(*vertices))
    return tuple(min(c) for c in columns), tuple(max(c) for c in columns)


def _lexicographic_extremum(pairs: Iterator[Tuple[Point, Fraction]], maximum: bool) -> Tuple[Optional[Fraction], Optional[Point]]:
    best_value, best_point = None, None
    for point, value in pairs:
        if best_value is None:
            best_value, best_point = value, point
            continue
        better = value > best_value if maximum else value < best_value
        if better or (value == best_value and point < best_point):
            best_value, best_point = value, point
    return best_value, best_point


@dataclass(frozen=True)
class PwlFunction:
    """Continuous function [0,1]^n -> [0,1], affine on each cell of a complex."""
    complex: SimplicialComplex
    pieces: Tuple[AffineFn, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.complex.cells):
            raise ValidationError("one affine piece per cell is required")

    @classmethod
    def constant(cls, n: int, value: Fraction, max_dimension: int = DEFAULT_MAX_DIMENSION) -> 'PwlFunction':
        cube = triangulate_cube(n, max_dimension)
        return cls(cube, tuple(AffineFn.constant(n, Fraction(value)) for _ in cube.cells))

    @classmethod
    def projection(cls, n: int, index: int, max_dimension: int = DEFAULT_MAX_DIMENSION) -> 'PwlFunction':
        """The coordinate function x_index (0-based)."""
        cube = triangulate_cube(n, max_dimension)
        return cls(cube, tuple(AffineFn.projection(n, index) for _ in cube.cells))

    @property
    def dim(self) -> int:
        return self.complex.dim

    @property
    def cells(self) -> List[Tuple[Simplex, AffineFn]]:
        return list(zip(self.complex.cells, self.pieces))

    def __call__(self, point: Sequence[Fraction]) -> Fraction:
        coords = tuple(Fraction(x) for x in point)
        if len(coords) != self.dim:
            raise DimensionError(f"point of dimension {len(coords)} for a function on [0,1]^{self.dim}")
        return self.pieces[self.complex.locate(coords)](coords)

    def vertex_values(self) -> Iterator[Tuple[Point, Fraction]]:
        for cell, piece in zip(self.complex.cells, self.pieces):
            for v in cell.vertices:
                yield v, piece(v)

    def minimum(self) -> Tuple[Fraction, Point]:
        """Exact minimum with the lexicographically least minimizing vertex."""
        return _lexicographic_extremum(self.vertex_values(), maximum=False)

    def maximum(self) -> Tuple[Fraction, Point]:
        """Exact maximum with the lexicographically least maximizing vertex."""
        return _lexicographic_extremum(self.vertex_values(), maximum=True)

    @cached_property
    def coefficient_class(self) -> CoefficientClass:
        return coefficient_class(self)

    def check_invariants(self) -> None:
        """
        Verify range, cover and continuity.

        Raises:
            InvariantViolation: If a vertex value leaves [0,1], the cells do
                not cover the cube, or two cells disagree at a shared point
        """
        for v, value in self.vertex_values():
            if not 0 <= value <= 1:
                raise InvariantViolation(f"value {value} at {RationalCodec.point_to_text(v)} outside [0,1]")
        volume = self.complex.volume()
        if volume != 1:
            raise InvariantViolation(f"cells cover volume {volume}, expected 1")
        for v in self.complex.vertices():
            box = (v, v)
            seen = {piece(v) for cell, piece in zip(self.complex.cells, self.pieces)
                    if boxes_overlap(cell.bounds, box) and simplex_frame(cell).contains(v)}
            if len(seen) > 1:
                raise InvariantViolation(f"discontinuity at {RationalCodec.point_to_text(v)}")


@dataclass(frozen=True)
class IntervalPwl:
    """Rational lower/upper envelopes of a real-coefficient PWL function at index k."""
    precision: int
    lower: PwlFunction
    upper: PwlFunction

    @property
    def dim(self) -> int:
        return self.lower.dim

    def width(self) -> Fraction:
        """‖upper − lower‖_u."""
        field = _Field.overlay([self.lower, self.upper])
        return max(regs[1](v) - regs[0](v) for verts, regs in field.cells for v in verts)

    def check_invariants(self) -> None:
        if not pwl_leq(self.lower, self.upper):
            raise InvariantViolation(f"lower envelope exceeds upper at index {self.precision}")


class _Field:
    """Cells of a refinement of [0,1]^n, each with a register file of affine pieces."""

    def __init__(self, dim: int, cells: List[Cell], cap: int = DEFAULT_CELL_CAP):
        self.dim = dim
        self.cells = cells
        self.cap = cap
        self._complex: Optional[SimplicialComplex] = None
        self._check_cap()

    @classmethod
    def cube(cls, n: int, cap: int, max_dimension: int) -> '_Field':
        return cls(n, [(cell.vertices, ()) for cell in triangulate_cube(n, max_dimension).cells], cap)

    @classmethod
    def overlay(cls, functions: Sequence[PwlFunction], cap: int = DEFAULT_CELL_CAP) -> '_Field':
        """Common refinement of several functions, register i holding function i."""
        dim = functions[0].dim
        if any(f.dim != dim for f in functions):
            raise DimensionError("functions live on cubes of different dimension")
        first = functions[0]
        cells: List[Cell] = [(cell.vertices, (piece,)) for cell, piece in first.cells]
        # cells stay aligned with the first complex until some clipping happens
        aligned: Optional[SimplicialComplex] = first.complex
        for g in functions[1:]:
            if aligned is not None and (g.complex is aligned or g.complex == aligned):
                cells = [(verts, regs + (piece,)) for (verts, regs), piece in zip(cells, g.pieces)]
                continue
            aligned = None
            refined: List[Cell] = []
            for verts, regs in cells:
                box = _bounds(verts)
                for cell, piece in g.cells:
                    if not boxes_overlap(box, cell.bounds):
                        continue
                    for part in clip_to_simplex(verts, simplex_frame(cell)):
                        refined.append((part, regs + (piece,)))
            cells = refined
            if len(cells) > cap:
                raise CellCapExceeded(len(cells), cap)
        return cls(dim, cells, cap)

    def _check_cap(self) -> None:
        if len(self.cells) > self.cap:
            raise CellCapExceeded(len(self.cells), self.cap)

    def derive(self, rule: Callable[[Registers], AffineFn]) -> int:
        """Append rule(registers) to every cell; returns the register index."""
        self.cells = [(verts, regs + (rule(regs),)) for verts, regs in self.cells]
        return len(self.cells[0][1]) - 1

    def split(self, cut: Callable[[Registers], AffineFn]) -> None:
        """Refine every cell so that cut(registers) has constant sign on it."""
        refined: List[Cell] = []
        for verts, regs in self.cells:
            for piece in bisect_simplex(verts, cut(regs)):
                refined.append((piece, regs))
        self.cells = refined
        self._complex = None
        self._check_cap()

    def select(self,
               first: Callable[[Registers], AffineFn],
               second: Callable[[Registers], AffineFn],
               take_max: bool) -> int:
        """Append max (or min) of two affine candidates, splitting cells on their difference."""
        refined: List[Cell] = []
        for verts, regs in self.cells:
            a, b = first(regs), second(regs)
            difference = a - b
            for piece in bisect_simplex(verts, difference):
                a_wins = sign_on(piece, difference) >= 0
                refined.append((piece, regs + (a if a_wins == take_max else b,)))
        self.cells = refined
        self._complex = None
        self._check_cap()
        return len(self.cells[0][1]) - 1

    def copy(self) -> '_Field':
        return _Field(self.dim, list(self.cells), self.cap)

    def complex(self) -> SimplicialComplex:
        if self._complex is None:
            self._complex = SimplicialComplex(self.dim, tuple(Simplex(verts) for verts, _ in self.cells))
        return self._complex

    def function(self, register: int) -> PwlFunction:
        return PwlFunction(self.complex(), tuple(regs[register] for _, regs in self.cells))


class _Emitter:
    """Structural induction over formulas, one (lower, upper) register pair per distinct subterm."""

    def __init__(self, field: _Field, precision: Optional[int],
                 emitted: Optional[Dict[Formula, Tuple[int, int]]] = None):
        self.field = field
        self.precision = precision
        self.exact = precision is None
        self.emitted: Dict[Formula, Tuple[int, int]] = {} if emitted is None else emitted
        n = field.dim
        self.one = AffineFn.constant(n, ONE)
        self.zero = AffineFn.constant(n, ZERO)

    # register-pair combinators

    def _derive_pair(self, lower: Callable, upper: Callable) -> Tuple[int, int]:
        if self.exact:
            register = self.field.derive(lower)
            return register, register
        return self.field.derive(lower), self.field.derive(upper)

    def _select_pair(self, lower: Tuple[Callable, Callable], upper: Tuple[Callable, Callable],
                     take_max: bool) -> Tuple[int, int]:
        if self.exact:
            register = self.field.select(*upper, take_max)
            return register, register
        return self.field.select(*lower, take_max), self.field.select(*upper, take_max)

    def _scalar(self, scalar: Scalar) -> Tuple[Fraction, Fraction]:
        if self.exact and not is_rational(scalar):
            raise UnsupportedClassError("real scalar on the exact compilation path")
        return approx(scalar, self.precision or 0)

    # connective rules on register pairs

    def constant(self, lo: Fraction, hi: Fraction) -> Tuple[int, int]:
        n = self.field.dim
        low = self.field.derive(lambda regs: AffineFn.constant(n, lo))
        if lo == hi:
            return low, low
        return low, self.field.derive(lambda regs: AffineFn.constant(n, hi))

    def neg(self, x):
        l, h = x
        return self._derive_pair(lambda r: self.one - r[h], lambda r: self.one - r[l])

    def delta(self, scalar, x):
        rlo, rhi = self._scalar(scalar)
        l, h = x
        return self._derive_pair(lambda r: r[l].scale(rlo), lambda r: r[h].scale(rhi))

    def nabla(self, scalar, x):
        rlo, rhi = self._scalar(scalar)
        l, h = x
        return self._derive_pair(lambda r: r[l].scale(rhi).shift(1 - rhi),
                                 lambda r: r[h].scale(rlo).shift(1 - rlo))

    def oplus(self, x, y):
        (l1, h1), (l2, h2) = x, y
        return self._select_pair((lambda r: r[l1] + r[l2], lambda r: self.one),
                                 (lambda r: r[h1] + r[h2], lambda r: self.one), take_max=False)

    def odot(self, x, y):
        (l1, h1), (l2, h2) = x, y
        return self._select_pair((lambda r: (r[l1] + r[l2]).shift(-1), lambda r: self.zero),
                                 (lambda r: (r[h1] + r[h2]).shift(-1), lambda r: self.zero), take_max=True)

    def imp(self, x, y):
        (l1, h1), (l2, h2) = x, y
        return self._select_pair((lambda r: (r[l2] - r[h1]).shift(1), lambda r: self.one),
                                 (lambda r: (r[h2] - r[l1]).shift(1), lambda r: self.one), take_max=False)

    def vee(self, x, y):
        (l1, h1), (l2, h2) = x, y
        return self._select_pair((lambda r: r[l1], lambda r: r[l2]),
                                 (lambda r: r[h1], lambda r: r[h2]), take_max=True)

    def wedge(self, x, y):
        (l1, h1), (l2, h2) = x, y
        return self._select_pair((lambda r: r[l1], lambda r: r[l2]),
                                 (lambda r: r[h1], lambda r: r[h2]), take_max=False)

    def dist(self, x, y):
        (l1, h1), (l2, h2) = x, y
        upper = self.field.select(lambda r: r[h1] - r[l2], lambda r: r[h2] - r[l1], take_max=True)
        if self.exact:
            return upper, upper
        spread = self.field.select(lambda r: r[l1] - r[h2], lambda r: r[l2] - r[h1], take_max=True)
        lower = self.field.select(lambda r: r[spread], lambda r: self.zero, take_max=True)
        return lower, upper

    def equiv(self, x, y):
        lo, hi = self.dist(x, y)
        return self._derive_pair(lambda r: self.one - r[hi], lambda r: self.one - r[lo])

    # formulas

    def emit(self, node: Formula) -> Tuple[int, int]:
        registers = self.emitted.get(node)
        if registers is None:
            registers = self.emitted[node] = self._emit(node)
        return registers

    def _emit(self, node: Formula) -> Tuple[int, int]:
        n = self.field.dim
        if isinstance(node, formulas.Var):
            index = node.index - 1
            register = self.field.derive(lambda regs: AffineFn.projection(n, index))
            return register, register
        if isinstance(node, formulas.Const1):
            return self.constant(ONE, ONE)
        if isinstance(node, formulas.Zero):
            return self.constant(ZERO, ZERO)
        if isinstance(node, formulas.Eta):
            return self.constant(*self._scalar(node.scalar))
        if isinstance(node, formulas.Neg):
            return self.neg(self.emit(node.child))
        if isinstance(node, formulas.Nabla):
            return self.nabla(node.scalar, self.emit(node.child))
        if isinstance(node, formulas.Delta):
            return self.delta(node.scalar, self.emit(node.child))
        x = self.emit(node.left)
        y = self.emit(node.right)
        rule = {
            formulas.Oplus: self.oplus,
            formulas.Odot: self.odot,
            formulas.Imp: self.imp,
            formulas.Vee: self.vee,
            formulas.Wedge: self.wedge,
            formulas.ChangDist: self.dist,
            formulas.Equiv: self.equiv,
        }[type(node)]
        return rule(x, y)


def compile_formula(formula: Formula,
                    precision: Optional[int] = None,
                    dim: Optional[int] = None,
                    cap: int = DEFAULT_CELL_CAP,
                    max_dimension: int = DEFAULT_MAX_DIMENSION) -> Union[PwlFunction, IntervalPwl]:
    """
    Compile a formula to its term function.

    Args:
        formula: Formula to compile
        precision: Scalar enclosure index, required for RL formulas
        dim: Ambient dimension, at least the arity (default: the arity, min 1)
        cap: Cell-count guard
        max_dimension: Largest cube dimension accepted

    Returns:
        Exact PwlFunction for L/QL formulas, IntervalPwl at index precision for RL

    Raises:
        CellCapExceeded: If a refinement exceeds the cap
    """
    n = _ambient(formula, dim)
    if formulas.classify(formula) == SignatureClass.RL:
        if precision is None:
            raise ValidationError("an RL formula needs a precision index")
        return _compile_envelopes(formula, precision, n, cap, max_dimension)
    field = _Field.cube(n, cap, max_dimension)
    register, _ = _Emitter(field, None).emit(formula)
    return field.function(register)


def _ambient(formula: Formula, dim: Optional[int]) -> int:
    needed = max(formulas.arity(formula), 1)
    if dim is None:
        return needed
    if dim < needed:
        raise DimensionError(f"dimension {dim} below the formula arity {needed}")
    return dim


def _compile_envelopes(formula: Formula, precision: int, n: int, cap: int, max_dimension: int) -> IntervalPwl:
    if precision < 0:
        raise ValidationError(f"precision index must be >= 0, got {precision}")
    field = _Field.cube(n, cap, max_dimension)
    lower, upper = _Emitter(field, precision).emit(formula)
    return IntervalPwl(precision, field.function(lower), field.function(upper))


def compile_envelopes(formula: Formula,
                      precision: int,
                      dim: Optional[int] = None,
                      cap: int = DEFAULT_CELL_CAP,
                      max_dimension: int = DEFAULT_MAX_DIMENSION) -> IntervalPwl:
    """Structural-induction envelopes of any formula at index precision (exact formulas give equal envelopes)."""
    return _compile_envelopes(formula, precision, _ambient(formula, dim), cap, max_dimension)


def compile_exact(formula: Formula, dim: Optional[int] = None, cap: int = DEFAULT_CELL_CAP,
                  max_dimension: int = DEFAULT_MAX_DIMENSION) -> PwlFunction:
    """Compile an L/QL formula, rejecting real scalars."""
    if formulas.classify(formula) == SignatureClass.RL:
        raise UnsupportedClassError("RL formula on an exact-only path")
    return compile_formula(formula, dim=dim, cap=cap, max_dimension=max_dimension)


def compile_family(groups: Sequence[Sequence[Formula]],
                   common: Sequence[Formula] = (),
                   dim: Optional[int] = None,
                   cap: int = DEFAULT_CELL_CAP,
                   max_dimension: int = DEFAULT_MAX_DIMENSION) -> List[List[PwlFunction]]:
    """
    Compile groups of L/QL formulas that share subterms.

    The common subterms are emitted once on a shared field. Each group then
    continues on its own copy of that field, so the functions of one group
    live on one complex and pairwise comparisons need no overlay.

    Args:
        groups: Formulas to compile, grouped
        common: Subterms worth emitting once for every group
        dim: Ambient dimension (default: the largest arity, min 1)
        cap: Cell-count guard
        max_dimension: Largest cube dimension accepted

    Returns:
        Term functions in the shape of groups
    """
    everything = list(common) + [phi for group in groups for phi in group]
    if any(formulas.classify(phi) == SignatureClass.RL for phi in everything):
        raise UnsupportedClassError("RL formula on an exact-only path")
    n = max((_ambient(phi, dim) for phi in everything), default=_ambient(formulas.Zero(), dim))
    shared = _Field.cube(n, cap, max_dimension)
    base = _Emitter(shared, None)
    for phi in common:
        base.emit(phi)
    compiled = []
    for group in groups:
        field = shared.copy()
        emitter = _Emitter(field, None, dict(base.emitted))
        registers = [emitter.emit(phi)[0] for phi in group]
        compiled.append([field.function(register) for register in registers])
    return compiled


def apply_connective(op: Connective,
                     f: PwlFunction,
                     g: Optional[PwlFunction] = None,
                     scalar: Optional[Fraction] = None,
                     cap: int = DEFAULT_CELL_CAP) -> PwlFunction:
    """
    Apply a connective pointwise.

    Args:
        op: Connective to apply
        f: First operand
        g: Second operand for binary connectives
        scalar: Rational r for the scalar action x -> r·x
        cap: Cell-count guard

    Returns:
        Exact result, affine on each cell of the refined common complex
    """
    if op in (Connective.NEG, Connective.SCALAR):
        field = _Field.overlay([f], cap)
        emitter = _Emitter(field, None)
        if op == Connective.NEG:
            register, _ = emitter.neg((0, 0))
        else:
            if scalar is None or not is_rational(scalar) or not 0 <= scalar <= 1:
                raise ValidationError("the scalar action needs a rational r in [0,1]")
            register, _ = emitter.delta(Fraction(scalar), (0, 0))
        return field.function(register)
    if g is None:
        raise ValidationError(f"connective {op.value} needs two operands")
    if f.dim != g.dim:
        raise DimensionError(f"operands on [0,1]^{f.dim} and [0,1]^{g.dim}")
    field = _Field.overlay([f, g], cap)
    emitter = _Emitter(field, None)
    rule = {
        Connective.OPLUS: emitter.oplus,
        Connective.ODOT: emitter.odot,
        Connective.IMP: emitter.imp,
        Connective.EQUIV: emitter.equiv,
        Connective.MIN: emitter.wedge,
        Connective.MAX: emitter.vee,
        Connective.CHANG_DIST: emitter.dist,
    }[op]
    register, _ = rule((0, 0), (1, 1))
    return field.function(register)


def multiple(f: PwlFunction, k: int, cap: int = DEFAULT_CELL_CAP) -> PwlFunction:
    """k-fold truncated sum min(1, k·f)."""
    if k < 0:
        raise ValidationError(f"multiplier must be >= 0, got {k}")
    field = _Field.overlay([f], cap)
    one = AffineFn.constant(f.dim, ONE)
    register = field.select(lambda r: r[0].scale(Fraction(k)), lambda r: one, take_max=False)
    return field.function(register)


def _facet_hyperplanes(f: PwlFunction) -> List[AffineFn]:
    found: Dict[Tuple[Tuple[Fraction, ...], Fraction], AffineFn] = {}
    for cell in f.complex.cells:
        for lam in simplex_frame(cell).barycentric:
            plane = lam.normalized()
            if plane is not None:
                found.setdefault((plane.coeffs, plane.const), plane)
    return [found[key] for key in sorted(found)]


def compose(f: PwlFunction, maps: Sequence[PwlFunction], cap: int = DEFAULT_CELL_CAP) -> PwlFunction:
    """
    Exact composition f∘λ for f on [0,1]^m and λ = (λ_1, …, λ_m) on [0,1]^n.

    The common refinement of the λ_i is split by the pullback of every
    facet hyperplane of f's cells; each piece then maps into one cell of f.

    Raises:
        DimensionError: If m differs from len(maps) or the maps disagree on n
    """
    m = f.dim
    if len(maps) != m:
        raise DimensionError(f"function of {m} variables composed with {len(maps)} maps")
    field = _Field.overlay(list(maps), cap)
    for plane in _facet_hyperplanes(f):
        field.split(lambda regs, plane=plane: plane.compose(regs[:m]))
    target_cells = f.cells
    composed: List[Cell] = []
    for verts, regs in field.cells:
        images = [tuple(regs[j](v) for j in range(m)) for v in verts]
        box = _bounds(images)
        piece = None
        for cell, f_piece in target_cells:
            if boxes_overlap(cell.bounds, box) and all(simplex_frame(cell).contains(p) for p in images):
                piece = f_piece
                break
        if piece is None:
            raise InvariantViolation("composition piece does not map into a single cell")
        composed.append((verts, regs + (piece.compose(regs[:m]),)))
    field.cells = composed
    return field.function(m)


def pwl_equal(f: PwlFunction, g: PwlFunction) -> bool:
    """Exact equality, decided on the vertices of the common refinement."""
    if f.dim != g.dim:
        raise DimensionError(f"functions on [0,1]^{f.dim} and [0,1]^{g.dim}")
    field = _Field.overlay([f, g])
    return all(regs[0](v) == regs[1](v) for verts, regs in field.cells for v in verts)


def pwl_leq(f: PwlFunction, g: PwlFunction) -> bool:
    """f <= g pointwise, decided on the vertices of the common refinement."""
    if f.dim != g.dim:
        raise DimensionError(f"functions on [0,1]^{f.dim} and [0,1]^{g.dim}")
    field = _Field.overlay([f, g])
    return all(regs[0](v) <= regs[1](v) for verts, regs in field.cells for v in verts)


def linearity_regions(f: PwlFunction) -> List[Tuple[AffineFn, Tuple[int, ...]]]:
    """Maximal linearity regions: connected groups of facet-adjacent cells with one affine piece."""
    graph = f.complex.adjacency_graph()
    same = nx.Graph()
    same.add_nodes_from(graph.nodes)
    same.add_edges_from((a, b) for a, b in graph.edges if f.pieces[a] == f.pieces[b])
    regions = [tuple(sorted(component)) for component in nx.connected_components(same)]
    return sorted(((f.pieces[cells[0]], cells) for cells in regions), key=lambda item: item[1])


def coefficient_class(f: PwlFunction) -> CoefficientClass:
    """INTEGER iff every maximal linearity region has integer coefficients and constant."""
    if all(piece.is_integral for piece, _ in linearity_regions(f)):
        return CoefficientClass.INTEGER
    return CoefficientClass.RATIONAL


@dataclass(frozen=True)
class RestrictedPwl:
    """A PWL function restricted to a rational polyhedron."""
    source: PwlFunction
    domain: RationalPolyhedron
    pieces: Tuple[Tuple[Tuple[Point, ...], AffineFn], ...]

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def vertex_values(self) -> Iterator[Tuple[Point, Fraction]]:
        for verts, piece in self.pieces:
            for v in verts:
                yield v, piece(v)

    def minimum(self) -> Tuple[Optional[Fraction], Optional[Point]]:
        return _lexicographic_extremum(self.vertex_values(), maximum=False)

    def maximum(self) -> Tuple[Optional[Fraction], Optional[Point]]:
        return _lexicographic_extremum(self.vertex_values(), maximum=True)

    def equals(self, other: 'RestrictedPwl') -> bool:
        """Same domain and equal values on it."""
        if not polyhedron_equal(self.domain, other.domain):
            return False
        distance = apply_connective(Connective.CHANG_DIST, self.source, other.source)
        largest, _ = restrict(distance, self.domain).maximum()
        return largest is None or largest == 0


def restrict(f: PwlFunction, domain: RationalPolyhedron) -> RestrictedPwl:
    """
    Restrict f to a polyhedron.

    Every simplex of the domain is clipped against the cells of f, so f is
    affine on each resulting piece. An empty domain gives an empty element.
    """
    if domain.dim != f.dim:
        raise DimensionError(f"polyhedron in R^{domain.dim} for a function on [0,1]^{f.dim}")
    pieces = []
    for simplex in domain.simplices:
        for cell, piece in f.cells:
            if not boxes_overlap(simplex.bounds, cell.bounds):
                continue
            for part in clip_to_simplex(simplex.vertices, simplex_frame(cell)):
                pieces.append((part, piece))
    return RestrictedPwl(f, domain, tuple(pieces))


def dump_pwl(f: PwlFunction) -> Dict[str, Any]:
    """PWL dump: the complex plus one {"c": [...], "b": ...} entry per cell."""
    data = complex_to_json(f.complex)
    data["pieces"] = [{"c": RationalCodec.point_to_text(piece.coeffs),
                       "b": RationalCodec.to_text(piece.const)} for piece in f.pieces]
    return data


def dump_interval(f: IntervalPwl) -> Dict[str, Any]:
    return {"precision": f.precision, "lower": dump_pwl(f.lower), "upper": dump_pwl(f.upper)}


def load_pwl(data: Dict[str, Any]) -> PwlFunction:
    """
    Read a PWL dump and verify its invariants.

    Raises:
        ValidationError: If the dump is malformed or violates range/continuity
    """
    try:
        n = int(data["dim"])
        cells = tuple(simplex_from_json(s, n) for s in data["simplices"])
        pieces = tuple(AffineFn(RationalCodec.point_from_text(p["c"]), RationalCodec.from_text(p["b"]))
                       for p in data["pieces"])
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed PWL dump: {e}")
    if any(cell.dimension != n for cell in cells) or any(piece.dim != n for piece in pieces):
        raise ValidationError("PWL dump cells and pieces must be full-dimensional")
    function = PwlFunction(SimplicialComplex(n, cells), pieces)
    try:
        function.check_invariants()
    except InvariantViolation as e:
        raise ValidationError(f"invalid PWL dump: {e}")
    return function
