"""
Exact rational polyhedral kernel.

Simplices, simplicial complexes over [0,1]^n, rational polyhedra and affine
functionals, plus the refinement primitives every piecewise-linear
computation is built on. All arithmetic is exact over ``Fraction``.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..core.abstractions import DimensionError, ValidationError
from ..core.utils import RationalCodec
from . import linalg

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]
DEFAULT_MAX_DIMENSION = 6

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class AffineFn:
    """Rational affine function x -> c·x + b."""
    coeffs: Tuple[Fraction, ...]
    const: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, 'const', Fraction(self.const))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @classmethod
    def constant(cls, n: int, value: Fraction) -> 'AffineFn':
        return cls((ZERO,) * n, value)

    @classmethod
    def projection(cls, n: int, index: int) -> 'AffineFn':
        """The coordinate function x_index (0-based)."""
        return cls(tuple(ONE if i == index else ZERO for i in range(n)), ZERO)

    @staticmethod
    def combine(weights: Sequence[Fraction], functions: Sequence['AffineFn'], n: int) -> 'AffineFn':
        """Linear combination Σ w_i f_i."""
        coeffs = [ZERO] * n
        const = ZERO
        for weight, function in zip(weights, functions):
            if weight == 0:
                continue
            for i, c in enumerate(function.coeffs):
                coeffs[i] += weight * c
            const += weight * function.const
        return AffineFn(tuple(coeffs), const)

    def __call__(self, point: Sequence[Fraction]) -> Fraction:
        total = self.const
        for c, x in zip(self.coeffs, point):
            if c:
                total += c * x
        return total

    def __add__(self, other: 'AffineFn') -> 'AffineFn':
        return AffineFn(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.const + other.const)

    def __sub__(self, other: 'AffineFn') -> 'AffineFn':
        return AffineFn(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.const - other.const)

    def __neg__(self) -> 'AffineFn':
        return AffineFn(tuple(-a for a in self.coeffs), -self.const)

    def scale(self, factor: Fraction) -> 'AffineFn':
        return AffineFn(tuple(factor * a for a in self.coeffs), factor * self.const)

    def shift(self, amount: Fraction) -> 'AffineFn':
        return AffineFn(self.coeffs, self.const + amount)

    def compose(self, maps: Sequence['AffineFn']) -> 'AffineFn':
        """self ∘ (maps[0], …, maps[m-1]) for affine maps into R^m."""
        n = maps[0].dim if maps else 0
        return AffineFn.combine(self.coeffs, maps, n).shift(self.const)

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def is_integral(self) -> bool:
        return self.const.denominator == 1 and all(c.denominator == 1 for c in self.coeffs)

    def denominators(self) -> List[int]:
        return [c.denominator for c in self.coeffs] + [self.const.denominator]

    def normalized(self) -> Optional['AffineFn']:
        """Canonical representative of the hyperplane {h = 0}; None if h is constant."""
        lead = next((c for c in self.coeffs if c != 0), None)
        if lead is None:
            return None
        return self.scale(1 / lead)


def _check_point(point: Sequence[Fraction], n: int) -> Point:
    if len(point) != n:
        raise DimensionError(f"point has dimension {len(point)}, expected {n}")
    coords = tuple(Fraction(x) for x in point)
    if any(x < 0 or x > 1 for x in coords):
        raise ValidationError(f"point {RationalCodec.point_to_text(coords)} outside [0,1]^{n}")
    return coords


@dataclass(frozen=True, order=True)
class Simplex:
    """Simplex with rational vertices in [0,1]^n, vertices sorted lexicographically."""
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValidationError("a simplex needs at least one vertex")
        n = len(self.vertices[0])
        verts = tuple(sorted({_check_point(v, n) for v in self.vertices}))
        object.__setattr__(self, 'vertices', verts)

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    @property
    def ambient(self) -> int:
        return len(self.vertices[0])

    def barycenter(self) -> Point:
        count = len(self.vertices)
        return tuple(sum(coords, ZERO) / count for coords in zip(*self.vertices))

    @cached_property
    def bounds(self) -> Tuple[Point, Point]:
        columns = list(zip(*self.vertices))
        return tuple(min(c) for c in columns), tuple(max(c) for c in columns)

    def is_degenerate(self) -> bool:
        if self.dimension == 0:
            return False
        v0 = self.vertices[0]
        edges = [[a - b for a, b in zip(v, v0)] for v in self.vertices[1:]]
        return linalg.rank(edges) < self.dimension


def boxes_overlap(a: Tuple[Point, Point], b: Tuple[Point, Point]) -> bool:
    """Closed bounding boxes intersect."""
    return all(lo1 <= hi2 and lo2 <= hi1 for lo1, hi1, lo2, hi2 in zip(a[0], a[1], b[0], b[1]))


@dataclass(frozen=True)
class SimplexFrame:
    """Affine equations of aff(S) and extended barycentric coordinates of S."""
    equations: Tuple[AffineFn, ...]
    barycentric: Tuple[AffineFn, ...]

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(eq(point) == 0 for eq in self.equations) and all(lam(point) >= 0 for lam in self.barycentric)


@lru_cache(maxsize=1 << 16)
def simplex_frame(simplex: Simplex) -> SimplexFrame:
    """
    Compute the frame of a simplex of any dimension.

    The barycentric functions have gradients in the span of the edges
    (solved from the Gram system), so each vanishes on the hyperplane
    through the opposite facet that is orthogonal to aff(S)'s complement.

    Raises:
        ValidationError: If the simplex is degenerate
    """
    n = simplex.ambient
    v0 = simplex.vertices[0]
    d = simplex.dimension
    if d == 0:
        equations = tuple(AffineFn.projection(n, i).shift(-v0[i]) for i in range(n))
        return SimplexFrame(equations, (AffineFn.constant(n, ONE),))
    edges = [[a - b for a, b in zip(v, v0)] for v in simplex.vertices[1:]]
    gram = [[sum((x * y for x, y in zip(e, f)), ZERO) for f in edges] for e in edges]
    try:
        dual = linalg.solve(gram, edges)
    except ZeroDivisionError:
        raise ValidationError(f"degenerate simplex {simplex_to_json(simplex)}")
    lambdas = []
    for row in dual:
        function = AffineFn(tuple(row), ZERO)
        lambdas.append(function.shift(-function(v0)))
    first = AffineFn.constant(n, ONE) - AffineFn.combine([ONE] * d, lambdas, n)
    equations = []
    for normal in linalg.nullspace(edges, n):
        function = AffineFn(tuple(normal), ZERO)
        equations.append(function.shift(-function(v0)))
    return SimplexFrame(tuple(equations), tuple([first] + lambdas))


def kuhn_chain(corner: Sequence[Fraction], order: Sequence[int], step: Fraction) -> Tuple[Point, ...]:
    """Vertices corner, corner + step·e_order[0], … of one Kuhn simplex, in chain order."""
    current = list(corner)
    chain = [tuple(current)]
    for axis in order:
        current[axis] += step
        chain.append(tuple(current))
    return tuple(chain)


@dataclass(frozen=True)
class SimplicialComplex:
    """Full-dimensional simplices covering [0,1]^dim (or a stated sub-region)."""
    dim: int
    cells: Tuple[Simplex, ...]

    def volume(self) -> Fraction:
        return sum((simplex_volume(cell) for cell in self.cells), ZERO)

    def vertices(self) -> List[Point]:
        return sorted({v for cell in self.cells for v in cell.vertices})

    def adjacency_graph(self) -> nx.Graph:
        """Graph on cell indices joining cells that share a facet."""
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.cells)))
        facets: Dict[Tuple[Point, ...], int] = {}
        for i, cell in enumerate(self.cells):
            for facet in itertools.combinations(cell.vertices, len(cell.vertices) - 1):
                other = facets.setdefault(facet, i)
                if other != i:
                    graph.add_edge(other, i)
        return graph

    def locate(self, point: Sequence[Fraction]) -> int:
        """Index of the first cell containing the point."""
        box = (tuple(point), tuple(point))
        for i, cell in enumerate(self.cells):
            if boxes_overlap(cell.bounds, box) and simplex_frame(cell).contains(point):
                return i
        raise ValidationError(f"point {RationalCodec.point_to_text(point)} not covered by the complex")


def triangulate_cube(n: int, max_dimension: int = DEFAULT_MAX_DIMENSION) -> SimplicialComplex:
    """
    Freudenthal/Kuhn triangulation of [0,1]^n.

    Args:
        n: Dimension, 1 <= n <= max_dimension
        max_dimension: Implementation cap

    Returns:
        Complex of n! simplices, one per coordinate ordering
    """
    if not 1 <= n <= max_dimension:
        raise DimensionError(f"cube dimension {n} outside 1..{max_dimension}")
    corner = (ZERO,) * n
    cells = tuple(Simplex(kuhn_chain(corner, order, ONE)) for order in itertools.permutations(range(n)))
    return SimplicialComplex(n, cells)


def bisect_simplex(vertices: Sequence[Point], h: AffineFn) -> List[Tuple[Point, ...]]:
    """
    Split a simplex (of any dimension) into pieces on which h has constant sign.

    Edges whose endpoints have strictly opposite signs are bisected at the
    zero of h, in lexicographic edge order; every piece holding both
    endpoints of the current edge is replaced by its two halves. The edge
    order is global, so neighbouring cells are cut consistently.
    """
    ordered = sorted(vertices)
    values = {v: h(v) for v in ordered}
    crossing = [(u, w) for i, u in enumerate(ordered) for w in ordered[i + 1:]
                if values[u] * values[w] < 0]
    pieces = [tuple(ordered)]
    for u, w in crossing:
        t = values[u] / (values[u] - values[w])
        cut = tuple(a + t * (b - a) for a, b in zip(u, w))
        refined = []
        for piece in pieces:
            if u in piece and w in piece:
                refined.append(tuple(cut if v == u else v for v in piece))
                refined.append(tuple(cut if v == w else v for v in piece))
            else:
                refined.append(piece)
        pieces = refined
    return pieces


def sign_on(vertices: Iterable[Point], h: AffineFn) -> int:
    """Sign of h on a sign-constant piece: 1, -1, or 0 when h vanishes on it."""
    sign = 0
    for v in vertices:
        value = h(v)
        if value > 0:
            return 1
        if value < 0:
            sign = -1
    return sign


def clip_to_simplex(vertices: Sequence[Point], frame: SimplexFrame) -> List[Tuple[Point, ...]]:
    """Pieces of a simplex lying inside the full-dimensional simplex with the given frame."""
    pieces = [tuple(vertices)]
    for lam in frame.barycentric:
        kept = []
        for piece in pieces:
            if all(lam(v) >= 0 for v in piece):
                kept.append(piece)
                continue
            for part in bisect_simplex(piece, lam):
                if sign_on(part, lam) >= 0:
                    kept.append(part)
        pieces = kept
        if not pieces:
            break
    return pieces


def split_by_hyperplane(complex_: SimplicialComplex, h: AffineFn) -> SimplicialComplex:
    """
    Refine a complex so that h has constant sign on every cell.

    Args:
        complex_: Complex to refine
        h: Rational affine functional

    Returns:
        Refined complex with the same union
    """
    if h.dim != complex_.dim:
        raise DimensionError(f"functional of dimension {h.dim} on a complex of dimension {complex_.dim}")
    cells = []
    for cell in complex_.cells:
        pieces = bisect_simplex(cell.vertices, h)
        if len(pieces) == 1:
            cells.append(cell)
        else:
            cells.extend(Simplex(piece) for piece in pieces)
    return SimplicialComplex(complex_.dim, tuple(cells))


def simplex_volume(simplex: Simplex) -> Fraction:
    """
    Exact volume |det(v1-v0, …, vn-v0)| / n! of a full-dimensional simplex.

    Degenerate input yields 0 and a warning.
    """
    n = simplex.ambient
    if simplex.dimension != n:
        logger.warning("volume of a %d-simplex in R^%d taken as 0", simplex.dimension, n)
        return ZERO
    v0 = simplex.vertices[0]
    edges = [[a - b for a, b in zip(v, v0)] for v in simplex.vertices[1:]]
    volume = abs(linalg.determinant(edges)) / math.factorial(n)
    if volume == 0:
        logger.warning("degenerate simplex has volume 0")
    return volume


def _maximal_faces(faces: Iterable[Tuple[Point, ...]]) -> List[Simplex]:
    unique = {tuple(sorted(face)) for face in faces}
    sets = {face: frozenset(face) for face in unique}
    maximal = [face for face in unique if not any(sets[face] < sets[other] for other in unique)]
    return sorted(Simplex(face) for face in maximal)


def slice_simplex(simplex: Simplex, h: AffineFn, level: Fraction) -> List[Simplex]:
    """
    Triangulated V-representation of {x ∈ S : h(x) = level}.

    Args:
        simplex: Simplex S
        h: Rational affine functional
        level: Rational level

    Returns:
        Maximal simplices of the slice, empty when it misses S
    """
    g = h.shift(-Fraction(level))
    if all(g(v) == 0 for v in simplex.vertices):
        return [simplex]
    faces = []
    for piece in bisect_simplex(simplex.vertices, g):
        zeros = tuple(v for v in piece if g(v) == 0)
        if zeros:
            faces.append(zeros)
    return _maximal_faces(faces)


def _outside_parts(vertices: Tuple[Point, ...], cover: Iterable[Simplex]) -> List[Tuple[Point, ...]]:
    """Pieces of a simplex left after removing every cover simplex whose flat contains it."""
    columns = list(zip(*vertices))
    box = (tuple(min(c) for c in columns), tuple(max(c) for c in columns))
    remaining = [tuple(vertices)]
    for other in cover:
        if not boxes_overlap(box, other.bounds):
            continue
        frame = simplex_frame(other)
        if any(eq(v) != 0 for eq in frame.equations for v in vertices):
            continue
        outside = []
        for region in remaining:
            inside = [region]
            for lam in frame.barycentric:
                still = []
                for piece in inside:
                    for part in bisect_simplex(piece, lam):
                        if sign_on(part, lam) < 0:
                            outside.append(part)
                        else:
                            still.append(part)
                inside = still
        remaining = outside
        if not remaining:
            break
    return remaining


def _same_cover(a: Sequence[Simplex], b: Sequence[Simplex]) -> bool:
    return all(not _outside_parts(s.vertices, b) for s in a) and all(not _outside_parts(s.vertices, a) for s in b)


def _affine_rank(points: Sequence[Point]) -> int:
    v0 = points[0]
    return linalg.rank([[a - b for a, b in zip(v, v0)] for v in points[1:]])


def _flat_key(frame: SimplexFrame) -> Tuple[Tuple[Fraction, ...], ...]:
    rows = [list(eq.coeffs) + [eq.const] for eq in frame.equations]
    return tuple(tuple(row) for row in linalg.row_echelon(rows))


def _walls(pieces: Sequence[Tuple[Point, ...]], d: int) -> List[AffineFn]:
    """
    Hyperplanes of the flat carrying a positive-measure part of the region's relative boundary.

    Candidates are the facet hyperplanes of the pieces. A candidate is a wall
    when the facets touching it from its two sides cover different sets.
    """
    candidates = {}
    for piece in pieces:
        for lam in simplex_frame(Simplex(piece)).barycentric:
            plane = lam.normalized()
            if plane is not None:
                candidates[(plane.coeffs, plane.const)] = plane
    walls = []
    for key in sorted(candidates):
        h = candidates[key]
        sides: Dict[int, List[Simplex]] = {1: [], -1: []}
        for piece in pieces:
            values = [h(v) for v in piece]
            crossing = min(values) < 0 < max(values)
            if not crossing and values.count(ZERO) < d:
                continue
            for part in bisect_simplex(piece, h):
                on = tuple(v for v in part if h(v) == 0)
                if len(on) == d:
                    sides[sign_on(part, h)].append(Simplex(on))
        if not _same_cover(sides[1], sides[-1]):
            walls.append(h)
    return walls


def _cell_vertices(group: Sequence[Tuple[Point, ...]], walls: Sequence[AffineFn],
                   equations: Sequence[AffineFn], n: int) -> List[Point]:
    normals = [list(eq.coeffs) for eq in equations]
    vertices = set()
    for v in {v for piece in group for v in piece}:
        tight = [list(h.coeffs) for h in walls if h(v) == 0]
        if linalg.rank(normals + tight) == n:
            vertices.add(v)
    return sorted(vertices)


def _pulling_triangulation(vertices: Sequence[Point], walls: Sequence[AffineFn],
                           dim: int) -> List[Tuple[Point, ...]]:
    """Pull the lexicographically least vertex over the facets not containing it."""
    if dim == 0:
        return [tuple(vertices)]
    apex = vertices[0]
    facets = set()
    for h in walls:
        face = tuple(v for v in vertices if h(v) == 0)
        if face and apex not in face and _affine_rank(face) == dim - 1:
            facets.add(face)
    simplices = []
    for face in sorted(facets):
        simplices.extend((apex,) + simplex for simplex in _pulling_triangulation(face, walls, dim - 1))
    return simplices


@lru_cache(maxsize=1024)
def _canonical_simplices(simplices: Tuple[Simplex, ...]) -> Tuple[Simplex, ...]:
    """
    Normal form of a union of simplices.

    Simplices are grouped by affine hull. Per hull, the parts not inside a
    higher-dimensional simplex form a pure region; its walls cut it into
    convex cells, and every cell gets its pulling triangulation. Walls,
    cells and triangulations depend only on the point set.
    """
    by_flat: Dict[Tuple[int, Tuple[Tuple[Fraction, ...], ...]], List[Simplex]] = {}
    for simplex in simplices:
        key = (simplex.dimension, _flat_key(simplex_frame(simplex)))
        by_flat.setdefault(key, []).append(simplex)
    cells = set()
    for (d, _), members in by_flat.items():
        higher = [s for s in simplices if s.dimension > d]
        pieces = [part for s in members for part in _outside_parts(s.vertices, higher)]
        if not pieces:
            continue
        equations = simplex_frame(members[0]).equations
        walls = _walls(pieces, d)
        for h in walls:
            pieces = [part for piece in pieces for part in bisect_simplex(piece, h)]
        groups: Dict[Tuple[int, ...], List[Tuple[Point, ...]]] = {}
        for piece in pieces:
            groups.setdefault(tuple(sign_on(piece, h) for h in walls), []).append(piece)
        n = members[0].ambient
        for group in groups.values():
            vertices = _cell_vertices(group, walls, equations, n)
            cells.update(Simplex(s) for s in _pulling_triangulation(vertices, walls, d))
    return tuple(sorted(cells))


@dataclass(frozen=True)
class RationalPolyhedron:
    """
    Finite union of rational simplices in [0,1]^dim.

    Construction stores the normal form, so equal point sets compare and
    hash equal.
    """
    dim: int
    simplices: Tuple[Simplex, ...] = ()

    def __post_init__(self):
        for simplex in self.simplices:
            if simplex.ambient != self.dim:
                raise DimensionError(f"simplex in R^{simplex.ambient} inside a polyhedron of R^{self.dim}")
        object.__setattr__(self, 'simplices', _canonical_simplices(tuple(sorted(set(self.simplices)))))

    @classmethod
    def cube(cls, n: int) -> 'RationalPolyhedron':
        # the pulling triangulation of the cube is its Kuhn triangulation
        cube = object.__new__(cls)
        object.__setattr__(cube, 'dim', n)
        cells = triangulate_cube(n, max(n, DEFAULT_MAX_DIMENSION)).cells
        object.__setattr__(cube, 'simplices', tuple(sorted(cells)))
        return cube

    @property
    def is_empty(self) -> bool:
        return not self.simplices

    def vertices(self) -> List[Point]:
        return sorted({v for simplex in self.simplices for v in simplex.vertices})

    def contains(self, point: Sequence[Fraction]) -> bool:
        box = (tuple(point), tuple(point))
        return any(boxes_overlap(s.bounds, box) and simplex_frame(s).contains(point) for s in self.simplices)


def polyhedron_contains(outer: RationalPolyhedron, inner: RationalPolyhedron) -> bool:
    """inner ⊆ outer as point sets."""
    if outer.dim != inner.dim:
        raise DimensionError(f"ambient dimensions differ: {outer.dim} vs {inner.dim}")
    return all(not _outside_parts(simplex.vertices, outer.simplices) for simplex in inner.simplices)


def polyhedron_equal(p: RationalPolyhedron, q: RationalPolyhedron) -> bool:
    """
    Decide whether two rational polyhedra are the same point set.

    Each simplex of one side is refined against the other side's simplices;
    it is covered iff no positive-measure piece stays outside all of them.
    """
    return polyhedron_contains(p, q) and polyhedron_contains(q, p)


def simplex_to_json(simplex: Simplex) -> List[List[str]]:
    return [RationalCodec.point_to_text(v) for v in simplex.vertices]


def simplex_from_json(data: Sequence[Sequence[str]], n: int) -> Simplex:
    points = [RationalCodec.point_from_text(v) for v in data]
    if any(len(p) != n for p in points):
        raise DimensionError(f"simplex vertex dimension differs from {n}")
    simplex = Simplex(tuple(points))
    if len(simplex.vertices) != len(points) or simplex.is_degenerate():
        raise ValidationError(f"degenerate simplex {data}")
    return simplex


def polyhedron_to_json(polyhedron: RationalPolyhedron) -> Dict[str, Any]:
    """Polyhedron file format: {"dim": n, "simplices": [[["p/q", …], …], …]}."""
    return {"dim": polyhedron.dim, "simplices": [simplex_to_json(s) for s in polyhedron.simplices]}


def polyhedron_from_json(data: Dict[str, Any]) -> RationalPolyhedron:
    """Read a polyhedron from its JSON form."""
    try:
        n = int(data["dim"])
        simplices = [simplex_from_json(s, n) for s in data.get("simplices", [])]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed polyhedron: {e}")
    return RationalPolyhedron(n, tuple(simplices))


def complex_to_json(complex_: SimplicialComplex) -> Dict[str, Any]:
    return {"dim": complex_.dim, "simplices": [simplex_to_json(c) for c in complex_.cells]}
