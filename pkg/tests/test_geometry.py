from fractions import Fraction

import pytest

from src.core.abstractions import DimensionError
from src.geometry import linalg
from src.geometry.service import (
    AffineFn,
    RationalPolyhedron,
    Simplex,
    SimplicialComplex,
    polyhedron_contains,
    polyhedron_equal,
    polyhedron_from_json,
    polyhedron_to_json,
    sign_on,
    simplex_volume,
    slice_simplex,
    split_by_hyperplane,
    triangulate_cube
)

F = Fraction
HALF = F(1, 2)


def segment(a, b):
    return Simplex(((F(a),), (F(b),)))


def point(*coords):
    return Simplex((tuple(F(c) for c in coords),))


def test_unit_segment_triangulation():
    """n=1 gives the single segment [0,1]."""
    assert triangulate_cube(1).cells == (segment(0, 1),)


def test_square_triangulation():
    """n=2 gives the two Kuhn triangles."""
    cells = set(triangulate_cube(2).cells)
    assert cells == {
        Simplex(((F(0), F(0)), (F(1), F(0)), (F(1), F(1)))),
        Simplex(((F(0), F(0)), (F(0), F(1)), (F(1), F(1)))),
    }


def test_cube_triangulation_volume():
    """n=3 gives 3! tetrahedra of total volume 1, each of volume 1/6."""
    cube = triangulate_cube(3)
    assert len(cube.cells) == 6
    assert cube.volume() == 1
    assert all(simplex_volume(cell) == F(1, 6) for cell in cube.cells)


@pytest.mark.parametrize("n", [0, 7])
def test_triangulation_dimension_limits(n):
    """Dimensions outside 1..max_dimension are rejected."""
    with pytest.raises(DimensionError):
        triangulate_cube(n)


def test_split_segment_at_half():
    """2x - 1 cuts [0,1] at 1/2."""
    refined = split_by_hyperplane(triangulate_cube(1), AffineFn((F(2),), F(-1)))
    assert set(refined.cells) == {segment(0, HALF), segment(HALF, 1)}


def test_split_by_positive_functional_is_identity():
    """A functional positive on the cube leaves the complex alone."""
    cube = triangulate_cube(2)
    assert split_by_hyperplane(cube, AffineFn((F(1), F(1)), F(1))) == cube


@pytest.mark.parametrize("h", [AffineFn((F(1), F(-1))), AffineFn((F(1), F(1)), F(-1, 2)),
                               AffineFn((F(3), F(-1)), F(-1, 3))])
def test_split_makes_sign_constant(h):
    """Every refined cell has one sign of h, and the union is still the square."""
    refined = split_by_hyperplane(triangulate_cube(2), h)
    assert refined.volume() == 1
    for cell in refined.cells:
        values = [h(v) for v in cell.vertices]
        assert all(value >= 0 for value in values) or all(value <= 0 for value in values)


def test_simplex_volumes():
    """Volumes of the unit segment and the standard triangle."""
    assert simplex_volume(segment(0, 1)) == 1
    assert simplex_volume(Simplex(((F(0), F(0)), (F(1), F(0)), (F(0), F(1))))) == HALF


def test_degenerate_simplex_has_zero_volume():
    """Collinear vertices give volume 0."""
    flat = Simplex(((F(0), F(0)), (HALF, HALF), (F(1), F(1))))
    assert simplex_volume(flat) == 0
    assert flat.is_degenerate()


def test_slice_segment():
    """x = 1/2 on [0,1] is the point 1/2."""
    assert slice_simplex(segment(0, 1), AffineFn((F(1),)), HALF) == [point(HALF)]


def test_slice_triangle():
    """x1 + x2 = 1/2 on the standard triangle is a segment between the edge midpoints."""
    triangle = Simplex(((F(0), F(0)), (F(1), F(0)), (F(0), F(1))))
    assert slice_simplex(triangle, AffineFn((F(1), F(1))), HALF) == [
        Simplex(((F(0), HALF), (HALF, F(0))))
    ]


def test_slice_constant_level_is_whole_simplex():
    """A functional identically equal to the level keeps the simplex."""
    triangle = Simplex(((F(0), F(0)), (F(1), F(0)), (F(0), F(1))))
    assert slice_simplex(triangle, AffineFn((F(0), F(0)), HALF), HALF) == [triangle]


def test_polyhedron_equal_examples():
    """Retriangulation keeps equality; an extra point breaks it."""
    p = RationalPolyhedron(1, (segment(0, HALF),))
    q = RationalPolyhedron(1, (segment(0, HALF), point(F(3, 4))))
    assert not polyhedron_equal(p, q)
    assert polyhedron_equal(p, RationalPolyhedron(1, (segment(0, F(1, 4)), segment(F(1, 4), HALF))))

    center = (HALF, HALF)
    corners = [(F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))]
    fan = tuple(Simplex((corners[i], corners[(i + 1) % 4], center)) for i in range(4))
    assert polyhedron_equal(RationalPolyhedron.cube(2), RationalPolyhedron(2, fan))


def test_canonical_form_drops_contained_simplices():
    """A point inside a segment is absorbed."""
    polyhedron = RationalPolyhedron(1, (segment(0, 1), point(HALF)))
    assert polyhedron.simplices == (segment(0, 1),)


def test_equal_point_sets_compare_and_hash_equal():
    """Two triangulations of one set build the same value."""
    whole = RationalPolyhedron(1, (segment(0, 1),))
    halves = RationalPolyhedron(1, (segment(0, HALF), segment(HALF, 1)))
    assert whole == halves
    assert hash(whole) == hash(halves)
    assert whole.simplices == (segment(0, 1),)

    corners = [(F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))]
    other_diagonal = RationalPolyhedron(2, (
        Simplex((corners[0], corners[1], corners[3])),
        Simplex((corners[1], corners[2], corners[3])),
    ))
    center = (HALF, HALF)
    fan = RationalPolyhedron(2, tuple(Simplex((corners[i], corners[(i + 1) % 4], center)) for i in range(4)))
    cube = RationalPolyhedron.cube(2)
    assert other_diagonal == cube and fan == cube
    assert hash(other_diagonal) == hash(cube) == hash(fan)
    assert len({cube, fan, other_diagonal}) == 1


def test_distinct_point_sets_stay_distinct():
    """A segment with a gap is not the whole segment."""
    gap = RationalPolyhedron(1, (segment(0, F(1, 4)), segment(HALF, 1)))
    assert gap != RationalPolyhedron(1, (segment(0, 1),))
    assert len(gap.simplices) == 2


def test_containment_and_membership():
    """Points, containment of sub-polyhedra and the empty polyhedron."""
    square = RationalPolyhedron.cube(2)
    assert square.contains((F(1, 3), F(1, 4)))
    diagonal = RationalPolyhedron(2, (Simplex(((F(0), F(0)), (F(1), F(1)))),))
    assert polyhedron_contains(square, diagonal)
    assert not polyhedron_contains(diagonal, square)
    assert polyhedron_contains(diagonal, RationalPolyhedron(2))
    assert RationalPolyhedron(2).is_empty


def test_polyhedron_json_format():
    """Rationals are written as p/q strings."""
    data = polyhedron_to_json(RationalPolyhedron(1, (segment(HALF, 1),)))
    assert data == {"dim": 1, "simplices": [[["1/2"], ["1"]]]}
    assert polyhedron_from_json(data).simplices == (segment(HALF, 1),)


def test_adjacency_and_location():
    """The two Kuhn triangles share the diagonal."""
    cube = triangulate_cube(2)
    graph = cube.adjacency_graph()
    assert graph.number_of_edges() == 1
    index = cube.locate((F(3, 4), F(1, 4)))
    assert cube.cells[index].vertices == ((F(0), F(0)), (F(1), F(0)), (F(1), F(1)))


def test_kuhn_adjacency_in_three_dimensions():
    """The six Kuhn tetrahedra form a cycle under facet adjacency."""
    graph = triangulate_cube(3).adjacency_graph()
    assert graph.number_of_nodes() == 6
    assert graph.number_of_edges() == 6
    assert all(degree == 2 for _, degree in graph.degree())


def test_sign_on_pieces():
    """Sign of a functional on a sign-constant vertex set."""
    h = AffineFn((F(1),), -HALF)
    assert sign_on([(F(1),), (HALF,)], h) == 1
    assert sign_on([(F(0),), (HALF,)], h) == -1
    assert sign_on([(HALF,)], h) == 0


def test_linalg_on_flint():
    """Determinant, rank and null space over the rationals."""
    assert linalg.determinant([[F(1), F(2)], [F(3), F(4)]]) == -2
    assert linalg.rank([[F(1), F(2)], [F(2), F(4)]]) == 1
    basis = linalg.nullspace([[F(1), F(1)]], 2)
    assert basis == [[F(-1), F(1)]]
    assert linalg.row_echelon([[F(2), F(4), F(2)], [F(1), F(2), F(1)]]) == [[F(1), F(2), F(1)]]


def test_complex_volume_of_refinement():
    """Refinements keep total volume exactly."""
    refined = SimplicialComplex(2, triangulate_cube(2).cells)
    for h in (AffineFn((F(1), F(0)), -F(1, 3)), AffineFn((F(0), F(1)), -F(2, 3))):
        refined = split_by_hyperplane(refined, h)
    assert refined.volume() == 1
