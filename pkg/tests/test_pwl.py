from fractions import Fraction

import pytest

from src.core.abstractions import CellCapExceeded, UnsupportedClassError, ValidationError
from src.formula.service import Delta, FormulaGenerator, Neg, Oplus, Var, evaluate, parse
from src.geometry.service import AffineFn, RationalPolyhedron, Simplex, split_by_hyperplane, triangulate_cube
from src.pwl.service import (
    CoefficientClass,
    Connective,
    IntervalPwl,
    PwlFunction,
    apply_connective,
    coefficient_class,
    compile_envelopes,
    compile_exact,
    compile_family,
    compile_formula,
    compose,
    dump_pwl,
    linearity_regions,
    load_pwl,
    multiple,
    pwl_equal,
    pwl_leq,
    restrict
)

F = Fraction
HALF = F(1, 2)


def pieces_by_cell(f):
    return {cell.vertices: piece for cell, piece in f.cells}


def test_compile_negation(compiled):
    """~v1 is the single piece 1 - x on [0,1]."""
    f = compiled("~v1")
    assert len(f.pieces) == 1
    assert f.pieces[0] == AffineFn((F(-1),), F(1))


def test_compile_truncated_sum(compiled):
    """v1 + v1 is 2x on [0,1/2] and 1 on [1/2,1]."""
    f = compiled("v1 + v1")
    assert pieces_by_cell(f) == {
        ((F(0),), (HALF,)): AffineFn((F(2),)),
        ((HALF,), (F(1),)): AffineFn((F(0),), F(1)),
    }
    f.check_invariants()


def test_compile_real_scalar_envelopes(sqrt2_over_2):
    """delta[√2/2] v1 compiles to lo_k·x and hi_k·x, width at most 2^-k."""
    for k in (0, 5, 20):
        envelopes = compile_formula(Delta(sqrt2_over_2, Var(1)), precision=k)
        lo, hi = sqrt2_over_2.approx(k)
        assert isinstance(envelopes, IntervalPwl)
        assert pwl_equal(envelopes.lower, PwlFunction(triangulate_cube(1), (AffineFn((lo,)),)))
        assert pwl_equal(envelopes.upper, PwlFunction(triangulate_cube(1), (AffineFn((hi,)),)))
        assert envelopes.width() == hi - lo <= F(1, 2 ** k)
        envelopes.check_invariants()


def test_real_formula_needs_precision(sqrt2_over_2):
    """RL formulas are rejected without an index and on the exact path."""
    formula = Delta(sqrt2_over_2, Var(1))
    with pytest.raises(ValidationError):
        compile_formula(formula)
    with pytest.raises(UnsupportedClassError):
        compile_exact(formula)


def test_compile_matches_reference_evaluation():
    """Compiled functions agree with recursive evaluation at random rational points."""
    gen = FormulaGenerator(seed=5, max_depth=4, max_arity=2)
    for _ in range(25):
        formula = gen.formula()
        f = compile_formula(formula, dim=2)
        f.check_invariants()
        for _ in range(5):
            x = gen.point(2)
            assert f(x) == evaluate(formula, x)


def test_repeated_subterms_compile_once(compiled):
    """A subterm used twice compiles to the same function as its spelled-out copy."""
    text = "(v1 + ~v2) . (v1 + ~v2)"
    f = compiled(text, dim=2)
    f.check_invariants()
    square = apply_connective(Connective.ODOT, compiled("v1 + ~v2", dim=2), compiled("~v2 + v1", dim=2))
    assert pwl_equal(f, square)
    for x in ((F(0), F(1)), (HALF, F(1, 3)), (F(1, 5), F(4, 5))):
        assert f(x) == evaluate(parse(text), x)


def test_family_matches_single_compiles():
    """Grouped compilation gives the same term functions, one complex per group."""
    gen = FormulaGenerator(seed=11, max_depth=3, max_arity=2)
    groups = [[gen.formula(), gen.formula()] for _ in range(6)]
    common = (Var(1), Var(2), Neg(Var(1)))
    family = compile_family(groups, common=common, dim=2)
    assert len(family) == len(groups)
    for group, functions in zip(groups, family):
        first, second = functions
        assert first.complex is second.complex
        for formula, f in zip(group, functions):
            f.check_invariants()
            assert pwl_equal(f, compile_formula(formula, dim=2))


def test_family_rejects_real_scalars(sqrt2_over_2):
    """RL formulas have no exact family compile."""
    with pytest.raises(UnsupportedClassError):
        compile_family([[Var(1)]], common=(Delta(sqrt2_over_2, Var(1)),))


def test_exact_envelopes_coincide():
    """Envelope compilation of a QL formula gives equal envelopes."""
    envelopes = compile_envelopes(parse("delta[1/3] v1 + v2"), 4)
    assert pwl_equal(envelopes.lower, envelopes.upper)
    assert envelopes.width() == 0


def test_cell_cap():
    """Refinements beyond the cap abort."""
    with pytest.raises(CellCapExceeded):
        compile_formula(parse("(v1 + v1) . (v2 + v2) \\/ (v1 . v2)"), cap=2)


def test_double_negation(compiled):
    """neg(neg(f)) equals f."""
    f = compiled("v1 + v2")
    assert pwl_equal(apply_connective(Connective.NEG, apply_connective(Connective.NEG, f)), f)


def test_oplus_with_complement(compiled):
    """x ⊕ (1 - x) is constant 1."""
    x = compiled("v1")
    result = apply_connective(Connective.OPLUS, x, apply_connective(Connective.NEG, x))
    assert pwl_equal(result, PwlFunction.constant(1, F(1)))


def test_scalar_action():
    """The scalar 1/2 sends constant 1 to constant 1/2."""
    result = apply_connective(Connective.SCALAR, PwlFunction.constant(1, F(1)), scalar=HALF)
    assert pwl_equal(result, PwlFunction.constant(1, HALF))


def test_connectives_on_different_complexes(compiled):
    """Operands on unrelated refinements are overlaid before combining."""
    f = compiled("v1 + v1")
    g = compiled("v1 . v1")
    assert pwl_equal(apply_connective(Connective.MAX, f, g), f)
    assert pwl_equal(apply_connective(Connective.MIN, f, g), g)
    assert pwl_equal(apply_connective(Connective.CHANG_DIST, f, f), PwlFunction.constant(1, F(0)))
    assert pwl_equal(apply_connective(Connective.IMP, g, f), PwlFunction.constant(1, F(1)))


def test_multiple(compiled):
    """min(1, 3·x/3) is x."""
    assert pwl_equal(multiple(compiled("delta[1/3] v1"), 3), compiled("v1"))


def test_compose_with_identity(compiled):
    """Composing with the identity map, or with projections, returns f."""
    g = compiled("v1 + v1")
    assert pwl_equal(compose(PwlFunction.projection(1, 0), [g]), g)
    f = compiled("v1 . ~v2")
    projections = [PwlFunction.projection(2, 0), PwlFunction.projection(2, 1)]
    assert pwl_equal(compose(f, projections), f)


def test_compose_negation_with_sum(compiled):
    """(1 - y) ∘ (x ⊕ x) is 1 - 2x on [0,1/2] and 0 on [1/2,1]."""
    result = compose(compiled("~v1"), [compiled("v1 + v1")])
    assert pwl_equal(result, compiled("~(v1 + v1)"))
    assert result((F(1, 4),)) == HALF
    assert result((F(3, 4),)) == 0


def test_compose_in_two_variables(compiled):
    """(v1 . v2) ∘ (x ⊕ y, ¬x) agrees with substitution."""
    result = compose(compiled("v1 . v2"), [compiled("v1 + v2"), compiled("~v1", dim=2)])
    assert pwl_equal(result, compiled("(v1 + v2) . ~v1"))


def test_restrict_examples(compiled):
    """Restriction to a point, an interval and the whole cube."""
    x = compiled("v1")
    at_one = restrict(x, RationalPolyhedron(1, (Simplex(((F(1),),)),)))
    assert at_one.minimum() == (F(1), (F(1),))
    assert at_one.maximum() == (F(1), (F(1),))

    doubled = restrict(compiled("v1 + v1"), RationalPolyhedron(1, (Simplex(((F(0),), (F(1, 4),))),)))
    assert {piece for _, piece in doubled.pieces} == {AffineFn((F(2),))}

    f = compiled("v1 \\/ ~v1")
    whole = restrict(f, RationalPolyhedron.cube(1))
    assert whole.minimum() == f.minimum()
    assert whole.equals(restrict(f, RationalPolyhedron.cube(1)))


def test_restrict_to_empty_polyhedron(compiled):
    """The empty polyhedron gives an empty element."""
    empty = restrict(compiled("v1"), RationalPolyhedron(1))
    assert empty.is_empty
    assert empty.minimum() == (None, None)


def test_pwl_equal_examples(compiled):
    """Equality survives retriangulation and detects differing values."""
    f = compiled("v1 + v1")
    refined_complex = split_by_hyperplane(f.complex, AffineFn((F(1),), -F(1, 4)))
    refined = PwlFunction(refined_complex, tuple(
        AffineFn((F(2),)) if cell.vertices[1][0] <= HALF else AffineFn((F(0),), F(1))
        for cell in refined_complex.cells))
    assert pwl_equal(f, refined)
    assert not pwl_equal(compiled("v1"), compiled("v1 . v1"))
    assert pwl_leq(compiled("v1 . v1"), compiled("v1"))


def test_coefficient_class_examples(compiled):
    """Integer for x ⊕ x and for x/2 ⊕ x/2, rational for x/2."""
    assert coefficient_class(compiled("v1 + v1")) == CoefficientClass.INTEGER
    assert coefficient_class(compiled("delta[1/2] v1")) == CoefficientClass.RATIONAL
    assert compiled("delta[1/2] v1 + delta[1/2] v1").coefficient_class == CoefficientClass.INTEGER


def test_linearity_regions_merge_equal_pieces():
    """Facet-adjacent cells with one affine piece form one region."""
    cube = split_by_hyperplane(triangulate_cube(1), AffineFn((F(2),), F(-1)))
    x = PwlFunction(cube, tuple(AffineFn((F(1),)) for _ in cube.cells))
    regions = linearity_regions(x)
    assert len(regions) == 1
    assert regions[0][0] == AffineFn((F(1),))


def test_extrema_use_least_witness(compiled):
    """Minimum and maximum report the lexicographically least extremal vertex."""
    assert compiled("v1 \\/ ~v1").minimum() == (HALF, (HALF,))
    assert compiled("v1 . v1").maximum() == (F(1), (F(1),))
    assert compiled("v1 + v2").maximum() == (F(1), (F(0), F(1)))


def test_dump_and_load(compiled):
    """The dump carries p/q strings and loads back with invariants checked."""
    f = compiled("v1 + v1")
    data = dump_pwl(f)
    assert data["dim"] == 1
    assert {"c": ["2"], "b": "0"} in data["pieces"]
    assert pwl_equal(load_pwl(data), f)


def test_load_rejects_out_of_range_values():
    """Dumped pieces leaving [0,1] are invalid."""
    data = {"dim": 1, "simplices": [[["0"], ["1"]]], "pieces": [{"c": ["2"], "b": "0"}]}
    with pytest.raises(ValidationError):
        load_pwl(data)


def test_integer_witness_example():
    """x/2 + x/2 is the identity, and its negation is 1 - x."""
    f = compile_formula(Oplus(Delta(HALF, Var(1)), Delta(HALF, Var(1))))
    assert pwl_equal(f, PwlFunction.projection(1, 0))
    assert pwl_equal(apply_connective(Connective.NEG, f), compile_formula(Neg(Var(1))))
