from fractions import Fraction

import pytest

from src.core.abstractions import UnsupportedClassError, ValidationError
from src.duality.service import (
    AlgebraClass,
    GenerationVerdict,
    Presentation,
    Substitution,
    domination_certificate,
    dump_presentation,
    extend_scalars,
    hat_generator,
    is_mv_generated,
    is_mv_preserving,
    l_generated_witness,
    load_presentation,
    load_substitution,
    mv_generator,
    presentation_of,
    zero_set
)
from src.formula.service import parse
from src.geometry.service import RationalPolyhedron, Simplex, polyhedron_equal
from src.pwl.service import CoefficientClass, PwlFunction, compile_formula, pwl_equal

F = Fraction
HALF = F(1, 2)


def interval(a, b):
    return RationalPolyhedron(1, (Simplex(((F(a),), (F(b),))),))


def test_zero_set_examples(compiled):
    """¬v1 vanishes at 1 and ¬(v1 ⊕ v1) on [1/2,1]."""
    assert polyhedron_equal(zero_set(compiled("~v1")), RationalPolyhedron(1, (Simplex(((F(1),),)),)))
    assert polyhedron_equal(zero_set(compiled("~(v1 + v1)")), interval(HALF, 1))
    assert zero_set(compiled("eta[1/2]")).is_empty


def test_hat_generator_examples(compiled):
    """The point {1} gives 1 - x and [1/2,1] gives 1 - 2x then 0."""
    assert pwl_equal(hat_generator(RationalPolyhedron(1, (Simplex(((F(1),),)),))), compiled("~v1"))
    assert pwl_equal(hat_generator(interval(HALF, 1)), compiled("~(v1 + v1)"))


def test_hat_generator_extremes():
    """The cube presents the zero function and the empty polyhedron the constant 1."""
    assert pwl_equal(hat_generator(RationalPolyhedron.cube(2)), PwlFunction.constant(2, F(0)))
    assert pwl_equal(hat_generator(RationalPolyhedron(2)), PwlFunction.constant(2, F(1)))


@pytest.mark.parametrize("simplices", [
    (Simplex(((F(0), F(0)), (F(1), F(1)))),),
    (Simplex(((HALF, HALF),)),),
    (Simplex(((F(0), F(0)), (HALF, F(0)), (F(0), HALF))), Simplex(((F(1), F(0)), (F(1), F(1))))),
    (Simplex(((F(1, 3), F(0)), (F(1), F(2, 3)))),),
])
def test_presentation_round_trip(simplices):
    """zero_set(presentation_of(P)) is P."""
    polyhedron = RationalPolyhedron(2, simplices)
    presentation = presentation_of(polyhedron)
    assert presentation.algebra == AlgebraClass.DMV
    assert polyhedron_equal(zero_set(presentation), polyhedron)


def test_mv_presentation_has_integer_generator():
    """MV presentations carry an integer-coefficient generator with the same zero set."""
    polyhedron = RationalPolyhedron(2, (Simplex(((F(1, 3), F(0)), (F(1), F(2, 3)))),))
    presentation = presentation_of(polyhedron, AlgebraClass.MV)
    assert presentation.generator.coefficient_class == CoefficientClass.INTEGER
    assert polyhedron_equal(zero_set(presentation), polyhedron)


def test_mv_generator_examples(compiled):
    """x/2 needs k = 2 and (1 - x)/3 needs k = 3."""
    half = mv_generator(compiled("delta[1/2] v1"))
    assert half.multiplier == 2
    assert pwl_equal(half.witness, compiled("v1"))
    assert half.certificate.valid

    third = mv_generator(compiled("delta[1/3] ~v1"))
    assert third.multiplier == 3
    assert pwl_equal(third.witness, compiled("~v1"))


def test_domination_certificate_rejects_wrong_witnesses(compiled):
    """Each check of the certificate fails on its own bad witness."""
    x = compiled("v1")
    assert domination_certificate(x, compiled("v1 + v1"), 2).valid

    doubled = domination_certificate(x, compiled("v1 + v1"), 1)
    assert doubled.source_below_witness and doubled.zero_sets_equal
    assert not doubled.witness_below_multiple
    assert not doubled.valid

    one = domination_certificate(x, PwlFunction.constant(1, F(1)), 3)
    assert one.source_below_witness
    assert not one.witness_below_multiple
    assert not one.zero_sets_equal

    smaller = domination_certificate(x, compiled("delta[1/2] v1"), 1)
    assert not smaller.source_below_witness
    assert smaller.witness_below_multiple


def test_integer_generator_is_its_own_witness(compiled):
    """Integer functions need no multiplier."""
    result = mv_generator(compiled("v1 + v2"))
    assert result.multiplier == 1
    assert pwl_equal(result.witness, result.source)


def test_is_mv_generated_exact(compiled):
    """Exact DMV presentations are MV-generated."""
    report = is_mv_generated(Presentation(AlgebraClass.DMV, 1, compiled("delta[1/2] v1")))
    assert report.verdict == GenerationVerdict.YES
    assert report.generator.multiplier == 2


def test_is_mv_generated_real_is_unknown(registry):
    """Distinct envelopes leave the question open at their index."""
    generator = compile_formula(parse("delta[sqrt2_over_2] v1", registry), precision=8)
    report = is_mv_generated(Presentation(AlgebraClass.RMV, 1, generator))
    assert report.verdict == GenerationVerdict.UNKNOWN
    assert report.enclosure.precision == 8
    assert polyhedron_equal(report.enclosure.outer, RationalPolyhedron(1, (Simplex(((F(0),),)),)))


def test_presentation_checks(compiled, registry):
    """Envelope generators need RMV and MV needs integer coefficients."""
    generator = compile_formula(parse("delta[sqrt2_over_2] v1", registry), precision=4)
    with pytest.raises(ValidationError):
        Presentation(AlgebraClass.DMV, 1, generator)
    with pytest.raises(ValidationError):
        Presentation(AlgebraClass.MV, 1, compiled("delta[1/2] v1"))


def test_extend_scalars(compiled):
    """Extension keeps the generator; narrowing is rejected."""
    presentation = Presentation(AlgebraClass.MV, 1, compiled("~v1"))
    extended = extend_scalars(presentation, AlgebraClass.RMV)
    assert extended.algebra == AlgebraClass.RMV
    assert polyhedron_equal(zero_set(extended), zero_set(presentation))
    with pytest.raises(ValidationError):
        extend_scalars(extended, AlgebraClass.DMV)


def test_mv_preservation():
    """A halving image breaks preservation; halves summed back do not."""
    report = is_mv_preserving(Substitution.from_mapping({1: parse("v1 + v2"), 2: parse("delta[1/2] v1")}))
    assert not report.preserving
    assert report.offender == 2
    assert report.classes == {1: CoefficientClass.INTEGER, 2: CoefficientClass.RATIONAL}

    report = is_mv_preserving(Substitution.from_mapping({1: parse("delta[1/2] v1 + delta[1/2] v1")}))
    assert report.preserving
    assert report.offender is None


def test_substitution_must_be_total():
    """Gaps between v1 and the largest source variable are rejected."""
    with pytest.raises(ValidationError):
        Substitution.from_mapping({1: parse("v1"), 3: parse("v2")})
    with pytest.raises(ValidationError):
        Substitution.from_mapping({})


def test_l_generated_witness():
    """Δ_{1/3}(v1 ⊕ v2) is generated by v1 ⊕ v2 with k = 3."""
    result = l_generated_witness(parse("delta[1/3] (v1 + v2)"))
    assert result.multiplier == 3
    assert pwl_equal(result.witness, compile_formula(parse("v1 + v2")))


def test_l_generated_witness_rejects_real(registry):
    """RL formulas go through the enclosure path."""
    with pytest.raises(UnsupportedClassError):
        l_generated_witness(parse("delta[sqrt2_over_2] v1", registry))


def test_presentation_files(compiled):
    """Presentations load from formula text and dump as PWL."""
    presentation = load_presentation({"class": "DMV", "n": 1, "generator": "delta[1/2] v1"})
    assert presentation.is_exact
    dumped = dump_presentation(presentation)
    assert dumped["class"] == "DMV"
    assert pwl_equal(load_presentation(dumped).generator, compiled("delta[1/2] v1"))
    with pytest.raises(ValidationError):
        load_presentation({"class": "BL", "n": 1, "generator": "v1"})


def test_substitution_files():
    """Keys are variables, values formula strings."""
    substitution = load_substitution({"v1": "v1 + v2", "v2": "~v1"})
    assert substitution.source_arity == 2
    assert substitution.target_arity == 2
    with pytest.raises(ValidationError):
        load_substitution({"x1": "v1"})
