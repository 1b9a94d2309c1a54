from fractions import Fraction

import pytest

from src.core.abstractions import FormulaSyntaxError, ScalarRangeError
from src.formula.service import (
    ChangDist,
    Const1,
    Delta,
    Equiv,
    Eta,
    FormulaGenerator,
    Imp,
    Nabla,
    Neg,
    Oplus,
    SignatureClass,
    Var,
    arity,
    classify,
    desugar,
    div_by,
    evaluate,
    ntimes,
    parse,
    scalar_count,
    substitute,
    to_text
)


def test_parse_negation():
    """A single connective parses to its node."""
    assert parse("~v1") == Neg(Var(1))


def test_parse_scalar_connective():
    """nabla[r] binds tighter than implication inside parentheses."""
    assert parse("nabla[1/2](v1 -> v2)") == Nabla(Fraction(1, 2), Imp(Var(1), Var(2)))


def test_eta_means_delta_of_one():
    """eta[r] desugars to delta[r] applied to the constant 1."""
    eta = parse("eta[2/3]")
    assert eta == Eta(Fraction(2, 3))
    assert desugar(eta) == desugar(Delta(Fraction(2, 3), Const1()))
    assert evaluate(eta, (Fraction(1, 5),)) == Fraction(2, 3)


def test_infix_precedence_and_associativity():
    """Sums associate left; implication associates right and binds loosest."""
    assert parse("v1 + v2 + v3") == Oplus(Oplus(Var(1), Var(2)), Var(3))
    assert parse("v1 -> v2 -> v3") == Imp(Var(1), Imp(Var(2), Var(3)))
    assert parse("v1 <-> v2") == Equiv(Var(1), Var(2))
    assert parse("dist(v1, ~v1)") == ChangDist(Var(1), Neg(Var(1)))


def test_syntax_error_reports_position():
    """Malformed text raises with a line and column."""
    with pytest.raises(FormulaSyntaxError) as info:
        parse("v1 +")
    assert info.value.line == 1
    assert info.value.column >= 1


def test_truncated_input_points_past_the_end():
    """Running out of input reports the column after the last character."""
    for text in ("v1 +", "(v1 . v2", "~"):
        with pytest.raises(FormulaSyntaxError) as info:
            parse(text)
        assert (info.value.line, info.value.column) == (1, len(text) + 1)
    with pytest.raises(FormulaSyntaxError) as info:
        parse("v1 ->\n  v2 +")
    assert (info.value.line, info.value.column) == (2, 7)
    with pytest.raises(FormulaSyntaxError) as info:
        parse("v1 ) v2")
    assert (info.value.line, info.value.column) == (1, 4)


def test_scalar_out_of_range():
    """Scalar literals outside [0,1] are rejected."""
    with pytest.raises(ScalarRangeError):
        parse("delta[3/2] v1")


def test_unknown_scalar_name():
    """Named scalars must come from the registry."""
    with pytest.raises(ScalarRangeError):
        parse("delta[tau] v1")


def test_named_scalar_makes_formula_real(registry):
    """A registry handle parses into a real scalar."""
    formula = parse("delta[sqrt2_over_2] v1", registry)
    assert classify(formula) == SignatureClass.RL


def test_evaluate_examples():
    """Reference evaluation of negation and truncated sum."""
    assert evaluate(Neg(Var(1)), (Fraction(1, 3),)) == Fraction(2, 3)
    assert evaluate(Oplus(Var(1), Var(1)), (Fraction(3, 4),)) == 1


def test_evaluate_real_formula_gives_enclosures(sqrt2_over_2):
    """RL evaluation returns a computable real enclosing the exact value."""
    value = evaluate(Delta(sqrt2_over_2, Var(1)), (Fraction(1),))
    lo, hi = value.approx(12)
    assert lo * lo <= Fraction(1, 2) <= hi * hi
    assert hi - lo <= Fraction(1, 2 ** 12)


def test_classify(sqrt2_over_2):
    """Signature follows the scalars present."""
    assert classify(Imp(Var(1), Var(2))) == SignatureClass.L
    assert classify(Delta(Fraction(1, 2), Var(1))) == SignatureClass.QL
    assert classify(Delta(sqrt2_over_2, Var(1))) == SignatureClass.RL


def test_printer_round_trip():
    """Printed formulas parse back to the same tree."""
    gen = FormulaGenerator(seed=11, max_depth=4, max_arity=3)
    for _ in range(40):
        formula = gen.formula()
        assert parse(to_text(formula)) == formula


def test_desugar_preserves_semantics():
    """Desugared formulas evaluate identically."""
    gen = FormulaGenerator(seed=3, max_depth=4, max_arity=2)
    for _ in range(30):
        formula = gen.formula()
        point = gen.point(2)
        assert evaluate(desugar(formula), point) == evaluate(formula, point)


def test_helpers():
    """Arity, scalar count, k-fold sums, division and substitution."""
    formula = parse("delta[1/2] v3 + eta[1/4]")
    assert arity(formula) == 3
    assert scalar_count(formula) == 2
    assert evaluate(ntimes(3, Var(1)), (Fraction(1, 4),)) == Fraction(3, 4)
    assert evaluate(div_by(2, Var(1)), (Fraction(1),)) == Fraction(1, 2)
    assert substitute(parse("v1 + v2"), {1: parse("~v2")}) == parse("~v2 + v2")


def test_generator_is_deterministic():
    """The same seed yields the same corpus."""
    first = FormulaGenerator(seed=7)
    second = FormulaGenerator(seed=7)
    assert [first.formula() for _ in range(10)] == [second.formula() for _ in range(10)]
