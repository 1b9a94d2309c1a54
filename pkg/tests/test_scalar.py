from fractions import Fraction

import pytest

from src.core.abstractions import ScalarRangeError, ValidationError
from src.scalar.service import (
    CReal,
    complement,
    creal_of_rational,
    load_registry,
    parse_registry,
    product,
    sqrt_creal,
    truncated_diff
)


def test_embedded_rational_is_exact():
    """An embedded rational is its own enclosure at every index."""
    third = creal_of_rational(Fraction(1, 3))
    for k in range(41):
        assert third.approx(k) == (Fraction(1, 3), Fraction(1, 3))


@pytest.mark.parametrize("k", [1, 20])
def test_sqrt2_over_2_enclosures(sqrt2_over_2, k):
    """Enclosures of √2/2 have width at most 2^-k and contain the value."""
    lo, hi = sqrt2_over_2.approx(k)
    assert hi - lo <= Fraction(1, 2 ** k)
    assert lo * lo <= Fraction(1, 2) <= hi * hi


def test_enclosures_are_nested(sqrt2_over_2):
    """Lower ends never decrease and upper ends never increase."""
    for k in range(30):
        lo, hi = sqrt2_over_2.approx(k)
        next_lo, next_hi = sqrt2_over_2.approx(k + 1)
        assert lo <= next_lo <= next_hi <= hi


def test_perfect_square_collapses():
    """The square root of 1/4 becomes exact once bisection hits 1/2."""
    assert sqrt_creal(Fraction(1, 4)).approx(5) == (Fraction(1, 2), Fraction(1, 2))


def test_rational_operations():
    """Product, complement and truncated difference on rationals."""
    assert product(Fraction(1, 2), Fraction(2, 3)) == Fraction(1, 3)
    assert complement(Fraction(0)) == 1
    assert truncated_diff(Fraction(1, 2), Fraction(3, 4)) == 0


def test_real_product_encloses(sqrt2_over_2):
    """√2/2 · √2/2 is enclosed around 1/2 within the width schedule."""
    square = product(sqrt2_over_2, sqrt2_over_2)
    lo, hi = square.approx(10)
    assert lo <= Fraction(1, 2) <= hi
    assert hi - lo <= Fraction(1, 2 ** 10)


def test_wide_generator_is_rejected():
    """A generator missing the 2^-k schedule fails its audit."""
    with pytest.raises(ScalarRangeError):
        CReal(lambda k: (Fraction(0), Fraction(1)), name="wide")


def test_non_nested_generator_is_rejected():
    """Enclosures must shrink inside each other."""
    def jumping(k):
        if k % 2 == 0:
            return Fraction(1, 2), Fraction(1, 2)
        return Fraction(0), Fraction(1, 2 ** k)

    with pytest.raises(ScalarRangeError):
        CReal(jumping, name="jumping")


def test_parse_registry():
    """name = expr lines, comments and blank lines."""
    registry = parse_registry("a = sqrt(1/2)\n\nb = 1/3  # a third\n")
    assert sorted(registry) == ["a", "b"]
    assert registry["b"].approx(3) == (Fraction(1, 3), Fraction(1, 3))


@pytest.mark.parametrize("text", ["a 1/2", "1a = 1/2", "a = 1/2\na = 1/3", "a = 3/2"])
def test_parse_registry_rejects(text):
    """Malformed lines, bad names, duplicates and out-of-range values."""
    with pytest.raises(ValidationError):
        parse_registry(text)


def test_load_registry(tmp_path):
    """Files extend the built-in handles; missing files are reported."""
    path = tmp_path / "scalars.txt"
    path.write_text("quarter = 1/4\n", encoding="utf-8")
    registry = load_registry(str(path))
    assert {"sqrt2_over_2", "quarter"} <= set(registry)
    with pytest.raises(ValidationError):
        load_registry(str(tmp_path / "missing.txt"))


def test_audit_depth_bounds_the_checked_indices():
    """Only indices up to the audit depth are checked at construction."""
    def late_wide(k):
        if k < 10:
            return Fraction(0), Fraction(1, 2 ** k)
        return Fraction(0), Fraction(1)

    shallow = CReal(late_wide, name="late", audit_depth=4)
    assert shallow.audit_depth == 4
    with pytest.raises(ScalarRangeError):
        shallow.approx(10)
    with pytest.raises(ScalarRangeError):
        CReal(late_wide, name="late")


def test_registry_uses_the_audit_depth(tmp_path):
    """Registered reals and the built-in handle carry the requested depth."""
    path = tmp_path / "scalars.txt"
    path.write_text("root = sqrt(1/3)\nquarter = 1/4\n", encoding="utf-8")
    registry = load_registry(str(path), audit_depth=5)
    assert {real.audit_depth for real in registry.values()} == {5}
    assert parse_registry("a = sqrt(1/2)", audit_depth=3)["a"].audit_depth == 3
    assert load_registry(None)["sqrt2_over_2"].audit_depth == 32
