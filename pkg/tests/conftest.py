"""Shared fixtures for the engine tests."""

from fractions import Fraction

import pytest

from src.config.service import SelftestConfig
from src.formula.service import parse
from src.pwl.service import compile_formula
from src.scalar.service import SQRT2_OVER_2, load_registry


@pytest.fixture
def registry():
    """Built-in scalar handles, sqrt2_over_2 included."""
    return load_registry(None)


@pytest.fixture
def sqrt2_over_2():
    return SQRT2_OVER_2


@pytest.fixture
def compiled():
    """Compile formula text to its exact term function."""
    def build(text, dim=None):
        return compile_formula(parse(text), dim=dim)
    return build


@pytest.fixture
def half():
    return Fraction(1, 2)


@pytest.fixture
def small_suites():
    """Reduced suite sizes that keep default test runs quick."""
    return SelftestConfig(
        seed=7,
        axiom_instances=5,
        pavelka_formulas=10,
        oracle_formulas=10,
        oracle_points=4,
        bookkeeping_pairs=10,
        integral_formulas=8,
        sandwich_max_index=8,
        limit_upto=8,
        duality_polyhedra=4,
        mvgen_generators=10,
        consequence_checks=8,
        max_depth=3,
        max_arity=2,
    )


@pytest.fixture
def config_file(tmp_path):
    """Write a config.yaml with the given body and return its path."""
    def write(body):
        path = tmp_path / "config.yaml"
        path.write_text(body, encoding="utf-8")
        return str(path)
    return write
