import pytest

from src.config.service import SelftestConfig
from src.core.abstractions import ValidationError
from src.selftest.service import SUITE_ORDER, SelftestService


@pytest.mark.parametrize("name", SUITE_ORDER)
def test_suite_passes_at_reduced_size(small_suites, name):
    """Every suite passes on a small corpus."""
    report = SelftestService(small_suites).run(name)
    assert report.passed, report.failures
    assert sum(report.counts.values()) > 0


def test_suites_are_reproducible(small_suites):
    """The same seed gives the same counts."""
    first = SelftestService(small_suites, seed=13).run("oracle").to_json()
    second = SelftestService(small_suites, seed=13).run("oracle").to_json()
    assert first == second
    assert first["suite"] == "oracle"


def test_unknown_suite(small_suites):
    """Suite names are checked."""
    with pytest.raises(ValidationError):
        SelftestService(small_suites).run("nonsense")


@pytest.mark.slow
@pytest.mark.parametrize("name", SUITE_ORDER)
def test_suite_passes_at_full_size(name):
    """Full corpus sizes from the default configuration."""
    report = SelftestService(SelftestConfig()).run(name)
    assert report.passed, report.failures
