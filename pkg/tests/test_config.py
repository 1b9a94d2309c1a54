import pytest

from src.config.service import (
    ConfigurationService,
    EngineConfig,
    create_default_config_file,
    load_config
)
from src.core.abstractions import ConfigurationError, ValidationError


def test_missing_file_gives_defaults(tmp_path):
    """A missing config file is not an error."""
    config = load_config(str(tmp_path / "absent.yaml"))
    assert config == EngineConfig()
    assert config.precision.default_index == 20
    assert config.complex.max_dimension == 6


def test_flat_keys_map_onto_sections(config_file):
    """Flat YAML keys fill the nested sections."""
    config = load_config(config_file(
        "precision_index: 12\ncell_cap: 5000\noutput_format: CSV\nselftest_seed: 3\nlimit_upto: 9\n"))
    assert config.precision.default_index == 12
    assert config.complex.cell_cap == 5000
    assert config.output.format == "csv"
    assert config.selftest.seed == 3
    assert config.selftest.limit_upto == 9


def test_environment_expansion(config_file, monkeypatch):
    """${VAR} values are read from the environment."""
    monkeypatch.setenv("ENGINE_SCALARS", "scalars.txt")
    config = load_config(config_file("scalar_registry: ${ENGINE_SCALARS}\n"))
    assert config.scalar_registry == "scalars.txt"


def test_invalid_yaml(config_file):
    """Broken YAML is a configuration error."""
    with pytest.raises(ConfigurationError):
        load_config(config_file("cell_cap: [1, 2\n"))


def test_non_mapping_and_bad_values(config_file):
    """The file must hold a mapping of convertible values."""
    with pytest.raises(ConfigurationError):
        load_config(config_file("- just\n- a list\n"))
    with pytest.raises(ConfigurationError):
        load_config(config_file("cell_cap: lots\n"))


def test_validation_lists_every_problem(config_file):
    """All failing settings are reported together."""
    path = config_file("precision_index: -1\nmax_dimension: 2\noutput_format: xml\noracle_points: 0\n")
    with pytest.raises(ValidationError) as info:
        load_config(path)
    message = str(info.value)
    for fragment in ("precision_index", "max_dimension", "output_format", "oracle_points"):
        assert fragment in message
    assert load_config(path, validate=False).complex.max_dimension == 2


def test_save_and_reload(tmp_path):
    """A saved configuration loads back unchanged."""
    config = EngineConfig()
    config.precision.default_index = 8
    config.output.validate_schemas = False
    config.selftest.seed = 11
    path = str(tmp_path / "config.yaml")
    ConfigurationService().save_config(config, path)
    assert load_config(path) == config


def test_default_config_file(tmp_path):
    """The generated default file round-trips to the defaults."""
    path = str(tmp_path / "config.yaml")
    create_default_config_file(path)
    assert load_config(path) == EngineConfig()
