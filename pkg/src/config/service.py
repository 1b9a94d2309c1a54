"""
Engine configuration.

Flat YAML keys are mapped onto nested dataclasses; ``${VAR}`` values are
expanded from the environment (a ``.env`` file is honoured). Command-line
flags override the loaded values.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from ..core.abstractions import ConfigurationError, IConfigurationService, ValidationError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

MIN_SUPPORTED_DIMENSION = 4


@dataclass
class PrecisionConfig:
    """Precision index defaults for real scalars."""
    default_index: int = 20
    audit_depth: int = 32


@dataclass
class ComplexConfig:
    """Limits on simplicial complexes."""
    cell_cap: int = 1_000_000
    max_dimension: int = 6


@dataclass
class OutputConfig:
    """Report output settings."""
    format: str = "json"
    validate_schemas: bool = True
    schema_dir: str = ""


@dataclass
class SelftestConfig:
    """Seed and corpus sizes of the self-test suites."""
    seed: int = 7
    axiom_instances: int = 50
    pavelka_formulas: int = 200
    oracle_formulas: int = 100
    oracle_points: int = 10
    bookkeeping_pairs: int = 100
    integral_formulas: int = 50
    sandwich_max_index: int = 30
    limit_upto: int = 30
    duality_polyhedra: int = 50
    mvgen_generators: int = 100
    consequence_checks: int = 100
    max_depth: int = 5
    max_arity: int = 3


@dataclass
class EngineConfig:
    """Main engine configuration."""
    precision: PrecisionConfig = field(default_factory=PrecisionConfig)
    complex: ComplexConfig = field(default_factory=ComplexConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    selftest: SelftestConfig = field(default_factory=SelftestConfig)

    # Path of a `name = expr` table of computable reals
    scalar_registry: str = ""
    verbose_logging: bool = False

    def __post_init__(self):
        """Normalize free-form values."""
        self.output.format = str(self.output.format).lower()


class ConfigurationService(IConfigurationService):
    """Service for managing engine configuration."""

    def load_config(self, config_path: str) -> EngineConfig:
        """
        Load configuration from a YAML file.

        Args:
            config_path: Path to configuration file

        Returns:
            Loaded configuration object; defaults when the file does not exist

        Raises:
            ConfigurationError: If the file cannot be read or parsed
        """
        if not os.path.exists(config_path):
            logger.warning("config file not found: %s; using defaults", config_path)
            return EngineConfig()
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                raw_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML syntax in {config_path}: {e}")
        except OSError as e:
            raise ConfigurationError(f"Failed to load configuration: {e}")
        if not isinstance(raw_config, dict):
            raise ConfigurationError(f"{config_path} must hold a mapping of settings")

        # Expand environment variables
        raw_config = self._expand_env_vars(raw_config)

        try:
            return self._convert_to_config_object(raw_config)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid value in {config_path}: {e}")

    def save_config(self, config: EngineConfig, config_path: str) -> None:
        """
        Save configuration to a commented YAML file.

        Args:
            config: Configuration object to save
            config_path: Path to save configuration file
        """
        try:
            config_dict = self._convert_to_dict(config)
            with open(config_path, 'w', encoding='utf-8') as f:
                self._write_formatted_yaml(f, config_dict)
        except OSError as e:
            raise ConfigurationError(f"Failed to save configuration: {e}")

    def validate_config(self, config: EngineConfig) -> bool:
        """
        Validate configuration object.

        Args:
            config: Configuration to validate

        Returns:
            True if valid

        Raises:
            ValidationError: Listing every problem found
        """
        errors = []

        if config.precision.default_index < 0:
            errors.append("precision_index must be >= 0")
        if config.precision.audit_depth < 0:
            errors.append("audit_depth must be >= 0")
        if config.complex.cell_cap < 1:
            errors.append("cell_cap must be >= 1")
        if config.complex.max_dimension < MIN_SUPPORTED_DIMENSION:
            errors.append(f"max_dimension must be >= {MIN_SUPPORTED_DIMENSION}")
        if config.output.format not in ("json", "csv"):
            errors.append(f"output_format must be json or csv, got {config.output.format!r}")

        suite_sizes = {name: value for name, value in vars(config.selftest).items() if name != 'seed'}
        for name, value in suite_sizes.items():
            if value < 1:
                errors.append(f"{name} must be positive")

        if errors:
            raise ValidationError("Configuration validation failed:\n" + "\n".join(f"- {error}" for error in errors))

        return True

    def _expand_env_vars(self, data: Any) -> Any:
        """Recursively expand environment variables in configuration."""
        if isinstance(data, dict):
            return {key: self._expand_env_vars(value) for key, value in data.items()}
        elif isinstance(data, list):
            return [self._expand_env_vars(item) for item in data]
        elif isinstance(data, str) and data.startswith("${") and data.endswith("}"):
            env_var = data[2:-1]
            return os.getenv(env_var, "")
        else:
            return data

    def _convert_to_config_object(self, raw_config: Dict[str, Any]) -> EngineConfig:
        """Convert raw configuration dictionary to structured config object."""
        defaults = SelftestConfig()
        selftest_config = SelftestConfig(**{
            name: int(raw_config.get('selftest_seed' if name == 'seed' else name, default))
            for name, default in vars(defaults).items()
        })

        precision_config = PrecisionConfig(
            default_index=int(raw_config.get('precision_index', 20)),
            audit_depth=int(raw_config.get('audit_depth', 32))
        )

        complex_config = ComplexConfig(
            cell_cap=int(raw_config.get('cell_cap', 1_000_000)),
            max_dimension=int(raw_config.get('max_dimension', 6))
        )

        output_config = OutputConfig(
            format=raw_config.get('output_format', 'json'),
            validate_schemas=bool(raw_config.get('validate_schemas', True)),
            schema_dir=raw_config.get('schema_dir', '') or ''
        )

        return EngineConfig(
            precision=precision_config,
            complex=complex_config,
            output=output_config,
            selftest=selftest_config,
            scalar_registry=raw_config.get('scalar_registry', '') or '',
            verbose_logging=bool(raw_config.get('verbose_logging', False))
        )

    def _convert_to_dict(self, config: EngineConfig) -> Dict[str, Any]:
        """Convert configuration object to dictionary for serialization."""
        config_dict: Dict[str, Any] = {
            # Precision Settings
            'precision_index': config.precision.default_index,
            'audit_depth': config.precision.audit_depth,

            # Complex Settings
            'cell_cap': config.complex.cell_cap,
            'max_dimension': config.complex.max_dimension,

            # Output Settings
            'output_format': config.output.format,
            'validate_schemas': config.output.validate_schemas,
            'schema_dir': config.output.schema_dir,

            'scalar_registry': config.scalar_registry,
            'verbose_logging': config.verbose_logging,
        }
        for name, value in vars(config.selftest).items():
            config_dict['selftest_seed' if name == 'seed' else name] = value
        return config_dict

    def _write_formatted_yaml(self, file, config_dict: Dict[str, Any]) -> None:
        """Write configuration with custom formatting and comments."""
        def scalar(value: Any) -> str:
            if isinstance(value, bool):
                return "true" if value else "false"
            if isinstance(value, str):
                return f"\"{value}\""
            return str(value)

        file.write("# Lukasiewicz PWL engine configuration\n\n")

        file.write("# Precision Settings\n")
        file.write(f"precision_index: {scalar(config_dict['precision_index'])}  # enclosure index k for real scalars\n")
        file.write(f"audit_depth: {scalar(config_dict['audit_depth'])}\n\n")

        file.write("# Complex Settings\n")
        file.write(f"cell_cap: {scalar(config_dict['cell_cap'])}\n")
        file.write(f"max_dimension: {scalar(config_dict['max_dimension'])}\n\n")

        file.write("# Output Settings\n")
        for key in ('output_format', 'validate_schemas', 'schema_dir'):
            file.write(f"{key}: {scalar(config_dict[key])}\n")
        file.write("\n")

        file.write("# Scalars\n")
        file.write(f"scalar_registry: {scalar(config_dict['scalar_registry'])}  # name = expr table\n")
        file.write(f"verbose_logging: {scalar(config_dict['verbose_logging'])}\n\n")

        file.write("# Self-test Suites\n")
        for name in vars(SelftestConfig()):
            key = 'selftest_seed' if name == 'seed' else name
            file.write(f"{key}: {scalar(config_dict[key])}\n")


def create_default_config_file(output_path: str = "config.yaml") -> None:
    """
    Create a default configuration file.

    Args:
        output_path: Path where to create the config file
    """
    ConfigurationService().save_config(EngineConfig(), output_path)
    logger.info("created default configuration: %s", output_path)


def load_config(config_path: Optional[str] = None, validate: bool = True) -> EngineConfig:
    """
    Load configuration from file.

    Args:
        config_path: Path to configuration file
        validate: Whether to validate the loaded configuration

    Returns:
        Loaded configuration object
    """
    if config_path is None:
        config_path = "config.yaml"

    config_service = ConfigurationService()
    config = config_service.load_config(config_path)

    if validate:
        config_service.validate_config(config)

    return config
