"""
Core abstractions and interfaces for the Łukasiewicz PWL engine.

This module defines the enums, result containers, service interfaces and
the exception hierarchy shared by every area of the engine.
"""

from abc import ABC, abstractmethod
from typing import Dict, Any, Optional
from dataclasses import dataclass, field
from enum import Enum


class Verb(Enum):
    """Enumeration of supported command-line verbs."""
    EVAL = "eval"
    TRUTH_DEGREE = "truth-degree"
    PROVABILITY_DEGREE = "provability-degree"
    UNIT_NORM = "unit-norm"
    INTEGRAL = "integral"
    CONSEQUENCE = "consequence"
    CONSISTENT = "consistent"
    LIMIT_CHECK = "limit-check"
    SANDWICH = "sandwich"
    APPROX = "approx"
    ZEROSET = "zeroset"
    PRESENT = "present"
    MVGEN = "mvgen"
    EXTEND = "extend"
    SUBST_CHECK = "subst-check"
    SELFTEST = "selftest"


class OutputFormat(Enum):
    """Report serialization formats."""
    JSON = "json"
    CSV = "csv"


class ProcessingStatus(Enum):
    """Enumeration of processing statuses."""
    COMPLETED = "completed"
    FAILED = "failed"


class ExitCode:
    """Process exit codes reported by the command-line front end."""
    OK = 0
    VALIDATION = 1
    CELL_CAP = 2
    INVARIANT = 3


@dataclass
class JobSpec:
    """One batch invocation of the engine."""
    verb: Verb
    expression: Optional[str] = None
    input_path: Optional[str] = None
    precision: int = 20
    output_format: OutputFormat = OutputFormat.JSON
    cell_cap: int = 1_000_000
    seed: int = 7
    dump_pwl: Optional[str] = None
    output_path: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.precision < 0:
            raise ValidationError(f"precision index must be >= 0, got {self.precision}")
        if self.cell_cap < 1:
            raise ValidationError(f"cell cap must be >= 1, got {self.cell_cap}")


@dataclass
class ProcessingResult:
    """Result of a processing operation."""
    status: ProcessingStatus
    payload: Optional[Dict[str, Any]] = None
    error_message: Optional[str] = None
    metadata: Dict[str, Any] = None
    exit_code: int = ExitCode.OK

    def __post_init__(self):
        if self.metadata is None:
            self.metadata = {}

    @property
    def success(self) -> bool:
        """Check if the operation was successful."""
        return self.status == ProcessingStatus.COMPLETED


class IConfigurationService(ABC):
    """Abstract base class for configuration services."""

    @abstractmethod
    def load_config(self, config_path: str) -> Any:
        """Load configuration from file."""
        pass

    @abstractmethod
    def save_config(self, config: Any, config_path: str) -> None:
        """Save configuration to file."""
        pass

    @abstractmethod
    def validate_config(self, config: Any) -> bool:
        """Validate configuration."""
        pass


class IReportWriter(ABC):
    """Abstract base class for report serializers."""

    @abstractmethod
    def render(self, report_name: str, payload: Dict[str, Any]) -> str:
        """Render one report to text."""
        pass


class IUserInterface(ABC):
    """Abstract base class for user interfaces."""

    @abstractmethod
    def display_error(self, message: str) -> None:
        """Display error message."""
        pass

    @abstractmethod
    def display_success(self, message: str) -> None:
        """Display success message."""
        pass

    @abstractmethod
    def display_warning(self, message: str) -> None:
        """Display warning message."""
        pass

    @abstractmethod
    def display_info(self, message: str) -> None:
        """Display info message."""
        pass


class BusinessLogicError(Exception):
    """Base exception for business logic errors."""
    pass


class ValidationError(BusinessLogicError):
    """Exception for validation errors."""
    pass


class FormulaSyntaxError(ValidationError):
    """Formula source text does not conform to the grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ScalarRangeError(ValidationError):
    """Scalar literal outside [0,1] or otherwise unusable."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class DimensionError(ValidationError):
    """Ambient dimensions or arities do not match."""
    pass


class UnsupportedClassError(ValidationError):
    """Input of a signature class the requested path cannot handle."""
    pass


class ConfigurationError(BusinessLogicError):
    """Exception for configuration errors."""
    pass


class ProcessingError(BusinessLogicError):
    """Exception for computation errors."""
    pass


class CellCapExceeded(ProcessingError):
    """A refinement produced more cells than the configured cap."""

    def __init__(self, cells: int, cap: int):
        super().__init__(f"cell count {cells} exceeds cap {cap}")
        self.cells = cells
        self.cap = cap


class InvariantViolation(ProcessingError):
    """An internal invariant failed; never expected on valid input."""
    pass


class SequenceError(ProcessingError):
    """A formula sequence generator failed at some index."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"sequence generator failed at index {index}: {cause}")
        self.index = index
