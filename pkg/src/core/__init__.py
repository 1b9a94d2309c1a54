"""Core abstractions and interfaces."""

from .abstractions import (
    IConfigurationService,
    IReportWriter,
    IUserInterface,
    Verb,
    OutputFormat,
    JobSpec,
    ExitCode,
    ProcessingResult,
    ProcessingStatus,
    BusinessLogicError,
    ValidationError,
    FormulaSyntaxError,
    ScalarRangeError,
    DimensionError,
    UnsupportedClassError,
    ConfigurationError,
    ProcessingError,
    CellCapExceeded,
    InvariantViolation,
    SequenceError
)

from .utils import (
    RationalCodec,
    PathManager,
    PerformanceTimer
)

__all__ = [
    'IConfigurationService',
    'IReportWriter',
    'IUserInterface',
    'Verb',
    'OutputFormat',
    'JobSpec',
    'ExitCode',
    'ProcessingResult',
    'ProcessingStatus',
    'BusinessLogicError',
    'ValidationError',
    'FormulaSyntaxError',
    'ScalarRangeError',
    'DimensionError',
    'UnsupportedClassError',
    'ConfigurationError',
    'ProcessingError',
    'CellCapExceeded',
    'InvariantViolation',
    'SequenceError',
    'RationalCodec',
    'PathManager',
    'PerformanceTimer'
]
