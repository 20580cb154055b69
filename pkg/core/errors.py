"""
Exception hierarchy shared by the numerical core and the CLI
"""
from typing import Any, Dict, Optional


class FairVolError(Exception):
    """Base class for every domain, data and numerical failure"""


class ParameterError(FairVolError, ValueError):
    """A parameter lies outside its documented range"""


class DomainError(FairVolError, ValueError):
    """A special function was evaluated outside its domain"""


class SingularityError(FairVolError):
    """A formula was evaluated at its removable singularity without limit handling"""


class QuadratureError(FairVolError):
    """Adaptive quadrature failed to reach the requested tolerance"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SimulationError(FairVolError):
    """A path generator could not produce a valid sample"""


class DataError(FairVolError):
    """Input data violates the expected schema or domain"""

    def __init__(self, message: str, line: Optional[int] = None, index: Optional[int] = None):
        super().__init__(message)
        self.line = line
        self.index = index


class EstimationError(FairVolError):
    """A rolling estimate is undefined at some observation"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class ConfigurationError(FairVolError):
    """Configuration is inconsistent with the data it is applied to"""


class DegenerateSampleError(FairVolError):
    """A statistic is undefined because the sample has no variation"""


class InsufficientSampleError(FairVolError):
    """Too few observations qualify for a statistic"""


class UsageError(FairVolError):
    """Command-line flags describe an invalid run"""
