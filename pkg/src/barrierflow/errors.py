from typing import List, Optional


class BarrierFlowError(Exception):
    """Base class for every error raised by barrierflow."""


class DimensionError(BarrierFlowError, ValueError):
    """Raised when tensor or network shapes do not agree."""


class NotPDError(BarrierFlowError, ValueError):
    """Raised when a symmetric factorization meets a non-positive pivot.

    Attributes:
        pivot_deficit: Magnitude of the most negative pivot (0 when the
            smallest pivot is exactly zero)
    """

    def __init__(self, message: str, pivot_deficit: float = 0.0) -> None:
        super().__init__(message)
        self.pivot_deficit = pivot_deficit


class ActionBoundsError(BarrierFlowError, ValueError):
    """Raised when an action leaves the admissible input interval."""


class CheckpointError(BarrierFlowError):
    """Raised for corrupt, truncated or version-mismatched checkpoint files."""


class EnvironmentMismatchError(BarrierFlowError):
    """Raised when artifacts built for different environments are combined."""


class DivergenceError(BarrierFlowError, RuntimeError):
    """Raised when a loss or gradient becomes non-finite."""


class ConfigError(BarrierFlowError, ValueError):
    """Raised when a run configuration fails validation.

    Attributes:
        fields: One ``"path.to.field: message"`` entry per offending field
    """

    def __init__(self, message: str, fields: Optional[List[str]] = None) -> None:
        self.fields = fields or []
        detail = "; ".join(self.fields)
        super().__init__(f"{message}: {detail}" if detail else message)


class DatasetFormatError(BarrierFlowError, ValueError):
    """Raised when an exported dataset index or frame blob is inconsistent."""
