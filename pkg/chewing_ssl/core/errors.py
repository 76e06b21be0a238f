"""Exception hierarchy for Chewing SSL.

Every error raised for a rejected input derives from ChewingError, so the CLI
can turn it into a machine-readable report. Errors that correspond to an
invalid argument also derive from ValueError.
"""

from typing import Any, Dict, Optional


class ChewingError(Exception):
    """Base exception for all Chewing SSL errors.

    Attributes:
        message: Error message
        details: Extra context, serialized into CLI error reports
    """

    kind = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize ChewingError with details.

        Args:
            message: Error description
            details: Optional structured context
        """
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        """Return the error as a JSON-serializable report."""
        return {"error": self.kind, "message": self.message, "details": self.details}


class SignalError(ChewingError, ValueError):
    """Invalid filter design or signal operation."""

    kind = "signal_error"


class DatasetError(ChewingError, ValueError):
    """Invalid recording, split or dataset file."""

    kind = "dataset_error"


class AnnotationError(DatasetError):
    """Invalid row in an annotation CSV."""

    kind = "annotation_error"

    def __init__(self, message: str, row: int, path: Optional[str] = None) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}", {"row": row, "path": path})


class ShapeError(ChewingError, ValueError):
    """Tensor shapes are inconsistent with the kernel being evaluated."""

    kind = "shape_error"


class ArchitectureError(ChewingError, ValueError):
    """A model graph cannot be built, split or composed as requested."""

    kind = "architecture_error"


class WeightFileError(ChewingError):
    """A weight file is corrupted or written by an unsupported version."""

    kind = "weight_file_error"


class ObjectiveError(ChewingError, ValueError):
    """Invalid input to a loss function."""

    kind = "objective_error"


class OptimizerError(ChewingError, ValueError):
    """Invalid optimizer configuration or parameter/gradient mismatch."""

    kind = "optimizer_error"


class TrainingError(ChewingError, ValueError):
    """A training or evaluation run cannot be started with the given data."""

    kind = "training_error"


class PostprocessError(ChewingError, ValueError):
    """Invalid input to the chew/bout/meal aggregation rules."""

    kind = "postprocess_error"


class MetricsError(ChewingError, ValueError):
    """Invalid predictions, labels or confusion counts."""

    kind = "metrics_error"


class ConfigError(ChewingError, ValueError):
    """The run configuration failed validation."""

    kind = "config_error"


class ArtifactMissingError(ChewingError):
    """An upstream artifact a command depends on does not exist."""

    kind = "artifact_missing"

    def __init__(self, path: str, command: str) -> None:
        self.path = path
        self.command = command
        super().__init__(
            f"{path} not found, run `chewing-ssl {command}` first",
            {"path": path, "run_first": command},
        )
