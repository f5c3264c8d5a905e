"""Exception hierarchy shared by every module in the package."""


class SparsError(Exception):
    """Base class for all package errors."""


class RangeError(SparsError, ValueError):
    """An index, lag or sample length falls outside its admissible range."""


class ShapeError(SparsError, ValueError):
    """Array dimensions do not agree."""


class DegenerateInputError(SparsError, ValueError):
    """Input carries no usable information (zero variance, zero vector)."""


class RankDeficiencyError(SparsError, ValueError):
    """Thresholded rank of a matrix is zero."""


class TrainingError(SparsError, RuntimeError):
    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class DivergenceError(SparsError, RuntimeError):
    def __init__(self, message, step):
        super().__init__(f"{message} (step {step})")
        self.step = step


class StageError(SparsError):
    """Wraps an error raised inside one stage of the fitting pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class CsvParseError(SparsError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column


class ModelFormatError(SparsError, ValueError):
    """Model file is truncated, malformed or missing fields."""


class ModelVersionError(ModelFormatError):
    """Model file declares a format version this release cannot read."""
