"""Exception hierarchy shared by every vsem module."""


class VsemError(Exception):
    """Root of all errors raised by vsem."""


class ConfigError(VsemError, ValueError):
    pass


# --- Mesh files ---
class MeshFormatError(VsemError, ValueError):
    """An NSC file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeaderError(MeshFormatError):
    pass


class IndexOutOfRangeError(MeshFormatError):
    pass


class DimensionMismatchError(MeshFormatError):
    pass


# --- Mesh validity ---
class MeshValidationError(VsemError, ValueError):
    pass


class DegenerateSimplexError(MeshValidationError):
    def __init__(self, message: str, simplex_id: int | None = None):
        self.simplex_id = simplex_id
        super().__init__(message)


class NonManifoldError(MeshValidationError):
    pass


class TopologyError(MeshValidationError):
    pass


class CollapsedSimplexError(VsemError, ArithmeticError):
    """An image simplex has (numerically) zero volume."""

    def __init__(self, simplex_id: int, message: str | None = None):
        self.simplex_id = int(simplex_id)
        super().__init__(message or f"image of simplex {self.simplex_id} is collapsed")


# --- Numerics ---
class SingularSystemError(VsemError, ArithmeticError):
    def __init__(self, message: str, rank_deficiency: int | None = None):
        self.rank_deficiency = rank_deficiency
        if rank_deficiency is not None:
            message = f"{message} (estimated rank deficiency {rank_deficiency})"
        super().__init__(message)


class PoleError(VsemError, ValueError):
    """Stereographic projection of the projection pole."""


class RankDeficientBoundaryError(VsemError, ValueError):
    pass


class EmptyInteriorError(VsemError, ValueError):
    """No free vertex is left inside the SEM interior radius."""


class PipelineStageError(VsemError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
