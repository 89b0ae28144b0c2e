"""Exception hierarchy. Each family carries the CLI exit code it maps to."""


class FloorlocError(Exception):
    exit_code = 1


class InputError(FloorlocError):
    """Malformed or invalid input files and parameters."""

    exit_code = 3


class ParseError(InputError):
    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(InputError):
    pass


class DuplicateFrame(ParseError):
    pass


class UnknownLabel(InputError):
    pass


class GeometryError(FloorlocError):
    exit_code = 4


class DegenerateCalibration(GeometryError):
    pass


class ProjectiveHorizon(GeometryError):
    pass


class NonPositiveDistance(GeometryError, ValueError):
    pass


class BehindCamera(GeometryError):
    pass


class CornerOutsideImage(GeometryError):
    pass


class FullyOccluded(GeometryError):
    pass


class InsufficientJoints(FloorlocError):
    """Fewer than two complementary-pair midpoints passed the threshold."""


class EvaluationError(FloorlocError):
    exit_code = 3


class EmptyGroundTruth(EvaluationError):
    pass


class EmptyInput(EvaluationError, ValueError):
    pass


class InsufficientData(EvaluationError):
    pass


class NoOverlap(EvaluationError):
    pass
