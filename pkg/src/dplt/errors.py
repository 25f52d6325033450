"""Exception hierarchy shared by every dplt module."""


class DpltError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(DpltError, ValueError):
    pass


class DegenerateTriangle(GeometryError):
    pass


class CoincidentPoints(GeometryError):
    pass


class CoincidentCircles(GeometryError):
    pass


class UnstableGeometry(GeometryError):
    """Viewing geometry too close to parallel to build a prediction triangle."""


class InvalidGeometry(GeometryError):
    pass


class InvalidBeamwidth(DpltError, ValueError):
    pass


class NegativeFlight(DpltError, ValueError):
    """ToA earlier than ToD."""


class AmbiguousFix(DpltError):
    pass


class ParallelBearings(DpltError):
    pass


class BehindRay(DpltError):
    """Bearing rays only meet on the negative extension of at least one ray."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class CoverageGap(DpltError):
    """Fewer than two friendly nodes within range of the target."""


class ConfigError(DpltError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line


class EmptyRun(DpltError):
    pass


class IoError(DpltError, OSError):
    """An output could not be written."""


class MissingFile(IoError, FileNotFoundError):
    pass
