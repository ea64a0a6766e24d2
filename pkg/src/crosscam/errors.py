"""Exception hierarchy shared by all modules.

Three categories map onto the CLI exit codes:

    2  ParseError           malformed input text (bad line, bad JSON, bad key)
    3  ValidationError      well-formed input that violates an invariant
    4  DegenerateDataError  data too empty or degenerate for the operation
"""


class CrosscamError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ParseError(CrosscamError):
    exit_code = 2

    def __init__(self, message: str, *, source: str | None = None,
                 line: int | None = None):
        prefix = ""
        if source is not None:
            prefix += f"{source}:"
        if line is not None:
            prefix += f"line {line}: "
        elif source is not None:
            prefix += " "
        super().__init__(prefix + message)
        self.source = source
        self.line = line


class SchemaError(ParseError):
    """An NDJSON record does not match the observation schema."""

    def __init__(self, message: str, *, record: int | None = None, **kw):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message, **kw)
        self.record = record


class ValidationError(CrosscamError):
    exit_code = 3


class SelfLoopError(ValidationError):
    pass


class UnknownCameraError(ValidationError):
    pass


class DuplicateObservationError(ValidationError):
    pass


class ShapeMismatchError(ValidationError):
    pass


class ZeroPartError(ValidationError):
    pass


class InvalidConfigError(ValidationError):
    pass


class DegenerateDataError(CrosscamError):
    exit_code = 4


class UndefinedRowError(DegenerateDataError):
    """A transition row has no observed mass and no smoothing to fall back on."""


class EmptyGalleryError(DegenerateDataError):
    pass


class DegenerateSplitError(DegenerateDataError):
    pass
