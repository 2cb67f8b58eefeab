"""Exception types shared across the package.

Most errors subclass the closest builtin (ValueError, RuntimeError) so that
callers who do not care about the distinction can handle them generically.
"""


class GestureTeachError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(GestureTeachError, ValueError):
    """Two pixel grids that must share a shape do not."""


class ConfigError(GestureTeachError, ValueError):
    """A configuration value is out of range or names an unknown entry."""


class ArgumentError(GestureTeachError, ValueError):
    """An operation argument violates its precondition."""


class MalformedAnnotationError(GestureTeachError, ValueError):
    """A polygon annotation breaks the annotation invariants."""


class DatasetError(GestureTeachError, ValueError):
    """A dataset is empty or structurally unusable."""


class RecordValidationError(GestureTeachError, ValueError):
    """A single dataset record or sample failed validation; names the record."""


class SessionFormatError(GestureTeachError, ValueError):
    """A persisted session manifest is corrupt; names the offending field."""


class StateError(GestureTeachError, RuntimeError):
    """An operation was called in a session/model state that forbids it."""


class ConflictError(GestureTeachError, RuntimeError):
    """A mutation conflicts with existing state (duplicate label, second job)."""


class NotFoundError(GestureTeachError, KeyError):
    """A referenced session, job or resource does not exist."""


class CapabilityError(GestureTeachError, RuntimeError):
    """The model architecture cannot support the requested operation."""


class MappingError(GestureTeachError, ValueError):
    """Class labels of a foreign dataset cannot be mapped onto a model."""


class BackendInitError(GestureTeachError, RuntimeError):
    """A pluggable backend failed to initialize (e.g. missing weights file)."""


class InferenceError(GestureTeachError, RuntimeError):
    """A backend failed during inference; carries the frame source id."""

    def __init__(self, message: str, source_id: str = ""):
        super().__init__(message)
        self.source_id = source_id
