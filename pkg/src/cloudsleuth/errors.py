"""Exception hierarchy shared across the toolkit.

Grouped by error family; the CLI maps each family to a distinct exit code.
"""


class CloudSleuthError(Exception):
    """Base class for all toolkit errors."""


# --- input data errors (malformed files) ---

class FormatError(CloudSleuthError):
    """A telemetry file has a malformed row."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class MissingColumn(CloudSleuthError):
    """A required header column is absent."""


class ParseError(CloudSleuthError):
    """An ontology document is not well-formed."""


# --- semantic / configuration errors ---

class ValidationError(CloudSleuthError):
    """An ontology document violates a structural invariant."""


class UnknownScenario(CloudSleuthError):
    """Requested scenario name is not in the ontology."""

    def __init__(self, name: str, available: list[str]):
        self.name = name
        self.available = list(available)
        super().__init__(
            f"unknown scenario {name!r}; available scenarios: {self.available}"
        )


class MissingAttribute(CloudSleuthError):
    """A required prompt attribute was not supplied."""


class TypeMismatch(CloudSleuthError):
    """A supplied attribute value does not match its declared kind."""


class UnknownFeature(CloudSleuthError):
    """An explicitly selected feature key is not present."""


class EmptyInput(CloudSleuthError):
    """An operation that requires data received none."""


class EmptyColumn(CloudSleuthError):
    """A feature column has no observed values."""


class StatsMismatch(CloudSleuthError):
    """A matrix column has no corresponding statistics."""


class MissingFeature(CloudSleuthError):
    """A detection-rule feature is absent from the row under test."""


class WindowOutOfRange(CloudSleuthError):
    """An attack window falls outside the generated stream span."""


class LengthMismatch(CloudSleuthError):
    """Truth and prediction vectors have different lengths."""


# --- backend errors ---

class BackendError(CloudSleuthError):
    """Base class for classification-backend failures."""


class TransportError(BackendError):
    """HTTP transport failed after exhausting retries."""


class AuthError(BackendError):
    """Credential missing or rejected by the endpoint."""


class UnparseableResponse(BackendError):
    """Model response contained no recognizable label token."""


class BatchError(BackendError):
    """A batch classification aborted at a specific row."""

    def __init__(self, row_index: int, cause: Exception):
        self.row_index = row_index
        self.cause = cause
        super().__init__(f"row {row_index}: {cause}")
