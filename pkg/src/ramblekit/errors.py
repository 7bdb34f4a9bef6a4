"""Error taxonomy shared by the library, the HTTP service, and the CLI."""

from __future__ import annotations


class RamblekitError(Exception):
    """Base class for all library errors.

    ``details`` carries structured context (offending ids and the like) for
    the service error envelope.
    """

    code = "BadRequest"

    def __init__(self, message: str = "", details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class NotFoundError(RamblekitError):
    """A document, ramble, or proposal id does not exist."""

    code = "NotFound"


class ConflictError(RamblekitError):
    """The caller's revision no longer matches the document."""

    code = "Conflict"


class InvalidStateError(RamblekitError):
    """The operation is not legal in the ramble's current state."""

    code = "InvalidState"


class BadRequestError(RamblekitError):
    """Malformed arguments: bad index, empty text, unknown level, and so on."""

    code = "BadRequest"


class BackendError(RamblekitError):
    """A generation backend failed or returned unusable output."""

    code = "BackendFailure"


class StaleSummaryError(InvalidStateError):
    """An export needs cached summaries that are stale or missing."""

    def __init__(self, level: str, ramble_ids: list[str]):
        self.level = level
        self.ramble_ids = list(ramble_ids)
        ids = ", ".join(self.ramble_ids)
        super().__init__(
            f"no fresh {level} summary for rambles: {ids}",
            details={"level": level, "ramble_ids": self.ramble_ids},
        )
