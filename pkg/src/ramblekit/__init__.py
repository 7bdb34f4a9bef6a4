"""Voice-first drafting toolkit.

Dictated text lands in small movable units called rambles. Each ramble keeps
its raw capture history, an extracted keyword set, and cached summaries at
fixed zoom levels, so a draft can be read at any length and reorganized by
semantic operations instead of manual retyping.
"""

from ramblekit.document import (
    Ramble,
    RambleDocument,
    RambleState,
    RawCapture,
    RespeakAction,
    RespeakSession,
    new_document,
)
from ramblekit.engine import GistEngine, PregenerateHandle
from ramblekit.errors import (
    BackendError,
    BadRequestError,
    ConflictError,
    InvalidStateError,
    NotFoundError,
    RamblekitError,
    StaleSummaryError,
)
from ramblekit.keywords import KeywordEntry, KeywordSet, KeywordSource, RakeParams
from ramblekit.zoom import SUMMARY_LEVELS, ZoomLevel, word_budget

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "BadRequestError",
    "ConflictError",
    "GistEngine",
    "InvalidStateError",
    "KeywordEntry",
    "KeywordSet",
    "KeywordSource",
    "NotFoundError",
    "PregenerateHandle",
    "RakeParams",
    "Ramble",
    "RambleDocument",
    "RambleState",
    "RamblekitError",
    "RawCapture",
    "RespeakAction",
    "RespeakSession",
    "StaleSummaryError",
    "SUMMARY_LEVELS",
    "ZoomLevel",
    "new_document",
    "word_budget",
]
