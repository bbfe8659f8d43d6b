"""Exception types shared across the notebench pipeline."""


class NotebenchError(Exception):
    """Base class for all notebench errors."""


class EmptyNoteError(NotebenchError):
    """A note was blank where non-empty text is required."""


class EmptyCorpusError(NotebenchError):
    """An operation that needs at least one document got an empty corpus."""


class EmptyTextError(NotebenchError):
    """Text was empty after whitespace trimming."""


class DimMismatchError(NotebenchError):
    """An embedding vector did not have the declared dimension."""


class ZeroVectorError(NotebenchError):
    """Cosine similarity is undefined for an all-zero vector."""


class ProviderUnavailableError(NotebenchError):
    """An embedding provider could not be reached or refused the request."""


class AllProvidersFailedError(NotebenchError):
    """Every configured embedding provider failed for a pair."""


class CssParseFailure(NotebenchError):
    """A CSS judge response had no header line or out-of-range fields."""


class BackendCallError(NotebenchError):
    """A single judge backend call failed (network, auth, no scripted rule)."""


class BackendExhaustedError(NotebenchError):
    """Every judge run (including retries) failed to produce a response."""


class DomainError(NotebenchError):
    """A statistical routine was called outside its domain."""


class MissingDecisionError(NotebenchError):
    """A pair lacks a consensus decision required for aggregation."""


class UnknownEncounterError(NotebenchError):
    """An encounter id does not exist in the corpus or queue."""


class AlreadyReviewedError(NotebenchError):
    """A conflicting verdict was submitted for an already-reviewed encounter."""


class StoreLockedError(NotebenchError):
    """Another process holds the advisory lock on the triage store."""


class ConfigError(NotebenchError):
    """Run configuration is invalid or inconsistent."""


class MissingReportError(NotebenchError):
    """The requested operation needs a completed report that does not exist."""
