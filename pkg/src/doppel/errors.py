"""Exception taxonomy shared across the toolkit.

Every error maps onto one of the CLI exit codes:

* 2 -- validation errors (bad records, bad config, bad labels)
* 3 -- I/O errors (missing or unreadable files, failed writes)
* 4 -- provider errors (embedding service or discussion host misbehaving)
"""

from __future__ import annotations


class DoppelError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(DoppelError):
    """Input data or configuration violates a documented invariant."""

    exit_code = 2


class ParseError(ValidationError):
    """A corpus line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateKeyError(ValidationError):
    """Two records share the same (project, id) key."""


class TooFewDocumentsError(ValidationError):
    """Fewer than two documents survived preprocessing; no pairs exist."""


class DistributionEmptyError(ValidationError):
    """The similarity distribution is empty; no threshold can be derived."""


class IntegrityError(ValidationError):
    """A record references a discussion id missing from the corpus."""


class UnknownPairError(ValidationError):
    """A judgment references a pair that is not in the candidate set."""


class NoJudgmentsError(ValidationError):
    """Precision under judged_only requires at least one judgment."""


class InputError(DoppelError):
    """Filesystem-level failure: missing file, unreadable data, bad write."""

    exit_code = 3


class ProviderError(DoppelError):
    """A remote provider (embedding service or forum host) failed."""

    exit_code = 4


class AuthError(ProviderError):
    """The provider rejected our credentials."""


class RateLimitError(ProviderError):
    """The provider throttled us; ``retry_after`` is seconds, when known."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class RequestTimeoutError(ProviderError):
    """The provider did not answer within the configured timeout."""


class ConnectionFailedError(ProviderError):
    """The provider could not be reached at all."""


class ProviderStatusError(ProviderError):
    """The provider answered with a non-success HTTP status."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class DimMismatchError(ProviderError):
    """The embedding provider changed vector dimensionality mid-run."""


class NonFiniteVectorError(ProviderError):
    """The embedding provider returned NaN or infinite components."""


class DegenerateDistributionWarning(UserWarning):
    """Raised (as a warning) when IQR == 0 and the fence collapses to Q3."""
