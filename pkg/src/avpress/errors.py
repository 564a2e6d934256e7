"""Exception hierarchy shared by the library and the CLI.

Every error carries a short machine-readable ``code`` so callers (and the
CLI's diagnostics) can distinguish failure classes without parsing messages.
Exit-code mapping lives in :mod:`avpress.cli`.
"""


class AvpressError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class InvalidInputError(AvpressError):
    """A value violates an operation's contract (bad shape, range, or flag)."""

    code = "invalid-input"


class BundleFormatError(InvalidInputError):
    """A bundle on disk fails validation."""

    code = "bundle-format"


class SizeMismatchError(BundleFormatError):
    """A blob's byte length disagrees with the manifest."""

    code = "size-mismatch"


class PayloadError(BundleFormatError):
    """A blob contains NaN/Inf values or an oversized frame payload."""

    code = "non-finite-payload"


class AlignmentError(BundleFormatError):
    """The audio alignment map is out of range or not non-decreasing."""

    code = "alignment-violation"


class RolloutParseError(InvalidInputError):
    """A rollout file line failed to parse; message carries line context."""

    code = "rollout-parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BundleIOError(AvpressError):
    """A file is missing or unreadable; message carries the path."""

    code = "io"
