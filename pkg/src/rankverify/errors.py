"""Exception hierarchy shared by every module of the package."""


class RankVerifyError(Exception):
    """Base class for all errors raised by rankverify."""


class InsufficientDataError(RankVerifyError, ValueError):
    """Raised when a test needs more groups than were supplied."""


class SelectionEventError(RankVerifyError, ValueError):
    """Raised when an observation lies outside its own selection event.

    This always indicates a bookkeeping bug upstream (for example a winner
    that is not the largest value of the tested subvector).
    """


class ParseError(RankVerifyError, ValueError):
    """Raised for malformed CSV input.

    Attributes:
        row: 1-based line number in the source file, or None when the
            problem is not tied to a single line.
    """

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"line {row}: {message}"
        super().__init__(message)
