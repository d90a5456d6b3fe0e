"""Exception types shared across the toolkit."""


class K22KitError(Exception):
    """Base class for all toolkit errors."""


class InputError(K22KitError):
    """Unusable input: unreadable file, malformed edge list, empty graph."""


class ParseError(InputError):
    """Malformed edge-list line. Carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InfeasibleError(K22KitError):
    """Requested parameters admit no solution (model inversion, sampling bound)."""


class SampleTooSparseError(K22KitError):
    """An estimate's denominator count came out zero. Carries the numerator estimate."""

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y


class CountingError(K22KitError):
    """Internal consistency violation in exact counts (signals a bug)."""
