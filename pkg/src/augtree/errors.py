"""Exception hierarchy shared by the library and the CLI."""


class AugtreeError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(AugtreeError):
    """Malformed or inconsistent IFS / matrix input."""


class DimensionMismatch(AugtreeError):
    pass


class CapExceeded(AugtreeError):
    """A configured size cap would be exceeded; raised instead of truncating."""


class UndecidedEdge(AugtreeError):
    """Certified edge mode could not decide a vertex pair within its refinement cap."""

    def __init__(self, x, y, bound):
        self.pair = (x, y)
        self.bound = bound
        super().__init__(f"edge between {x!r} and {y!r} undecided: {bound}")


class InvariantViolation(AugtreeError):
    """An internal consistency check failed.  Always indicates a bug or an unsound input."""
