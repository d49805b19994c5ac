"""Exception types shared across the package."""


class KernelFormatError(ValueError):
    """Raised when a kernel descriptor or bit vector cannot be parsed."""


class BudgetExceededError(ValueError):
    """Raised when a requested computation exceeds its configured size budget."""


class DecodingIntegrityError(RuntimeError):
    """Raised when non-erased observations are mutually inconsistent.

    This cannot happen when decoding honest channel output with the matching
    code; it signals a decoder bug or corrupted symbols (e.g. bit flips fed
    into an erasure-only decoder).
    """
