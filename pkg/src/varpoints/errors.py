"""Error types shared across the package."""


class ValidationError(ValueError):
    """Bad input: config, polynomial text, precondition, or scale guard."""


class InvariantViolation(RuntimeError):
    """An internal cross-check failed (e.g. Moebius/direct count mismatch).

    Raising instead of returning keeps wrong numbers from ever reaching
    a report.
    """
