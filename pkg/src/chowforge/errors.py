class InputError(ValueError):
    """Bad arguments: rank mismatch, non-pointed cone, non-positive grading, ..."""


class InternalConsistencyError(RuntimeError):
    """Two supposedly equivalent computation routes disagreed.  Always a bug."""


class FeasibilityError(RuntimeError):
    """The requested computation exceeds a configured size cap (group too large, ...)."""
