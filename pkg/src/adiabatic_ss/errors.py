class InvalidInput(ValueError):
    """Malformed or out-of-range input (non-finite entries, bad shapes, h <= 0, ...)."""


class PreconditionViolated(ValueError):
    """An operation was called on arguments that violate its documented precondition."""


class InternalCheckFailed(RuntimeError):
    """A structural identity that must hold by construction failed numerically.

    Usually means the rank tolerance is badly matched to the conditioning of
    the complex.
    """
