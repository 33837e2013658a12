"""Exception types.

Everything raised for bad input derives from ``ValueError``; the CLI maps
those to exit code 1 and :class:`NumericalFailure` to exit code 2.
"""


class DimensionMismatch(ValueError):
    pass


class NotSelfAdjoint(ValueError):
    pass


class NotPositive(ValueError):
    pass


class InvalidWord(ValueError):
    pass


class FolnerCapExceeded(ValueError):
    pass


class IdealError(ValueError):
    """Ideal is improper or not invariant under the action."""


class NotAbelian(ValueError):
    """Fixed-point algebra is noncommutative, so the invariant states do not form a simplex."""


class NumericalFailure(RuntimeError):
    """An internal consistency check failed beyond tolerance."""
