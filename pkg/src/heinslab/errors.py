"""Exception hierarchy shared by every heinslab module."""


class HeinslabError(Exception):
    """Base class for all errors raised by heinslab."""


class DimensionMismatch(HeinslabError, ValueError):
    pass


class NumericOverflow(HeinslabError, ArithmeticError):
    """A map evaluated to a non-finite value (overflow or a pole)."""


class PointOutsideDomain(HeinslabError, ValueError):
    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class SingularMatrix(HeinslabError, ArithmeticError):
    pass
