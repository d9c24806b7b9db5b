"""Exception types raised across the toolkit.

Each class corresponds to one rejection contract: callers can catch the
narrow type, or ``SvecmError`` to catch anything raised deliberately.
"""


class SvecmError(Exception):
    """Base class for all toolkit errors."""


# --- data ingestion -------------------------------------------------------

class MissingValue(SvecmError):
    def __init__(self, row, col):
        self.row, self.col = row, col
        super().__init__(f"missing value at row {row}, column {col!r}")


class ParseFailure(SvecmError):
    def __init__(self, row, col, text=""):
        self.row, self.col = row, col
        super().__init__(f"cannot parse {text!r} at row {row}, column {col!r}")


class NonConsecutiveYears(SvecmError):
    pass


class MissingRole(SvecmError):
    def __init__(self, role):
        self.role = role
        super().__init__(f"no column assigned to role {role!r}")


class NonPositiveForLog(SvecmError):
    def __init__(self, col, row):
        self.col, self.row = col, row
        super().__init__(f"non-positive value in column {col!r}, row {row}; log transform impossible")


# --- regression / moment problems ----------------------------------------

class TooShort(SvecmError):
    pass


class SingularRegression(SvecmError):
    pass


class SingularMoments(SvecmError):
    pass


class SingularDesign(SvecmError):
    pass


class OutOfTable(SvecmError):
    pass


# --- cointegration / VECM -------------------------------------------------

class RankOutOfRange(SvecmError):
    pass


class InconsistentRestriction(SvecmError):
    pass


class NotEstimated(SvecmError):
    pass


# --- structural identification --------------------------------------------

class InvalidRank(SvecmError):
    pass


class NonInvertibleCore(SvecmError):
    pass


class NotIdentified(SvecmError):
    pass


class NoConvergence(SvecmError):
    pass


class ResampleFailure(SvecmError):
    pass


# --- simulator -------------------------------------------------------------

class InvalidParams(SvecmError):
    pass


class AllZeroCoefficients(SvecmError):
    pass


class DegenerateVariance(SvecmError):
    pass
