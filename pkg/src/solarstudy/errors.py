"""Exception hierarchy.

Every error raised by the package derives from :class:`StudyError`, so the CLI
can map the whole family to exit code 2.  Subclasses also inherit from the
closest builtin (``ValueError``, ``OSError``) for callers that prefer those.
"""


class StudyError(Exception):
    """Base class for data and numeric failures."""


# -- series handling --------------------------------------------------------

class SeriesTooShort(StudyError, ValueError):
    pass


class UnsupportedOrder(StudyError, ValueError):
    pass


class EmptyTrain(StudyError, ValueError):
    pass


class EmptyTest(StudyError, ValueError):
    pass


class MissingMonth(StudyError, ValueError):
    """Raised when a monthly aggregate has no observations for some months."""

    def __init__(self, months, context=""):
        self.months = tuple(months)
        names = ", ".join(MONTH_ABBR[m - 1] for m in self.months)
        msg = f"no observations for month(s): {names}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


# -- ARMA estimation --------------------------------------------------------

class SingularDesign(StudyError, ValueError):
    pass


class NonCausalModel(StudyError, ValueError):
    pass


class NonInvertibleModel(StudyError, ValueError):
    pass


class DegenerateSampleSize(StudyError, ValueError):
    pass


class OptimizationDiverged(StudyError, RuntimeError):
    pass


class NoConvergedCandidate(StudyError, RuntimeError):
    pass


# -- statistics -------------------------------------------------------------

class LengthMismatch(StudyError, ValueError):
    pass


class ZeroVariance(StudyError, ValueError):
    pass


class RankDeficient(StudyError, ValueError):
    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__("design matrix is rank deficient; dependent column(s): "
                         + ", ".join(self.columns))


class TooFewObservations(StudyError, ValueError):
    pass


class NonPositiveDenominator(StudyError, ValueError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


# -- pipeline / IO ----------------------------------------------------------

class MalformedTable(StudyError, ValueError):
    pass


class ConflictingSeries(StudyError, ValueError):
    """Two inputs carry the same station-independent series with different values."""


class MissingSeries(StudyError, ValueError):
    pass


class IoFailure(StudyError, OSError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")


class SeriesFailure(StudyError):
    """Wraps a component error with the (station, parameter, month) it came from."""

    def __init__(self, station, parameter, month, cause):
        self.station = station
        self.parameter = parameter
        self.month = month
        self.cause = cause
        parts = []
        if station is not None:
            parts.append(f"station={station}")
        parts.append(f"parameter={parameter}")
        if month is not None:
            parts.append(f"month={month}")
        super().__init__(f"[{' '.join(parts)}] {type(cause).__name__}: {cause}")


class InputError(StudyError, ValueError):
    """File-level parse error carrying a path and optional line number."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{where}: {message}")


class MalformedHeader(InputError):
    pass


class DuplicateDate(InputError):
    pass


class NonNumericValue(InputError):
    def __init__(self, path, line, column, text):
        self.column = column
        super().__init__(path, f"non-numeric value {text!r} in column {column}", line)


class HumidityOutOfRange(InputError):
    pass


class MalformedRow(InputError):
    pass


class UnknownKey(InputError):
    pass


class MissingKey(InputError):
    pass


class BadValue(InputError):
    pass


MONTH_ABBR = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
