"""Exception types raised across the package."""


class ConicError(Exception):
    """Base class for all conicraster errors."""


class DegenerateConic(ConicError):
    """The conic's 3x3 determinant is zero."""


class NoRealLocus(ConicError):
    """The conic has no real points (imaginary ellipse)."""


class CenterHasNoPolar(ConicError):
    """The pole is the conic's center, whose gradient vanishes."""


class EmptyAfterClipping(ConicError):
    """No monotonic segment survives clipping and filtering."""


class StepBudgetExceeded(ConicError):
    """A segment walk failed to reach its end point within budget."""


class NoRealArc(ConicError):
    """A footpoint was requested on an empty arc."""


class ClampedFootpoint(ConicError):
    """A footpoint lies on a segment end, so the distance theorem does not apply."""


class PoleAtInfinity(ConicError):
    """The line's pole is a point at infinity."""


class SpanTooLarge(ConicError):
    """Segment is too long for exhaustive path search."""


class ParseError(ConicError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
