"""Exception hierarchy.

Every error raised by the package derives from :class:`TwistGuideError`, and
each carries the name of the module it originated from so that the lab runner
can attribute failures.
"""


class TwistGuideError(Exception):
    module = "twistguide"


# geometry
class InvalidShape(TwistGuideError, ValueError):
    module = "geometry"


class RotationallyInvariant(InvalidShape):
    pass


class EmptySupport(TwistGuideError, ValueError):
    module = "geometry"


class InvalidWindow(TwistGuideError, ValueError):
    module = "geometry"


# transverse_spectrum
class GridTooCoarse(TwistGuideError, ValueError):
    module = "transverse_spectrum"


class DegenerateSection(TwistGuideError, ArithmeticError):
    module = "transverse_spectrum"


# waveguide_form
class WindowOutsideTruncation(TwistGuideError, ValueError):
    module = "waveguide_form"


class IncompatibleGrids(TwistGuideError, ValueError):
    module = "waveguide_form"


class UnalignedInterval(TwistGuideError, ValueError):
    module = "waveguide_form"


class ZeroField(TwistGuideError, ValueError):
    module = "waveguide_form"


class WindowMismatch(TwistGuideError, ValueError):
    module = "waveguide_form"


class ResolutionBudgetExceeded(TwistGuideError, MemoryError):
    """The grid needed to resolve the Neumann window is too large."""
    module = "waveguide_form"


# eigensolver
class NoConvergence(TwistGuideError, ArithmeticError):
    module = "eigensolver"

    def __init__(self, message, eigenvalues=None, eigenvectors=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.residuals = residuals


class IndefiniteMass(TwistGuideError, ValueError):
    module = "eigensolver"


# certificates
class NonpositiveE1(TwistGuideError, ValueError):
    module = "certificates"


class NonpositiveLambda0(TwistGuideError, ArithmeticError):
    module = "certificates"


class InvalidSplit(TwistGuideError, ValueError):
    module = "certificates"


class InvalidAlpha(InvalidSplit):
    pass


class NoPositiveDmax(TwistGuideError, ArithmeticError):
    module = "certificates"


class InvalidOrdering(TwistGuideError, ValueError):
    module = "certificates"


class TruncationTooShort(TwistGuideError, ValueError):
    module = "certificates"


class HypothesisViolated(TwistGuideError, ValueError):
    module = "certificates"


# lab
class ParseError(TwistGuideError, ValueError):
    module = "lab"

    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SchemaViolation(TwistGuideError, ValueError):
    module = "lab"

    def __init__(self, violations):
        # violations: list of (key, reason)
        self.violations = list(violations)
        text = "; ".join(f"{k}: {r}" for k, r in self.violations)
        super().__init__(text)


class BudgetExceeded(TwistGuideError, ValueError):
    module = "lab"
