"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for inputs that
break a stated invariant, and :class:`NumericalError` for computations that
went wrong on valid input (lost brackets, underflowed weights, and so on).
The CLI maps them to exit codes 1 and 2.
"""


class RelTodaError(Exception):
    kind = "error"

    def __init__(self, detail=""):
        super().__init__(detail)
        self.detail = detail


class ValidationError(RelTodaError, ValueError):
    kind = "ValidationError"


class NumericalError(RelTodaError, ArithmeticError):
    kind = "NumericalError"


class NonPositiveEntry(ValidationError):
    kind = "NonPositiveEntry"

    def __init__(self, index, which):
        self.index = index
        self.which = which
        super().__init__(f"{which}_{index} must be positive and finite")


class ShapeMismatch(ValidationError):
    kind = "ShapeMismatch"


class InvalidSpectralData(ValidationError):
    kind = "InvalidSpectralData"


class NonMonotoneFlow(ValidationError):
    kind = "NonMonotoneFlow"


class NonPositiveCoefficient(ValidationError):
    kind = "NonPositiveCoefficient"


class PoleEvaluation(ValidationError):
    kind = "PoleEvaluation"

    def __init__(self, j):
        self.j = j
        super().__init__(f"evaluation point coincides with pole {j}")


class BracketFailure(NumericalError):
    kind = "BracketFailure"

    def __init__(self, interval, detail=""):
        self.interval = interval
        msg = f"no sign change in bracket {interval}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonPositiveWeight(NumericalError):
    kind = "NonPositiveWeight"

    def __init__(self, j):
        self.j = j
        super().__init__(f"weight {j} is not positive (inaccurate eigenvalues?)")


class DegenerateWeight(NumericalError):
    kind = "DegenerateWeight"

    def __init__(self, j, t=None, detail=""):
        self.j = j
        self.t = t
        msg = f"weight {j} is degenerate"
        if t is not None:
            msg += f" at t={t!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ZeroNorm(NumericalError):
    kind = "ZeroNorm"

    def __init__(self, n):
        self.n = n
        super().__init__(f"inner product norm {n} underflowed")


class PositivityLoss(NumericalError):
    kind = "PositivityLoss"

    def __init__(self, t):
        self.t = t
        super().__init__(f"matrix data lost positivity at t={t!r}; reduce dt")


class SingularEigenvectorMatrix(NumericalError):
    kind = "SingularEigenvectorMatrix"


class Overflow(NumericalError, OverflowError):
    kind = "Overflow"


class NormalizationFailure(NumericalError):
    kind = "NormalizationFailure"
