"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs
(CLI exit code 2) and :class:`NumericalError` for failures of the numerics
themselves (CLI exit code 3).
"""


class EquiquenchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EquiquenchError, ValueError):
    """An input violates a documented precondition."""


class NumericalError(EquiquenchError, ArithmeticError):
    """A numerical procedure could not deliver a trustworthy result."""


class NonSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    def __init__(self, defect: float, tol: float):
        super().__init__(f"matrix is not Hermitian: defect {defect:.3e} > tol {tol:.3e}")
        self.defect = defect


class NegativeEigenvalue(ValidationError):
    def __init__(self, value: float):
        super().__init__(f"matrix has a negative eigenvalue {value:.3e}")
        self.value = value


class DimensionMismatch(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class ZeroFrequency(ValidationError):
    pass


class CoherenceBoundViolated(ValidationError):
    def __init__(self, r: float, r_max: float):
        super().__init__(f"coherence r={r!r} exceeds the Bloch bound r_max={r_max!r}")
        self.r = r
        self.r_max = r_max


class DisconnectedRates(ValidationError):
    """The rate graph splits the levels into more than one component."""


class DegeneratePoint(ValidationError):
    pass


class NoHotPartner(ValidationError):
    pass


class NoColdPartner(ValidationError):
    pass


class NonDiagonalizable(NumericalError):
    def __init__(self, cond: float):
        super().__init__(f"eigenvector matrix is ill-conditioned (cond={cond:.3e})")
        self.cond = cond


class MultipleStationaryStates(NumericalError):
    pass


class NoOverlap(NumericalError):
    """The initial state has no component outside the stationary mode."""


class NotBracketed(NumericalError):
    pass
