"""Exception hierarchy shared by all modules."""


class UnirelError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatch(UnirelError, ValueError):
    pass


class NotUnitary(UnirelError, ValueError):
    def __init__(self, residual, tol):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not unitary: max|u*u - I| = {self.residual:.3e} > {self.tol:.1e}")


class IndexOutOfRange(UnirelError, IndexError):
    pass


class TruncationTooSmall(UnirelError, ValueError):
    pass


class MemoryBudgetExceeded(UnirelError, MemoryError):
    pass


class RelationMismatch(UnirelError, ValueError):
    pass


class NotInVariety(UnirelError, ValueError):
    pass


class NotInterior(UnirelError, ValueError):
    pass


class NotInCore(UnirelError, ValueError):
    pass


class NotInCoreInterior(NotInCore):
    pass


class NotInOpenBall(UnirelError, ValueError):
    pass


class DenominatorVanishes(UnirelError, ZeroDivisionError):
    pass


class WrongDimensions(UnirelError, ValueError):
    pass


class WrongKernelDim(UnirelError, ValueError):
    pass


class NotIntertwiner(UnirelError, ValueError):
    pass


class BudgetExceeded(UnirelError, ValueError):
    pass


class ParseError(UnirelError, ValueError):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
