"""Exception hierarchy for mptk."""


class MptkError(Exception):
    """Base class for all mptk errors."""


class NotSquare(MptkError, ValueError):
    pass


class NotHermitian(MptkError, ValueError):
    pass


class NonFinite(MptkError, ValueError):
    pass


class ShapeError(MptkError, ValueError):
    pass


class NotOrthonormal(MptkError, ValueError):
    pass


class RankMismatch(MptkError, ValueError):
    pass


class RankCollapse(MptkError, ArithmeticError):
    """Consecutive subspaces are numerically orthogonal; the step is too large."""


class CountMismatch(MptkError, ValueError):
    pass


class NotInvariant(MptkError, ValueError):
    """A basis does not span an invariant subspace of the given matrix."""


class ParseError(MptkError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SymmetryViolation(MptkError, ValueError):
    pass
