"""Exception taxonomy shared by all modules.

The CLI maps ValidationError to exit code 1 and NumericalError (and its
subclasses) to exit code 2; everything else is a bug.
"""


class QclabError(Exception):
    """Base class for package errors."""


class ValidationError(QclabError):
    """Bad input: violated precondition, malformed file, out-of-range value."""


class NumericalError(QclabError):
    """A computation failed to converge or degenerated."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegeneratePointError(NumericalError):
    """Difference quotients degenerate (|∂h| below threshold) at a point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DegenerateTransversalError(NumericalError):
    """A transversal is tangent to a leaf at a sample point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DomainError(QclabError):
    """A point does not belong to the object's domain (e.g. off all leaves)."""


class DominationError(QclabError):
    """Radon-Nikodym domination s_i <= t_i violated; carries a witness leaf."""

    def __init__(self, message, witness=None, s=None, t=None):
        super().__init__(message)
        self.witness = witness
        self.s = s
        self.t = t


class ContradictionWitnessError(QclabError):
    """Subdivision found no cell with positive pairing, contradicting <S,form> > 0."""


class ExprError(QclabError):
    """Base class for expression-language errors; carries an input offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class ExprSyntaxError(ExprError):
    pass


class ExprEvalError(ExprError):
    pass
