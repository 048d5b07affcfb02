"""Exception hierarchy shared by every module of the package."""


class PaschkeError(Exception):
    """Base class for all errors raised by this package."""

    #: Short machine-readable tag, surfaced by the CLI.
    kind = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        out = {"kind": self.kind, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class StructuralError(PaschkeError, ValueError):
    """Shapes or algebras do not fit together."""

    kind = "structural"


class DomainError(PaschkeError, ValueError):
    """An input violates a mathematical precondition (not CP, not an effect, ...)."""

    kind = "domain"


class NumericalDegeneracyError(PaschkeError, ArithmeticError):
    """Randomized structure recovery kept hitting degenerate samples."""

    kind = "numerical_degeneracy"


class VerificationError(PaschkeError, RuntimeError):
    """A constructed object failed one of its certified postconditions."""

    kind = "verification"
