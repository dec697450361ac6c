"""Exception hierarchy shared by all modules."""


class LipevoError(Exception):
    """Base class for library errors."""


class StructuralError(LipevoError, ValueError):
    """Shapes, grids or domains do not match."""


class ParameterError(LipevoError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ValidationError(LipevoError, ValueError):
    """Input fails a mathematical precondition (ellipticity, A_p, ...)."""


class ConfigurationError(LipevoError, ValueError):
    """A grid or run configuration cannot support the request."""


class PreconditionError(ValidationError):
    """A verification harness refuses to run on inadmissible data."""


class RangeError(LipevoError, ArithmeticError):
    """A computed exponent would overflow double precision."""


class SpecSyntaxError(LipevoError, ValueError):
    """Malformed mini-language string; carries the offending position."""

    def __init__(self, text, pos, message):
        self.text = text
        self.pos = pos
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {text}\n  {pointer}")
