"""Exception hierarchy shared by every geocalc module."""


class GeocalcError(Exception):
    """Base class for all errors raised by geocalc."""


class SignatureMismatchError(GeocalcError, ValueError):
    """Operands belong to geometric algebras of different dimension."""


class GradeError(GeocalcError, ValueError):
    """An operand does not have the grade an operation requires."""


class SingularBladeError(GeocalcError, ZeroDivisionError):
    """A blade is zero (or numerically zero) and cannot be inverted."""


class DegenerateInputError(GeocalcError, ValueError):
    """Input is degenerate, e.g. a zero vector where a direction is needed."""


class MultivectorSyntaxError(GeocalcError, ValueError):
    """Malformed textual multivector or polynomial-field expression."""

    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)


class RegularityError(GeocalcError, ValueError):
    """The tangent k-vector of a patch vanishes (non-regular parametrization)."""


class DomainError(GeocalcError, ValueError):
    """A parameter point lies outside the patch domain."""


class IntegrandError(GeocalcError, FloatingPointError):
    """A field or patch produced non-finite values during integration."""


class EndpointMismatchError(GeocalcError, ValueError):
    """Curves handed to a path-independence check do not share endpoints."""


class InteriorMarginError(GeocalcError, ValueError):
    """Evaluation point too close to the boundary for the fixed quadrature."""


class ScenarioError(GeocalcError, ValueError):
    """Invalid scenario document."""

    def __init__(self, message, scenario=None):
        self.scenario = scenario
        if scenario:
            message = f"[{scenario}] {message}"
        super().__init__(message)


class ScenarioSyntaxError(ScenarioError):
    """The scenario document is not well-formed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class UnknownKeyError(ScenarioError):
    """A scenario uses a key the schema does not define."""


class RegistryKeyError(ScenarioError):
    """A scenario names a patch or field that is not registered."""


class DimensionMismatchError(ScenarioError):
    """Patch and field dimensions in a scenario are inconsistent."""
