"""Exception types shared across the package.

Plain usage mistakes (dimension mismatches, bad argument types) raise
ValueError directly; the classes here mark failures of the mathematics or of
the input data that callers may want to catch individually.  The CLI maps
them onto its exit codes: ConfigError -> 2, SpectralError -> 3,
NumericsError -> 4.
"""


class NumericsError(Exception):
    """A computation left its domain of validity or lost too much accuracy."""


class SingularSeriesError(NumericsError):
    """Reciprocal of a series whose constant term is (numerically) zero."""


class NotAFixedPointError(NumericsError):
    """The point offered as an equilibrium does not satisfy the model equation."""


class DegenerateInputError(NumericsError):
    """Input data is degenerate beyond repair, e.g. an identically zero polynomial."""


class ModelDomainError(NumericsError):
    """A model was evaluated outside the domain of its defining formula."""


class InternalConsistencyError(NumericsError):
    """A self-check failed; indicates a model-definition or implementation bug."""


class SpectralError(NumericsError):
    """Base class for failures of eigenvalue selection and tracking."""


class NoHyperbolicDirectionError(SpectralError):
    """No usable stable direction exists (all roots on the unit circle, or none real)."""


class NotAnEigenvalueError(SpectralError):
    """The matrix pencil is numerically full rank at the proposed eigenvalue."""


class RootMultiplicityError(SpectralError):
    """The selected root is not simple enough to carry a one-dimensional manifold."""


class ResonanceError(SpectralError):
    """An internal resonance blocks the order-by-order recursion."""

    def __init__(self, order: int, detail: str = ""):
        self.order = order
        msg = f"resonance at order {order}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class BranchLossError(SpectralError):
    """Continuation could not match the tracked eigenvalue branch across a step."""

    def __init__(self, step: int, detail: str = ""):
        self.step = step
        msg = f"lost the eigenvalue branch at continuation step {step}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ConfigError(Exception):
    """A run configuration file is malformed or inconsistent."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
