"""Exception types shared across the laboratory."""


class BerezinLabError(Exception):
    """Base class for all library-specific errors."""


class InvalidParams(BerezinLabError):
    """Arguments outside an operation's documented domain of use."""


class DomainError(BerezinLabError):
    """A closed-form evaluation was requested outside its convergence domain."""


class NearSingularCocycle(BerezinLabError):
    """The matrix a + z c is too ill conditioned to act with."""


class SingularUpsilon(BerezinLabError):
    """det(1 + corner) is below threshold; the corner reduction map is undefined."""


class SingularCayley(BerezinLabError):
    """det(g + 1) is below threshold; the Cayley transform is undefined."""


class QuadratureFailure(BerezinLabError):
    """Adaptive quadrature did not reach the requested accuracy."""


class NonPositiveDeterminant(BerezinLabError):
    """det(1 - z u^t) was expected to be positive but is not."""


class NegativeRealDeterminant(BerezinLabError):
    """The 4n x 4n real realization returned a negative determinant."""


class UncancelledPole(BerezinLabError):
    """A Gamma-product value has a pole that no zero cancels."""


class PoleOnContour(BerezinLabError):
    """A density evaluation hit a net pole at a real spectral parameter."""


class OracleVarianceTooHigh(BerezinLabError):
    """A Monte Carlo oracle's standard error exceeds its budget."""
