"""Exception types shared across the package."""


class PorbitError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PorbitError):
    """Invalid system definition, run configuration, or CLI usage."""


class ConservationError(ConfigError):
    """A declared conserved quantity is not conserved by the vector field."""


class NotAnEquilibrium(PorbitError):
    """The supplied point does not satisfy the equilibrium residual tolerance."""


class DependentConstraints(PorbitError):
    """Constraint gradients are numerically rank deficient at the base point."""


class NoInertiaRealization(PorbitError):
    """The Poisson realization of the rigid body is unavailable for these parameters."""


class EigenSolveError(PorbitError):
    """The eigenvalue solver failed to converge."""


class IntegrationError(PorbitError):
    """Adaptive integration failed (step underflow, step budget, non-finite state)."""


class EigenplaneDegenerate(PorbitError):
    """No direction in the oscillation plane reaches the requested level set."""


class OrbitSolveError(PorbitError):
    """The shooting iteration failed to produce a periodic orbit."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual
