# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Exceptions raised by the bregman-vi library."""


class BregmanError(Exception):
    """Base class of all bregman-vi errors."""


class DomainError(BregmanError, ValueError):
    """A point lies outside the domain of a kernel or a feasible set."""


class InfeasibleError(DomainError):
    """A point violates the constraints of a feasible set."""


class ConfigError(BregmanError, ValueError):
    """An experiment configuration failed to parse or validate."""


class UnknownTargetError(BregmanError, KeyError):
    """A reproduction target or verification suite name is not known."""


class UnsupportedKernelError(BregmanError):
    """The requested analytic quantity is not available for a kernel."""


class NotDecomposableError(BregmanError):
    """The regularizer does not fit the decomposable sharpness theory."""


class NotASolution(BregmanError):
    """The candidate point does not solve the variational inequality.

    Attributes:
        residual: the decomposition residual norm.
    """

    def __init__(self, message: str, residual: float):
        """Initialize the error.

        Args:
            message: human-readable description.
            residual: the decomposition residual norm.
        """
        super().__init__(message)
        self.residual = residual


class DegenerateError(BregmanError):
    """A separation certificate was requested for the trivial subset."""


class CombinatorialLimitError(BregmanError):
    """The exhaustive subset enumeration would be too large."""


class InvalidStepError(BregmanError):
    """The step size violates the conditions of the convergence theorem."""


class InsufficientDataError(BregmanError):
    """A series is too short to fit a convergence rate."""


class DivergenceError(BregmanError):
    """A scalar recursion left its admissible interval."""


class SolverError(BregmanError):
    """Base class of failures raised while iterating a method."""


class BoundaryDerivativeError(SolverError, DomainError):
    """A steep kernel was differentiated at its boundary."""


class ProxDomainError(SolverError, DomainError):
    """A prox center lies where the steep regularizer is not differentiable."""


class ProxUndefinedError(SolverError):
    """The prox-mapping has no solution for the given dual vector."""


class SteepnessRequiredError(SolverError):
    """The dual Newton engine was called with a non-steep kernel."""


class UnsupportedCombinationError(SolverError):
    """No prox engine handles the requested kernel and domain pair."""


class ConvergenceError(SolverError):
    """An inner iterative routine did not reach its tolerance.

    Attributes:
        residual: the residual reached when the routine gave up.
        iterations: number of iterations performed.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        """Initialize the error.

        Args:
            message: human-readable description.
            residual: the residual reached when the routine gave up.
            iterations: number of iterations performed.
        """
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations
