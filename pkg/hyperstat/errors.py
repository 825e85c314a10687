# SPDX-License-Identifier: BSD-3-Clause

"""Exceptions raised by hyperstat.

Everything a solver or checker can fail with derives from `HyperstatError`, so the
command layer can map the whole family onto one exit code.
"""


class HyperstatError(Exception):
    """Base class for all runtime/solver errors."""


class DimensionError(HyperstatError, ValueError):
    pass


class UnknownProblem(HyperstatError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"No problem named {self.name!r} in the registry"


class NoDescriptor(HyperstatError):
    pass


class NoOracle(HyperstatError):
    pass


class BudgetExceeded(HyperstatError):
    """A refinement cap was hit before the requested accuracy was reached.

    The best value found so far and the accuracy that could be certified for it are
    kept on the exception so callers can decide whether it is good enough anyway.
    """

    def __init__(self, message: str, best_value: float | None = None, achieved_tol: float | None = None):
        super().__init__(message)
        self.best_value = best_value
        self.achieved_tol = achieved_tol


class UnboundedInner(HyperstatError):
    pass


class BracketTooSmall(HyperstatError):
    pass


class InfeasibleMidpoint(HyperstatError):
    pass


class NoWitness(HyperstatError):
    def __init__(self, message: str, sample: dict | None = None):
        super().__init__(message)
        self.sample = sample


class ClaimViolated(HyperstatError):
    pass


class IterationFailed(HyperstatError):
    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"Inner evaluation failed at iteration {iteration}: {cause}")
        self.iteration = iteration


class ArtifactError(HyperstatError):
    def __init__(self, path, cause: Exception):
        super().__init__(f"Could not write {path}: {cause}")
        self.path = path


class NonUnimodalWarning(UserWarning):
    """A prox objective is not known to be unimodal, so the solve is not certified."""
