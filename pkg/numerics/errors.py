# numerics\errors.py
"""
Exception hierarchy for the SPME laboratory.

Every exception carries the exit code the command-line front end reports when
it escapes an experiment:

    0  every requested check passed
    1  at least one check failed (never raised, reported through the verdict)
    2  configuration or precondition problem
    3  numerical failure (blow-up, stagnation)
"""
from typing import List, Optional


class SpmeError(Exception):
    """Base class for all laboratory errors."""

    exit_code = 2


class ConfigurationError(SpmeError):
    """Invalid parameters, grids, scenarios or run settings."""

    exit_code = 2


class ParameterError(ConfigurationError):
    """A model constant is outside its admissible range (m <= 1, M <= 0, ...)."""


class DomainError(ConfigurationError):
    """An evaluation point lies outside the domain of a closed form (t <= 0)."""


class GridError(ConfigurationError):
    """Grid construction or grid compatibility problem."""


class MixedOrientationError(ConfigurationError):
    """Travelling-wave species were given different orientations."""


class ScenarioValidationError(ConfigurationError):
    """
    Aggregates every problem found while validating a scenario file.

    Attributes:
        issues (list): Human readable messages, each carrying key path and line.
        path (str): The scenario file the issues refer to.
    """

    def __init__(self, issues: List[str], path: Optional[str] = None):
        self.issues = list(issues)
        self.path = path
        where = f" in {path}" if path else ""
        body = "\n  - ".join(self.issues)
        super().__init__(f"{len(self.issues)} scenario problem(s){where}:\n  - {body}")


class PreconditionError(SpmeError):
    """An operation was called outside its documented precondition."""

    exit_code = 2


class NumericalError(SpmeError):
    """The discrete scheme produced an unusable state."""

    exit_code = 3


class NumericalBlowupError(NumericalError):
    """A non-finite value appeared during a step."""

    def __init__(self, step_index: int, time: float, detail: str = ""):
        self.step_index = step_index
        self.time = time
        message = f"non-finite value at step {step_index} (t={time:.6g})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class StagnationError(NumericalError):
    """The admissible time step underflowed, so time could no longer advance."""

    def __init__(self, time: float, dt: float):
        self.time = time
        self.dt = dt
        super().__init__(f"time step underflow at t={time:.6g} (dt={dt:.3g})")
