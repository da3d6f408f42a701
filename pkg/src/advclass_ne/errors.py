"""Exception hierarchy shared by the library and the CLI."""


class AdvClassError(Exception):
    """Base class for every error raised by this package."""


class InputError(AdvClassError, ValueError):
    """Malformed or inconsistent input (unknown ids, bad probabilities, ...)."""


class ModelAssumptionError(AdvClassError, ValueError):
    """Input is well formed but violates an assumption of the closed-form solver.

    ``assumption`` names the violated assumption so callers can report it.
    """

    def __init__(self, message: str, assumption: str):
        super().__init__(message)
        self.assumption = assumption


class ConsistencyError(AdvClassError):
    """Strategies handed to an operation cannot come from an equilibrium."""


class SolverError(AdvClassError, RuntimeError):
    """Internal failure: an LP was infeasible/unbounded or a tripwire fired."""
