"""Exception types shared across the toolkit."""


class LpvSyncError(Exception):
    """Base class for all toolkit errors."""


class SelfLoopError(LpvSyncError):
    """An edge (i, i) was supplied; communication graphs have no self-loops."""


class NodeIndexError(LpvSyncError):
    """An edge references a node outside 1..N."""


class NotWeaklyConnectedError(LpvSyncError):
    """Synthesis refuses graphs whose undirected version is disconnected."""


class OutOfRangeError(LpvSyncError):
    """A scheduling-parameter value fell outside its admissible interval."""


class DimensionMismatchError(LpvSyncError):
    """Matrix dimensions are inconsistent with the network model."""


class DomainError(LpvSyncError):
    """Scenario parameters outside the domain of a closed-form expression."""


class CoveringError(LpvSyncError):
    """Grid construction could not cover the scheduling interval."""


class SingularCertificateError(LpvSyncError):
    """A certificate matrix is numerically singular (cond > 1e12)."""


class NoUpperBoundError(LpvSyncError):
    """Doubling the disagreement-gain bound never reached feasibility."""


class NumericalBreakdownError(LpvSyncError):
    """Non-finite values appeared inside an iterative solve."""


class DivergenceError(LpvSyncError):
    """A simulated state norm exceeded the divergence threshold."""


class ZeroDenominatorError(LpvSyncError):
    """Performance ratio undefined: no initial mismatch and no disturbance."""


class InfeasibleError(LpvSyncError):
    """A synthesis step failed; carries the failing grid point when known."""

    def __init__(self, message, grid_index=None, best_max_eig=None):
        super().__init__(message)
        self.grid_index = grid_index
        self.best_max_eig = best_max_eig


class ConfigError(LpvSyncError):
    """A run configuration failed validation."""


class IncompatibleArchiveError(LpvSyncError):
    """A schedule archive does not match the network it is applied to."""
