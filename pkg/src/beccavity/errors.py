"""Shared solver-level exception."""


class SolverError(RuntimeError):
    """A solver failed to converge or produced an inconsistent state."""
