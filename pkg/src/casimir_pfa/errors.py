"""Exceptions shared by the numerical modules."""

__all__ = ["ConvergenceError", "BudgetExceeded"]


class ConvergenceError(RuntimeError):
    """A series or quadrature did not reach the requested tolerance."""


class BudgetExceeded(RuntimeError):
    """The requested quadrature needs more integrand evaluations than allowed."""
