"""Inexact regularized proximal Newton method for psi(Ax - b) + g(x)."""

from .model import Problem
from .solver import RunRecord, SolverConfig, SolverError, pg_baseline, solve

__all__ = ["Problem", "RunRecord", "SolverConfig", "SolverError", "pg_baseline", "solve"]
