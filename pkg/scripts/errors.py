#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Error Types

Exception hierarchy shared by the solver modules and the CLI.

Every error carries the process exit code the CLI reports for it:
0 success, 1 generic failure, 2 infeasible/unbounded or malformed model,
3 oracle enumeration cap exceeded.

Author: Bilinear Toolkit
Date: October 2025
"""

from typing import Optional


class BilinearError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ModelError(BilinearError):
    """Malformed model data, or a model that is infeasible/unbounded where an optimum is required."""

    exit_code = 2


class DimensionMismatch(ModelError, ValueError):
    """Array shapes do not agree."""


class UnboundedCoordinate(ModelError):
    """A coordinate maximum (theta or gamma) is infinite."""

    def __init__(self, index: int, label: str = "coordinate", message: Optional[str] = None):
        self.index = index
        self.label = label
        super().__init__(message or f"{label} {index} is unbounded over its polytope")


class PreconditionViolated(ModelError):
    """Ax + By0 has a negative entry beyond the feasibility tolerance."""


class InfeasibleModel(ModelError):
    """An LP expected to be feasible came back infeasible."""


class UnboundedModel(ModelError):
    """An LP expected to be bounded came back unbounded."""


class InfeasibleRestriction(InfeasibleModel):
    """The LP-AR restriction is infeasible."""


class NumericalBreakdown(BilinearError):
    """The simplex could not find an acceptable pivot, or hit its iteration limit."""


class EnumerationTooLarge(BilinearError):
    """A brute-force enumeration exceeds its configured cap."""

    exit_code = 3


class TooManyVariables(EnumerationTooLarge):
    """MNAE formula has too many variables for exhaustive search."""


class GeneratorExhausted(BilinearError):
    """Instance generator could not draw an instance with finite coordinate maxima."""


class ConfigError(BilinearError, ValueError):
    """Invalid configuration value."""
