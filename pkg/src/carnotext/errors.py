"""Exception types shared across the package.

The CLI maps each family to a fixed exit code, see ``carnotext.cli``.
"""
from __future__ import annotations

import numpy as np


class CarnotError(Exception):
    """Base class for all package errors."""


class InputError(CarnotError, ValueError):
    """Malformed or out-of-range arguments."""


class DataFormatError(InputError):
    """A file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AlgebraError(InputError):
    """Structure constants violate antisymmetry, grading or Jacobi."""


class AdmissibilityError(CarnotError):
    """A loop sweeps a nonzero multi-symplectic area."""

    def __init__(self, message: str, area=None):
        super().__init__(message)
        self.area = None if area is None else np.asarray(area, dtype=float)


class HorizontalityError(CarnotError):
    """A path or map fails the contact equations. Carries the residual report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class UnsupportedModelError(CarnotError):
    """Configuration outside the scope of the construction."""


class NumericalError(CarnotError):
    """A numerical check failed (non-closed forms, unstable quadrature)."""
