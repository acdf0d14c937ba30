# -*- coding: utf-8 -*-
"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A physical or dimensionless parameter violates a model constraint.

    The message names the violated constraint, e.g. ``"nu > (2/3)*mu"``.
    """


class GeometryError(ValueError):
    """An invalid mesh/layout request (degenerate slab, boundary-touching
    inclusion, too-coarse grid, unsupported dimension)."""


class SolverError(RuntimeError):
    """A linear solve failed or did not reach the required residual."""


class ConfigError(ValueError):
    """A run configuration file or override could not be interpreted."""
