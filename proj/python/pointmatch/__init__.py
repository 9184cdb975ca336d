"""Geometric matchings of random point sets."""

from ._core import *  # noqa: F401,F403
from ._core import CapabilityError, ConfigError, SolverError  # noqa: F401

__version__ = "0.1.0"
