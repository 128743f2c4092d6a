"""Landau-Zener transitions under counterdiabatic control with random gaps."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
