"""Residential supply tasks from building masks and footprints."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
