"""Exact counts of r-free numbers in arithmetic progressions."""

from ._rfree import *  # noqa: F401,F403
from ._rfree import __doc__  # noqa: F401

__version__ = "0.1.0"
