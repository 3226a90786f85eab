"""Backprojection set over-approximations for linear systems under neural-network control."""

from ._hybreach import *  # noqa: F401,F403
from ._hybreach import HybreachError, HyperRect, PartitionParams, hybreach_lp_plus

__all__ = [name for name in dir() if not name.startswith("_")]


def box(lower, upper):
    """Shorthand for HyperRect from two sequences."""
    return HyperRect(list(map(float, lower)), list(map(float, upper)))
