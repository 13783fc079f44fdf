"""Coarse skeletons, bottlenecking checks and fat-minor search on finite graphs."""

__version__ = "0.1.0"
