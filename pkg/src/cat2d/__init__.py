"""Computational toolkit for CAT(k) comparison geometry on planar domains and 2-complexes."""

__version__ = "0.1.0"
