"""Besov seminorms, perimeters, capacities and trace inequalities on uniform grids."""

__version__ = "0.1.0"

from .grid import Grid, GridFunction, build_grid, sample_function  # noqa: E402
from .regions import Ball, Box, Union, perimeter  # noqa: E402
from .seminorm import BesovParams, besov_seminorm, default_h_sample  # noqa: E402

__all__ = [
    "Ball",
    "BesovParams",
    "Box",
    "Grid",
    "GridFunction",
    "Union",
    "besov_seminorm",
    "build_grid",
    "default_h_sample",
    "perimeter",
    "sample_function",
]
