"""Uniform spanning forests and double circle packings of plane networks."""
from __future__ import annotations

__version__ = "0.1.0"

from . import electrical, experiments, forest, generators, graph, kernels, packing  # noqa: E402
from .generators import TessellationSpec, tessellation_ball, tube  # noqa: E402
from .graph import PlaneNetwork, dual, parse_planenet, format_planenet  # noqa: E402

__all__ = [
    "__version__",
    "graph",
    "generators",
    "electrical",
    "forest",
    "packing",
    "experiments",
    "kernels",
    "PlaneNetwork",
    "TessellationSpec",
    "tessellation_ball",
    "tube",
    "dual",
    "parse_planenet",
    "format_planenet",
]
