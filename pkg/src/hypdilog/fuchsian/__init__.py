"""Concrete Fuchsian models of hyperbolic surfaces."""

from .isometry import IsometryMap
from .models import (
    BoundaryComponent,
    SurfaceModel,
    build_four_holed,
    build_genus2_octagon,
    build_pants,
    build_torus,
    fricke_traces,
    holonomy,
    min_abs_trace,
    word_length,
)
from .polygon import PolygonComplex

__all__ = [
    "BoundaryComponent",
    "IsometryMap",
    "PolygonComplex",
    "SurfaceModel",
    "build_four_holed",
    "build_genus2_octagon",
    "build_pants",
    "build_torus",
    "fricke_traces",
    "holonomy",
    "min_abs_trace",
    "word_length",
]
