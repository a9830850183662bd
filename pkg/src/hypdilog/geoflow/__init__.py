"""Geodesic-flow Monte Carlo: spine growth, classification and measure estimates."""

from .mc import (
    MCReport,
    aggregate_bordered,
    bordered_theory,
    compare_pants,
    pants_theory,
    run_mc,
    run_mc_closed,
    run_mc_torus,
    torus_bin_theory,
)
from .sampling import UnitTangentSample, sample_tangent, sample_tangents
from .spine import Classification, SpineGraph, boundary_chord, classify, grow_spine

__all__ = [
    "Classification",
    "MCReport",
    "SpineGraph",
    "UnitTangentSample",
    "aggregate_bordered",
    "bordered_theory",
    "boundary_chord",
    "classify",
    "compare_pants",
    "grow_spine",
    "pants_theory",
    "run_mc",
    "run_mc_closed",
    "run_mc_torus",
    "sample_tangent",
    "sample_tangents",
    "torus_bin_theory",
]
