"""Digitize conic arcs on a square grid with validity-gated midpoint tests."""

from .core import (
    Conic,
    GradientPair,
    HalfPoint,
    PolarLine,
    b_left,
    det_dis,
    gradient,
    inside,
    lambda_m,
    polar_line,
    radius_of_curvature,
    residue,
    signed_distance_to_polar,
)
from .engine import compiled_available, run_segment
from .segmentation import Frame, MonotonicSegment, build_segments

__all__ = [
    "Conic", "GradientPair", "HalfPoint", "PolarLine", "Frame", "MonotonicSegment",
    "b_left", "det_dis", "gradient", "inside", "lambda_m", "polar_line",
    "radius_of_curvature", "residue", "signed_distance_to_polar",
    "build_segments", "run_segment", "compiled_available",
]
