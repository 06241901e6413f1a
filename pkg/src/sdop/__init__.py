"""Distributed shortest-distance optimization with approximate projections."""

from .approx import ApproxMode, ApproxResult, approx_project, approx_project_balls
from .diagnostics import (ConvergenceError, DiagnosticsRecord, EmptyIntersectionError, OptimalSolution,
                          check_optimality_characterization, consensus_diameter, diagnostics_for, objective,
                          project_intersection, solve_centralized)
from .geometry import (Ball, Box, ConvexSet, DimensionError, HalfSpace, SetFamily, distance, hull_diameter,
                       hull_distance, project, ray_boundary_hit)
from .network import DirectedGraph, GraphSchedule, is_strongly_connected, is_ujsc, laplacian
from .schedules import Constant, Piecewise, Rational
from .simulator import (ConfigError, DivergenceError, SimConfig, Trajectory, integrate, step_rhs,
                        validate_conditions)

__all__ = [
    "ApproxMode", "ApproxResult", "approx_project", "approx_project_balls",
    "ConvergenceError", "DiagnosticsRecord", "EmptyIntersectionError", "OptimalSolution",
    "check_optimality_characterization", "consensus_diameter", "diagnostics_for", "objective",
    "project_intersection", "solve_centralized",
    "Ball", "Box", "ConvexSet", "DimensionError", "HalfSpace", "SetFamily", "distance", "hull_diameter",
    "hull_distance", "project", "ray_boundary_hit",
    "DirectedGraph", "GraphSchedule", "is_strongly_connected", "is_ujsc", "laplacian",
    "Constant", "Piecewise", "Rational",
    "ConfigError", "DivergenceError", "SimConfig", "Trajectory", "integrate", "step_rhs",
    "validate_conditions",
]
