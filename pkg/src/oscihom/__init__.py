"""Effective limits of surface integrals with rapidly oscillating periodic densities."""

__version__ = "0.1.0"

from .averaging import AveragingTriple, directional_triple, plane_average_finite, scale_pair, weyl_average
from .errors import (AccuracyError, BudgetError, ConditioningError, DomainError, EvaluationError,
                     ExpressionSyntaxError, OscihomError, SolverError, UndeterminedDirectionError,
                     UnsupportedDimensionError)
from .geometry import (Curve, Direction, circle, classify_direction, flat_decomposition, polygon,
                       quadrature_nodes, rotated_square, segment, stadium)
from .oscillatory_integral import (Geometric, PhaseTargeted, epsilon_sweep, homogenized_bounds,
                                   sandwich_check, surface_integral)
from .periodic_field import PeriodicField, TorusLoop, cell_average, loop_average
from .pde import Bem, DirichletProblem, Disk, InteriorMeasure, Slab, solve, solve_neumann

__all__ = [n for n in dir() if not n.startswith("_")]
