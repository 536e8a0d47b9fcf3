"""Robust linear programs with coherent distortion risk constraints.

The uncertainty set of a single distortion risk constraint is a
weighted-mean trimmed region of the coefficient sample; the robust LP
is solved by intersecting the goal ray with that region's efficient
facets.  See README.md for the CLI and the acceptance suite.
"""

from .errors import BudgetError, DataError, DegeneracyError, RiskrayError
from .experiments import (BenchmarkReport, ConvergenceReport,
                          DistributionSpec, benchmark,
                          convergence_experiment, draw_sample)
from .geometry import Facet, Polytope, contains, convex_hull, hausdorff_estimate
from .portfolio import (PortfolioResult, grid_oracle, portfolio_report,
                        portfolio_solve)
from .region import (Region, Sample, extreme_point, region_exact,
                     region_support_oracle, support_function)
from .solver import (RobustLP, SolveOutcome, efficient_set,
                     feasibility_margin, solve_iterative, solve_ray,
                     transform_max)
from .weights import (DistortionSpec, WeightVector, check_majorization,
                      eval_risk, make_weights_named, weights_from_generator)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport", "BudgetError", "ConvergenceReport", "DataError",
    "DegeneracyError", "DistortionSpec", "DistributionSpec", "Facet",
    "PortfolioResult", "Polytope", "Region", "RiskrayError", "RobustLP",
    "Sample", "SolveOutcome", "WeightVector", "benchmark",
    "check_majorization", "contains", "convergence_experiment",
    "convex_hull", "draw_sample", "efficient_set", "eval_risk",
    "extreme_point", "feasibility_margin", "grid_oracle",
    "hausdorff_estimate", "make_weights_named", "portfolio_report",
    "portfolio_solve", "region_exact", "region_support_oracle",
    "solve_iterative", "solve_ray", "support_function", "transform_max",
    "weights_from_generator",
]
