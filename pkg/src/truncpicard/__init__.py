"""Truncated Picard iteration on Schauder-basis sequence spaces.

Elements live in a separable sequence space as finite coefficient prefixes
with exact analytic tails; operators act on that representation in closed
form.  The package tabulates truncated-iterate distances over (n, m) grids,
solves fixed points to certified accuracy with adaptive truncation, verifies
the quantitative distance and convergence claims as pass/fail records, and
integrates a scalar delay equation whose first-order truncation has a closed
form.  A FastAPI service exposes scenario runs; the CLI is a thin client.
"""

__version__ = "0.1.0"

from .bounds import BoundCheck, ConstantsReport, Thm32EmpiricalConstants, constants
from .iteration import (
    AdaptiveParams,
    SolveResult,
    TraceGrid,
    run_grid,
    solve_fixed_point,
    truncated_iterate_post,
    truncated_iterate_pre,
)
from .operators import (
    AffineOperator,
    ComponentwiseOperator,
    ContractionClass,
    DiagonalOperator,
    FixedPointResult,
    apply,
    exact_fixed_point,
    iterate,
)
from .space import (
    BasisSpec,
    Element,
    MetricKind,
    TailSpec,
    basis_constant_estimate,
    distance,
    norm,
    project,
    tail_norm,
)

__all__ = [
    "__version__",
    "BasisSpec", "Element", "MetricKind", "TailSpec",
    "basis_constant_estimate", "distance", "norm", "project", "tail_norm",
    "AffineOperator", "ComponentwiseOperator", "ContractionClass",
    "DiagonalOperator", "FixedPointResult", "apply", "exact_fixed_point", "iterate",
    "AdaptiveParams", "SolveResult", "TraceGrid", "run_grid", "solve_fixed_point",
    "truncated_iterate_post", "truncated_iterate_pre",
    "BoundCheck", "ConstantsReport", "Thm32EmpiricalConstants", "constants",
]
