"""Discrete-streamline advection schemes on uniform Cartesian grids.

The package solves the steady pure-advection equation ``V . grad(phi) = 0``
with Gauss-Seidel sweeps, comparing the DStreaM triangle-fan scheme against
first-order upwind and flux-limited TVD schemes on four standard benchmarks.
"""
from .benchmarks import (
    PROBLEMS,
    ErrorMetrics,
    ProblemSpec,
    SmithHuttonParams,
    error_metrics,
    exact_field,
    extract_profile,
    make_problem,
    make_profile_problem,
    make_smith_hutton,
)
from .grid import (
    BoundaryCondition,
    EdgeCondition,
    Grid,
    GridError,
    ScalarField,
    VelocityField,
    apply_boundary,
    make_grid,
    read_field_csv,
    write_field_csv,
)
from .schemes import SchemeConfig, dstream_update, tvd_face_value, tvd_update, upwind_update
from .solver import Divergence, SolveConfig, SolveReport, SweepPolicy, solve, sweep
from .stencil import (
    DegenerateTriangle,
    SectorFan,
    StagnantNode,
    ZeroWeightSum,
    build_fan,
    select_sector,
    shape_coefficients,
    stencil_weights,
)

__version__ = "0.1.0"
