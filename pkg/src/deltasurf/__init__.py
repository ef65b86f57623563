"""Bound states of Schrödinger operators with strong δ-interactions on surfaces.

Modules: ``geometry`` (charts and curvature), ``mesh``, ``surface_fem``
(comparison eigenvalues), ``transverse1d``, ``bs_bem`` and ``axisym``
(single-layer eigenproblems), ``asymptotics`` (β sweeps) and ``cli``.
"""

from .asymptotics import AsymptoticSweep, RateFit, SweepRecord, cross_check_bounds, fit_rate, sweep
from .axisym import AxisymmetricLayer, ProfileCurve
from .bs_bem import (
    BoundStateResult,
    BoundStateSolver,
    LayerOperator,
    TriangleLayer,
    assemble_layer,
    bs_eigenvalues,
    reconstruct_eigenfunction,
    solve_bound_states,
    trace_consistency,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DeltaSurfError,
    DomainError,
    ImmersionError,
    InsufficientDataError,
    MeshError,
    OutOfTubeError,
    ValidityError,
)
from .geometry import CATALOG, GeometryJet, curvature_potential, jet, make_surface, tube_point
from .mesh import SurfaceMesh, build_mesh
from .surface_fem import SpectralResult, SurfaceModeSolver, assemble, offset_modes, solve_modes
from .transverse1d import TransverseSpec, dirichlet_ground, penalized_spectrum, separated_upper_bound

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
