"""Magnetic geodesic flows on surfaces of revolution.

Simulation and analysis of charged-particle motion on rotationally
symmetric surfaces, with a numerical verdict on the slow-motion
periodicity condition: every sufficiently slow orbit is periodic exactly
when the magnetic field is proportional to the area form and the scalar
curvature is constant.
"""

from .bertrand import BertrandVerdict, PeriodConvergence, classify, period_convergence
from .dynamics import (
    ClosureResult,
    GuidingState,
    GuidingTrajectory,
    PhaseState,
    Trajectory,
    closure_test,
    geodesic_curvature,
    guiding_inverse,
    guiding_transform,
    hamiltonian,
    integrate,
    integrate_slowfast,
    kinetic_momentum,
    ode_rhs,
    ode_rhs_slowfast,
    relative_equilibria,
    scale_change,
    scale_inverse,
    slow_initial_state,
    wrap_angle,
)
from .errors import (
    ChartFormatError,
    DegenerateSpeed,
    LeftDomain,
    MagrevError,
    NewtonFailed,
    NoCircularOrbit,
    NoConvergence,
    NonMonotoneAction,
    NonPositiveEpsilon,
    NonPositiveR,
    NotHomogeneous,
    NoTurningPoints,
    OutOfDomain,
    QuadratureNotConverged,
    ZeroMagneticField,
)
from .jets import SmoothFn
from .reduction import (
    ApsidalReport,
    FJet,
    HSweepResult,
    ReducedParams,
    TurningPoints,
    apsidal_angle,
    apsidal_h_sweep,
    apsidal_limit,
    apsidal_report,
    effective_potential,
    h4_coefficient,
    h4_taylor_form,
    radial_period,
    taylor_jet,
    turning_points,
)
from .surface import (
    ActionChart,
    CurvatureReport,
    RadialProfile,
    bertrand_chart,
    builtin_chart,
    chart_from_dict,
    chart_from_file,
    curvature_report,
    flat_cylinder_profile,
    homogeneity_defect,
    hyperbolic_profile,
    interior_grid,
    make_profile,
    scalar_curvature_a,
    scalar_curvature_r,
    sphere_profile,
    tabulated_profile,
    to_action_chart,
)

__version__ = "0.1.0"
