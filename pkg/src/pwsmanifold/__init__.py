"""Averaging, invariant revolution manifolds and switching-flow verification for
radial-cylindrical perturbations of x' = -y, y' = x, z' = h(x, y)."""
from ._accel import USE_NUMBA, backend_name
from .averaging import (
    AveragedPoly,
    PerturbationSpec,
    UnsupportedDegreeError,
    averaged_closed_form,
    averaged_generic,
    eval_dpsi_dr,
    eval_psi,
)
from .locus import (
    FoldPoint,
    IdenticallyZeroError,
    LocusCurve,
    LocusPoint,
    ManifoldClass,
    classify,
    revolve,
    roots_at_slice,
    trace_locus,
)
from .realization import realize, realize_roundtrip_check
from .simulator import (
    CartState,
    CylState,
    SystemSpec,
    VerificationReport,
    cartesian_flow,
    find_fixed_point,
    poincare_map,
    reduced_flow,
    verify_prediction,
)
from .trig import (
    CConstantTable,
    CircleProfile,
    NonPeriodicProfileError,
    c_constants,
    delta,
    eval_h,
    integral_I_h,
    validate_periodic,
)

__version__ = "0.1.0"
