"""Piecewise affine contractions of the interval with one discontinuity.

The map f(x) = lam*x + delta on [0, eta), mu*(lam*x + delta - 1) on [eta, 1),
with eta = (1 - delta)/lam: its rotation number, the staircase delta(rho),
the conjugation to a rotation and its limit set.
"""

__version__ = "0.1.0"

from .core import (
    BijectiveBoundaryError,
    ConvergenceError,
    DenominatorOverflowError,
    InconsistentItineraryError,
    MapParams,
    NoCycleError,
    OrbitApproachError,
    OutsideImageError,
    ParameterError,
    PrecisionError,
    PwAffineError,
    RationalRot,
    RotationValue,
    SeriesTruncationError,
    Side,
    SideReal,
    as_rotation,
    check_rho,
    d_bound,
    eta,
    farey_mediant,
    r_bound,
    validate_params,
)
from .heckemahler import (
    DEFAULT_TOL,
    Plateau,
    SeriesTolerance,
    delta_of_rho,
    delta_plateau,
    phi_series,
    psi,
    sigma,
    sigma_rational,
)
from .dynamics import (
    OrbitTrace,
    f_apply,
    f_inverse,
    f_left,
    find_periodic_orbit,
    forward_orbit,
    lift_F,
    orbit_closed_form,
)
from .conjugation import ConjugationSpec, conjugacy_residual, phi_eval, phi_eval_via_hm
from .rotation import RotationResult, classify_boundary, rho_exact, rho_orbit_estimate
from .limitset import (
    Cycle,
    Gap,
    IntervalDecomposition,
    OmegaLimit,
    cycle_points,
    fminus_cycle,
    gap_endpoints,
    gaps_up_to,
    iterated_image,
    omega_limit,
)
from .estimator import PhiTransformer, StaircaseTransformer
