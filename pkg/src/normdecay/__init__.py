"""Numerical toolkit for orbit decay of semigroups generated by normal operators.

The central object is the spectral measure of a state, a finite positive
measure on the non-positive half-line. Orbit norms, ball masses, exponent
estimates and the erratic constructions all work from it.
"""

from .errors import *  # noqa: F401,F403
from .expr import Expr, parse
from .measure import (
    Atom,
    ArcsineSegment,
    ExprSegment,
    OrbitSeries,
    PowerSegment,
    SpectralMeasure,
    ball_mass,
    blend,
    left_mass,
    orbit_log_norm2,
    orbit_series,
    restrict,
    total_mass,
)
from .models import (
    FiniteVector,
    LaplacianModel,
    MultiplicationModel,
    laplacian_log_norm2,
    laplacian_orbit,
    model_gap,
    resolvent_norm,
    semigroup_opnorm_log,
    spectral_distance,
    state_measure,
)
from .asymptotics import (
    ExponentEstimate,
    ResolventProfile,
    bd_bound_check,
    decay_exponents,
    m_log,
    m_log_inv,
    poly_scale_check,
    resolvent_growth,
    resolvent_profile,
    scaling_exponents,
)
from .constructions import (
    RateFunction,
    build_corollary_measure,
    build_erratic,
    classify,
    classify_measure,
    jensen_floor,
    parse_rate,
    verify_erratic,
)

__version__ = "0.1.0"
