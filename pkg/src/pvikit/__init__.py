"""Painlevé VI toolkit.

Classification of critical behaviour at x = 0, 1, infinity from monodromy
data, parametric connection formulae, truncated series expansions with
order-by-order recursion, and adaptive numerical integration with movable
pole traversal.
"""

from .classify import (
    BehaviourDescriptor,
    BehaviourKind,
    ResonanceNumbers,
    Tag,
    classify_at,
    resonance_numbers,
)
from .connect import (
    a_for_tau,
    a_from_monodromy,
    connect_closed_form,
    constants_for_uuu_div,
    descriptor_from_monodromy,
    nu_phi_from_monodromy,
    sigma_from_trace,
    special_constants,
    special_traces,
    traces_from_descriptor,
    traces_from_generic_constants,
    traces_from_oscillatory_constants,
    transport_traces,
)
from .complexfn import arccos_unit, digamma, gamma, half_trig
from .errors import PviError
from .integrate import Trajectory, detect_pole_ray, integrate_path
from .monodromy import (
    OkamotoElement,
    PviCoefficients,
    ThetaVector,
    TraceSet,
    apply_okamoto_theta,
    apply_okamoto_traces,
    coefficients_from_theta,
    factor_residuals,
    fricke_residual,
    peripheral_traces,
    solve_third_trace,
    theta_from_coefficients,
)
from .series import (
    Expansion,
    build_expansion,
    evaluate,
    map_expansion,
    pvi_residual,
    pvi_residual_cleared,
    reducible_solution,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
