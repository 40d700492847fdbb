"""Parametric connection formulae at x = 0, their oscillatory and special-
family variants, transport substitutions to x = 1 and x = infinity, and the
four-step closed-form connection procedure.

Sign conventions
----------------
``Z(sigma^2) = ((sigma^2 - (theta0+thetax)^2)(sigma^2 - (theta0-thetax)^2))
/ (16 sigma^4)``.  With this normalisation ``Z`` equals the leading
coefficient ``c_{1,-1}`` of the generic expansion and the reflection
identities ``a(sigma) a(-sigma) = Z``, ``G1(-sigma) = G3(sigma) Z``,
``G4(-sigma) = G6(sigma) Z`` hold exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .complexfn import INT_TOL, arccos_unit, digamma, gamma
from .errors import (
    ConditionViolation,
    DegenerateLimit,
    GammaPole,
    OscillatoryRegime,
    OutsidePrincipalStrip,
    PoleAtNonPositiveInteger,
    ResonantDenominator,
    TauRegime,
    UnsupportedKind,
    VanishingDenominator,
)
from .monodromy import (
    OkamotoElement,
    PviCoefficients,
    ThetaVector,
    TraceSet,
    apply_okamoto_theta,
    apply_okamoto_traces,
    coefficients_from_theta,
    peripheral_traces,
)

__all__ = [
    "TrigKernel",
    "OscKernel",
    "trig_kernel",
    "osc_kernel",
    "sigma_from_trace",
    "a_from_monodromy",
    "traces_from_generic_constants",
    "traces_from_generic_constants_limit",
    "nu_phi_from_monodromy",
    "traces_from_oscillatory_constants",
    "a_for_tau",
    "constants_for_uuu_div",
    "special_constants",
    "special_traces",
    "transport_traces",
    "connect_closed_form",
    "descriptor_from_monodromy",
    "traces_from_descriptor",
    "resonant_limit",
    "zee",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.5772156649015328606065

_PI = math.pi
_MATCH_TOL = 1e-9


def _sp(z: complex) -> complex:
    return cmath.sin(_PI * z)


def _cp(z: complex) -> complex:
    n = math.floor(z.real + 0.5) if abs(z.real) < 1e15 else 0
    r = z - n
    c = cmath.cos(_PI * r)
    return -c if n % 2 else c


def _s(z: complex) -> complex:
    return cmath.sin(_PI * z / 2.0)


def _c(z: complex) -> complex:
    return cmath.cos(_PI * z / 2.0)


def _E(z: complex) -> complex:
    return cmath.exp(1j * _PI * z)


def _G(z: complex, label: str) -> complex:
    try:
        return gamma(z)
    except PoleAtNonPositiveInteger as exc:
        raise GammaPole(f"gamma pole in {label} at argument {z}") from exc


def zee(sigma: complex, t: ThetaVector) -> complex:
    """Z(sigma^2); equals the generic-expansion seed c_{1,-1}."""
    t0, tx = t.theta0, t.thetax
    return ((sigma**2 - (t0 + tx) ** 2) * (sigma**2 - (t0 - tx) ** 2)) / (16.0 * sigma**4)


# ---------------------------------------------------------------------------
# trigonometric kernel of the generic family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrigKernel:
    """Intermediate products of the generic connection formulae."""

    F: complex
    V: complex
    V1: complex
    calF: complex
    G1: complex
    G2: complex
    G3: complex
    G4: complex
    G5: complex
    G6: complex
    Xi: complex
    Xi1: complex
    OmegaTrig: complex
    Omega1Trig: complex
    Z: complex
    U: Optional[complex] = None


def _bigF(sigma: complex, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    num = (_G(1 + sigma, "F") ** 2
           * _G((t0 + tx - sigma) / 2 + 1, "F")
           * _G((tx - t0 - sigma) / 2 + 1, "F")
           * _G((ti + t1 - sigma) / 2 + 1, "F")
           * _G((t1 - ti - sigma) / 2 + 1, "F"))
    den = (_G(1 - sigma, "F") ** 2
           * _G((t0 + tx + sigma) / 2 + 1, "F")
           * _G((tx - t0 + sigma) / 2 + 1, "F")
           * _G((ti + t1 + sigma) / 2 + 1, "F")
           * _G((t1 - ti + sigma) / 2 + 1, "F"))
    return num / den


def _Vfun(sigma: complex, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    return 4.0 * _s(t0 + tx - sigma) * _s(t0 - tx + sigma) * _s(ti + t1 - sigma) * _s(ti - t1 + sigma)


def _Ufun(sigma: complex, p01: complex, px1: complex, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    return ((0.5j) * (p01 + px1 * _E(sigma)) * _sp(sigma)
            + _cp(tx) * _cp(t1) + _cp(ti) * _cp(t0)
            - (_cp(tx) * _cp(ti) + _cp(t0) * _cp(t1)) * _E(sigma))


def trig_kernel(t: ThetaVector, sigma: complex,
                p01: Optional[complex] = None, px1: Optional[complex] = None) -> TrigKernel:
    """Assemble the generic kernel at the given sigma; U is filled when the
    pair traces are supplied."""
    t0, tx, t1, ti = t.as_tuple()
    if abs(sigma) < 1e-12:
        raise VanishingDenominator("sigma = 0 in generic kernel")
    F = _bigF(sigma, t)
    V = _Vfun(sigma, t)
    V1 = _Vfun(-sigma, t)
    calF = 4.0 * sigma**2 * (ti + t1 + sigma) / (
        (t0 - tx + sigma) * (t0 + tx - sigma) * (ti + t1 - sigma)) * F
    Xi = ((_s(t0 + tx + sigma) * _s(t0 - tx - sigma) + _s(t0 - tx + sigma) * _s(t0 + tx - sigma))
          * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) + _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    Xi1 = ((_s(t0 + tx + sigma) * _s(t0 - tx + sigma) + _s(t0 + tx - sigma) * _s(t0 - tx - sigma))
           * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) + _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    Om = ((-_s(t0 + tx + sigma) * _s(t0 - tx - sigma) + _s(t0 - tx + sigma) * _s(t0 + tx - sigma))
          * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) - _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    Om1 = ((_s(t0 + tx + sigma) * _s(t0 - tx + sigma) - _s(t0 + tx - sigma) * _s(t0 - tx - sigma))
           * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) - _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    sx, s1 = _sp(tx), _sp(t1)
    for val, name in ((Om, "Omega"), (Om1, "Omega1"), (sx, "sin(pi thetax)"),
                      (s1, "sin(pi theta1)"), (_sp(sigma), "sin(pi sigma)")):
        if abs(val) < 1e-13:
            raise ResonantDenominator(f"{name} vanishes in generic kernel")
    G2 = 2.0 * (Om * _cp(tx) * _cp(t1) - Xi * sx * s1) / (_sp(sigma) ** 2 * sx * s1)
    G5 = 2.0 * (_cp(t1) * _cp(t0) + (Xi1 / Om1) * s1 * _sp(t0))
    G1 = sx * s1 / Om * V1 / calF
    G3 = sx * s1 / Om * V * calF
    G4 = -_E(sigma) * (_sp(t0) / sx) * (Om / Om1) * G1
    G6 = -_E(-sigma) * (_sp(t0) / sx) * (Om / Om1) * G3
    U = None if p01 is None else _Ufun(sigma, p01, px1, t)
    return TrigKernel(F=F, V=V, V1=V1, calF=calF, G1=G1, G2=G2, G3=G3, G4=G4,
                      G5=G5, G6=G6, Xi=Xi, Xi1=Xi1, OmegaTrig=Om, Omega1Trig=Om1,
                      Z=zee(sigma, t), U=U)


# ---------------------------------------------------------------------------
# resonant limits
# ---------------------------------------------------------------------------

def resonant_limit(f: Callable[[float], complex],
                   eps: tuple[float, ...] = (1e-3, 1e-4, 1e-5),
                   agree: float = 1e-5) -> tuple[complex, bool]:
    """Richardson-extrapolated limit of ``f(eps)`` as eps -> 0.

    Polynomial (Neville) extrapolation through all sample epsilons; the
    returned flag means the full extrapolant and the one from the two
    smallest epsilons agree to ``agree`` relative and the magnitude lies in
    [1e-6, 1e6] (the finite-nonzero verdict used for the resonant branches).
    """
    es = list(eps)
    vs = [f(e) for e in es]
    tab = list(vs)
    n = len(es)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            tab[i] = (es[i - j] * tab[i] - es[i] * tab[i - 1]) / (es[i - j] - es[i])
    full = tab[n - 1]
    lin = (es[-2] * vs[-1] - es[-1] * vs[-2]) / (es[-2] - es[-1])
    scale = max(abs(full), 1e-300)
    ok = abs(full - lin) <= agree * scale and 1e-6 <= abs(full) <= 1e6
    return full, ok


def _sigma_resonances(t: ThetaVector) -> tuple[list[complex], list[complex]]:
    t0, tx, t1, ti = t.as_tuple()
    return [t0 - tx, t0 + tx], [(ti - 1) - t1, (ti - 1) + t1]


def _is_sigma_resonant(sigma: complex, t: ThetaVector) -> bool:
    p = 2.0 * _cp(sigma)
    return any(abs(p - 2.0 * _cp(v)) < _MATCH_TOL for v in _sigma_resonances(t)[0])


def _is_omega_resonant(sigma: complex, t: ThetaVector) -> bool:
    p = 2.0 * _cp(sigma)
    return any(abs(p + 2.0 * _cp(w)) < _MATCH_TOL for w in _sigma_resonances(t)[1])


# ---------------------------------------------------------------------------
# generic family: constants <-> traces
# ---------------------------------------------------------------------------

def sigma_from_trace(s: TraceSet, point: str = "0") -> complex:
    """Monodromy exponent with 0 <= Re sigma < 1 from the governing trace."""
    p = {"0": s.p0x, "1": s.px1, "inf": s.p01}[point]
    try:
        return arccos_unit(p)
    except OutsidePrincipalStrip as exc:
        raise OscillatoryRegime(
            f"governing trace {p} lies in (-inf, -2]; use nu_phi_from_monodromy"
        ) from exc


def _a_eval(sigma: complex, t: ThetaVector, s: TraceSet) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    if abs(sigma) < 1e-12:
        raise VanishingDenominator("sigma = 0")
    F = _bigF(sigma, t)
    V = _Vfun(sigma, t)
    if abs(V) < 1e-280:
        raise VanishingDenominator("V = 0 in the generic formula")
    U = _Ufun(sigma, s.p01, s.px1, t)
    pref = ((tx - t0 - sigma) * (tx + t0 - sigma) * (ti + t1 - sigma)
            / (4.0 * sigma**2 * (ti + t1 + sigma)))
    return pref / F * U / V


def a_from_monodromy(t: ThetaVector, s: TraceSet, sigma: complex) -> complex:
    """Integration constant ``a`` of the generic family at x = 0.

    At a resonance of sigma with the Sigma or Omega numbers the value is the
    Richardson-extrapolated limit; a zero/infinite Omega-limit raises
    :class:`DegenerateLimit` (the branch belongs to the reduced families).
    """
    if _is_sigma_resonant(sigma, t) or _is_omega_resonant(sigma, t):
        val, ok = resonant_limit(lambda e: _a_eval(sigma * (1.0 + e), t, s))
        if not ok:
            exc = DegenerateLimit(
                f"limit of the generic formula at sigma = {sigma} is zero or infinite"
            )
            exc.value = val
            raise exc
        return val
    return _a_eval(sigma, t, s)


def traces_from_generic_constants(t: ThetaVector, sigma: complex, a: complex) -> TraceSet:
    """Trace set of the generic branch with constants (sigma, a); lies on
    the Fricke cubic by construction."""
    if a == 0:
        raise VanishingDenominator("a = 0 has no generic trace parametrisation")
    k = trig_kernel(t, sigma)
    p0x = 2.0 * _cp(sigma)
    px1 = k.G1 / a + k.G2 + k.G3 * a
    p01 = k.G4 / a + k.G5 + k.G6 * a
    return TraceSet.from_theta(t, p0x, px1, p01)


# finer schedule than the a-limits: the trace limits feed the cubic check
_TRACE_EPS = (1e-3, 3e-4, 1e-4, 3e-5, 1e-5)


def _px1_kernel(t: ThetaVector, sigma: complex) -> tuple[complex, complex, complex]:
    """G1, G2, G3 only; valid even where the p01-kernels degenerate."""
    t0, tx, t1, ti = t.as_tuple()
    F = _bigF(sigma, t)
    calF = 4.0 * sigma**2 * (ti + t1 + sigma) / (
        (t0 - tx + sigma) * (t0 + tx - sigma) * (ti + t1 - sigma)) * F
    V = _Vfun(sigma, t)
    V1 = _Vfun(-sigma, t)
    Xi = ((_s(t0 + tx + sigma) * _s(t0 - tx - sigma) + _s(t0 - tx + sigma) * _s(t0 + tx - sigma))
          * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) + _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    Om = ((-_s(t0 + tx + sigma) * _s(t0 - tx - sigma) + _s(t0 - tx + sigma) * _s(t0 + tx - sigma))
          * (_s(t1 + ti + sigma) * _s(t1 - ti + sigma) - _s(t1 + ti - sigma) * _s(t1 - ti - sigma)))
    sx, s1 = _sp(tx), _sp(t1)
    for val, name in ((Om, "Omega"), (sx, "sin(pi thetax)"), (s1, "sin(pi theta1)"),
                      (_sp(sigma), "sin(pi sigma)")):
        if abs(val) < 1e-13:
            raise ResonantDenominator(f"{name} vanishes in generic kernel")
    G2 = 2.0 * (Om * _cp(tx) * _cp(t1) - Xi * sx * s1) / (_sp(sigma) ** 2 * sx * s1)
    G1 = sx * s1 / Om * V1 / calF
    G3 = sx * s1 / Om * V * calF
    return G1, G2, G3


def traces_from_generic_constants_limit(t: ThetaVector, sigma: complex, a: complex) -> TraceSet:
    """Trace set at a resonant sigma (the one-parameter families), computed
    as the limit of the generic parametrisation.  Accepts a = 0."""
    def f(component: int) -> Callable[[float], complex]:
        def g(e: float) -> complex:
            k = trig_kernel(t, sigma * (1.0 + e))
            if component == 0:
                return (k.G1 / a if a != 0 else 0.0) + k.G2 + k.G3 * a
            return (k.G4 / a if a != 0 else 0.0) + k.G5 + k.G6 * a
        return g

    px1, ok1 = resonant_limit(f(0), eps=_TRACE_EPS, agree=1e-4)
    p01, ok2 = resonant_limit(f(1), eps=_TRACE_EPS, agree=1e-4)
    if not (ok1 and ok2):
        raise DegenerateLimit(f"trace limit at resonant sigma = {sigma} did not converge")
    return TraceSet.from_theta(t, 2.0 * _cp(sigma), px1, p01)


# ---------------------------------------------------------------------------
# oscillatory family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscKernel:
    """Intermediate products of the oscillatory connection formulae."""

    Fstar: complex
    Vcal: complex
    Vcal1: complex
    calFstar: complex
    Gstar1: complex
    Gstar2: complex
    Gstar3: complex
    Gstar4: complex
    Gstar5: complex
    Gstar6: complex
    XiStar: complex
    Xi1Star: complex
    OmegaStar: complex
    Omega1Star: complex
    A: complex
    B: complex
    Ucal: Optional[complex] = None
    r: Optional[complex] = None


def _osc_AB(nu: float, t: ThetaVector) -> tuple[complex, complex]:
    c = coefficients_from_theta(t)
    B = (2.0 * nu**2 + c.gamma - c.alpha) / (4.0 * nu**2)
    A = -cmath.sqrt(c.alpha / (2.0 * nu**2) + B * B)
    return A, B


def _Fstar(nu: float, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    tn = 2j * nu
    num = (_G(1 - tn, "F*") ** 2
           * _G((ti - 1 + t1 + tn) / 2 + 1, "F*")
           * _G((t1 + 1 - ti + tn) / 2 + 1, "F*")
           * _G((t0 + tx + 1 + tn) / 2 + 1, "F*")
           * _G((tx - t0 - 1 + tn) / 2, "F*"))
    den = (_G(1 + tn, "F*") ** 2
           * _G((ti - 1 + t1 - tn) / 2 + 1, "F*")
           * _G((t1 + 1 - ti - tn) / 2 + 1, "F*")
           * _G((t0 + tx + 1 - tn) / 2 + 1, "F*")
           * _G((tx - t0 - 1 - tn) / 2, "F*"))
    return num / den


def _Vcal(nu: float, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    tn = 2j * nu
    return 4.0 * _c(t0 + tx + tn) * _c(t0 - tx - tn) * _c(ti + t1 + tn) * _c(ti - t1 - tn)


def _Ucal(nu: float, p01: complex, px1: complex, t: ThetaVector) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    sh = cmath.sinh(2.0 * _PI * nu)
    return (cmath.exp(2.0 * _PI * nu) * (0.5 * sh * px1 + _cp(tx) * _cp(ti) + _cp(t0) * _cp(t1))
            - 0.5 * sh * p01 + _cp(tx) * _cp(t1) + _cp(ti) * _cp(t0))


def _r_eval(nu: float, t: ThetaVector, s: TraceSet) -> complex:
    t0, tx, t1, ti = t.as_tuple()
    tn = 2j * nu
    pref = ((ti - 1 - t1 - tn) * (ti - 1 + t1 + tn) * (t0 + tx + 1 + tn)
            / (8j * nu * (tn - t0 - tx - 1)))
    return pref / _Fstar(nu, t) * _Ucal(nu, s.p01, s.px1, t) / _Vcal(nu, t)


def osc_kernel(t: ThetaVector, nu: float,
               p01: Optional[complex] = None, px1: Optional[complex] = None) -> OscKernel:
    """Assemble the oscillatory kernel at real nu != 0."""
    t0, tx, t1, ti = t.as_tuple()
    tn = 2j * nu
    Fs = _Fstar(nu, t)
    calFs = 8j * nu * (tn - t0 - tx - 1) / (
        (ti - t1 - 1 - tn) * (ti + t1 - 1 + tn) * (t0 + tx + 1 + tn)) * Fs
    V = _Vcal(nu, t)
    V1 = _Vcal(-nu, t)
    second = (_c(tx + t0 - tn) * _c(tx - t0 - tn) + _c(tx + t0 + tn) * _c(tx - t0 + tn))
    second_m = (_c(tx + t0 - tn) * _c(tx - t0 - tn) - _c(tx + t0 + tn) * _c(tx - t0 + tn))
    Xis = -((_c(ti + t1 - tn) * _c(ti - t1 + tn) + _c(ti - t1 - tn) * _c(ti + t1 + tn)) * second)
    Xi1s = -((_c(ti + t1 - tn) * _c(ti - t1 - tn) + _c(ti + t1 + tn) * _c(ti - t1 + tn)) * second)
    Oms = -((-_c(ti + t1 - tn) * _c(ti - t1 + tn) + _c(ti - t1 - tn) * _c(ti + t1 + tn)) * second_m)
    Om1s = -((_c(ti + t1 - tn) * _c(ti - t1 - tn) - _c(ti + t1 + tn) * _c(ti - t1 + tn)) * second_m)
    sx, s1, si = _sp(tx), _sp(t1), _sp(ti)
    for val, name in ((Oms, "Omega*"), (Om1s, "Omega1*"), (sx, "sin(pi thetax)"),
                      (s1, "sin(pi theta1)")):
        if abs(val) < 1e-13:
            raise ResonantDenominator(f"{name} vanishes in oscillatory kernel")
    sh = cmath.sinh(2.0 * _PI * nu)
    G2s = -2.0 * (Oms * _cp(tx) * _cp(t1) - Xis * sx * s1) / (sh**2 * sx * s1)
    G5s = -2.0 * (_cp(tx) * _cp(ti) + (Xi1s / Om1s) * sx * si)
    G1s = -sx * s1 / Oms * V1 / calFs
    G3s = -sx * s1 / Oms * V * calFs
    G4s = cmath.exp(2.0 * _PI * nu) * (si / s1) * (Oms / Om1s) * G1s
    G6s = cmath.exp(-2.0 * _PI * nu) * (si / s1) * (Oms / Om1s) * G3s
    A, B = _osc_AB(nu, t)
    U = None if p01 is None else _Ucal(nu, p01, px1, t)
    return OscKernel(Fstar=Fs, Vcal=V, Vcal1=V1, calFstar=calFs,
                     Gstar1=G1s, Gstar2=G2s, Gstar3=G3s, Gstar4=G4s,
                     Gstar5=G5s, Gstar6=G6s, XiStar=Xis, Xi1Star=Xi1s,
                     OmegaStar=Oms, Omega1Star=Om1s, A=A, B=B, Ucal=U)


def _omega_candidates_imag(t: ThetaVector) -> list[complex]:
    return [w for w in _sigma_resonances(t)[1] if abs(w.real - round(w.real)) < INT_TOL
            or abs(w.real) < INT_TOL]


def nu_phi_from_monodromy(t: ThetaVector, s: TraceSet, point: str = "0") -> tuple[float, complex]:
    """Oscillatory constants (nu > 0, phi mod 2 pi) from monodromy data.

    Raises
    ------
    TauRegime
        When 2 i nu coincides with a resonance number (the one-parameter
        oscillatory family applies; use :func:`a_for_tau`).
    """
    sf, tf = _to_zero_frame(s, t, point)
    p = sf.p0x
    if abs(p.imag) > 1e-10 or p.real >= -2.0 - 1e-10:
        raise ConditionViolation(f"governing trace {p} is not real < -2")
    nu = math.acosh(-p.real / 2.0) / (2.0 * _PI)
    for w in _sigma_resonances(tf)[1]:
        if abs(p + 2.0 * _cp(w)) < _MATCH_TOL:
            raise TauRegime(f"2 i nu matches resonance number {w}")
    A, _ = _osc_AB(nu, tf)
    r = _r_eval(nu, tf, sf)
    phi = 1j * cmath.log(-r / (nu * A))
    # e^{i phi} only: reduce Re phi to (-pi, pi]
    k = math.floor((phi.real + _PI) / (2.0 * _PI))
    phi -= 2.0 * _PI * k
    return nu, phi


def traces_from_oscillatory_constants(t: ThetaVector, nu: float,
                                      phi: Optional[complex] = None,
                                      a: Optional[complex] = None) -> TraceSet:
    """Trace set of an oscillatory branch.

    Supply ``phi`` for the two-parameter family (r = -nu A e^{-i phi}) or
    ``a`` for the resonant one (r = -2 i nu a); the kernel limit is used in
    the resonant case.
    """
    if (phi is None) == (a is None):
        raise ValueError("supply exactly one of phi, a")
    if nu == 0:
        raise VanishingDenominator("nu = 0")
    if phi is not None:
        A, _ = _osc_AB(nu, t)
        r = -nu * A * cmath.exp(-1j * phi)
    else:
        r = -2j * nu * a

    def build(nu_val: float) -> tuple[complex, complex]:
        k = osc_kernel(t, nu_val)
        return (k.Gstar1 / r + k.Gstar2 + k.Gstar3 * r,
                -(k.Gstar4 / r + k.Gstar5 + k.Gstar6 * r))

    p0x = -2.0 * math.cosh(2.0 * _PI * nu)
    resonant = any(abs(p0x + 2.0 * _cp(w)) < _MATCH_TOL for w in _sigma_resonances(t)[1])
    if resonant:
        px1, ok1 = resonant_limit(lambda e: build(nu * (1.0 + e))[0], eps=_TRACE_EPS, agree=1e-4)
        p01, ok2 = resonant_limit(lambda e: build(nu * (1.0 + e))[1], eps=_TRACE_EPS, agree=1e-4)
        if not (ok1 and ok2):
            raise DegenerateLimit("oscillatory trace limit did not converge")
    else:
        px1, p01 = build(nu)
    return TraceSet.from_theta(t, p0x, px1, p01)


def a_for_tau(t: ThetaVector, s: TraceSet, point: str = "0") -> complex:
    """Free parameter of the resonant oscillatory family, a = -r / (2 i nu),
    with r obtained as the limit of the two-parameter formula."""
    sf, tf = _to_zero_frame(s, t, point)
    p = sf.p0x
    if abs(p.imag) > 1e-10 or p.real >= -2.0 - 1e-10:
        raise ConditionViolation(f"governing trace {p} is not real < -2")
    nu = math.acosh(-p.real / 2.0) / (2.0 * _PI)
    if not any(abs(p + 2.0 * _cp(w)) < _MATCH_TOL for w in _sigma_resonances(tf)[1]):
        raise ConditionViolation("2 i nu does not match a resonance number; generic oscillatory case")
    r, ok = resonant_limit(lambda e: _r_eval(nu * (1.0 + e), tf, sf))
    if not ok:
        raise DegenerateLimit("limit of r at the oscillatory resonance did not converge")
    return -r / (2j * nu)


# ---------------------------------------------------------------------------
# reduced complex-power families
# ---------------------------------------------------------------------------

def constants_for_uuu_div(t: ThetaVector, s: TraceSet) -> tuple[complex, complex, str]:
    """Constants (a, exponent, name) for the reduced complex-power families.

    Applies the sign/shift substitution (traces negated on two components,
    theta rotated) and evaluates the generic formula there; returns
    ``(a, rho, "rho")`` when alpha != 0 and ``(a, omega, "omega")`` when
    alpha = 0.
    """
    c = coefficients_from_theta(t)
    tt = apply_okamoto_theta(OkamotoElement.SYM2, t)
    ss = apply_okamoto_traces(OkamotoElement.SYM2, s)
    if abs(c.alpha) < INT_TOL:
        w = c.sqrt2gamma if c.sqrt2gamma.real >= 0 else -c.sqrt2gamma
        if abs(w.real - round(w.real)) < INT_TOL and abs(w.imag) < INT_TOL:
            raise ConditionViolation("sqrt(2 gamma) integer: no divergent family")
        a = a_from_monodromy(tt, ss, w)
        return a, w, "omega"
    # alpha != 0: exponent from the resonance number matching the trace
    for w in _sigma_resonances(t)[1]:
        if abs(s.p0x + 2.0 * _cp(w)) < _MATCH_TOL:
            wn = w if w.real > 0 else -w
            a = a_from_monodromy(tt, ss, wn)
            return a, wn - 1.0, "rho"
    raise ConditionViolation("governing trace does not match -2 cos(pi Omega^k)")


# ---------------------------------------------------------------------------
# special one-parameter families (Taylor / logarithmic)
# ---------------------------------------------------------------------------

_SPECIAL = ("T2coe", "TTLO4", "Log1Zero", "TTLO2", "LogSquare")


def _check_denom(val: complex, name: str) -> complex:
    if abs(val) < 1e-12:
        raise ConditionViolation(f"vanishing factor {name}")
    return val


def _special_conditions(kind: str, tc: ThetaVector, c: PviCoefficients) -> None:
    """Row conditions of the one-parameter families; ConditionViolation names
    the failing one."""
    sa, sb, sg, sd = c.sqrt2alpha, c.sqrtm2beta, c.sqrt2gamma, c.sqrt1m2delta
    if kind == "TTLO2":
        if abs(c.beta) > INT_TOL or abs(2 * c.delta - 1.0) > INT_TOL:
            raise ConditionViolation("TTLO2 requires 2 beta = 2 delta - 1 = 0")
    elif kind == "TTLO4":
        if abs(c.alpha) > INT_TOL or abs(c.gamma) > INT_TOL:
            raise ConditionViolation("TTLO4 requires alpha = gamma = 0")
    elif kind == "T2coe":
        if abs(c.alpha) < INT_TOL:
            raise ConditionViolation("T2coe requires alpha != 0")
        if not (abs((sa + sg) ** 2 - 1.0) < 1e-8 or abs((sa - sg) ** 2 - 1.0) < 1e-8):
            raise ConditionViolation("T2coe requires (sqrt2a +- sqrt2g)^2 = 1")
        if abs(2 * c.beta - (2 * c.delta - 1.0)) > 1e-8:
            raise ConditionViolation("T2coe requires 2 beta = 2 delta - 1")
    elif kind == "Log1Zero":
        if not (abs(tc.thetax - tc.theta0) < 1e-8 or abs(tc.thetax + tc.theta0) < 1e-8):
            raise ConditionViolation("Log1Zero requires theta_x +- theta_0 = 0")
        if abs(sb) < INT_TOL:
            raise ConditionViolation("Log1Zero requires beta != 0 (otherwise TTLO2)")
        for comb in (tc.thetainf + tc.theta1, tc.thetainf - tc.theta1):
            if abs(comb.real / 2.0 - round(comb.real / 2.0)) < INT_TOL and abs(comb.imag) < INT_TOL:
                raise ConditionViolation("Log1Zero requires theta_inf +- theta_1 not in 2Z")
    elif kind == "LogSquare":
        if abs(2 * c.beta - (2 * c.delta - 1.0)) < INT_TOL:
            raise ConditionViolation("LogSquare requires 2 beta != 2 delta - 1")
        for v, nm in zip(tc.as_tuple(), ("theta0", "thetax", "theta1", "thetainf")):
            if abs(v.real - round(v.real)) < INT_TOL and abs(v.imag) < INT_TOL:
                raise ConditionViolation(f"LogSquare requires {nm} not integer")


def special_constants(kind: str, t: ThetaVector, s: TraceSet) -> complex:
    """Free parameter of the named one-parameter family at x = 0."""
    kind = str(kind)
    if kind not in _SPECIAL:
        raise UnsupportedKind(f"no special formula for {kind}")
    tc = t.canonical()
    c = coefficients_from_theta(tc)
    _special_conditions(kind, tc, c)
    sa, sb, sg, sd = c.sqrt2alpha, c.sqrtm2beta, c.sqrt2gamma, c.sqrt1m2delta
    p01 = s.p01

    if kind == "TTLO2":
        den = _check_denom(4.0 * _c(sa + sg) * _c(sa - sg), "cos(pi/2 (sqrt2a +- sqrt2g))")
        return (2.0 * _cp(sg) - p01) / den

    if kind == "TTLO4":
        num = 4.0 * _c(sb + sd) * _c(sb - sd)
        den = _check_denom(2.0 * _cp(sd) + p01, "2 cos(pi sqrt(1-2delta)) + p01")
        return num / den

    if kind == "T2coe":
        _check_denom(_sp(sa), "sin(pi sqrt(2 alpha))")
        _check_denom(_sp(sd), "sin(pi sqrt(1-2delta))")
        bracket = 1.0 - (p01 + 2.0 * _cp(sa) * _cp(sd)) / (2.0 * _sp(sa)) * sd / _sp(sd)
        return (sa - 1.0) / (2.0 * sa) * bracket

    if kind == "Log1Zero":
        den = _check_denom(4.0 * _c(sa + sg) * _c(sa - sg) * _sp(sb),
                           "cos(pi/2(sqrt2a +- sqrt2g)) sin(pi sqrt(-2beta))")
        om = digamma(sa / 2.0 + sg / 2.0 + 0.5) - digamma(sg / 2.0 - sa / 2.0 + 0.5) + 2.0 * EULER_GAMMA
        om1 = EULER_GAMMA + digamma(1.0 + sb) + 1j * _PI
        brace = _PI * (2.0 * _cp(sb + sg) - p01) / den + om
        return sb * (brace * cmath.exp(1j * _PI * sb / 2.0) + om1)

    # LogSquare.  The pair traces are quadratic in u = q(a) - omega with
    # opposite leading coefficients (+-A); on the p0x = 2 slice of the cubic
    # their sum is therefore linear in u, which is what the recovery inverts.
    t0, tx, t1, ti = tc.as_tuple()
    bb, cc, BB, CC, AA, om = _logsquare_kernel(tc)
    den = _check_denom(bb + BB, "b + B")
    u = (s.p01 + s.px1 - (cc + CC)) / den
    return (u
            + 2.0 * tx / (t0**2 - tx**2) + 4.0 * (EULER_GAMMA - 1j * _PI)
            + digamma(ti / 2.0 + t1 / 2.0) - digamma(t1 / 2.0 - ti / 2.0 + 1.0)
            + digamma(-tx / 2.0 - t0 / 2.0) + digamma(tx / 2.0 - t0 / 2.0 + 1.0))


def _logsquare_kernel(tc: ThetaVector):
    t0, tx, t1, ti = tc.as_tuple()
    bb = (4.0 / _PI) * (_sp(t1) * _s(t0 - tx) * _s(t0 + tx) + _sp(t0) * _s(ti + t1) * _s(ti - t1))
    cc = 2.0 * _cp(t0 - t1)
    BB = (1.0 / (2j * _PI)) * (2.0 * _cp(t0 + t1) + 4.0 * _cp(tx) * _cp(ti)
                               - 4.0 * _E(t1) * _cp(tx) - 4.0 * _E(-t0) * _cp(ti)
                               + 3.0 * _E(t1 - t0) - _E(t0 - t1))
    CC = 2.0 * _E(t1) * _cp(tx) + 2.0 * _E(-t0) * _cp(ti) - 2.0 * _E(t1 - t0)
    AA = (4.0 / _PI**2) * _s(t0 + tx) * _s(t0 - tx) * _s(ti + t1) * _s(ti - t1)
    om = digamma(ti / 2.0 + t1 / 2.0) - digamma(t1 / 2.0 - ti / 2.0 + 1.0) + 2.0 * EULER_GAMMA
    return bb, cc, BB, CC, AA, om


def special_traces(kind: str, t: ThetaVector, a: complex) -> TraceSet:
    """Trace set of the named one-parameter family with free parameter a."""
    kind = str(kind)
    if kind not in _SPECIAL:
        raise UnsupportedKind(f"no special formula for {kind}")
    tc = t.canonical()
    c = coefficients_from_theta(tc)
    _special_conditions(kind, tc, c)
    sa, sb, sg, sd = c.sqrt2alpha, c.sqrtm2beta, c.sqrt2gamma, c.sqrt1m2delta

    if kind == "TTLO2":
        cc = 4.0 * _c(sa + sg) * _c(sa - sg)
        p01 = 2.0 * _cp(sg) - a * cc
        px1 = 2.0 * _cp(sg) + (a - 1.0) * cc
        return TraceSet.from_theta(tc, 2.0, px1, p01)

    if kind == "TTLO4":
        cc = 4.0 * _c(sb + sd) * _c(sb - sd)
        if a == 0:
            raise ConditionViolation("TTLO4 traces need a != 0")
        p01 = -2.0 * _cp(sd) + cc / a
        px1 = 2.0 * _cp(sd) - (1.0 - 1.0 / a) * cc
        return TraceSet.from_theta(tc, -2.0, px1, p01)

    if kind == "T2coe":
        den = _check_denom((1.0 - sa) * sd, "(1 - sqrt2a) sqrt(1-2delta)")
        p01 = (2.0 * _sp(sa) * _sp(sd) / den * (1.0 + sa * (2.0 * a - 1.0))
               - 2.0 * _cp(sa) * _cp(sd))
        px1 = -4.0 * _cp(sa) * _cp(sd) - p01
        return TraceSet.from_theta(tc, 2.0, px1, p01)

    if kind == "Log1Zero":
        cc = 4.0 * _c(sa + sg) * _c(sa - sg)
        om = digamma(sa / 2.0 + sg / 2.0 + 0.5) - digamma(sg / 2.0 - sa / 2.0 + 0.5) + 2.0 * EULER_GAMMA
        om1 = EULER_GAMMA + digamma(1.0 + sb) + 1j * _PI
        Oma = (_sp(sb) / _PI) * (cmath.exp(-1j * _PI * sb / 2.0) * (a / sb - om1) - om)
        p01 = 2.0 * _cp(sb + sg) - cc * Oma
        px1 = 2.0 * _cp(sb - sg) + cc * (Oma - cmath.exp(-1j * _PI * sb))
        return TraceSet.from_theta(tc, 2.0, px1, p01)

    # LogSquare (p01 carries +A u^2, px1 carries -A u^2; see special_constants)
    t0, tx, t1, ti = tc.as_tuple()
    bb, cc, BB, CC, AA, om = _logsquare_kernel(tc)
    q = (a + 2.0 * tx / (tx**2 - t0**2)
         - digamma(-t0 / 2.0 - tx / 2.0) - digamma(tx / 2.0 - t0 / 2.0 + 1.0)
         - 2.0 * EULER_GAMMA + 4j * _PI)
    u = q - om
    p01 = AA * u**2 + bb * u + cc
    px1 = -AA * u**2 + BB * u + CC
    return TraceSet.from_theta(tc, 2.0, px1, p01)


# ---------------------------------------------------------------------------
# transport between critical points
# ---------------------------------------------------------------------------

def transport_traces(s: TraceSet, t: ThetaVector, to: str,
                     direction: str = "forward") -> tuple[TraceSet, ThetaVector]:
    """Substitution taking x = 0 data to the x = 1 / x = infinity frame.

    ``forward`` maps base-frame (s, t) to the frame in which the x = 0
    formulae produce the constants at ``to``; ``inverse`` recovers the
    base-frame traces from frame data.  ``t`` is always the base theta.
    """
    if to == "0":
        return s, t
    t0, tx, t1, ti = t.as_tuple()
    if to == "1":
        tp = ThetaVector(t1, tx, t0, ti)
        # involution: same formula both ways
        p01n = -s.p01 - s.p0x * s.px1 + s.pinf * s.px + s.p1 * s.p0
        sp = TraceSet.from_theta(tp if direction == "forward" else t,
                                 s.px1, s.p0x, p01n)
        return sp, tp
    if to == "inf":
        tp = ThetaVector(t0, t1, tx, ti)
        if direction == "forward":
            p01n = -s.p0x - s.px1 * s.p01 + s.pinf * s.p1 + s.p0 * s.px
            return TraceSet.from_theta(tp, s.p01, s.px1, p01n), tp
        # inverse: frame traces s (with frame peripherals) back to base
        p0xn = -s.p01 - s.p0x * s.px1 + s.pinf * s.px + s.p0 * s.p1
        return TraceSet.from_theta(t, p0xn, s.px1, s.p0x), tp
    raise ValueError(f"to must be '0', '1' or 'inf', got {to!r}")


def _to_zero_frame(s: TraceSet, t: ThetaVector, point: str) -> tuple[TraceSet, ThetaVector]:
    sf, tf = transport_traces(s, t, point, "forward")
    return sf, tf


# ---------------------------------------------------------------------------
# descriptors and the closed-form procedure
# ---------------------------------------------------------------------------

def traces_from_descriptor(desc, t: ThetaVector) -> TraceSet:
    """Base-frame trace set of a behaviour descriptor (closed-form step 2).

    Supported kinds are the starred families; others raise
    :class:`UnsupportedKind`.
    """
    from . import classify as _cls

    kind = desc.kind
    tf = {"0": t,
          "1": apply_okamoto_theta(OkamotoElement.ONARA, t),
          "inf": apply_okamoto_theta(OkamotoElement.ONARA1, t)}[kind.point]
    tag = kind.tag
    cst = desc.constants
    T = _cls.Tag

    if tag is T.FULL_EXP:
        sf = traces_from_generic_constants(tf, cst["sigma"], cst["a"])
    elif tag is T.ATOPY:
        sf = traces_from_generic_constants_limit(tf, _cls.sigma_of_kind(kind, tf), cst["a"])
    elif tag is T.DAVIDEKAN:
        sf = traces_from_generic_constants_limit(tf, _cls.sigma_of_kind(kind, tf), 0.0)
    elif tag is T.LANTERN1:
        sf = traces_from_oscillatory_constants(tf, cst["nu"].real, phi=cst["phi"])
    elif tag is T.TAU:
        nu = _cls.nu_of_kind(kind, tf)
        sf = traces_from_oscillatory_constants(tf, nu, a=cst["a"])
    elif tag in (T.UUU, T.DIV, T.T1COE):
        sf = _traces_for_uuu_div(kind, tf, cst.get("a", 0.0))
    elif tag in (T.TTLO2, T.TTLO4, T.LOG1ZERO, T.LOGSQUARE):
        name = {T.TTLO2: "TTLO2", T.TTLO4: "TTLO4",
                T.LOG1ZERO: "Log1Zero", T.LOGSQUARE: "LogSquare"}[tag]
        sf = special_traces(name, tf, cst["a"])
    elif tag is T.TTLO3 and kind.N == 1:
        sf = special_traces("T2coe", tf, cst["a"])
    elif tag is T.TTLO1 and kind.N is not None and abs(kind.N) == 1:
        c = coefficients_from_theta(tf)
        if abs(c.alpha - c.gamma) > 1e-8:
            raise UnsupportedKind("TTLO1 outside the basic subfamily (alpha != gamma)")
        tt = apply_okamoto_theta(OkamotoElement.SYM2, tf)
        st = special_traces("T2coe", tt, cst["a"] / (2.0 * c.beta))
        sf = TraceSet.from_theta(tf, -st.p0x, st.px1, -st.p01)
    else:
        raise UnsupportedKind(f"no inverse parametric formula for {tag.value}")
    s, _ = transport_traces(sf, t, kind.point, "inverse") if kind.point != "0" else (sf, tf)
    return s


def _traces_for_uuu_div(kind, tf: ThetaVector, a: complex) -> TraceSet:
    from . import classify as _cls

    c = coefficients_from_theta(tf)
    tt = apply_okamoto_theta(OkamotoElement.SYM2, tf)
    if kind.tag is _cls.Tag.DIV:
        # alpha = 0 makes the rotated theta0 vanish, which kills the
        # p01-kernels identically; take the healthy px1 limit and recover
        # p01 from the cubic, selecting the root with a coarse joint
        # (theta0, sigma) perturbation
        w = c.sqrt2gamma if c.sqrt2gamma.real >= 0 else -c.sqrt2gamma

        def gx1(e: float) -> complex:
            g1, g2, g3 = _px1_kernel(tt, w * (1.0 + e))
            return (g1 / a if a != 0 else 0.0) + g2 + g3 * a

        px1, ok1 = resonant_limit(gx1, eps=_TRACE_EPS, agree=1e-4)
        if not ok1:
            raise DegenerateLimit("divergent-family trace limit did not converge")
        e0 = 1e-4
        tte = ThetaVector(tt.theta0 + e0, tt.thetax, tt.theta1, tt.thetainf)
        ke = trig_kernel(tte, w * (1.0 + e0))
        p01_coarse = (ke.G4 / a if a != 0 else 0.0) + ke.G5 + ke.G6 * a
        from .monodromy import solve_third_trace
        probe = TraceSet.from_theta(tt, 2.0 * _cp(w), px1, 0.0)
        roots = solve_third_trace(probe)
        p01 = min(roots, key=lambda r: abs(r - p01_coarse))
        if abs(p01 - p01_coarse) > 1e-2 * max(1.0, abs(p01)):
            raise DegenerateLimit("divergent-family p01 root selection failed")
        st = TraceSet.from_theta(tt, 2.0 * _cp(w), px1, p01)
    else:
        w = _cls.omega_of_kind(kind, tf)
        st = traces_from_generic_constants_limit(tt, w, a)
    # undo the sign/shift substitution (involutive on the pair traces)
    return TraceSet.from_theta(tf, -st.p0x, st.px1, -st.p01)


def descriptor_from_monodromy(t: ThetaVector, s: TraceSet, point: str, kind=None):
    """Classify (unless given) and compute the integration constants at the
    requested critical point (closed-form steps 3-4)."""
    from . import classify as _cls

    if kind is None:
        kind = _cls.classify_at(t, s, point)
    sf, tf = _to_zero_frame(s, t, point)
    T = _cls.Tag
    tag = kind.tag
    constants: dict[str, complex] = {}
    if tag is T.FULL_EXP:
        sigma = sigma_from_trace(sf, "0")
        constants = {"sigma": sigma, "a": a_from_monodromy(tf, sf, sigma)}
    elif tag is T.ATOPY:
        constants = {"a": a_from_monodromy(tf, sf, _cls.sigma_of_kind(kind, tf))}
    elif tag is T.LANTERN1:
        nu, phi = nu_phi_from_monodromy(t, s, point)
        constants = {"nu": nu, "phi": phi}
    elif tag is T.TAU:
        constants = {"a": a_for_tau(tf, sf, "0")}
    elif tag in (T.UUU, T.DIV):
        a, exponent, name = constants_for_uuu_div(tf, sf)
        constants = {"a": a, name: exponent}
    elif tag in (T.DAVIDEKAN, T.T1COE):
        constants = {}
    elif tag in (T.TTLO2, T.TTLO4, T.LOG1ZERO, T.LOGSQUARE):
        name = {T.TTLO2: "TTLO2", T.TTLO4: "TTLO4",
                T.LOG1ZERO: "Log1Zero", T.LOGSQUARE: "LogSquare"}[tag]
        constants = {"a": special_constants(name, tf, sf)}
    elif tag is T.TTLO3 and kind.N == 1:
        constants = {"a": special_constants("T2coe", tf, sf)}
    elif tag is T.TTLO1 and kind.N is not None and abs(kind.N) == 1:
        # basic-Taylor subfamily: the reciprocal image of the one at +2
        c = coefficients_from_theta(tf)
        if abs(c.alpha - c.gamma) > 1e-8:
            raise UnsupportedKind("TTLO1 outside the basic subfamily (alpha != gamma)")
        tt = apply_okamoto_theta(OkamotoElement.SYM2, tf)
        ss = apply_okamoto_traces(OkamotoElement.SYM2, sf)
        ap = special_constants("T2coe", tt, ss)
        constants = {"a": 2.0 * c.beta * ap}
    else:
        raise UnsupportedKind(f"no parametric formula for {tag.value}")
    return _cls.BehaviourDescriptor(kind=kind, constants=constants)


def connect_closed_form(desc, t: ThetaVector, v: str):
    """Closed-form connection: descriptor at one critical point to the
    descriptor of the same branch at another.

    Steps: read the constants, build the trace set from the inverse
    parametric formula, classify at the target point, and evaluate the
    parametric formula there.
    """
    if desc.kind.point == v:
        return desc
    s = traces_from_descriptor(desc, t)
    return descriptor_from_monodromy(t, s, v)
