"""Monodromy data model: theta exponents, PVI coefficients, the seven trace
invariants on the Fricke cubic, and the trace/theta actions of the
bi-rational transformations.

Conventions
-----------
All square roots are principal.  A :class:`ThetaVector` stores the values
it was constructed with; :meth:`ThetaVector.canonical` returns the fixed
representative of the equivalence class
``theta_k -> -theta_k`` (k = 0, x, 1), ``theta_inf -> 2 - theta_inf``,
which is what the deterministic connection formulae are evaluated on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DegenerateQuadratic,
    NotInFactorizedRegime,
    ThetaInfinityZero,
)

__all__ = [
    "ThetaVector",
    "PviCoefficients",
    "TraceSet",
    "OkamotoElement",
    "theta_from_coefficients",
    "coefficients_from_theta",
    "peripheral_traces",
    "fricke_residual",
    "solve_third_trace",
    "factor_residuals",
    "apply_okamoto_traces",
    "apply_okamoto_theta",
    "ON_CUBIC_TOL",
]

# Forward constructions land within ~1e-12 of the cubic; 1e-9 leaves headroom.
ON_CUBIC_TOL = 1e-9


def _finite(z: complex, name: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z}")
    return z


def _cospi(z: complex) -> complex:
    n = math.floor(z.real + 0.5)
    r = z - n
    c = cmath.cos(math.pi * r)
    return -c if n % 2 else c


def _flip_nonneg(z: complex) -> complex:
    if z.real > 0.0:
        return z
    if z.real < 0.0:
        return -z
    return z if z.imag >= 0.0 else -z


@dataclass(frozen=True)
class ThetaVector:
    """The four exponents (theta_0, theta_x, theta_1, theta_inf).

    Values are kept exactly as given (the printed transformation rules act
    on raw values); ``canonical()`` produces the quotient representative
    with Re theta_k >= 0 (k = 0, x, 1) and Re theta_inf >= 1.
    """

    theta0: complex
    thetax: complex
    theta1: complex
    thetainf: complex

    def __post_init__(self) -> None:
        for name in ("theta0", "thetax", "theta1", "thetainf"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        if abs(self.thetainf) < 1e-12:
            raise ThetaInfinityZero("theta_inf = 0 is not representable")

    def canonical(self) -> "ThetaVector":
        t0 = _flip_nonneg(self.theta0)
        tx = _flip_nonneg(self.thetax)
        t1 = _flip_nonneg(self.theta1)
        ti = self.thetainf
        if ti.real < 1.0 or (ti.real == 1.0 and ti.imag < 0.0):
            ti = 2.0 - ti
        return ThetaVector(t0, tx, t1, ti)

    def is_equivalent(self, other: "ThetaVector", tol: float = 1e-12) -> bool:
        a, b = self.canonical(), other.canonical()
        return all(
            abs(getattr(a, f) - getattr(b, f)) <= tol
            for f in ("theta0", "thetax", "theta1", "thetainf")
        )

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.theta0, self.thetax, self.theta1, self.thetainf)

    def to_json(self) -> dict:
        return {
            "theta0": [self.theta0.real, self.theta0.imag],
            "thetax": [self.thetax.real, self.thetax.imag],
            "theta1": [self.theta1.real, self.theta1.imag],
            "thetainf": [self.thetainf.real, self.thetainf.imag],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ThetaVector":
        return cls(*(complex(*d[k]) for k in ("theta0", "thetax", "theta1", "thetainf")))


@dataclass(frozen=True)
class PviCoefficients:
    """PVI coefficients (alpha, beta, gamma, delta) with cached principal roots."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    sqrt2alpha: complex = field(init=False)
    sqrtm2beta: complex = field(init=False)
    sqrt2gamma: complex = field(init=False)
    sqrt1m2delta: complex = field(init=False)

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        object.__setattr__(self, "sqrt2alpha", cmath.sqrt(2.0 * self.alpha))
        object.__setattr__(self, "sqrtm2beta", cmath.sqrt(-2.0 * self.beta))
        object.__setattr__(self, "sqrt2gamma", cmath.sqrt(2.0 * self.gamma))
        object.__setattr__(self, "sqrt1m2delta", cmath.sqrt(1.0 - 2.0 * self.delta))

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def to_json(self) -> dict:
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "beta": [self.beta.real, self.beta.imag],
            "gamma": [self.gamma.real, self.gamma.imag],
            "delta": [self.delta.real, self.delta.imag],
        }

    @classmethod
    def from_json(cls, d: dict) -> "PviCoefficients":
        return cls(*(complex(*d[k]) for k in ("alpha", "beta", "gamma", "delta")))


@dataclass(frozen=True)
class TraceSet:
    """The seven invariants: peripheral traces p_mu and pair traces p_ij."""

    p0: complex
    px: complex
    p1: complex
    pinf: complex
    p0x: complex
    px1: complex
    p01: complex

    def __post_init__(self) -> None:
        for name in ("p0", "px", "p1", "pinf", "p0x", "px1", "p01"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))

    def pairs(self) -> tuple[complex, complex, complex]:
        return (self.p0x, self.px1, self.p01)

    def to_json(self) -> dict:
        return {
            name: [getattr(self, name).real, getattr(self, name).imag]
            for name in ("p0", "px", "p1", "pinf", "p0x", "px1", "p01")
        }

    @classmethod
    def from_json(cls, d: dict) -> "TraceSet":
        return cls(*(complex(*d[k]) for k in ("p0", "px", "p1", "pinf", "p0x", "px1", "p01")))

    @classmethod
    def from_theta(cls, t: ThetaVector, p0x: complex, px1: complex, p01: complex) -> "TraceSet":
        p0, px, p1, pinf = peripheral_traces(t)
        return cls(p0, px, p1, pinf, p0x, px1, p01)


class OkamotoElement(Enum):
    """Bi-rational transformation tags: permutations, Weyl flips, shifts."""

    ONARA = "Onara"
    ONARA1 = "Onara1"
    SYM2 = "Sym2"
    W1 = "W1"
    W2 = "W2"
    W3 = "W3"
    W4 = "W4"
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"


def theta_from_coefficients(c: PviCoefficients) -> ThetaVector:
    """Exponents from coefficients: theta0 = sqrt(-2 beta), theta_x =
    sqrt(1 - 2 delta), theta1 = sqrt(2 gamma), theta_inf = 1 + sqrt(2 alpha),
    returned canonicalized."""
    t = ThetaVector(c.sqrtm2beta, c.sqrt1m2delta, c.sqrt2gamma, 1.0 + c.sqrt2alpha)
    return t.canonical()


def coefficients_from_theta(t: ThetaVector) -> PviCoefficients:
    """Coefficients from exponents (invariant under the sign equivalence)."""
    return PviCoefficients(
        alpha=(t.thetainf - 1.0) ** 2 / 2.0,
        beta=-t.theta0**2 / 2.0,
        gamma=t.theta1**2 / 2.0,
        delta=(1.0 - t.thetax**2) / 2.0,
    )


def peripheral_traces(t: ThetaVector) -> tuple[complex, complex, complex, complex]:
    """p_mu = 2 cos(pi theta_mu) for mu = 0, x, 1, inf."""
    return tuple(2.0 * _cospi(v) for v in t.as_tuple())


def fricke_residual(s: TraceSet) -> complex:
    """Left-hand side of the Fricke cubic relation; 0 iff s lies on it."""
    p0, px, p1, pinf = s.p0, s.px, s.p1, s.pinf
    p0x, px1, p01 = s.p0x, s.px1, s.p01
    return (
        p0x**2 + p01**2 + px1**2 + p0x * p01 * px1
        - (p0 * px + p1 * pinf) * p0x
        - (p0 * p1 + px * pinf) * p01
        - (px * p1 + p0 * pinf) * px1
        + p0**2 + p1**2 + px**2 + pinf**2
        + p0 * px * p1 * pinf - 4.0
    )


def solve_third_trace(s: TraceSet) -> tuple[complex, complex]:
    """Both roots of the cubic relation viewed as a monic quadratic in p01.

    The p01 field of ``s`` is ignored; the other six fields define the
    quadratic.  Each returned root satisfies the cubic to ~1e-12.
    """
    p0, px, p1, pinf = s.p0, s.px, s.p1, s.pinf
    p0x, px1 = s.p0x, s.px1
    b = p0x * px1 - (p0 * p1 + px * pinf)
    c = (
        p0x**2 + px1**2
        - (p0 * px + p1 * pinf) * p0x
        - (px * p1 + p0 * pinf) * px1
        + p0**2 + p1**2 + px**2 + pinf**2
        + p0 * px * p1 * pinf - 4.0
    )
    disc = cmath.sqrt(b * b - 4.0 * c)
    if not (math.isfinite(disc.real) and math.isfinite(disc.imag)):
        raise DegenerateQuadratic("discriminant overflow in third-trace solve")
    return ((-b + disc) / 2.0, (-b - disc) / 2.0)


def factor_residuals(t: ThetaVector, s: TraceSet, point: str) -> tuple[complex, complex]:
    """The two bracket factors of the factorised cubic at the given point.

    Applicable when the governing pair trace equals 2 cos(pi (theta_inf -+
    theta_k)) for the point's partner exponent; on the cubic one of the two
    returned factors vanishes.

    Raises
    ------
    NotInFactorizedRegime
        When the governing trace matches neither factorisation condition.
    """
    t0, tx, t1, ti = t.as_tuple()
    E = lambda z: cmath.exp(1j * math.pi * z)  # noqa: E731
    C = lambda z: _cospi(z)  # noqa: E731
    match_tol = 1e-8

    if point == "0":
        p = s.p0x
        if abs(p - 2.0 * C(ti - t1)) < match_tol:
            w = ti - t1
            f1 = s.p01 + s.px1 * E(w) - 2.0 * (E(-t1) * C(t0) + E(ti) * C(tx))
            f2 = s.p01 + s.px1 * E(-w) - 2.0 * (E(t1) * C(t0) + E(-ti) * C(tx))
        elif abs(p - 2.0 * C(ti + t1)) < match_tol:
            w = ti + t1
            f1 = s.p01 + s.px1 * E(w) - 2.0 * (E(t1) * C(t0) + E(ti) * C(tx))
            f2 = s.p01 + s.px1 * E(-w) - 2.0 * (E(-t1) * C(t0) + E(-ti) * C(tx))
        else:
            raise NotInFactorizedRegime(f"p0x = {p} matches neither 2cos(pi(ti -+ t1))")
    elif point == "1":
        p = s.px1
        # second brackets read with p0x throughout; the factorisation does
        # not close on the cubic otherwise
        if abs(p - 2.0 * C(ti - t0)) < match_tol:
            w = ti - t0
            f1 = s.p01 + s.p0x * E(w) - 2.0 * (E(-t0) * C(t1) + E(ti) * C(tx))
            f2 = s.p01 + s.p0x * E(-w) - 2.0 * (E(t0) * C(t1) + E(-ti) * C(tx))
        elif abs(p - 2.0 * C(ti + t0)) < match_tol:
            w = ti + t0
            f1 = s.p01 + s.p0x * E(w) - 2.0 * (E(t0) * C(t1) + E(ti) * C(tx))
            f2 = s.p01 + s.p0x * E(-w) - 2.0 * (E(-t0) * C(t1) + E(-ti) * C(tx))
        else:
            raise NotInFactorizedRegime(f"px1 = {p} matches neither 2cos(pi(ti -+ t0))")
    elif point == "inf":
        p = s.p01
        if abs(p - 2.0 * C(ti - tx)) < match_tol:
            w = ti - tx
            f1 = s.p0x + s.px1 * E(-w) - 2.0 * (E(tx) * C(t0) + E(-ti) * C(t1))
            f2 = s.p0x + s.px1 * E(w) - 2.0 * (E(-tx) * C(t0) + E(ti) * C(t1))
        elif abs(p - 2.0 * C(ti + tx)) < match_tol:
            w = ti + tx
            f1 = s.p0x + s.px1 * E(-w) - 2.0 * (E(-tx) * C(t0) + E(-ti) * C(t1))
            f2 = s.p0x + s.px1 * E(w) - 2.0 * (E(tx) * C(t0) + E(ti) * C(t1))
        else:
            raise NotInFactorizedRegime(f"p01 = {p} matches neither 2cos(pi(ti -+ tx))")
    else:
        raise ValueError(f"point must be '0', '1' or 'inf', got {point!r}")
    return f1, f2


def apply_okamoto_theta(e: OkamotoElement, t: ThetaVector) -> ThetaVector:
    """Printed theta-action of a transformation (no re-canonicalisation)."""
    t0, tx, t1, ti = t.as_tuple()
    if e is OkamotoElement.ONARA:
        out = (t1, tx, t0, ti)
    elif e is OkamotoElement.ONARA1:
        out = (t0, t1, tx, ti)
    elif e is OkamotoElement.SYM2:
        out = (ti - 1.0, t1, tx, t0 + 1.0)
    elif e is OkamotoElement.W1:
        out = (t0, tx, -t1, ti)
    elif e is OkamotoElement.W2:
        h = (t0 + t1 + tx + ti) / 2.0
        out = (h - 1.0, (t0 - t1 + tx - ti) / 2.0 + 1.0,
               (t0 + t1 - tx - ti) / 2.0 + 1.0, (t0 - t1 - tx + ti) / 2.0 + 1.0)
    elif e is OkamotoElement.W3:
        out = (t0, tx, t1, 2.0 - ti)
    elif e is OkamotoElement.W4:
        out = (t0, 2.0 - tx, t1, 2.0 - ti)
    elif e is OkamotoElement.L1:
        out = (t0 + 1.0, tx, t1 + 1.0, ti)
    elif e is OkamotoElement.L2:
        out = (t0 + 1.0, tx, t1 - 1.0, ti)
    elif e is OkamotoElement.L3:
        out = (t0, tx + 1.0, t1, ti + 1.0)
    elif e is OkamotoElement.L4:
        out = (t0, tx + 1.0, t1, ti - 1.0)
    else:  # pragma: no cover
        raise ValueError(f"unknown element {e}")
    if abs(out[3]) < 1e-12:
        raise ThetaInfinityZero(f"{e.value} image has theta_inf = 0")
    return ThetaVector(*out)


def apply_okamoto_traces(e: OkamotoElement, s: TraceSet) -> TraceSet:
    """Trace action of the permutation elements Onara, Onara1, Sym2.

    The Weyl/shift elements carry a theta-action only; their trace actions
    are not provided here.
    """
    p0, px, p1, pinf = s.p0, s.px, s.p1, s.pinf
    p0x, px1, p01 = s.p0x, s.px1, s.p01
    if e is OkamotoElement.ONARA:
        return TraceSet(
            p0=p1, px=px, p1=p0, pinf=pinf,
            p0x=px1, px1=p0x,
            p01=-p01 - p0x * px1 + pinf * px + p1 * p0,
        )
    if e is OkamotoElement.ONARA1:
        return TraceSet(
            p0=p0, px=p1, p1=px, pinf=pinf,
            p0x=-p01 - p0x * px1 + pinf * px + p0 * p1,
            px1=px1, p01=p0x,
        )
    if e is OkamotoElement.SYM2:
        return TraceSet(
            p0=-pinf, px=p1, p1=px, pinf=-p0,
            p0x=-p0x, px1=px1, p01=-p01,
        )
    raise ValueError(f"trace action unavailable for {e.value}")
