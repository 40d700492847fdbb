"""Resonance numbers and the decision tables mapping (theta, traces, point)
to a critical-behaviour family.

Classification at x = 1 and x = infinity reuses the x = 0 engine on the
transported data, which makes the point-symmetry property exact by
construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .complexfn import INT_TOL, arccos_unit
from .errors import (
    AmbiguousResonance,
    DegenerateLimit,
    GammaPole,
    OffCubic,
    OutsidePrincipalStrip,
    ResonantDenominator,
    VanishingDenominator,
)
from .monodromy import (
    ON_CUBIC_TOL,
    PviCoefficients,
    ThetaVector,
    TraceSet,
    coefficients_from_theta,
    fricke_residual,
)
from . import connect as _connect

__all__ = [
    "Tag",
    "BehaviourKind",
    "BehaviourDescriptor",
    "ResonanceNumbers",
    "resonance_numbers",
    "classify_at",
    "sigma_of_kind",
    "nu_of_kind",
    "omega_of_kind",
    "FREE_PARAMS",
]

_PI = math.pi
_TRACE_TOL = 1e-9
_ZERO_A_TOL = 1e-10


def _cp(z: complex) -> complex:
    n = math.floor(z.real + 0.5) if abs(z.real) < 1e15 else 0
    r = z - n
    c = cmath.cos(_PI * r)
    return -c if n % 2 else c


class Tag(Enum):
    """Behaviour family labels (point-0 names; points 1/inf reuse them)."""

    FULL_EXP = "FullExp"
    ATOPY = "Atopy"
    UUU = "UUU"
    DIV = "Div"
    LANTERN1 = "Lantern1"
    TAU = "Tau"
    DAVIDEKAN = "Davidekan"
    TTLO1 = "TTLO1"
    TTLO2 = "TTLO2"
    T1COE = "T1coe"
    TTLO3 = "TTLO3"
    TTLO4 = "TTLO4"
    LOG1 = "Log1"
    LOG1ZERO = "Log1Zero"
    LOGSQUARE = "LogSquare"
    LOG12 = "LOG12"
    LOG45 = "LOG45"
    LOG3 = "LOG3"


# Free parameters per family ("sigma"/"nu"/"rho"/"omega" entries beyond the
# table's free column are derived values stored for downstream series use).
FREE_PARAMS: dict[Tag, frozenset[str]] = {
    Tag.FULL_EXP: frozenset({"sigma", "a"}),
    Tag.ATOPY: frozenset({"a"}),
    Tag.UUU: frozenset({"a"}),
    Tag.DIV: frozenset({"a"}),
    Tag.LANTERN1: frozenset({"nu", "phi"}),
    Tag.TAU: frozenset({"a"}),
    Tag.DAVIDEKAN: frozenset(),
    Tag.T1COE: frozenset(),
    Tag.TTLO1: frozenset({"a"}),
    Tag.TTLO2: frozenset({"a"}),
    Tag.TTLO3: frozenset({"a"}),
    Tag.TTLO4: frozenset({"a"}),
    Tag.LOG1: frozenset({"a"}),
    Tag.LOG1ZERO: frozenset({"a"}),
    Tag.LOGSQUARE: frozenset({"a"}),
    Tag.LOG12: frozenset({"a"}),
    Tag.LOG45: frozenset({"a"}),
    Tag.LOG3: frozenset({"a"}),
}

_DERIVED = frozenset({"sigma", "nu", "rho", "omega"})


@dataclass(frozen=True)
class BehaviourKind:
    """A family tag with the critical point it applies at, plus the
    resonance index k and/or integer N where the family needs one."""

    tag: Tag
    point: str = "0"
    k: Optional[int] = None
    N: Optional[int] = None

    def __post_init__(self) -> None:
        if self.point not in ("0", "1", "inf"):
            raise ValueError(f"point must be '0', '1' or 'inf', got {self.point!r}")

    def to_json(self) -> dict:
        out: dict = {"tag": self.tag.value, "point": self.point}
        if self.k is not None:
            out["k"] = self.k
        if self.N is not None:
            out["N"] = self.N
        return out

    @classmethod
    def from_json(cls, d: dict) -> "BehaviourKind":
        return cls(tag=Tag(d["tag"]), point=d.get("point", "0"),
                   k=d.get("k"), N=d.get("N"))


@dataclass(frozen=True)
class BehaviourDescriptor:
    """A classified family together with its integration constants."""

    kind: BehaviourKind
    constants: dict

    def __post_init__(self) -> None:
        required = FREE_PARAMS[self.kind.tag]
        have = set(self.constants)
        if not required <= have:
            raise ValueError(f"{self.kind.tag.value}: missing constants {required - have}")
        extra = have - required - _DERIVED
        if extra:
            raise ValueError(f"{self.kind.tag.value}: unexpected constants {extra}")

    def to_json(self) -> dict:
        return {
            "kind": self.kind.to_json(),
            "constants": {k: [complex(v).real, complex(v).imag]
                          for k, v in sorted(self.constants.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> "BehaviourDescriptor":
        return cls(kind=BehaviourKind.from_json(d["kind"]),
                   constants={k: complex(*v) for k, v in d["constants"].items()})


@dataclass(frozen=True)
class ResonanceNumbers:
    """Admissible resonance values at a critical point.

    Each Sigma candidate is +-(u + (-1)^k v) when the modulus is below 1,
    otherwise the sign-normalised value; Omega candidates use the real-part
    criterion instead.
    """

    sigma_candidates: list
    omega_candidates: list
    point: str = "0"


def _dedupe(vals: list[complex]) -> list[complex]:
    out: list[complex] = []
    for v in vals:
        if not any(abs(v - w) < 1e-12 for w in out):
            out.append(v)
    return out


def _sgn_re(z: complex) -> float:
    # sign convention: sgn(0) = +1
    return -1.0 if z.real < 0.0 else 1.0


def resonance_numbers(c: PviCoefficients, point: str = "0") -> ResonanceNumbers:
    """Sigma/Omega resonance candidates of the coefficient set at a point."""
    pairs = {
        "0": ((c.sqrtm2beta, c.sqrt1m2delta), (c.sqrt2alpha, c.sqrt2gamma)),
        "1": ((c.sqrt2gamma, c.sqrt1m2delta), (c.sqrt2alpha, c.sqrtm2beta)),
        "inf": ((c.sqrtm2beta, c.sqrt2gamma), (c.sqrt2alpha, c.sqrt1m2delta)),
    }[point]
    (su, sv), (wu, wv) = pairs
    sig: list[complex] = []
    for k in (1, 2):
        v = su + (-1) ** k * sv
        if abs(v) < 1.0:
            sig.extend([v, -v])
        else:
            sig.append(v * _sgn_re(v))
    om: list[complex] = []
    for k in (1, 2):
        w = wu + (-1) ** k * wv
        if abs(w.real) < 1.0:
            om.extend([w, -w])
        else:
            om.append(w * _sgn_re(w))
    return ResonanceNumbers(_dedupe(sig), _dedupe(om), point)


# ---------------------------------------------------------------------------
# kind -> derived exponents
# ---------------------------------------------------------------------------

def _sigma_combos(t: ThetaVector) -> list[complex]:
    return [t.theta0 - t.thetax, t.theta0 + t.thetax]


def _omega_combos(t: ThetaVector) -> list[complex]:
    return [(t.thetainf - 1.0) - t.theta1, (t.thetainf - 1.0) + t.theta1]


def _norm_sign(v: complex) -> complex:
    if v.real > 0.0:
        return v
    if v.real < 0.0:
        return -v
    return v if v.imag <= 0.0 else -v


def sigma_of_kind(kind: BehaviourKind, tf: ThetaVector) -> complex:
    """Resonant exponent of a one-parameter power family, frame theta given."""
    if kind.k is None:
        raise ValueError(f"{kind.tag.value} kind carries no combination index")
    v = _sigma_combos(tf)[kind.k - 1]
    return _norm_sign(v)


def omega_of_kind(kind: BehaviourKind, tf: ThetaVector) -> complex:
    if kind.k is None:
        raise ValueError(f"{kind.tag.value} kind carries no combination index")
    w = _omega_combos(tf)[kind.k - 1]
    return _norm_sign(w)


def nu_of_kind(kind: BehaviourKind, tf: ThetaVector) -> float:
    """nu > 0 of the resonant oscillatory family (2 i nu equals the
    matching Omega combination)."""
    w = _omega_combos(tf)[kind.k - 1]
    if abs(w.real) > 1e-8:
        raise ValueError("resonance number is not purely imaginary")
    return abs(w.imag) / 2.0


# ---------------------------------------------------------------------------
# decision tables
# ---------------------------------------------------------------------------

def _as_int(z: complex, tol: float = INT_TOL) -> Optional[int]:
    n = round(z.real)
    return n if abs(z - n) < tol else None


def _cal_n(N: int) -> list[int]:
    aN = abs(N)
    if aN == 0:
        return []
    if N % 2:
        return list(range(0, aN, 2)) + list(range(-2, -aN, -2))
    return list(range(1, aN, 2)) + list(range(-1, -aN, -2))


def classify_at(t: ThetaVector, s: TraceSet, point: str = "0") -> BehaviourKind:
    """Identify the critical-behaviour family from monodromy data.

    The trace set must lie on the Fricke cubic.  Inputs that satisfy two
    branch conditions at once raise :class:`AmbiguousResonance` rather than
    being forced into a family.
    """
    if abs(fricke_residual(s)) > ON_CUBIC_TOL:
        raise OffCubic(f"|fricke residual| = {abs(fricke_residual(s)):.3e} > {ON_CUBIC_TOL}")
    sf, tf = _connect.transport_traces(s, t, point, "forward")
    kind0 = _classify_zero(tf, sf)
    return BehaviourKind(kind0.tag, point, kind0.k, kind0.N)


def _classify_zero(tf: ThetaVector, sf: TraceSet) -> BehaviourKind:
    p = sf.p0x
    sig_combos = _sigma_combos(tf)
    om_combos = _omega_combos(tf)

    # (i) oscillatory: real trace strictly below -2
    if abs(p.imag) <= 1e-10 and p.real < -2.0 - 1e-10:
        for k, w in enumerate(om_combos, 1):
            if abs(p + 2.0 * _cp(w)) < _TRACE_TOL:
                return BehaviourKind(Tag.TAU, "0", k=k)
        return BehaviourKind(Tag.LANTERN1, "0")

    # (v) Taylor / logarithmic sub-table at p = +-2
    if abs(p - 2.0) < _TRACE_TOL:
        return _pm2_subtable(tf, sf, +1)
    if abs(p + 2.0) < _TRACE_TOL:
        return _pm2_subtable(tf, sf, -1)

    sig_match = [k for k, v in enumerate(sig_combos, 1) if abs(p - 2.0 * _cp(v)) < _TRACE_TOL]
    om_match = [k for k, w in enumerate(om_combos, 1) if abs(p + 2.0 * _cp(w)) < _TRACE_TOL]
    if sig_match and om_match:
        raise AmbiguousResonance(
            f"trace {p} matches both a Sigma and an Omega resonance (k = {sig_match}, {om_match})")

    # (iii) reducible <M0, Mx>: one-parameter family or its Taylor reduction
    if sig_match:
        k = sig_match[0]
        a = _atopy_parameter(tf, sf, k)
        if a is None or abs(a) < _ZERO_A_TOL:
            return BehaviourKind(Tag.DAVIDEKAN, "0", k=k)
        return BehaviourKind(Tag.ATOPY, "0", k=k)

    # (iv) reducible <Mx M0, M1>: bounded limit keeps the generic family
    if om_match:
        k = om_match[0]
        sigma0 = arccos_unit(p)
        try:
            _connect.a_from_monodromy(tf, sf, sigma0)
            return BehaviourKind(Tag.FULL_EXP, "0")
        except (DegenerateLimit, GammaPole) as exc:
            c = coefficients_from_theta(tf)
            if abs(c.alpha) < INT_TOL:
                return BehaviourKind(Tag.DIV, "0")
            try:
                a, _, _ = _connect.constants_for_uuu_div(tf, sf)
            except (DegenerateLimit, GammaPole, VanishingDenominator, ResonantDenominator):
                return BehaviourKind(Tag.UUU, "0", k=k)
            if abs(a) < _ZERO_A_TOL:
                return BehaviourKind(Tag.T1COE, "0", k=k)
            return BehaviourKind(Tag.UUU, "0", k=k)

    # (ii) generic two-parameter behaviour
    return BehaviourKind(Tag.FULL_EXP, "0")


def _atopy_parameter(tf: ThetaVector, sf: TraceSet, k: int) -> Optional[complex]:
    """Limit parameter of the one-parameter power family; None when it is
    zero for both admissible exponent signs (the Taylor reduction)."""
    v = _norm_sign(_sigma_combos(tf)[k - 1])
    zeroish = False
    for sigma in (v, -v):
        try:
            return _connect.a_from_monodromy(tf, sf, sigma)
        except DegenerateLimit as exc:
            val = getattr(exc, "value", None)
            if val is not None and abs(val) < 1e-6:
                zeroish = True
        except (GammaPole, VanishingDenominator, ResonantDenominator):
            continue
    if zeroish:
        return None
    raise AmbiguousResonance(
        "one-parameter family limit is neither finite-nonzero nor zero")


def _pm2_subtable(tf: ThetaVector, sf: TraceSet, sign: int) -> BehaviourKind:
    c = coefficients_from_theta(tf)
    sig_N = []
    for k, v in enumerate(_sigma_combos(tf), 1):
        n = _as_int(v)
        if n is not None and (1 if n % 2 == 0 else -1) == sign:
            sig_N.append((k, n))
    om_N = []
    for k, w in enumerate(_omega_combos(tf), 1):
        n = _as_int(w)
        if n is not None and (-1 if n % 2 == 0 else 1) == sign:
            om_N.append((k, n))

    def sigma_side(k: int, N: int) -> BehaviourKind:
        if N == 0:
            if abs(c.beta) < INT_TOL:
                return BehaviourKind(Tag.TTLO2, "0")
            return BehaviourKind(Tag.LOG1ZERO, "0", k=k)
        taylor = _int_in_range(c.sqrtm2beta, N, include_zero=True) or _overlaps_cal_n(
            _omega_combos(tf), N)
        return BehaviourKind(Tag.TTLO1 if taylor else Tag.LOG1, "0", k=k, N=N)

    def omega_side(k: int, N: int) -> BehaviourKind:
        if N == 0:
            if abs(c.alpha) < INT_TOL and abs(c.gamma) < INT_TOL:
                return BehaviourKind(Tag.TTLO4, "0")
            return BehaviourKind(Tag.LOG45, "0", k=k)
        taylor = _int_in_range(c.sqrt2alpha, N, include_zero=False) or _overlaps_cal_n(
            _sigma_combos(tf), N)
        return BehaviourKind(Tag.TTLO3 if taylor else Tag.LOG12, "0", k=k, N=N)

    if sig_N and om_N:
        # doubly matched: the cross-reduction conditions decide; a side whose
        # row reduces to a Taylor family wins over a logarithmic one
        ks = sigma_side(*sig_N[0])
        ko = omega_side(*om_N[0])
        s_taylor = ks.tag in (Tag.TTLO1, Tag.TTLO2)
        o_taylor = ko.tag in (Tag.TTLO3, Tag.TTLO4)
        if o_taylor and not s_taylor:
            return ko
        if s_taylor and not o_taylor:
            return ks
        raise AmbiguousResonance(
            f"trace {2 * sign} matches integer resonances on both sides: {sig_N}, {om_N}")

    if sig_N:
        return sigma_side(*sig_N[0])
    if om_N:
        return omega_side(*om_N[0])

    if sign > 0:
        return BehaviourKind(Tag.LOGSQUARE, "0")
    return BehaviourKind(Tag.LOG3, "0")


def _int_in_range(z: complex, N: int, include_zero: bool) -> bool:
    n = _as_int(z)
    if n is None:
        return False
    lo, hi = (min(0, N), max(0, N))
    if not include_zero and n == 0:
        return False
    return lo <= n <= hi


def _overlaps_cal_n(combos: list[complex], N: int) -> bool:
    cal = _cal_n(N)
    for v in combos:
        n = _as_int(v)
        if n is not None and n in cal:
            return True
    return False
