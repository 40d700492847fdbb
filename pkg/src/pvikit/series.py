"""Critical-behaviour series: construction by order-by-order substitution
into the cleared PVI polynomial identity, evaluation with derivatives,
bi-rational mapping, and the reducible hypergeometric family.

Internal representation
-----------------------
A truncated double series lives on an (n, m) grid holding the coefficient
of ``x**n * t**m`` with ``t = a x**lam`` (power axis), or of
``x**n * L**m`` with ``L = ln x`` (log axis).  Inverse families store the
direct series of ``x / y`` built in the rotated frame and wrap it at
evaluation time.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .classify import BehaviourKind, Tag, sigma_of_kind, nu_of_kind, omega_of_kind
from .errors import (
    ConstraintViolation,
    HypergeometricDegenerate,
    NearPole,
    OnSingularSet,
    OutsideDomain,
    ResonantCoefficient,
    UnsupportedMap,
)
from .monodromy import (
    OkamotoElement,
    PviCoefficients,
    ThetaVector,
    apply_okamoto_theta,
    coefficients_from_theta,
)

__all__ = [
    "Expansion",
    "build_expansion",
    "evaluate",
    "evaluate_with_second",
    "map_expansion",
    "pvi_residual",
    "pvi_residual_cleared",
    "reducible_solution",
    "residual_tail",
    "DEFAULT_ORDER",
    "DEFAULT_RADIUS",
]

DEFAULT_ORDER = 12
DEFAULT_RADIUS = 0.05

_NLO = -2  # lowest x-grade rows kept (derivatives of x^{m lam} terms)


class _Grid:
    """Dense (n, m) coefficient grid with truncated multiplication.

    The second axis covers m in [mlo, mhi]: symmetric charges for power
    kinds, non-negative log degrees for log kinds.
    """

    __slots__ = ("a", "nmax", "mlo", "mhi", "lam", "log")

    def __init__(self, nmax: int, mlo: int, mhi: int, lam: complex, log: bool):
        self.nmax = nmax
        self.mlo = mlo
        self.mhi = mhi
        self.lam = lam
        self.log = log
        self.a = np.zeros((nmax - _NLO + 1, mhi - mlo + 1), dtype=complex)

    def like(self) -> "_Grid":
        return _Grid(self.nmax, self.mlo, self.mhi, self.lam, self.log)

    def copy(self) -> "_Grid":
        g = self.like()
        g.a = self.a.copy()
        return g

    def row(self, n: int) -> np.ndarray:
        return self.a[n - _NLO]

    def set(self, n: int, m: int, v: complex) -> None:
        self.a[n - _NLO, m - self.mlo] = v

    def get(self, n: int, m: int) -> complex:
        return self.a[n - _NLO, m - self.mlo]

    def __add__(self, o: "_Grid") -> "_Grid":
        g = self.copy()
        g.a += o.a
        return g

    def __sub__(self, o: "_Grid") -> "_Grid":
        g = self.copy()
        g.a -= o.a
        return g

    def scale(self, c: complex) -> "_Grid":
        g = self.copy()
        g.a *= c
        return g

    def mul(self, o: "_Grid", nmax: Optional[int] = None) -> "_Grid":
        nmax = self.nmax if nmax is None else nmax
        out = self.like()
        W = self.mhi - self.mlo + 1
        arows = [n for n in range(_NLO, self.nmax + 1) if np.any(self.a[n - _NLO])]
        brows = [n for n in range(_NLO, o.nmax + 1) if np.any(o.a[n - _NLO])]
        for n1 in arows:
            r1 = self.a[n1 - _NLO]
            for n2 in brows:
                n = n1 + n2
                if n > nmax or n < _NLO:
                    continue
                # conv index k holds charge m = k + 2*mlo
                full = np.convolve(r1, o.a[n2 - _NLO])
                out.a[n - _NLO] += full[-self.mlo: -self.mlo + W]
        return out

    def dx(self) -> "_Grid":
        out = self.like()
        idx = np.arange(self.mlo, self.mhi + 1)
        if not self.log:
            for n in range(_NLO + 1, self.nmax + 1):
                out.a[n - 1 - _NLO] += (n + idx * self.lam) * self.a[n - _NLO]
        else:
            for n in range(_NLO + 1, self.nmax + 1):
                row = self.a[n - _NLO]
                out.a[n - 1 - _NLO] += n * row
                out.a[n - 1 - _NLO, : -1] += idx[1:] * row[1:]
        return out

    def monomial_mul(self, n0: int, m0: int, c: complex, nmax: int) -> "_Grid":
        out = self.like()
        W = self.mhi - self.mlo + 1
        for n_src in range(_NLO, self.nmax + 1):
            n_dst = n_src + n0
            if n_dst < _NLO or n_dst > nmax:
                continue
            row = self.a[n_src - _NLO]
            if not np.any(row):
                continue
            if m0 >= 0:
                out.a[n_dst - _NLO, m0:] += c * row[: W - m0]
            else:
                out.a[n_dst - _NLO, : W + m0] += c * row[-m0:]
        return out

    def min_grade(self, tol: float) -> Optional[int]:
        for n in range(_NLO, self.nmax + 1):
            if np.any(np.abs(self.a[n - _NLO]) > tol):
                return n
        return None

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.a))) if self.a.size else 0.0


def _const(g: _Grid, c: complex) -> _Grid:
    out = g.like()
    out.set(0, 0, c)
    return out


def _xpoly(g: _Grid, coeffs: dict[int, complex]) -> _Grid:
    out = g.like()
    for n, c in coeffs.items():
        out.set(n, 0, c)
    return out


def _cleared_residual(y: _Grid, c: PviCoefficients, nmax: int) -> _Grid:
    """2 x^2 (x-1)^2 y (y-1)(y-x) times (PVI lhs - rhs), as a grid."""
    al, be, ga, de = c.alpha, c.beta, c.gamma, c.delta
    one = _const(y, 1.0)
    x = _xpoly(y, {1: 1.0})
    yp = y.dx()
    ypp = yp.dx()
    ym1 = y - one
    ymx = y - x
    P01 = y.mul(ym1, nmax)
    P0x = y.mul(ymx, nmax)
    P1x = ym1.mul(ymx, nmax)
    A = P01.mul(ymx, nmax)
    B = P01 + P0x + P1x
    E1 = _xpoly(y, {2: 2.0, 3: -4.0, 4: 2.0})
    E2 = _xpoly(y, {1: 2.0, 2: -6.0, 3: 4.0})
    R = E1.mul(A.mul(ypp, nmax), nmax)
    R = R - E1.scale(0.5).mul(B.mul(yp.mul(yp, nmax), nmax), nmax)
    R = R + E2.mul(A.mul(yp, nmax), nmax)
    R = R + E1.mul(P01.mul(yp, nmax), nmax)
    C = A.mul(A, nmax).scale(2.0 * al)
    C = C + x.scale(2.0 * be).mul(P1x.mul(P1x, nmax), nmax)
    C = C + (x - one).scale(2.0 * ga).mul(P0x.mul(P0x, nmax), nmax)
    C = C + x.mul(x - one, nmax).scale(2.0 * de).mul(P01.mul(P01, nmax), nmax)
    return R - C


def _frechet_coeffs(y: _Grid, c: PviCoefficients, nmax: int) -> tuple[_Grid, _Grid, _Grid]:
    """K2, K1, K0 with d(cleared residual)[h] = K2 h'' + K1 h' + K0 h."""
    al, be, ga, de = c.alpha, c.beta, c.gamma, c.delta
    one = _const(y, 1.0)
    x = _xpoly(y, {1: 1.0})
    yp = y.dx()
    ypp = yp.dx()
    ym1 = y - one
    ymx = y - x
    P01 = y.mul(ym1, nmax)
    P0x = y.mul(ymx, nmax)
    P1x = ym1.mul(ymx, nmax)
    A = P01.mul(ymx, nmax)
    B = P01 + P0x + P1x          # dA/dy
    Bp = y.scale(6.0) - (one + x).scale(2.0)
    E1 = _xpoly(y, {2: 2.0, 3: -4.0, 4: 2.0})
    E2 = _xpoly(y, {1: 2.0, 2: -6.0, 3: 4.0})
    Cy = A.mul(B, nmax).scale(4.0 * al)
    Cy = Cy + x.scale(4.0 * be).mul(P1x.mul(y.scale(2.0) - one - x, nmax), nmax)
    Cy = Cy + (x - one).scale(4.0 * ga).mul(P0x.mul(y.scale(2.0) - x, nmax), nmax)
    Cy = Cy + x.mul(x - one, nmax).scale(4.0 * de).mul(P01.mul(y.scale(2.0) - one, nmax), nmax)
    K2 = E1.mul(A, nmax)
    K1 = E2.mul(A, nmax) + E1.mul(P01 - B.mul(yp, nmax), nmax)
    K0 = (E1.mul(B.mul(ypp, nmax), nmax)
          - E1.scale(0.5).mul(Bp.mul(yp.mul(yp, nmax), nmax), nmax)
          + E2.mul(B.mul(yp, nmax), nmax)
          + E1.mul((y.scale(2.0) - one).mul(yp, nmax), nmax)
          - Cy)
    return K2, K1, K0


def _solve_levels(c: PviCoefficients, lam: complex, log: bool,
                  seeds: dict[tuple[int, int], complex],
                  slots_at: Callable[[int], list[int]],
                  order: int) -> _Grid:
    """Fill the grid level by level; seeded entries are fixed, the rest are
    obtained from the linearised cleared-residual system at each level."""
    nmax = order + 4
    if log:
        mlo, mhi = 0, 2 * nmax + 2
    else:
        mlo, mhi = -(nmax + 8), nmax + 8
    y = _Grid(nmax, mlo, mhi, lam, log)
    for (n, m), v in seeds.items():
        y.set(n, m, v)
    n_seed_min = min(n for n, _ in seeds) if seeds else 0
    for n in range(n_seed_min, order + 1):
        slots = [m for m in slots_at(n) if (n, m) not in seeds]
        if not slots:
            continue
        K2, K1, K0 = _frechet_coeffs(y, c, nmax)
        cols: dict[int, _Grid] = {}
        lmin = None
        for m in slots:
            h = y.like()
            h.a[:] = 0.0
            h.set(n, m, 1.0)
            col = (K2.mul(h.dx().dx(), nmax) + K1.mul(h.dx(), nmax)
                   + K0.monomial_mul(n, m, 1.0, nmax))
            cols[m] = col
            g = col.min_grade(1e-13 * max(1.0, col.max_abs()))
            if g is not None:
                lmin = g if lmin is None else min(lmin, g)
        if lmin is None:
            raise ResonantCoefficient(f"level {n}: all columns vanish")
        R = _cleared_residual(y, c, nmax)
        scale = max(1.0, R.max_abs(), max(cl.max_abs() for cl in cols.values()))
        for g in range(_NLO, lmin):
            if np.any(np.abs(R.row(g)) > 1e-7 * scale):
                raise ResonantCoefficient(
                    f"level {n}: residual at grade {g} nonzero before solve")
        rows = [j for j in range(y.a.shape[1])
                if abs(R.row(lmin)[j]) > 1e-13 * scale
                or any(abs(cl.row(lmin)[j]) > 1e-13 * scale for cl in cols.values())]
        Amat = np.array([[cols[m].row(lmin)[j] for m in slots] for j in rows], dtype=complex)
        rhs = np.array([-R.row(lmin)[j] for j in rows], dtype=complex)
        if Amat.size == 0:
            continue
        sol, *_ = np.linalg.lstsq(Amat, rhs, rcond=None)
        err = np.linalg.norm(Amat @ sol - rhs)
        if err > 1e-7 * max(1.0, np.linalg.norm(rhs)):
            raise ResonantCoefficient(
                f"level {n}: inconsistent linear system (residual {err:.2e}); "
                f"slots {[(n, m) for m in slots]}")
        for m, v in zip(slots, sol):
            y.set(n, m, y.get(n, m) + v)
    return y


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expansion:
    """A truncated critical-behaviour expansion.

    ``coeffs`` maps (n, m) to the coefficient of x^n t^m (power axis,
    t = inner_a * x^lam) or of x^n (ln x)^m (log axis) of the inner direct
    series.  The represented function is the inner series composed with the
    point substitution (x -> 1-x at 1, x -> 1/x at infinity) and, for
    inverse families, the reciprocal construction y = x / inner(x).
    """

    kind: BehaviourKind
    theta: ThetaVector
    constants: dict
    order: int
    lam: complex
    axis: str                      # "power" | "log"
    structure: str                 # "DirectSeries" | "InverseSeries"
    inner_theta: ThetaVector
    inner_a: complex
    coeffs: dict = field(default_factory=dict)
    radius: float = DEFAULT_RADIUS
    asymptotic_only: bool = False  # log families: no convergence statement

    @property
    def point(self) -> str:
        return self.kind.point

    def to_json(self) -> dict:
        terms = []
        if self.axis == "power":
            for (n, m), v in sorted(self.coeffs.items()):
                terms.append({"n": n, "m": m, "logcoeffs": [v.real, v.imag]})
        else:
            byn: dict[int, dict[int, complex]] = {}
            for (n, j), v in self.coeffs.items():
                byn.setdefault(n, {})[j] = v
            for n in sorted(byn):
                deg = max(byn[n])
                flat: list[float] = []
                for j in range(deg + 1):
                    z = byn[n].get(j, 0.0)
                    flat.extend([complex(z).real, complex(z).imag])
                terms.append({"n": n, "m": 0, "logcoeffs": flat})
        return {
            "kind": self.kind.to_json(),
            "order": self.order,
            "terms": terms,
            "meta": {
                "axis": self.axis,
                "structure": self.structure,
                "lam": [self.lam.real, self.lam.imag],
                "inner_a": [complex(self.inner_a).real, complex(self.inner_a).imag],
                "theta": self.theta.to_json(),
                "inner_theta": self.inner_theta.to_json(),
                "constants": {k: [complex(v).real, complex(v).imag]
                              for k, v in sorted(self.constants.items())},
                "asymptotic_only": self.asymptotic_only,
            },
        }


def _grid_to_coeffs(g: _Grid, order: int, tol: float = 1e-14) -> dict:
    out = {}
    scale = max(1.0, g.max_abs())
    for n in range(0, order + 1):
        row = g.row(n)
        for j in range(row.shape[0]):
            v = row[j]
            if abs(v) > tol * scale:
                out[(n, j + g.mlo)] = complex(v)
    return out


def _theta_frame(t: ThetaVector, point: str) -> ThetaVector:
    if point == "0":
        return t
    if point == "1":
        return apply_okamoto_theta(OkamotoElement.ONARA, t)
    return apply_okamoto_theta(OkamotoElement.ONARA1, t)


def build_expansion(desc, t: ThetaVector, order: int = DEFAULT_ORDER) -> Expansion:
    """Construct the truncated expansion of a behaviour descriptor.

    Coefficients are obtained recursively by substitution into the cleared
    PVI identity; a singular level solve raises
    :class:`ResonantCoefficient` naming the offending (n, m).
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    kind: BehaviourKind = desc.kind
    tf = _theta_frame(t, kind.point)
    tag = kind.tag

    inverse_pre = {
        Tag.LANTERN1: None, Tag.TAU: None, Tag.LOG45: Tag.LOG1ZERO, Tag.LOG3: Tag.LOGSQUARE,
    }
    if tag in (Tag.LANTERN1, Tag.TAU, Tag.LOG45, Tag.LOG3):
        ts = apply_okamoto_theta(OkamotoElement.SYM2, tf)
        if tag is Tag.LANTERN1:
            nu = complex(desc.constants["nu"]).real
            phi = desc.constants["phi"]
            cs = coefficients_from_theta(tf)
            B = (2.0 * nu**2 + cs.gamma - cs.alpha) / (4.0 * nu**2)
            A = -cmath.sqrt(cs.alpha / (2.0 * nu**2) + B * B)
            apre = (A / 2j) * cmath.exp(1j * phi)
            grid = _build_fullexp(ts, 2j * nu, order)
        elif tag is Tag.TAU:
            nu = nu_of_kind(kind, tf)
            apre = desc.constants["a"]
            grid = _build_atopy(ts, -2j * nu, kind.k, order)
        elif tag is Tag.LOG45:
            apre = 1.0
            grid = _build_log1zero(ts, desc.constants["a"], order, plus_sign=True)
        else:
            apre = 1.0
            grid = _build_logsquare(ts, desc.constants["a"], order)
        return Expansion(kind=kind, theta=t, constants=dict(desc.constants), order=order,
                         lam=grid.lam, axis="log" if grid.log else "power",
                         structure="InverseSeries", inner_theta=ts, inner_a=apre,
                         coeffs=_grid_to_coeffs(grid, order),
                         asymptotic_only=tag in (Tag.LOG45, Tag.LOG3))

    asym = False
    if tag is Tag.FULL_EXP:
        grid = _build_fullexp(tf, desc.constants["sigma"], order)
        inner_a = desc.constants["a"]
    elif tag is Tag.ATOPY:
        sigma = desc.constants.get("sigma", sigma_of_kind(kind, tf))
        grid = _build_atopy(tf, sigma, kind.k, order)
        inner_a = desc.constants["a"]
    elif tag is Tag.DAVIDEKAN:
        grid = _build_davidekan(tf, kind.k, order)
        inner_a = 1.0
    elif tag is Tag.UUU:
        rho = desc.constants.get("rho", omega_of_kind(kind, tf) - 1.0)
        grid, d00 = _build_uuu(tf, rho, kind.k, order)
        inner_a = -desc.constants["a"] * d00**2
    elif tag is Tag.T1COE:
        grid, _ = _build_uuu(tf, omega_of_kind(kind, tf) - 1.0, kind.k, order, taylor_only=True)
        inner_a = 1.0
    elif tag is Tag.DIV:
        cs = coefficients_from_theta(tf)
        omega = desc.constants.get("omega",
                                   cs.sqrt2gamma if cs.sqrt2gamma.real >= 0 else -cs.sqrt2gamma)
        grid = _build_div(tf, omega, order)
        inner_a = desc.constants["a"]
    elif tag in (Tag.TTLO1, Tag.TTLO2, Tag.TTLO3, Tag.TTLO4):
        grid = _build_taylor(tf, tag, kind, desc.constants.get("a", 0.0), order)
        inner_a = 1.0
    elif tag in (Tag.LOG1, Tag.LOG1ZERO, Tag.LOGSQUARE, Tag.LOG12):
        asym = True
        if tag is Tag.LOG1ZERO:
            grid = _build_log1zero(tf, desc.constants["a"], order, plus_sign=True)
        elif tag is Tag.LOGSQUARE:
            grid = _build_logsquare(tf, desc.constants["a"], order)
        else:
            grid = _build_logn(tf, tag, kind, desc.constants["a"], order)
        inner_a = 1.0
    else:  # pragma: no cover
        raise UnsupportedMap(f"no template for {tag.value}")
    return Expansion(kind=kind, theta=t, constants=dict(desc.constants), order=order,
                     lam=grid.lam, axis="log" if grid.log else "power",
                     structure="DirectSeries", inner_theta=tf, inner_a=inner_a,
                     coeffs=_grid_to_coeffs(grid, order), asymptotic_only=asym)


def _seed_c10_c1m1(tf: ThetaVector, sigma: complex) -> tuple[complex, complex]:
    c = coefficients_from_theta(tf)
    c10 = (sigma**2 - 2.0 * c.beta + 2.0 * c.delta - 1.0) / (2.0 * sigma**2)
    u, v = c.sqrtm2beta, c.sqrt1m2delta
    c1m1 = (((u - v) ** 2 - sigma**2) * ((u + v) ** 2 - sigma**2)) / (16.0 * sigma**4)
    return c10, c1m1


def _build_fullexp(tf: ThetaVector, sigma: complex, order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    c10, c1m1 = _seed_c10_c1m1(tf, sigma)
    seeds = {(1, 1): 1.0, (1, 0): c10, (1, -1): c1m1}
    return _solve_levels(c, sigma, False, seeds,
                         lambda n: list(range(-n, n + 1)) if n >= 2 else [], order)


def _build_atopy(tf: ThetaVector, sigma: complex, k: int, order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    den = c.sqrtm2beta + (-1) ** k * c.sqrt1m2delta
    c10 = c.sqrtm2beta / den
    seeds = {(1, 1): 1.0, (1, 0): c10}
    return _solve_levels(c, sigma, False, seeds,
                         lambda n: list(range(0, n + 1)) if n >= 2 else [], order)


def _build_davidekan(tf: ThetaVector, k: int, order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    if abs(c.beta) < 1e-12:
        return _Grid(order + 4, -(order + 12), order + 12, 0.0, False)  # y = 0 exactly
    den = c.sqrtm2beta + (-1) ** k * c.sqrt1m2delta
    seeds = {(1, 0): c.sqrtm2beta / den}
    return _solve_levels(c, 0.0, False, seeds,
                         lambda n: [0] if n >= 2 else [], order)


def _build_uuu(tf: ThetaVector, rho: complex, k: int, order: int,
               taylor_only: bool = False) -> tuple[_Grid, complex]:
    c = coefficients_from_theta(tf)
    sa = cmath.sqrt(c.alpha)
    if abs(sa) < 1e-12:
        raise ConstraintViolation("this family requires alpha != 0")
    d00 = (sa + (-1) ** k * cmath.sqrt(c.gamma)) / sa
    if taylor_only:
        seeds = {(0, 0): d00}
        grid = _solve_levels(c, 0.0, False, seeds,
                             lambda n: [0] if n >= 1 else [], order)
        return grid, d00
    seeds = {(0, 0): d00, (1, 1): 1.0}
    grid = _solve_levels(c, rho, False, seeds,
                         lambda n: list(range(0, n + 1)) if n >= 1 else [], order)
    return grid, d00


def _build_div(tf: ThetaVector, omega: complex, order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    if abs(c.alpha) > 1e-10:
        raise ConstraintViolation("divergent family requires alpha = 0")
    seeds = {(0, -1): 1.0}
    return _solve_levels(c, omega, False, seeds,
                         lambda n: list(range(-1, n)) if n >= 1 else [], order)


def _build_taylor(tf: ThetaVector, tag: Tag, kind: BehaviourKind, a: complex,
                  order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    if tag is Tag.TTLO2:
        if abs(c.beta) > 1e-9 or abs(2 * c.delta - 1) > 1e-9:
            raise ConstraintViolation("TTLO2 requires 2 beta = 2 delta - 1 = 0")
        seeds = {(1, 0): a}
        start = 2
    elif tag is Tag.TTLO4:
        if abs(c.alpha) > 1e-9 or abs(c.gamma) > 1e-9:
            raise ConstraintViolation("TTLO4 requires alpha = gamma = 0")
        seeds = {(0, 0): a}
        start = 1
    elif tag is Tag.TTLO1:
        N = kind.N
        seeds = {(1, 0): c.sqrtm2beta / N, (abs(N) + 1, 0): a}
        start = 2
    else:  # TTLO3
        N = kind.N
        seeds = {(0, 0): N / c.sqrt2alpha, (abs(N), 0): a}
        start = 1
    return _solve_levels(c, 0.0, False, seeds,
                         lambda n: [0] if n >= start else [], order)


def _build_log1zero(tf: ThetaVector, a: complex, order: int, plus_sign: bool) -> _Grid:
    c = coefficients_from_theta(tf)
    if abs(2 * c.beta - (2 * c.delta - 1)) > 1e-9:
        raise ConstraintViolation("this family requires 2 beta = 2 delta - 1")
    s = 1.0 if plus_sign else -1.0
    seeds = {(1, 0): a, (1, 1): s * c.sqrtm2beta}
    return _solve_levels(c, 0.0, True, seeds,
                         lambda n: list(range(0, n + 1)) if n >= 2 else [], order)


def _build_logsquare(tf: ThetaVector, a: complex, order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    cf = (2 * c.beta + 1 - 2 * c.delta) / 4.0
    if abs(cf) < 1e-10:
        raise ConstraintViolation("this family requires 2 beta != 2 delta - 1")
    seeds = {(1, 0): cf * a**2 + 2 * c.beta / (4.0 * cf), (1, 1): 2 * cf * a, (1, 2): cf}
    return _solve_levels(c, 0.0, True, seeds,
                         lambda n: list(range(0, 2 * n + 1)) if n >= 2 else [], order)


def _build_logn(tf: ThetaVector, tag: Tag, kind: BehaviourKind, a: complex,
                order: int) -> _Grid:
    c = coefficients_from_theta(tf)
    N = kind.N
    aN = abs(N)
    if tag is Tag.LOG1:
        seeds = {(1, 0): c.sqrtm2beta / N, (aN + 1, 0): a}
        def slots(n: int) -> list[int]:
            if n < 2:
                return []
            if n <= aN:
                return [0]
            if n == aN + 1:
                return [1]
            return list(range(0, n - aN + 1))
    else:  # LOG12
        seeds = {(0, 0): N / c.sqrt2alpha, (aN, 0): a}
        def slots(n: int) -> list[int]:
            if n < 1:
                return []
            if n < aN:
                return [0]
            if n == aN:
                return [1]
            return list(range(0, n - aN + 2))
    return _solve_levels(c, 0.0, True, seeds, slots, order)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval_inner(e: Expansion, w: complex) -> tuple[complex, complex, complex]:
    """Inner-series value and first two derivatives at the local variable."""
    logw = cmath.log(w)
    val = d1 = d2 = 0.0 + 0.0j
    if e.axis == "power":
        for (n, m), cv in e.coeffs.items():
            ex = n + m * e.lam
            base = cv * (e.inner_a**m) * w**ex
            val += base
            if ex != 0:
                d1 += base * ex / w
                d2 += base * ex * (ex - 1.0) / (w * w)
    else:
        for (n, j), cv in e.coeffs.items():
            wn = w**n
            Lj = logw**j
            val += cv * wn * Lj
            t1 = n * wn * Lj / w + (j * wn * logw ** (j - 1) / w if j else 0.0)
            d1 += cv * t1
            t2 = (n * (n - 1) * wn * Lj
                  + (2 * n - 1) * j * wn * (logw ** (j - 1) if j else 0.0)
                  + (j * (j - 1) * wn * (logw ** (j - 2)) if j >= 2 else 0.0)) / (w * w)
            d2 += cv * t2
    return val, d1, d2


def evaluate(e: Expansion, x: complex, radius: Optional[float] = None) -> tuple[complex, complex]:
    """Value and derivative of the truncated expansion at x.

    ``radius`` bounds |local variable|; ``None`` uses the expansion default.
    """
    y, dy, _ = evaluate_with_second(e, x, radius)
    return y, dy


def evaluate_with_second(e: Expansion, x: complex,
                         radius: Optional[float] = None) -> tuple[complex, complex, complex]:
    """Like :func:`evaluate` but also returns the analytic second derivative."""
    x = complex(x)
    r = e.radius if radius is None else radius
    point = e.point
    if point == "0":
        w, dw = x, 1.0
    elif point == "1":
        w, dw = 1.0 - x, -1.0
    else:
        w, dw = 1.0 / x, -1.0 / (x * x)
    if abs(w) > r:
        raise OutsideDomain(f"|local variable| = {abs(w):.3g} > radius {r}")
    if w == 0:
        raise OutsideDomain("evaluation at the critical point itself")
    v, v1, v2 = _eval_inner(e, w)
    if e.structure == "InverseSeries":
        if abs(v) < 1e-8:
            raise NearPole(f"inverse-series denominator {abs(v):.2e} at x = {x}")
        y_loc = w / v
        d1_loc = (v - w * v1) / (v * v)
        d2_loc = (-w * v2 * v - 2.0 * v1 * (v - w * v1)) / (v**3)
    else:
        y_loc, d1_loc, d2_loc = v, v1, v2
    if point == "0":
        return y_loc, d1_loc, d2_loc
    if point == "1":
        return 1.0 - y_loc, d1_loc, -d2_loc
    # x * inner(1/x)
    y = x * y_loc
    dy = y_loc + x * d1_loc * dw
    d2y = 2.0 * d1_loc * dw + x * (d2_loc * dw * dw + d1_loc * (2.0 / x**3))
    return y, dy, d2y


def residual_tail(e: Expansion) -> Expansion:
    """Formal cleared-PVI residual of the truncated inner series.

    Returns an expansion-like object over the same variables whose
    evaluation predicts the numerical cleared residual of the truncation;
    its lowest grade exposes the order of contact.
    """
    nmax = e.order + 4
    if e.axis == "log":
        mlo, mhi = 0, 2 * nmax + 2
    else:
        mlo, mhi = -(nmax + 8), nmax + 8
    g = _Grid(nmax, mlo, mhi, e.lam, e.axis == "log")
    for (n, m), v in e.coeffs.items():
        g.set(n, m, v)
    c = coefficients_from_theta(e.inner_theta)
    R = _cleared_residual(g, c, nmax)
    coeffs = _grid_to_coeffs(R, nmax, tol=1e-16)
    return Expansion(kind=e.kind, theta=e.inner_theta, constants={}, order=e.order,
                     lam=e.lam, axis=e.axis, structure="DirectSeries",
                     inner_theta=e.inner_theta, inner_a=e.inner_a,
                     coeffs=coeffs, radius=1.0)


# ---------------------------------------------------------------------------
# PVI residual
# ---------------------------------------------------------------------------

def pvi_residual(y: complex, dy: complex, d2y: complex, x: complex,
                 c: PviCoefficients) -> complex:
    """d2y minus the PVI right-hand side at (x, y, dy)."""
    for bad, name in ((y, "0"), (y - 1.0, "1"), (y - x, "x")):
        if abs(bad) < 1e-12:
            raise OnSingularSet(f"y = {name} within 1e-12")
    rhs = (0.5 * (1.0 / y + 1.0 / (y - 1.0) + 1.0 / (y - x)) * dy**2
           - (1.0 / x + 1.0 / (x - 1.0) + 1.0 / (y - x)) * dy
           + y * (y - 1.0) * (y - x) / (x**2 * (x - 1.0) ** 2)
           * (c.alpha + c.beta * x / y**2 + c.gamma * (x - 1.0) / (y - 1.0) ** 2
              + c.delta * x * (x - 1.0) / (y - x) ** 2))
    return d2y - rhs


def pvi_residual_cleared(y: complex, dy: complex, d2y: complex, x: complex,
                         c: PviCoefficients) -> complex:
    """Denominator-cleared residual, 2 x^2 (x-1)^2 y (y-1)(y-x) (lhs - rhs);
    usable near the singular set."""
    A = y * (y - 1.0) * (y - x)
    B = (y - 1.0) * (y - x) + y * (y - x) + y * (y - 1.0)
    e1 = 2.0 * x**2 * (x - 1.0) ** 2
    e2 = 2.0 * x * (x - 1.0) ** 2 + 2.0 * x**2 * (x - 1.0)
    out = (e1 * A * d2y
           - 0.5 * e1 * B * dy**2
           + e2 * A * dy
           + e1 * y * (y - 1.0) * dy
           - 2.0 * c.alpha * A**2
           - 2.0 * c.beta * x * ((y - 1.0) * (y - x)) ** 2
           - 2.0 * c.gamma * (x - 1.0) * (y * (y - x)) ** 2
           - 2.0 * c.delta * x * (x - 1.0) * (y * (y - 1.0)) ** 2)
    return out


# ---------------------------------------------------------------------------
# bi-rational maps of expansions
# ---------------------------------------------------------------------------

def map_expansion(e: Expansion, which: OkamotoElement) -> Expansion:
    """Image of an expansion under a permutation transformation.

    The two point-permutations re-anchor the same inner series at the
    partner critical point; the reciprocal transformation produces the
    image-family expansion with mapped constants, rebuilt at the same order.
    """
    if which is OkamotoElement.ONARA:
        flip = {"0": "1", "1": "0"}
        if e.point not in flip:
            raise UnsupportedMap("point permutation 0<->1 undefined at infinity here")
        kind = BehaviourKind(e.kind.tag, flip[e.point], e.kind.k, e.kind.N)
        theta = apply_okamoto_theta(OkamotoElement.ONARA, e.theta)
        return Expansion(kind=kind, theta=theta, constants=dict(e.constants),
                         order=e.order, lam=e.lam, axis=e.axis, structure=e.structure,
                         inner_theta=e.inner_theta, inner_a=e.inner_a,
                         coeffs=dict(e.coeffs), radius=e.radius,
                         asymptotic_only=e.asymptotic_only)
    if which is OkamotoElement.ONARA1:
        flip = {"0": "inf", "inf": "0"}
        if e.point not in flip:
            raise UnsupportedMap("point permutation 0<->inf undefined at 1 here")
        kind = BehaviourKind(e.kind.tag, flip[e.point], e.kind.k, e.kind.N)
        theta = apply_okamoto_theta(OkamotoElement.ONARA1, e.theta)
        return Expansion(kind=kind, theta=theta, constants=dict(e.constants),
                         order=e.order, lam=e.lam, axis=e.axis, structure=e.structure,
                         inner_theta=e.inner_theta, inner_a=e.inner_a,
                         coeffs=dict(e.coeffs), radius=e.radius,
                         asymptotic_only=e.asymptotic_only)
    if which is not OkamotoElement.SYM2:
        raise UnsupportedMap(f"no expansion map for {which.value}")
    if e.point != "0":
        raise UnsupportedMap("reciprocal map implemented at x = 0 only")

    from .classify import BehaviourDescriptor

    t2 = apply_okamoto_theta(OkamotoElement.SYM2, e.theta)
    tag = e.kind.tag
    if tag is Tag.FULL_EXP:
        sigma = e.constants["sigma"]
        a = e.constants["a"]
        _, c1m1 = _seed_c10_c1m1(e.theta, sigma)
        sigma2 = 1.0 - sigma
        _, c1m1_2 = _seed_c10_c1m1(t2, sigma2)
        a2 = c1m1_2 * c1m1 / a
        desc = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                   {"sigma": sigma2, "a": a2})
        return build_expansion(desc, t2, e.order)
    if tag is Tag.ATOPY:
        desc = BehaviourDescriptor(BehaviourKind(Tag.UUU, "0", k=e.kind.k),
                                   {"a": e.constants["a"]})
        return build_expansion(desc, t2, e.order)
    if tag is Tag.UUU:
        desc = BehaviourDescriptor(BehaviourKind(Tag.ATOPY, "0", k=e.kind.k),
                                   {"a": e.constants["a"]})
        return build_expansion(desc, t2, e.order)
    if tag in (Tag.LANTERN1, Tag.TAU, Tag.LOG45, Tag.LOG3):
        # the stored inner series is exactly the reciprocal image
        pre_tag = {Tag.LANTERN1: Tag.FULL_EXP, Tag.TAU: Tag.ATOPY,
                   Tag.LOG45: Tag.LOG1ZERO, Tag.LOG3: Tag.LOGSQUARE}[tag]
        if pre_tag is Tag.FULL_EXP:
            constants = {"sigma": e.lam, "a": e.inner_a}
        else:
            constants = {"a": e.constants["a"]}
        kind = BehaviourKind(pre_tag, "0", k=e.kind.k)
        return Expansion(kind=kind, theta=t2, constants=constants, order=e.order,
                         lam=e.lam, axis=e.axis, structure="DirectSeries",
                         inner_theta=e.inner_theta, inner_a=e.inner_a,
                         coeffs=dict(e.coeffs), radius=e.radius,
                         asymptotic_only=e.asymptotic_only)
    if tag in (Tag.LOG1ZERO, Tag.LOGSQUARE):
        image = {Tag.LOG1ZERO: Tag.LOG45, Tag.LOGSQUARE: Tag.LOG3}[tag]
        desc = BehaviourDescriptor(BehaviourKind(image, "0", k=e.kind.k),
                                   {"a": e.constants["a"]})
        return build_expansion(desc, t2, e.order)
    if tag is Tag.TTLO2:
        desc = BehaviourDescriptor(BehaviourKind(Tag.TTLO4, "0"), {"a": e.constants["a"]})
        return build_expansion(desc, t2, e.order)
    if tag is Tag.TTLO4:
        desc = BehaviourDescriptor(BehaviourKind(Tag.TTLO2, "0"), {"a": e.constants["a"]})
        return build_expansion(desc, t2, e.order)
    raise UnsupportedMap(f"no reciprocal image template for {tag.value}")


# ---------------------------------------------------------------------------
# reducible (hypergeometric) family
# ---------------------------------------------------------------------------

def _frobenius_pair(A: complex, B: complex, cc: complex, x: complex,
                    nterms: int = 400) -> tuple[tuple, tuple, bool]:
    """Two independent solutions of x(1-x)u'' + (cc - (A+B+1)x)u' - ABu = 0
    about x = 0, as (u, u', u'') triples; flag marks the logarithmic frame.

    Exponents at 0 are 0 and 1 - cc.
    """
    def series(rho: complex) -> tuple:
        u = up = upp = 0.0 + 0.0j
        coef = 1.0 + 0.0j
        for n in range(nterms):
            ex = rho + n
            term = coef * x**ex
            u += term
            up += coef * ex * x ** (ex - 1.0) if ex != 0 else 0.0
            upp += coef * ex * (ex - 1.0) * x ** (ex - 2.0) if ex * (ex - 1.0) != 0 else 0.0
            nxt = (ex + A) * (ex + B) / ((ex + 1.0) * (ex + cc))
            coef = coef * nxt
            if abs(term) < 1e-18 * max(1.0, abs(u)) and n > 8:
                break
        return u, up, upp

    r1, r2 = 0.0 + 0.0j, 1.0 - cc
    delta = r1 - r2
    n_int = round(delta.real)
    if abs(delta - n_int) > 1e-9:
        return series(r1), series(r2), False

    # integer exponent difference: big root has the clean series, the other
    # carries a log term
    rb, rs = (r1, r2) if n_int >= 0 else (r2, r1)
    Delta = abs(n_int)
    nterms_w = nterms
    wcoefs = [1.0 + 0.0j]
    for n in range(1, nterms_w):
        ex = rb + n - 1.0
        wcoefs.append(wcoefs[-1] * (ex + A) * (ex + B) / ((ex + 1.0) * (ex + cc)))
    ub = _eval_frob(wcoefs, rb, x)

    # us = kappa * ub * ln x + x^rs sum d_n x^n
    dcoefs: list[complex] = [1.0 + 0.0j] if Delta > 0 else [0.0 + 0.0j]
    kappa = 1.0 + 0.0j if Delta == 0 else None
    dlist = dcoefs
    for n in range(1, nterms_w):
        sN = rs + n
        fN = sN * (sN - 1.0 + cc)
        g_prev = (sN - 1.0 + A) * (sN - 1.0 + B)
        rhs = g_prev * (dlist[n - 1] if n - 1 < len(dlist) else 0.0)
        m = n - Delta
        if m >= 0 and kappa is not None:
            # contribution of the log part at this order
            w_m = wcoefs[m] if m < len(wcoefs) else 0.0
            w_m1 = wcoefs[m - 1] if 0 <= m - 1 < len(wcoefs) else 0.0
            rhs += -kappa * ((2.0 * (rb + m) - 1.0 + cc) * w_m
                             - (2.0 * (rb + m - 1.0) + A + B) * w_m1)
        if n == Delta and Delta > 0:
            # resonance: fN = 0 determines kappa, the slot itself is gauge
            w0 = wcoefs[0]
            denom = (2.0 * rb - 1.0 + cc) * w0
            if abs(denom) < 1e-300:
                raise HypergeometricDegenerate("log-frame normalisation failed")
            kappa = rhs / denom
            dlist.append(0.0)
            continue
        dlist.append(rhs / fN)
    us_p = _eval_frob(dlist, rs, x)
    lb = cmath.log(x)
    u2 = kappa * ub[0] * lb + us_p[0]
    u2p = kappa * (ub[1] * lb + ub[0] / x) + us_p[1]
    u2pp = kappa * (ub[2] * lb + 2.0 * ub[1] / x - ub[0] / x**2) + us_p[2]
    return ub, (u2, u2p, u2pp), True


def _eval_frob(coefs: list[complex], rho: complex, x: complex) -> tuple:
    u = up = upp = 0.0 + 0.0j
    for n, cv in enumerate(coefs):
        if cv == 0:
            continue
        ex = rho + n
        xe = x ** (ex - 2.0)
        u += cv * xe * x * x
        up += cv * ex * xe * x
        upp += cv * ex * (ex - 1.0) * xe
        if abs(cv * xe * x * x) < 1e-18 * max(1.0, abs(u)) and n > 8:
            break
    return u, up, upp


def reducible_solution(t: ThetaVector, a: complex, x: complex) -> tuple[complex, complex]:
    """One-parameter reducible-monodromy solution evaluated at x.

    Requires theta_inf + theta_1 + theta_0 + theta_x = 0 (raw values) and
    theta_inf != 1.  The solution is built from two independent solutions
    u1, u2 of the associated hypergeometric equation as u = u1 + a u2.
    """
    t0, tx, t1, ti = t.as_tuple()
    if abs(t0 + tx + t1 + ti) > 1e-9:
        raise ConstraintViolation("requires theta_inf + theta_1 + theta_0 + theta_x = 0")
    if abs(ti - 1.0) < 1e-9:
        raise ConstraintViolation("requires theta_inf != 1")
    A = 2.0 - ti
    B = 1.0 + tx
    cc = 2.0 - ti - t1
    u1, u2, logframe = _frobenius_pair(A, B, cc, complex(x))
    u = u1[0] + a * u2[0]
    up = u1[1] + a * u2[1]
    if abs(u) < 1e-300:
        raise NearPole("u vanishes at the requested point")
    lead = (t1 + ti - 1.0 + x * (1.0 + tx)) / (ti - 1.0)
    y = lead - x * (1.0 - x) * up / ((ti - 1.0) * u)
    # derivative via the quotient rule with u'' from the ode
    upp = u1[2] + a * u2[2]
    g = x * (1.0 - x)
    gp = 1.0 - 2.0 * x
    dy = (1.0 + tx) / (ti - 1.0) - (gp * up + g * upp - g * up * up / u) / ((ti - 1.0) * u)
    return y, dy
