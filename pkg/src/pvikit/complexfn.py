"""Complex special functions used by the connection formulae.

gamma and digamma are self-contained (Lanczos rational approximation and
Bernoulli asymptotics, both with reflection), accurate to ~1e-13 relative
for |z| <= 50, |Im z| <= 50.  ``arccos_unit`` inverts 2*cos(pi*sigma) = p
onto the strip 0 <= Re sigma < 1.
"""

from __future__ import annotations

import cmath
import math

from .errors import OutsidePrincipalStrip, PoleAtNonPositiveInteger

__all__ = [
    "gamma",
    "digamma",
    "arccos_unit",
    "half_trig",
    "INT_TOL",
    "near_nonpositive_integer",
]

# Global proximity tolerance for "is an integer" tests; classification and
# the connection formulae branch on theta-combinations being integers, and
# exact symbolic input is not assumed.
INT_TOL = 1e-9

_POLE_TOL = 1e-12

# Lanczos coefficients, g = 607/128, n = 15 (Godfrey's set).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def near_nonpositive_integer(z: complex, tol: float = _POLE_TOL) -> bool:
    """True when z is within ``tol`` of a non-positive integer."""
    if z.real > 0.5:
        return False
    n = round(z.real)
    return n <= 0 and abs(z - n) < tol


def _lanczos_sum(z: complex) -> complex:
    # A_g(z) for Re z >= 0.5, z shifted so the pole terms are z-1+k
    s = _LANCZOS_C[0]
    for k in range(1, len(_LANCZOS_C)):
        s += _LANCZOS_C[k] / (z - 1 + k)
    return s


def gamma(z: complex) -> complex:
    """Complex gamma function.

    Lanczos rational approximation on Re z >= 0.5, reflection formula on
    Re z < 0.5.  Relative accuracy <= 1e-13 for |z| <= 50, |Im z| <= 50.

    Raises
    ------
    PoleAtNonPositiveInteger
        When dist(z, Z_{<=0}) < 1e-12.  Upstream this signals a degenerate
        theta-combination.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("gamma: non-finite argument")
    if near_nonpositive_integer(z):
        raise PoleAtNonPositiveInteger(f"gamma pole at z = {z}")
    if z.real < 0.5:
        # Gamma(z) = pi / (sin(pi z) Gamma(1-z))
        return math.pi / (_sinpi(z) * gamma(1.0 - z))
    g = _LANCZOS_G
    base = z + g - 0.5
    return _SQRT_2PI * _lanczos_sum(z) * cmath.exp((z - 0.5) * cmath.log(base) - base)


def _sinpi(z: complex) -> complex:
    # sin(pi z) with argument reduction; avoids catastrophic loss for large Re z
    n = math.floor(z.real)
    r = z - n
    s = cmath.sin(math.pi * r)
    return -s if n % 2 else s


def _cospi(z: complex) -> complex:
    n = math.floor(z.real + 0.5)
    r = z - n
    c = cmath.cos(math.pi * r)
    return -c if n % 2 else c


# Bernoulli numbers B_2 .. B_16 over 2n for the digamma asymptotic tail.
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)


def digamma(z: complex) -> complex:
    """Complex digamma (psi) function, ~1e-13 relative on the gamma domain.

    Recurrence pushes the argument to |z| >= 16 where the Bernoulli
    asymptotic series converges below double precision; reflection handles
    Re z < 0.5.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("digamma: non-finite argument")
    if near_nonpositive_integer(z):
        raise PoleAtNonPositiveInteger(f"digamma pole at z = {z}")
    if z.real < 0.5:
        # psi(z) = psi(1-z) - pi cot(pi z)
        return digamma(1.0 - z) - math.pi * _cospi(z) / _sinpi(z)
    acc = 0.0 + 0.0j
    while abs(z) < 16.0:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    tail = 0.0 + 0.0j
    p = inv2
    for b in _DIGAMMA_TAIL:
        tail += b * p
        p *= inv2
    return acc + cmath.log(z) - 0.5 / z - tail


def arccos_unit(p: complex) -> complex:
    """Solve 2*cos(pi*sigma) = p for the representative with 0 <= Re sigma < 1.

    Ties at Re sigma = 0 are resolved by Im sigma <= 0.

    Raises
    ------
    OutsidePrincipalStrip
        When every solution has Re sigma = 1 (p real <= -2, the oscillatory
        regime; use the 2*cosh parametrisation instead).
    """
    p = complex(p)
    sigma = cmath.acos(p / 2.0) / math.pi  # principal: 0 <= Re sigma <= 1
    if sigma.real >= 1.0 - 1e-12:
        raise OutsidePrincipalStrip(
            f"2 cos(pi s) = {p}: solutions have Re s = 1 (trace <= -2)"
        )
    if sigma.real == 0.0 and sigma.imag > 0.0:
        sigma = -sigma
    return sigma


def half_trig(z: complex) -> tuple[complex, complex]:
    """Return the half-angle pair (sin(pi z / 2), cos(pi z / 2))."""
    z = complex(z)
    return _sinpi(z / 2.0), _cospi(z / 2.0)
