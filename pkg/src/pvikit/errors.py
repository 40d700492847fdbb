"""Exception hierarchy.

Every mathematical precondition failure raises a subclass of
:class:`PviError`, so callers (and the CLI) can distinguish bad input
from bugs.
"""


class PviError(Exception):
    """Base class for all domain errors raised by this package."""


# --- special functions ---

class PoleAtNonPositiveInteger(PviError):
    """Gamma/digamma argument too close to a pole (z in Z, z <= 0)."""


class OutsidePrincipalStrip(PviError):
    """No inverse-cosine solution with 0 <= Re sigma < 1 exists."""


# --- monodromy data ---

class ThetaInfinityZero(PviError):
    """A theta transformation produced the forbidden value theta_inf = 0."""


class DegenerateQuadratic(PviError):
    """Quadratic trace solve collapsed (cannot happen for the Fricke cubic)."""


class NotInFactorizedRegime(PviError):
    """Pair trace does not satisfy the factorisation precondition."""


# --- classification ---

class OffCubic(PviError):
    """Trace set does not satisfy the Fricke relation within tolerance."""


class AmbiguousResonance(PviError):
    """Two classification branches match simultaneously; refusing to guess."""


# --- connection formulae ---

class OscillatoryRegime(PviError):
    """Governing trace lies in (-inf, -2]; sigma-based formulae do not apply."""


class GammaPole(PviError):
    """A gamma factor in a connection kernel hit a pole."""


class VanishingDenominator(PviError):
    """A denominator of a connection formula vanished (sigma = 0, V = 0, ...)."""


class DegenerateLimit(PviError):
    """Resonant limit of the generic formula is zero or infinite."""


class TauRegime(PviError):
    """2*i*nu coincides with a resonance number; the oscillatory-resonant
    branch applies instead of the generic oscillatory one."""


class ResonantDenominator(PviError):
    """A trace-construction denominator vanished; the named factor is resonant."""


class ConditionViolation(PviError):
    """A table-row condition required by the requested formula fails."""


class UnsupportedKind(PviError):
    """No parametric formula is available for this behaviour family."""


# --- series expansions ---

class ResonantCoefficient(PviError):
    """A linear solve for an expansion coefficient was singular or
    inconsistent; the theta configuration requires a different family."""


class NearPole(PviError):
    """Evaluation point too close to a zero of an inverse-series denominator."""


class OutsideDomain(PviError):
    """Evaluation point outside the expansion's validity region."""


class UnsupportedMap(PviError):
    """No expansion template exists for the image of this transformation."""


class ConstraintViolation(PviError):
    """Input violates the defining constraint of the requested family."""


class HypergeometricDegenerate(PviError):
    """Hypergeometric exponents differ by an integer; logarithmic frame used."""


class OnSingularSet(PviError):
    """Residual evaluation requested at y in {0, 1, x}."""


# --- integration ---

class StepUnderflow(PviError):
    """Adaptive step size shrank below the resolvable minimum."""


class FixedSingularityApproach(PviError):
    """Integration path passes too close to a fixed singular point x in {0, 1}."""
