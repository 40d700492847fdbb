import cmath
import random

import pytest

from pvikit.monodromy import ThetaVector, TraceSet, peripheral_traces, solve_third_trace


def random_theta(rng: random.Random, imag: float = 0.15) -> ThetaVector:
    """Generic theta away from integer resonances (combinations >= ~0.05
    from the integers for typical draws)."""
    return ThetaVector(
        complex(rng.uniform(0.12, 0.85), rng.uniform(-imag, imag)),
        complex(rng.uniform(0.12, 0.85), rng.uniform(-imag, imag)),
        complex(rng.uniform(0.12, 0.85), rng.uniform(-imag, imag)),
        complex(rng.uniform(1.12, 1.85), rng.uniform(-imag, imag)),
    )


def random_sigma(rng: random.Random, lo: float = 0.05, hi: float = 0.95,
                 imag: float = 0.2) -> complex:
    return complex(rng.uniform(lo, hi), rng.uniform(-imag, imag))


def random_a(rng: random.Random, spread: float = 1.0) -> complex:
    return cmath.exp(complex(rng.uniform(-spread, spread), rng.uniform(-3.0, 3.0)))


def random_cubic_point(rng: random.Random, t: ThetaVector) -> TraceSet:
    """Random point on the Fricke cubic for the given theta."""
    p0x = complex(rng.uniform(-2.2, 2.2), rng.uniform(-0.6, 0.6))
    px1 = complex(rng.uniform(-2.2, 2.2), rng.uniform(-0.6, 0.6))
    base = TraceSet.from_theta(t, p0x, px1, 0.0)
    p01 = rng.choice(solve_third_trace(base))
    return TraceSet.from_theta(t, p0x, px1, p01)


@pytest.fixture
def rng():
    return random.Random(20260808)
