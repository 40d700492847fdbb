import cmath
import math
import random

import pytest

from pvikit.errors import NotInFactorizedRegime, ThetaInfinityZero
from pvikit.monodromy import (
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

from conftest import random_cubic_point, random_theta


def fricke_reference(s: TraceSet) -> complex:
    """Independently coded expansion of the cubic (different grouping)."""
    x, y, z = s.p0x, s.p01, s.px1
    a, b, c, d = s.p0, s.px, s.p1, s.pinf
    total = x * x + y * y + z * z + x * y * z
    total -= x * (a * b + c * d)
    total -= y * (a * c + b * d)
    total -= z * (b * c + a * d)
    total += a * a + b * b + c * c + d * d + a * b * c * d - 4.0
    return total


class TestThetaCoefficients:
    def test_theta_from_coefficients_examples(self):
        t = theta_from_coefficients(PviCoefficients(0.5, 0.0, 0.0, 0.5))
        assert t.as_tuple() == (0, 0, 0, 2)
        t = theta_from_coefficients(PviCoefficients(1 / 8, -1 / 8, 1 / 8, 3 / 8))
        for got, want in zip(t.as_tuple(), (0.5, 0.5, 0.5, 1.5)):
            assert abs(got - want) < 1e-14

    def test_coefficients_from_theta_examples(self):
        c = coefficients_from_theta(ThetaVector(0, 0, 0, 2))
        assert c.as_tuple() == (0.5, 0.0, 0.0, 0.5)
        c = coefficients_from_theta(ThetaVector(1, 1, 1, 1))
        assert c.as_tuple() == (0.0, -0.5, 0.5, 0.0)

    def test_sign_equivalence(self):
        t = ThetaVector(0.3 + 0.1j, 0.4, 0.5, 1.7)
        t2 = ThetaVector(-(0.3 + 0.1j), 0.4, 0.5, 1.7)
        assert coefficients_from_theta(t).as_tuple() == coefficients_from_theta(t2).as_tuple()

    def test_round_trip_canonical(self, rng):
        for _ in range(50):
            t = random_theta(rng).canonical()
            t2 = theta_from_coefficients(coefficients_from_theta(t))
            for a, b in zip(t.as_tuple(), t2.as_tuple()):
                assert abs(a - b) < 1e-12

    def test_thetainf_zero_rejected(self):
        with pytest.raises(ThetaInfinityZero):
            ThetaVector(0.3, 0.4, 0.5, 0.0)

    def test_canonicalisation(self):
        t = ThetaVector(-0.3, 0.4, 0.5 - 0.2j, 0.3)
        tc = t.canonical()
        assert tc.theta0 == 0.3
        assert tc.thetainf == 2 - 0.3
        assert t.is_equivalent(tc)


class TestPeripheralTraces:
    def test_examples(self):
        assert all(abs(p) < 1e-13 for p in peripheral_traces(ThetaVector(0.5, 0.5, 0.5, 1.5)))
        assert all(abs(p - 2) < 1e-13 for p in peripheral_traces(ThetaVector(0, 0, 0, 2)))
        p = peripheral_traces(ThetaVector(1 / 3, 0, 0, 2))
        assert abs(p[0] - 1) < 1e-13 and all(abs(q - 2) < 1e-13 for q in p[1:])

    def test_equivalence_invariance(self, rng):
        for _ in range(30):
            t = random_theta(rng)
            t2 = ThetaVector(-t.theta0, t.thetax, t.theta1, 2 - t.thetainf)
            for a, b in zip(peripheral_traces(t), peripheral_traces(t2)):
                assert abs(a - b) < 1e-12


class TestFricke:
    def test_identity_monodromy(self):
        s = TraceSet(2, 2, 2, 2, 2, 2, 2)
        assert fricke_residual(s) == 0

    def test_agrees_with_reference(self, rng):
        for _ in range(10_000):
            vals = [complex(rng.uniform(-3, 3), rng.uniform(-1, 1)) for _ in range(7)]
            s = TraceSet(*vals)
            assert abs(fricke_residual(s) - fricke_reference(s)) < 1e-12 * max(
                1.0, abs(fricke_reference(s)))

    def test_perturbation_detected(self, rng):
        t = random_theta(rng)
        s = random_cubic_point(rng, t)
        assert abs(fricke_residual(s)) < 1e-9
        s2 = TraceSet(s.p0, s.px, s.p1, s.pinf, s.p0x, s.px1, s.p01 + 1.0)
        assert abs(fricke_residual(s2)) > 1e-3


class TestSolveThirdTrace:
    def test_identity_case(self):
        s = TraceSet(2, 2, 2, 2, 2, 2, 0.0)
        roots = solve_third_trace(s)
        assert any(abs(r - 2) < 1e-12 for r in roots)

    def test_self_consistency(self, rng):
        for _ in range(100):
            t = random_theta(rng)
            s = random_cubic_point(rng, t)
            roots = solve_third_trace(s)
            assert min(abs(r - s.p01) for r in roots) < 1e-10
            for r in roots:
                s2 = TraceSet(s.p0, s.px, s.p1, s.pinf, s.p0x, s.px1, r)
                assert abs(fricke_residual(s2)) < 1e-10

    def test_symmetric_roots_swap(self):
        t = ThetaVector(0.3, 0.3, 0.3, 2 - 0.3)
        p0, px, p1, pinf = peripheral_traces(t)
        s = TraceSet(p0, px, p1, pinf, 0.7, 0.7, 0.0)
        r1, r2 = solve_third_trace(s)
        # both roots satisfy the cubic; the pair is an unordered invariant
        for r in (r1, r2):
            assert abs(fricke_residual(TraceSet(p0, px, p1, pinf, 0.7, 0.7, r))) < 1e-10


class TestFactorResiduals:
    def _factorized_point(self, rng, point, sign):
        t = random_theta(rng)
        t0, tx, t1, ti = t.as_tuple()
        w = {"0": ti - sign * t1, "1": ti - sign * t0, "inf": ti - sign * tx}[point]
        val = 2 * cmath.cos(math.pi * w)
        other = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.5, 0.5))
        if point == "0":
            base = TraceSet.from_theta(t, val, other, 0.0)
            p01 = rng.choice(solve_third_trace(base))
            s = TraceSet.from_theta(t, val, other, p01)
        elif point == "1":
            base = TraceSet.from_theta(t, other, val, 0.0)
            p01 = rng.choice(solve_third_trace(base))
            s = TraceSet.from_theta(t, other, val, p01)
        else:
            # solve the cubic for p0x given (px1, p01)
            p0, px, p1, pinf = peripheral_traces(t)
            b = val * other - (p0 * px + p1 * pinf)
            c = (val**2 + other**2 - (p0 * p1 + px * pinf) * val
                 - (px * p1 + p0 * pinf) * other
                 + p0**2 + p1**2 + px**2 + pinf**2 + p0 * px * p1 * pinf - 4.0)
            disc = cmath.sqrt(b * b - 4 * c)
            p0x = rng.choice(((-b + disc) / 2, (-b - disc) / 2))
            s = TraceSet.from_theta(t, p0x, other, val)
        return t, s

    @pytest.mark.parametrize("point", ["0", "1", "inf"])
    @pytest.mark.parametrize("sign", [+1, -1])
    def test_one_factor_vanishes(self, rng, point, sign):
        for _ in range(10):
            t, s = self._factorized_point(rng, point, sign)
            assert abs(fricke_residual(s)) < 1e-9
            f1, f2 = factor_residuals(t, s, point)
            assert min(abs(f1), abs(f2)) < 1e-8
            assert abs(f1 * f2) < 1e-8

    def test_swap_under_sign_flip(self, rng):
        # flipping theta1 - thetainf exchanges the two brackets
        t, s = self._factorized_point(rng, "0", +1)
        f1, f2 = factor_residuals(t, s, "0")
        t2 = ThetaVector(t.theta0, t.thetax, -t.theta1, 2 - t.thetainf)
        g1, g2 = factor_residuals(t2, s, "0")
        assert abs(f1 - g2) < 1e-9 and abs(f2 - g1) < 1e-9

    def test_regime_gate(self, rng):
        t = random_theta(rng)
        s = random_cubic_point(rng, t)
        with pytest.raises(NotInFactorizedRegime):
            factor_residuals(t, s, "0")


class TestOkamotoActions:
    def test_sym2_trace_example(self):
        s = TraceSet(2, 2, 2, 2, 1, 3, 2)
        s2 = apply_okamoto_traces(OkamotoElement.SYM2, s)
        assert (s2.p0x, s2.p01, s2.px1) == (-1, -2, 3)

    def test_sym2_involution_on_pairs(self, rng):
        t = random_theta(rng)
        s = random_cubic_point(rng, t)
        s2 = apply_okamoto_traces(OkamotoElement.SYM2, apply_okamoto_traces(OkamotoElement.SYM2, s))
        for f in ("p0x", "px1", "p01"):
            assert abs(getattr(s2, f) - getattr(s, f)) < 1e-12

    def test_onara_identity_fixed_point(self):
        s = TraceSet(2, 2, 2, 2, 2, 2, 2)
        s2 = apply_okamoto_traces(OkamotoElement.ONARA, s)
        assert all(abs(getattr(s2, f) - 2) < 1e-14 for f in
                   ("p0", "px", "p1", "pinf", "p0x", "px1", "p01"))

    def test_onara_involution(self, rng):
        for _ in range(20):
            t = random_theta(rng)
            s = random_cubic_point(rng, t)
            s2 = apply_okamoto_traces(OkamotoElement.ONARA,
                                      apply_okamoto_traces(OkamotoElement.ONARA, s))
            for f in ("p0x", "px1", "p01"):
                assert abs(getattr(s2, f) - getattr(s, f)) < 1e-10

    @pytest.mark.parametrize("elem", [OkamotoElement.ONARA, OkamotoElement.ONARA1,
                                      OkamotoElement.SYM2])
    def test_cubic_preserved(self, rng, elem):
        for _ in range(25):
            t = random_theta(rng)
            s = random_cubic_point(rng, t)
            assert abs(fricke_residual(s)) < 1e-9
            s2 = apply_okamoto_traces(elem, s)
            assert abs(fricke_residual(s2)) < 1e-8

    def test_theta_actions_printed(self):
        t = ThetaVector(0.1, 0.2, 0.3, 0.9)
        w3 = apply_okamoto_theta(OkamotoElement.W3, t)
        assert w3.as_tuple() == (0.1, 0.2, 0.3, 2 - 0.9)
        l3 = apply_okamoto_theta(OkamotoElement.L3, ThetaVector(0, 0, 0, 2))
        assert l3.as_tuple() == (0, 1, 0, 3)
        w2 = apply_okamoto_theta(OkamotoElement.W2, ThetaVector(1, 1, 1, 1))
        assert w2.as_tuple() == (1, 1, 1, 1)
        w1 = apply_okamoto_theta(OkamotoElement.W1, t)
        assert w1.as_tuple() == (0.1, 0.2, -0.3, 0.9)

    def test_sym2_theta(self):
        t = ThetaVector(0.1, 0.2, 0.3, 1.4)
        s2 = apply_okamoto_theta(OkamotoElement.SYM2, t)
        got = s2.as_tuple()
        want = (1.4 - 1, 0.3, 0.2, 0.1 + 1)
        assert all(abs(a - b) < 1e-15 for a, b in zip(got, want))

    def test_serialization_round_trip(self, rng):
        t = random_theta(rng)
        assert ThetaVector.from_json(t.to_json()) == t
        s = random_cubic_point(rng, t)
        assert TraceSet.from_json(s.to_json()) == s
        c = coefficients_from_theta(t)
        c2 = PviCoefficients.from_json(c.to_json())
        assert c2.as_tuple() == c.as_tuple()
