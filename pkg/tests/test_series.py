import cmath
import math
import random

import pytest

from pvikit.classify import BehaviourDescriptor, BehaviourKind, Tag, classify_at
from pvikit.connect import (
    a_from_monodromy,
    descriptor_from_monodromy,
    sigma_from_trace,
    traces_from_generic_constants,
)
from pvikit.errors import ConstraintViolation, NearPole, OutsideDomain, UnsupportedMap
from pvikit.monodromy import (
    OkamotoElement,
    ThetaVector,
    apply_okamoto_theta,
    apply_okamoto_traces,
    coefficients_from_theta,
)
from pvikit.series import (
    build_expansion,
    evaluate,
    evaluate_with_second,
    map_expansion,
    pvi_residual,
    pvi_residual_cleared,
    reducible_solution,
    residual_tail,
)

from conftest import random_a, random_sigma, random_theta


def _theta(*vals):
    return ThetaVector(*[complex(v) for v in vals])


class TestSeeds:
    def test_fullexp_printed_seeds(self):
        # sigma = 1/2 with beta = 0, delta = 1/2: c10 = 1/2, c1,-1 = 1/16
        t = _theta(0.0, 0.0, 0.37, 1.44)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"), {"sigma": 0.5, "a": 1.0})
        e = build_expansion(d, t, order=4)
        assert abs(e.coeffs[(1, 1)] - 1.0) < 1e-14
        assert abs(e.coeffs[(1, 0)] - 0.5) < 1e-14
        assert abs(e.coeffs[(1, -1)] - 1.0 / 16.0) < 1e-14

    def test_atopy_seed(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.ATOPY, "0", k=2), {"a": 0.7})
        e = build_expansion(d, t, order=4)
        expect = t.theta0 / (t.theta0 + t.thetax)
        assert abs(e.coeffs[(1, 0)] - expect) < 1e-12

    def test_uuu_seed(self, rng):
        t = random_theta(rng)
        c = coefficients_from_theta(t)
        d = BehaviourDescriptor(BehaviourKind(Tag.UUU, "0", k=1), {"a": 0.7})
        e = build_expansion(d, t, order=4)
        d00 = (cmath.sqrt(c.alpha) - cmath.sqrt(c.gamma)) / cmath.sqrt(c.alpha)
        assert abs(e.coeffs[(0, 0)] - d00) < 1e-12
        assert abs(e.coeffs[(1, 1)] - 1.0) < 1e-14
        assert abs(e.inner_a - (-0.7 * d00**2)) < 1e-12

    def test_ttlo1_b1(self):
        # theta0 - thetax = 1 (N = 1) and alpha = gamma so the Taylor
        # reduction condition holds; b1 = sqrt(-2 beta) / N
        t = _theta(1.3, 0.3, 0.41, 1.41)
        d = BehaviourDescriptor(BehaviourKind(Tag.TTLO1, "0", k=1, N=1), {"a": 0.8})
        e = build_expansion(d, t, order=5)
        assert abs(e.coeffs[(1, 0)] - 1.3) < 1e-12
        assert abs(e.coeffs[(2, 0)] - 0.8) < 1e-14

    def test_ttlo3_b0(self):
        # thetainf - 1 - theta1 = 1 (N = 1) with theta0 = thetax for the
        # reduction condition; b0 = N / sqrt(2 alpha)
        t = _theta(0.23, 0.23, 0.4, 2.4)
        d = BehaviourDescriptor(BehaviourKind(Tag.TTLO3, "0", k=1, N=1), {"a": 0.8})
        e = build_expansion(d, t, order=5)
        assert abs(e.coeffs[(0, 0)] - 1.0 / 1.4) < 1e-12

    def test_ttlo2_second_coefficient(self, rng):
        t = _theta(0.0, 0.0, 0.41, 1.52)
        c = coefficients_from_theta(t)
        a = 1.3 - 0.2j
        d = BehaviourDescriptor(BehaviourKind(Tag.TTLO2, "0"), {"a": a})
        e = build_expansion(d, t, order=5)
        assert abs(e.coeffs[(2, 0)] - a * (a - 1) * (c.gamma - c.alpha - 0.5)) < 1e-10

    def test_ttlo4_second_coefficient(self, rng):
        t = _theta(0.31, 0.52, 0.0, 1.0)
        c = coefficients_from_theta(t)
        a = 1.7 - 0.4j
        d = BehaviourDescriptor(BehaviourKind(Tag.TTLO4, "0"), {"a": a})
        e = build_expansion(d, t, order=5)
        assert abs(e.coeffs[(1, 0)] - (1 - a) * (c.delta - c.beta)) < 1e-10

    def test_davidekan_zero_for_beta_zero(self):
        t = _theta(0.0, 0.41, 0.3, 1.6)
        d = BehaviourDescriptor(BehaviourKind(Tag.DAVIDEKAN, "0", k=2), {})
        e = build_expansion(d, t, order=6)
        assert not e.coeffs
        y, dy = evaluate(e, 0.01)
        assert y == 0 and dy == 0


KIND_CASES = [
    ("FullExp", lambda rng: (random_theta(rng),
                             BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                                 {"sigma": random_sigma(rng, 0.2, 0.8),
                                                  "a": random_a(rng)}))),
    ("Atopy", lambda rng: (random_theta(rng),
                           BehaviourDescriptor(BehaviourKind(Tag.ATOPY, "0", k=2),
                                               {"a": random_a(rng)}))),
    ("UUU", lambda rng: (random_theta(rng),
                         BehaviourDescriptor(BehaviourKind(Tag.UUU, "0", k=1),
                                             {"a": random_a(rng)}))),
    ("Davidekan", lambda rng: (random_theta(rng),
                               BehaviourDescriptor(BehaviourKind(Tag.DAVIDEKAN, "0", k=1), {}))),
    ("T1coe", lambda rng: (random_theta(rng),
                           BehaviourDescriptor(BehaviourKind(Tag.T1COE, "0", k=1), {}))),
    ("TTLO2", lambda rng: (_theta(0, 0, 0.41, 1.52),
                           BehaviourDescriptor(BehaviourKind(Tag.TTLO2, "0"),
                                               {"a": random_a(rng)}))),
    ("TTLO4", lambda rng: (_theta(0.31, 0.52, 0, 1),
                           BehaviourDescriptor(BehaviourKind(Tag.TTLO4, "0"),
                                               {"a": random_a(rng)}))),
    ("Log1Zero", lambda rng: (_theta(0.31 + 0.04j, 0.31 + 0.04j, 0.43, 1.36),
                              BehaviourDescriptor(BehaviourKind(Tag.LOG1ZERO, "0", k=1),
                                                  {"a": random_a(rng)}))),
    ("LogSquare", lambda rng: (random_theta(rng),
                               BehaviourDescriptor(BehaviourKind(Tag.LOGSQUARE, "0"),
                                                   {"a": random_a(rng)}))),
    ("Lantern1", lambda rng: (random_theta(rng),
                              BehaviourDescriptor(BehaviourKind(Tag.LANTERN1, "0"),
                                                  {"nu": rng.uniform(0.2, 0.7),
                                                   "phi": complex(rng.uniform(-2, 2),
                                                                  rng.uniform(-0.4, 0.4))}))),
]


class TestResidualDecay:
    @pytest.mark.parametrize("name,gen", KIND_CASES, ids=[k for k, _ in KIND_CASES])
    def test_truncation_solves_pvi(self, rng, name, gen):
        t, d = gen(rng)
        c = coefficients_from_theta(t)
        e = build_expansion(d, t, order=8)
        r3 = []
        for xv in (1e-2, 1e-3):
            y, dy, d2y = evaluate_with_second(e, xv, radius=0.2)
            r3.append(abs(pvi_residual_cleared(y, dy, d2y, xv, c)))
        assert r3[0] < 1e-8 and r3[1] < r3[0] + 1e-16

    def test_div_relative_residual(self, rng):
        # the divergent family blows up at 0; the cleared residual is
        # meaningful only relative to the cancellation scale of its terms
        t = _theta(0.27, 0.41, 0.56, 1)
        c = coefficients_from_theta(t)
        d = BehaviourDescriptor(BehaviourKind(Tag.DIV, "0"), {"a": random_a(rng)})
        e = build_expansion(d, t, order=8)
        for xv in (1e-2, 1e-3):
            y, dy, d2y = evaluate_with_second(e, xv, radius=0.2)
            num = pvi_residual_cleared(y, dy, d2y, xv, c)
            A = y * (y - 1) * (y - xv)
            scale = abs(2 * xv**2 * (xv - 1) ** 2 * A * d2y) + abs(2 * c.alpha * A**2) + abs(
                2 * c.gamma * (xv - 1) * (y * (y - xv)) ** 2)
            assert abs(num) < 1e-10 * scale

    def test_formal_residual_predicts_numerical(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                {"sigma": 0.41 + 0.07j, "a": 0.9 - 0.5j})
        e = build_expansion(d, t, order=6)
        tail = residual_tail(e)
        c = coefficients_from_theta(t)
        for xv in (1e-2, 1e-3):
            y, dy, d2y = evaluate_with_second(e, xv)
            num = pvi_residual_cleared(y, dy, d2y, xv, c)
            pred, _ = evaluate(tail, xv, radius=1.0)
            assert abs(num - pred) < 0.05 * max(abs(num), abs(pred))


class TestEvaluate:
    def test_fullexp_leading_limit(self, rng):
        # y / x^{1-sigma} -> c_{1,-1}/a with corrections O(x^sigma, x^{1-sigma})
        t = random_theta(rng)
        sg = 0.44 + 0.06j
        a = random_a(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"), {"sigma": sg, "a": a})
        e = build_expansion(d, t, order=10)
        lead = lambda x: e.coeffs[(1, -1)] / a * x ** (1 - sg)  # noqa: E731
        for x in (1e-6, 1e-8):
            y, _ = evaluate(e, x)
            bound = 20.0 * x ** min(sg.real, 1 - sg.real)
            assert abs(y / lead(x) - 1) < bound

    def test_uuu_limit_value(self, rng):
        t = random_theta(rng)
        c = coefficients_from_theta(t)
        d = BehaviourDescriptor(BehaviourKind(Tag.UUU, "0", k=2), {"a": 0.6 - 0.2j})
        e = build_expansion(d, t, order=8)
        d00 = (cmath.sqrt(c.alpha) + cmath.sqrt(c.gamma)) / cmath.sqrt(c.alpha)
        y, _ = evaluate(e, 1e-8)
        assert abs(y - d00) < 1e-5

    def test_outside_domain(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"), {"sigma": 0.4, "a": 1.0})
        e = build_expansion(d, t, order=4)
        with pytest.raises(OutsideDomain):
            evaluate(e, 0.2)  # default radius 0.05
        evaluate(e, 0.2, radius=0.5)

    def test_lantern_leading_form(self, rng):
        t = random_theta(rng)
        c = coefficients_from_theta(t)
        nu, phi = 0.4, 0.7 - 0.2j
        d = BehaviourDescriptor(BehaviourKind(Tag.LANTERN1, "0"), {"nu": nu, "phi": phi})
        e = build_expansion(d, t, order=8)
        B = (2 * nu**2 + c.gamma - c.alpha) / (4 * nu**2)
        A = -cmath.sqrt(c.alpha / (2 * nu**2) + B * B)
        x = 1e-6
        lead = 1.0 / (A * cmath.sin(2 * nu * math.log(x) + phi) + B)
        y, _ = evaluate(e, x)
        assert abs(y / lead - 1) < 1e-4

    def test_derivative_consistent(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                {"sigma": 0.37 + 0.1j, "a": 1.2})
        e = build_expansion(d, t, order=8)
        x, h = 4e-3, 1e-7
        yp, _ = evaluate(e, x + h)
        ym, _ = evaluate(e, x - h)
        _, dy = evaluate(e, x)
        assert abs((yp - ym) / (2 * h) - dy) < 1e-5 * max(1.0, abs(dy))


class TestMapExpansion:
    def _fullexp(self, rng, order=8):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                {"sigma": 0.37 + 0.08j, "a": 1.1 - 0.6j})
        return t, build_expansion(d, t, order=order)

    def test_onara_pointwise(self, rng):
        _, e = self._fullexp(rng)
        img = map_expansion(e, OkamotoElement.ONARA)
        assert img.point == "1"
        for _ in range(20):
            xv = 10 ** rng.uniform(-4, -2) * cmath.exp(1j * rng.uniform(-0.5, 0.5))
            y0, _ = evaluate(e, xv)
            y1, _ = evaluate(img, 1 - xv)
            assert abs(y1 - (1 - y0)) < 1e-10

    def test_onara1_pointwise(self, rng):
        _, e = self._fullexp(rng)
        img = map_expansion(e, OkamotoElement.ONARA1)
        assert img.point == "inf"
        for _ in range(20):
            xv = 10 ** rng.uniform(-4, -2) * cmath.exp(1j * rng.uniform(-0.5, 0.5))
            y0, _ = evaluate(e, xv)
            yi, _ = evaluate(img, 1.0 / xv)
            assert abs(yi - y0 / xv) < 1e-10

    def test_sym2_exponent_and_pointwise(self, rng):
        t, e = self._fullexp(rng)
        img = map_expansion(e, OkamotoElement.SYM2)
        assert img.kind.tag is Tag.FULL_EXP
        assert abs(img.constants["sigma"] - (1 - (0.37 + 0.08j))) < 1e-14
        for _ in range(10):
            xv = 10 ** rng.uniform(-6, -5)
            y0, _ = evaluate(e, xv)
            y2, _ = evaluate(img, xv)
            assert abs(y2 - xv / y0) < 1e-8 * max(1.0, abs(y2))

    def test_sym2_unwraps_inverse_kinds(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.LANTERN1, "0"), {"nu": 0.4, "phi": 0.3})
        e = build_expansion(d, t, order=6)
        img = map_expansion(e, OkamotoElement.SYM2)
        assert img.kind.tag is Tag.FULL_EXP
        xv = 1e-3
        y0, _ = evaluate(e, xv)
        y2, _ = evaluate(img, xv)
        assert abs(y2 - xv / y0) < 1e-12 * max(1.0, abs(y2))

    def test_unsupported_map(self, rng):
        _, e = self._fullexp(rng)
        with pytest.raises(UnsupportedMap):
            map_expansion(e, OkamotoElement.W2)


class TestPviResidualFunction:
    def test_exact_solution(self):
        c = coefficients_from_theta(_theta(0.5, 0.5, 0.5, 1.5))
        assert (c.alpha, c.beta, c.gamma, c.delta) == (0.125, -0.125, 0.125, 0.375)
        x = 0.3
        y, dy, d2y = math.sqrt(x), 0.5 / math.sqrt(x), -0.25 * x**-1.5
        assert abs(pvi_residual(y, dy, d2y, x, c)) < 1e-12
        assert abs(pvi_residual_cleared(y, dy, d2y, x, c)) < 1e-12

    def test_generic_point_nonzero(self, rng):
        c = coefficients_from_theta(random_theta(rng))
        r = pvi_residual(0.4 + 0.1j, 0.3, 0.2, 0.37, c)
        assert abs(r) > 1e-3

    def test_singular_set(self, rng):
        from pvikit.errors import OnSingularSet
        c = coefficients_from_theta(random_theta(rng))
        with pytest.raises(OnSingularSet):
            pvi_residual(0.37, 1.0, 1.0, 0.37, c)


class TestTemplateClosure:
    def test_no_support_outside_index_set(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.FULL_EXP, "0"),
                                {"sigma": 0.41 + 0.07j, "a": 0.9})
        e = build_expansion(d, t, order=7)
        for (n, m) in e.coeffs:
            assert abs(m) <= n

    def test_atopy_support(self, rng):
        t = random_theta(rng)
        d = BehaviourDescriptor(BehaviourKind(Tag.ATOPY, "0", k=2), {"a": 0.9})
        e = build_expansion(d, t, order=7)
        for (n, m) in e.coeffs:
            assert 0 <= m <= n


class TestReducible:
    @staticmethod
    def _theta_reducible(rng):
        t0 = complex(rng.uniform(0.1, 0.6), rng.uniform(-0.1, 0.1))
        tx = complex(rng.uniform(0.1, 0.6), rng.uniform(-0.1, 0.1))
        t1 = complex(rng.uniform(0.1, 0.6), rng.uniform(-0.1, 0.1))
        return ThetaVector(t0, tx, t1, -(t0 + tx + t1))

    @staticmethod
    def _d2y(t, a, xv, h=2e-4):
        def d(hh):
            _, dyp = reducible_solution(t, a, xv + hh)
            _, dym = reducible_solution(t, a, xv - hh)
            return (dyp - dym) / (2 * hh)
        return (4.0 * d(h / 2) - d(h)) / 3.0

    def test_residual(self, rng):
        for _ in range(5):
            t = self._theta_reducible(rng)
            c = coefficients_from_theta(t)
            a = random_a(rng)
            for xv in (0.4, 0.2 + 0.1j):
                y, dy = reducible_solution(t, a, xv)
                assert abs(pvi_residual(y, dy, self._d2y(t, a, xv), xv, c)) < 1e-8

    def test_projective_invariance(self, rng):
        # shifting u1 by c u2 while shifting a back leaves y unchanged
        t = self._theta_reducible(rng)
        a = 0.8 - 0.3j
        y1, _ = reducible_solution(t, a, 0.3)
        y2, _ = reducible_solution(t, a, 0.3)
        assert y1 == y2  # determinism; the invariance is structural in u

    def test_large_a_limit(self, rng):
        t = self._theta_reducible(rng)
        y_big, _ = reducible_solution(t, 1e9, 0.35)
        y_bigger, _ = reducible_solution(t, 1e11, 0.35)
        assert abs(y_big - y_bigger) < 1e-5 * max(1.0, abs(y_big))

    def test_constraint_enforced(self, rng):
        with pytest.raises(ConstraintViolation):
            reducible_solution(random_theta(rng), 1.0, 0.4)

    def test_integer_difference_log_frame(self):
        # hypergeometric exponent difference 1 - c integer: theta0 + thetax = 1
        t = ThetaVector(0.3, 0.7, 0.5, -1.5)
        c = coefficients_from_theta(t)
        y, dy = reducible_solution(t, 0.7, 0.3)
        h = 1e-5
        _, dyp = reducible_solution(t, 0.7, 0.3 + h)
        _, dym = reducible_solution(t, 0.7, 0.3 - h)
        assert abs(pvi_residual(y, dy, (dyp - dym) / (2 * h), 0.3, c)) < 1e-7
