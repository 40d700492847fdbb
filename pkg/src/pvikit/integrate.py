"""Adaptive integration of PVI along paths in the complex x-plane.

Dormand-Prince 5(4) embedded pair with PI step-size control.  Movable
poles are traversed by switching to the reciprocal variable w = x / y,
which solves PVI with the rotated coefficient set; the swap is hysteretic
to prevent chatter.  Chart swaps near a pole are recorded as pole events
with a Newton estimate of the pole abscissa.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from .errors import FixedSingularityApproach, StepUnderflow
from .monodromy import PviCoefficients

__all__ = [
    "Trajectory",
    "TrajectorySample",
    "integrate_path",
    "detect_pole_ray",
    "pvi_rhs",
    "CHART_THRESHOLD",
]

CHART_THRESHOLD = 1e3     # |y| above which the reciprocal chart is used
_HYSTERESIS = 10.0        # swap back only when |y| < threshold / hysteresis

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def pvi_rhs(x: complex, y: complex, dy: complex, c: PviCoefficients) -> complex:
    """Second derivative of y from the PVI equation."""
    return (0.5 * (1.0 / y + 1.0 / (y - 1.0) + 1.0 / (y - x)) * dy * dy
            - (1.0 / x + 1.0 / (x - 1.0) + 1.0 / (y - x)) * dy
            + y * (y - 1.0) * (y - x) / (x * x * (x - 1.0) ** 2)
            * (c.alpha + c.beta * x / (y * y) + c.gamma * (x - 1.0) / ((y - 1.0) ** 2)
               + c.delta * x * (x - 1.0) / ((y - x) ** 2)))


def _sym2_coeffs(c: PviCoefficients) -> PviCoefficients:
    return PviCoefficients(alpha=-c.beta, beta=-c.alpha,
                           gamma=0.5 - c.delta, delta=0.5 - c.gamma)


@dataclass(frozen=True)
class TrajectorySample:
    x: complex
    y: complex
    dy: complex
    chart: str  # "Direct" | "Reciprocal"


@dataclass
class Trajectory:
    """Accepted integration samples with pole-crossing annotations."""

    samples: list = field(default_factory=list)
    pole_events: list = field(default_factory=list)
    tol: float = 1e-8
    chart_threshold: float = CHART_THRESHOLD

    @property
    def end(self) -> TrajectorySample:
        return self.samples[-1]

    def to_csv(self) -> str:
        lines = ["x_re,x_im,y_re,y_im,dy_re,dy_im,chart"]
        for s in self.samples:
            lines.append(f"{s.x.real!r},{s.x.imag!r},{s.y.real!r},{s.y.imag!r},"
                         f"{s.dy.real!r},{s.dy.imag!r},{s.chart}")
        return "\n".join(lines) + "\n"


def _to_reciprocal(x: complex, y: complex, dy: complex) -> tuple[complex, complex]:
    return x / y, (y - x * dy) / (y * y)


def _from_reciprocal(x: complex, w: complex, dw: complex) -> tuple[complex, complex]:
    return x / w, (w - x * dw) / (w * w)


def _segment_guard(a: complex, b: complex) -> None:
    # interior approach to a fixed singular point is fatal; an endpoint may
    # legitimately sit deep inside a pole-accumulation region near 0
    for sing in (0.0, 1.0):
        d = b - a
        L2 = (d.real**2 + d.imag**2)
        if L2 == 0:
            continue
        s = ((sing - a) * d.conjugate()).real / L2
        dist = abs(a + max(0.0, min(1.0, s)) * d - sing)
        end_dist = min(abs(a - sing), abs(b - sing))
        if dist < 1e-12 or (0.01 < s < 0.99 and dist < 1e-3 * end_dist):
            raise FixedSingularityApproach(
                f"path passes within {dist:.2e} of x = {int(sing)}")


def integrate_path(c: PviCoefficients, x0: complex, y0: complex, dy0: complex,
                   path: list, tol: float = 1e-10,
                   chart_threshold: float = CHART_THRESHOLD,
                   max_steps: int = 200_000) -> Trajectory:
    """Integrate PVI from (x0, y0, dy0) through the waypoints of ``path``.

    Each consecutive pair of waypoints is a straight segment; the start
    point x0 must equal path[0] if path begins elsewhere it is prepended.
    Local error per step is kept at ``tol`` (mixed absolute/relative);
    movable poles are crossed in the reciprocal chart.

    Raises
    ------
    StepUnderflow
        When the step size collapses (unresolvable singularity).
    FixedSingularityApproach
        When the path comes too close to x = 0 or x = 1.
    """
    pts = [complex(p) for p in path]
    if not pts or pts[0] != complex(x0):
        pts = [complex(x0)] + pts
    for a, b in zip(pts, pts[1:]):
        _segment_guard(a, b)

    c2 = _sym2_coeffs(c)
    traj = Trajectory(tol=tol, chart_threshold=chart_threshold)
    chart = "Direct"
    y, dy = complex(y0), complex(dy0)
    if abs(y) > chart_threshold:
        chart = "Reciprocal"
        y, dy = _to_reciprocal(complex(x0), y, dy)
    traj.samples.append(_mk_sample(pts[0], y, dy, chart))
    nsteps = 0

    for a, b in zip(pts, pts[1:]):
        seg = b - a
        if seg == 0:
            continue
        s = 0.0          # position along the segment, 0..1
        h = 0.01
        errprev = 1.0
        while s < 1.0:
            if nsteps > max_steps:
                raise StepUnderflow("step budget exhausted")
            h = min(h, 1.0 - s)
            x_cur = a + s * seg
            cc = c2 if chart == "Reciprocal" else c
            try:
                ynew, dynew, err = _dp_step(x_cur, y, dy, h, seg, cc, tol)
            except (ZeroDivisionError, OverflowError, ValueError):
                err = math.inf
                ynew = dynew = 0.0
            if not math.isfinite(err):
                h *= 0.25
                if h < 1e-13:
                    raise StepUnderflow(f"step underflow at x = {x_cur}")
                continue
            if err <= 1.0:
                s += h
                x_cur = a + s * seg
                y, dy = ynew, dynew
                nsteps += 1
                # hysteretic chart management
                if chart == "Direct" and abs(y) > chart_threshold:
                    chart = "Reciprocal"
                    y, dy = _to_reciprocal(x_cur, y, dy)
                elif chart == "Reciprocal":
                    if dy != 0:
                        # Newton step toward the nearby zero of w (= pole of y)
                        step = y / dy
                        if abs(step) < 0.05 * abs(x_cur):
                            _note_pole(traj, x_cur - step, x_cur)
                    mag = abs(x_cur / y) if y != 0 else math.inf
                    if mag < chart_threshold / _HYSTERESIS:
                        yd, dyd = _from_reciprocal(x_cur, y, dy)
                        chart = "Direct"
                        y, dy = yd, dyd
                traj.samples.append(_mk_sample(x_cur, y, dy, chart))
                fac = 0.9 * err ** (-0.7 / 5.0) * errprev ** (0.4 / 5.0) if err > 1e-12 else 5.0
                h = h * min(5.0, max(0.2, fac))
                errprev = max(err, 1e-4)
            else:
                h = h * min(1.0, max(0.2, 0.9 * err ** (-0.2)))
                if h < 1e-13:
                    raise StepUnderflow(f"step underflow at x = {x_cur}")
    return traj


def _note_pole(traj: Trajectory, x_est: complex, x_near: complex) -> None:
    # cluster repeated estimates of the same pole; keep the closest approach
    for ev in traj.pole_events:
        if abs(ev["x_estimate"] - x_est) < 0.02 * max(abs(x_est), 1e-300):
            if abs(x_near - x_est) < abs(ev["x_nearest"] - ev["x_estimate"]):
                ev["x_estimate"] = x_est
                ev["x_nearest"] = x_near
            return
    traj.pole_events.append({"x_estimate": x_est, "x_nearest": x_near})


def _mk_sample(x: complex, state0: complex, state1: complex, chart: str) -> TrajectorySample:
    if chart == "Reciprocal":
        y, dy = _from_reciprocal(x, state0, state1)
    else:
        y, dy = state0, state1
    return TrajectorySample(x=x, y=y, dy=dy, chart=chart)


def _dp_step(x: complex, y: complex, dy: complex, h: float, seg: complex,
             c: PviCoefficients, tol: float) -> tuple[complex, complex, float]:
    """One DP5(4) step of size h (segment fraction); returns the new state
    and the error estimate scaled so that <= 1 means acceptable."""
    k: list[tuple[complex, complex]] = []
    for i in range(7):
        yi, dyi = y, dy
        for j, aij in enumerate(_A[i]):
            yi += h * aij * k[j][0]
            dyi += h * aij * k[j][1]
        xi = x + _C[i] * h * seg
        f2 = pvi_rhs(xi, yi, dyi, c)
        k.append((seg * dyi, seg * f2))
    y5 = y + h * sum(b * ki[0] for b, ki in zip(_B5, k))
    dy5 = dy + h * sum(b * ki[1] for b, ki in zip(_B5, k))
    y4 = y + h * sum(b * ki[0] for b, ki in zip(_B4, k))
    dy4 = dy + h * sum(b * ki[1] for b, ki in zip(_B4, k))
    # error per unit step, so the accumulated error scales linearly in tol
    sy = tol * h * (1.0 + max(abs(y), abs(y5)))
    sdy = tol * h * (1.0 + max(abs(dy), abs(dy5)))
    err = max(abs(y5 - y4) / sy, abs(dy5 - dy4) / sdy)
    return y5, dy5, err


def detect_pole_ray(traj: Trajectory) -> list:
    """Estimated movable-pole abscissae from the trajectory's chart-swap
    records (empty when no pole was crossed)."""
    return [ev["x_estimate"] for ev in traj.pole_events]


def trajectory_residuals(traj: Trajectory, c: PviCoefficients,
                         max_samples: int = 20) -> list:
    """PVI residuals at interior trajectory samples.

    The second derivative is reconstructed by Richardson-extrapolated
    central differences of dy, each value obtained by short re-integrations
    anchored at the neighbouring sample, so the measure reflects the
    consistency of the recorded samples rather than a tautology.
    """
    out = []
    idx = range(1, len(traj.samples) - 1)
    stride = max(1, len(idx) // max_samples)
    for i in list(idx)[::stride]:
        prev, cur = traj.samples[i - 1], traj.samples[i]
        if cur.chart != "Direct" or prev.chart != "Direct":
            continue
        h = 5e-4 * (1.0 + abs(cur.x))
        try:
            def dy_at(xt: complex) -> complex:
                tr = integrate_path(c, prev.x, prev.y, prev.dy, [prev.x, xt], tol=1e-13)
                return tr.end.dy

            d_h = (dy_at(cur.x + h) - dy_at(cur.x - h)) / (2.0 * h)
            d_h2 = (dy_at(cur.x + h / 2) - dy_at(cur.x - h / 2)) / h
            d2y = (4.0 * d_h2 - d_h) / 3.0
            from .series import pvi_residual
            out.append(abs(pvi_residual(cur.y, cur.dy, d2y, cur.x, c)))
        except (StepUnderflow, FixedSingularityApproach, ZeroDivisionError):
            continue
    return out
