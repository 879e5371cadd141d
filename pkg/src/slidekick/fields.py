"""Planar vector fields, the Filippov pair, and the sliding dynamics on the
switching line.

The switching manifold is a horizontal line Sigma = {y = offset}.  The upper
field X+ is assumed to have a visible quadratic tangency (fold) with Sigma,
the lower field X- crosses Sigma transversally pointing up.  Orbits of the
non-smooth system concatenate X+/X- arcs with crossing transitions and with
sliding segments governed by the Filippov convex combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy.optimize import brentq

if TYPE_CHECKING:
    from slidekick.integrator import Section, Trajectory


class FieldsError(Exception):
    """Base class for errors raised by the fields module."""


class NotSliding(FieldsError):
    """The queried point is not in the sliding region."""


class NoSignChange(FieldsError):
    """The fold bracket does not contain a sign change of X2+."""


class MultipleRoots(FieldsError):
    """More than one sign change of X2+ detected at scan resolution."""


class EscapeRegion(FieldsError):
    """A Filippov orbit was started in (or reached) the escaping set."""


@dataclass(frozen=True)
class PlanarField:
    """A smooth planar vector field with value and Jacobian evaluation.

    ``func(x, y)`` returns the two field components.  If ``jac`` is not
    supplied, Jacobians fall back to central finite differences with step
    ``1e-6 * max(1, |x|, |y|)``, which is accurate enough for sign-level
    classification of tangencies.
    """

    func: Callable[[float, float], tuple[float, float]]
    jac: Callable[[float, float], np.ndarray] | None = None
    name: str = ""

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        fx, fy = self.func(x, y)
        return float(fx), float(fy)

    def jacobian(self, x: float, y: float) -> np.ndarray:
        if self.jac is not None:
            return np.asarray(self.jac(x, y), dtype=float)
        h = 1e-6 * max(1.0, abs(x), abs(y))
        fxp = self.func(x + h, y)
        fxm = self.func(x - h, y)
        fyp = self.func(x, y + h)
        fym = self.func(x, y - h)
        return np.array(
            [
                [(fxp[0] - fxm[0]) / (2 * h), (fyp[0] - fym[0]) / (2 * h)],
                [(fxp[1] - fxm[1]) / (2 * h), (fyp[1] - fym[1]) / (2 * h)],
            ]
        )

    def rhs(self, t: float, z) -> list[float]:
        """Right-hand side in the signature scipy's solve_ivp expects."""
        fx, fy = self.func(z[0], z[1])
        return [fx, fy]

    def negated(self) -> "PlanarField":
        """The time-reversed field (for backward integration)."""
        f = self.func
        return PlanarField(lambda x, y: (-f(x, y)[0], -f(x, y)[1]), name=f"-{self.name}")


@dataclass(frozen=True)
class FilippovSystem:
    """Ordered pair (X+, X-) with switching line y = offset.

    ``offset`` defaults to 0; the dry-friction models use a nonzero physical
    offset.  Within the neighbourhood of the fold, X2-(x, offset) > 0 is
    assumed (transversality of the lower field).
    """

    x_plus: PlanarField
    x_minus: PlanarField
    offset: float = 0.0

    def normal_components(self, x: float) -> tuple[float, float]:
        """(X2+, X2-) evaluated on the switching line."""
        return self.x_plus(x, self.offset)[1], self.x_minus(x, self.offset)[1]


class RegionClass(Enum):
    CROSSING = "crossing"
    SLIDING = "sliding"
    ESCAPING = "escaping"
    TANGENCY_PLUS = "tangency_plus"
    TANGENCY_MINUS = "tangency_minus"


@dataclass(frozen=True)
class FoldPoint:
    """A quadratic tangency of X+ with the switching line."""

    x: float
    visible: bool
    direction: int  # sign of X1+ at the fold


def _tangency_tol(system: FilippovSystem, x: float, tol_rel: float = 1e-10) -> float:
    # tol scales with the local field magnitude so near-misses at double
    # precision are separated from genuine folds
    fp = system.x_plus(x, system.offset)
    fm = system.x_minus(x, system.offset)
    scale = max(1.0, abs(fp[0]), abs(fp[1]), abs(fm[0]), abs(fm[1]))
    return tol_rel * scale


def classify_point(system: FilippovSystem, x: float, tol_tangency: float | None = None) -> RegionClass:
    """Classify a point of the switching line.

    Sliding requires X2+ < 0 < X2-, crossing X2+ * X2- > 0, escaping
    X2+ > 0 > X2-.  A normal component smaller than ``tol_tangency`` in
    magnitude marks a tangency of the corresponding field.
    """
    fp2, fm2 = system.normal_components(x)
    tol = _tangency_tol(system, x) if tol_tangency is None else tol_tangency
    if abs(fp2) <= tol:
        return RegionClass.TANGENCY_PLUS
    if abs(fm2) <= tol:
        return RegionClass.TANGENCY_MINUS
    if fp2 < 0.0 < fm2:
        return RegionClass.SLIDING
    if fp2 > 0.0 > fm2:
        return RegionClass.ESCAPING
    return RegionClass.CROSSING


def sliding_field(system: FilippovSystem, x: float) -> float:
    """Filippov sliding drift xdot = (X1+ X2- - X1- X2+) / (X2- - X2+).

    This is the unique convex combination of X+ and X- whose normal
    component vanishes on the sliding segment.
    """
    if classify_point(system, x) is not RegionClass.SLIDING:
        raise NotSliding(f"x={x} is not in the sliding region")
    y0 = system.offset
    f1p, f2p = system.x_plus(x, y0)
    f1m, f2m = system.x_minus(x, y0)
    return (f1p * f2m - f1m * f2p) / (f2m - f2p)


def sliding_weight(system: FilippovSystem, x: float) -> float:
    """The convex weight lam with lam*X+ + (1-lam)*X- tangent to Sigma."""
    f2p, f2m = system.normal_components(x)
    return f2m / (f2m - f2p)


def find_fold(
    system: FilippovSystem,
    bracket: tuple[float, float],
    tol_root: float = 1e-12,
    scan_points: int = 401,
) -> FoldPoint:
    """Locate the tangency of X+ within ``bracket`` and classify it.

    Scans for sign changes of X2+(., offset) at ``scan_points`` resolution;
    exactly one change is required, then the root is polished with brentq.
    Visibility follows the sign of d/dx X2+ times X1+ at the root.
    """
    a, b = bracket
    xs = np.linspace(a, b, scan_points)
    vals = np.array([system.x_plus(x, system.offset)[1] for x in xs])
    sign_changes = []
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            sign_changes.append((xs[i], xs[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            sign_changes.append((xs[i], xs[i + 1]))
    if vals[-1] == 0.0:
        sign_changes.append((xs[-1], xs[-1]))
    if not sign_changes:
        raise NoSignChange(f"X2+ does not change sign on {bracket}")
    if len(sign_changes) > 1:
        raise MultipleRoots(f"{len(sign_changes)} sign changes of X2+ on {bracket}")
    lo, hi = sign_changes[0]
    if lo == hi:
        x_f = lo
    else:
        x_f = brentq(lambda x: system.x_plus(x, system.offset)[1], lo, hi, xtol=tol_root)
    residual = system.x_plus(x_f, system.offset)[1]
    if abs(residual) > max(tol_root, 1e-10):
        raise NoSignChange(f"root polish failed, residual {residual:g}")
    dfx = system.x_plus.jacobian(x_f, system.offset)[1, 0]
    f1 = system.x_plus(x_f, system.offset)[0]
    return FoldPoint(x=float(x_f), visible=bool(dfx * f1 > 0.0), direction=int(math.copysign(1, f1)))


class StepLimitExceeded(FieldsError):
    """The hybrid flow exceeded its segment or step budget."""


def filippov_flow(
    system: FilippovSystem,
    start: tuple[float, float],
    stop: "Section | float",
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_segments: int = 200,
    t_max: float = 1e3,
    max_step: float = 0.05,
) -> "Trajectory":
    """Flow of the non-smooth system Z from ``start``.

    The orbit concatenates X+/X- arcs, crossing transitions, sliding
    segments governed by :func:`sliding_field`, and the exit at a visible
    fold along the unstable pseudo-separatrix of X+.  ``stop`` is either a
    :class:`~slidekick.integrator.Section` or a final time.

    Events are annotated in order: ``cross_section``, ``slide_start``,
    ``slide_end``, ``fold_exit`` and the region switches.
    """
    from slidekick import integrator as intg
    from scipy.integrate import solve_ivp

    y_sw = system.offset
    sec = stop if isinstance(stop, intg.Section) else None
    stop_at_slide = stop == "sliding"
    t_final = float(stop) if not (sec is not None or stop_at_slide) else t_max

    t0 = 0.0
    x0, y0 = float(start[0]), float(start[1])
    ts: list[np.ndarray] = []
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    events: list[intg.TrajectoryEvent] = []

    # starting exactly on Sigma: decide regime from the classification
    if abs(y0 - y_sw) <= 1e-14:
        cls = classify_point(system, x0)
        if cls is RegionClass.ESCAPING:
            raise EscapeRegion(f"start ({x0}, {y0}) lies in the escaping set")
        if cls is RegionClass.SLIDING:
            regime = "slide"
        elif cls is RegionClass.CROSSING:
            # both normal components share a sign in the crossing set; upward
            # transit continues into V+, downward into V-
            regime = "plus" if system.normal_components(x0)[1] > 0 else "minus"
        else:  # tangency of X+: leave along the unstable pseudo-separatrix
            regime = "plus"
    else:
        regime = "plus" if y0 > y_sw else "minus"

    def _done(t: float, x: float, y: float) -> bool:
        if sec is not None and abs(y - sec.y0) <= 1e-12 and sec.contains(x):
            return True
        return t >= t_final - 1e-14

    for _ in range(max_segments):
        if regime in ("plus", "minus"):
            field = system.x_plus if regime == "plus" else system.x_minus
            toward = -1 if regime == "plus" else +1  # direction of approach to Sigma

            # a start with vanishing normal velocity (fold exit) would retrigger
            # the tangency event immediately; advance one tiny Euler step
            f_at = field(x0, y0)
            if abs(f_at[1]) <= 1e-12 * max(1.0, abs(f_at[0])):
                t0 += 1e-10
                x0 += 1e-10 * f_at[0]
                y0 += 1e-10 * f_at[1]

            def ev_line(t, z):
                return z[1] - y_sw

            ev_line.terminal = True
            ev_line.direction = toward

            # tangential contact with Sigma shows up as an extremum of y close
            # to the line; in V+ the relevant contact is a minimum, in V- a
            # maximum
            def ev_tan(t, z, fld=field):
                return fld(z[0], z[1])[1]

            ev_tan.terminal = True
            ev_tan.direction = -toward

            evs = [ev_line, ev_tan]
            if sec is not None:
                def ev_sec(t, z):
                    return z[1] - sec.y0

                ev_sec.terminal = True
                ev_sec.direction = 0
                evs.append(ev_sec)

            sol = solve_ivp(
                field.rhs,
                (t0, t_final),
                [x0, y0],
                method="RK45",
                max_step=max_step,
                rtol=rtol,
                atol=atol,
                dense_output=True,
                events=evs,
            )
            if sol.status == -1:
                raise StepLimitExceeded(sol.message)
            ts.append(sol.t)
            xs.append(sol.y[0])
            ys.append(sol.y[1])
            t0 = float(sol.t[-1])
            x0, y0 = float(sol.y[0][-1]), float(sol.y[1][-1])

            t_stop = t0
            hit_line = sol.t_events[0].size > 0 and abs(sol.t_events[0][-1] - t_stop) <= 1e-12 * max(1.0, abs(t_stop))
            hit_tan = sol.t_events[1].size > 0 and abs(sol.t_events[1][-1] - t_stop) <= 1e-12 * max(1.0, abs(t_stop))
            hit_sec = (
                sec is not None
                and sol.t_events[2].size > 0
                and abs(sol.t_events[2][-1] - t_stop) <= 1e-12 * max(1.0, abs(t_stop))
            )

            if hit_sec and sec.contains(x0):
                events.append(intg.TrajectoryEvent(t0, f"cross_section:{sec.id}", (x0, y0)))
                return intg.Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), events)
            if hit_sec:
                # wrong half-line: nudge past the crossing and carry on
                f = field(x0, y0)
                t0 += 1e-11
                x0 += 1e-11 * f[0]
                y0 += 1e-11 * f[1]
                continue
            if hit_line:
                cls = classify_point(system, x0)
                if cls is RegionClass.SLIDING:
                    events.append(intg.TrajectoryEvent(t0, "slide_start", (x0, y_sw)))
                    if stop_at_slide:
                        return intg.Trajectory(
                            np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), events
                        )
                    regime = "slide"
                    y0 = y_sw
                elif cls is RegionClass.ESCAPING:
                    raise EscapeRegion(f"orbit reached the escaping set at x={x0}")
                elif cls is RegionClass.CROSSING:
                    new = "minus" if regime == "plus" else "plus"
                    events.append(intg.TrajectoryEvent(t0, f"switch_{new}", (x0, y_sw)))
                    regime = new
                    y0 = y_sw
                else:
                    # tangency point itself: continue in V+ along W^u
                    events.append(intg.TrajectoryEvent(t0, "fold_exit", (x0, y_sw)))
                    regime = "plus"
                    y0 = y_sw
            elif hit_tan:
                grazing = abs(y0 - y_sw) <= 1e-9
                if regime == "plus" and grazing:
                    events.append(intg.TrajectoryEvent(t0, "fold_exit", (x0, y_sw)))
                    y0 = y_sw
                # interior extremum (or graze): nudge past so the event does
                # not refire at the restart
                f = field(x0, y0)
                dt = 1e-10
                t0 += dt
                x0 += dt * f[0]
                if not grazing:
                    y0 += dt * f[1]
            elif t0 >= t_final - 1e-14:
                return intg.Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), events)
        else:  # sliding
            fold_ev = lambda t, z: system.x_plus(z[0], y_sw)[1]
            fold_ev.terminal = True
            fold_ev.direction = 0
            lower_ev = lambda t, z: system.x_minus(z[0], y_sw)[1]
            lower_ev.terminal = True
            lower_ev.direction = 0

            def slide_rhs(t, z):
                x = z[0]
                f1p, f2p = system.x_plus(x, y_sw)
                f1m, f2m = system.x_minus(x, y_sw)
                return [(f1p * f2m - f1m * f2p) / (f2m - f2p)]

            sol = solve_ivp(
                slide_rhs,
                (t0, t_final),
                [x0],
                method="RK45",
                rtol=rtol,
                atol=atol,
                events=[fold_ev, lower_ev],
            )
            if sol.status == -1:
                raise StepLimitExceeded(sol.message)
            ts.append(sol.t)
            xs.append(sol.y[0])
            ys.append(np.full_like(sol.t, y_sw))
            t0 = float(sol.t[-1])
            x0 = float(sol.y[0][-1])
            y0 = y_sw
            if sol.t_events[0].size > 0:
                # the slide reached the fold of X+: exit along W^u into V+
                events.append(intg.TrajectoryEvent(t0, "slide_end", (x0, y_sw)))
                events.append(intg.TrajectoryEvent(t0, "fold_exit", (x0, y_sw)))
                regime = "plus"
            elif sol.t_events[1].size > 0:
                events.append(intg.TrajectoryEvent(t0, "slide_end", (x0, y_sw)))
                regime = "minus"
            else:
                return intg.Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), events)
        if _done(t0, x0, y0):
            return intg.Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), events)
    raise StepLimitExceeded(f"hybrid flow did not terminate within {max_segments} segments")
