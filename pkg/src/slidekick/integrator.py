"""Adaptive ODE integration with dense output and event location.

Thin wrapper over scipy's solve_ivp that adds section objects, Newton
polishing of event times on the dense output, strip entry/exit annotation,
and the section-to-section flow map used by the Poincare machinery.

The default stepper is the embedded Runge-Kutta 5(4) pair; callers that
cross the slow-fast strip at small epsilon switch to the implicit one-step
Radau method, since the passage along the attracting slow manifold would
otherwise force O(1/eps) explicit steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable

import numpy as np
from scipy.integrate import solve_ivp

if TYPE_CHECKING:
    from slidekick.fields import PlanarField


class IntegratorError(Exception):
    pass


class StepLimitExceeded(IntegratorError):
    pass


class StepSizeUnderflow(IntegratorError):
    """Stiffness collapse: the stepper could not advance."""


class EventNotBracketed(IntegratorError):
    """A start sits on a section with no outgoing velocity to bracket."""


class NoArrival(IntegratorError):
    """The orbit left the domain of definition before reaching the target."""


@dataclass(frozen=True)
class Section:
    """A horizontal Poincare section {y = y0} restricted to a half-line."""

    y0: float
    half: str = "all"  # "x<0" | "x>0" | "all"
    id: str = ""

    def contains(self, x: float) -> bool:
        if self.half == "x<0":
            return x < 0.0
        if self.half == "x>0":
            return x > 0.0
        return True

    def residual(self, x: float, y: float) -> float:
        return y - self.y0


@dataclass(frozen=True)
class TrajectoryEvent:
    t: float
    kind: str
    location: tuple[float, float]


@dataclass
class Trajectory:
    """Time-ordered states with event annotations."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    events: list[TrajectoryEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def end(self) -> tuple[float, float, float]:
        return float(self.t[-1]), float(self.x[-1]), float(self.y[-1])

    def to_csv(self, path) -> None:
        """Write ``t,x,y,event`` rows (UTF-8, LF, 17 significant digits)."""
        ev_at = {round(e.t, 15): e.kind for e in self.events}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,x,y,event\n")
            for t, x, y in zip(self.t, self.x, self.y):
                kind = ev_at.get(round(float(t), 15), "")
                fh.write(f"{t:.17g},{x:.17g},{y:.17g},{kind}\n")


@dataclass(frozen=True)
class PoincareResult:
    """Image of one application of a section-to-section map."""

    x: float
    time: float
    min_step: float
    flags: dict[str, object] = field(default_factory=dict)


def _polish_event(
    dense,
    t_hit: float,
    residual: Callable[[float, float], float],
    drate: Callable[[float, float], float],
) -> float:
    # one Newton correction of the event time on the dense output; scipy's
    # brentq already leaves |residual| near machine precision, this makes the
    # <= 1e-12 event-residual contract explicit
    z = dense(t_hit)
    r = residual(float(z[0]), float(z[1]))
    d = drate(float(z[0]), float(z[1]))
    if d != 0.0 and np.isfinite(d):
        t_hit = t_hit - r / d
    return t_hit


def integrate(
    field: "PlanarField",
    start: tuple[float, float],
    until: "Section | float | Callable[[float, float, float], float]",
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "RK45",
    max_step: float = np.inf,
    t0: float = 0.0,
    t_max: float = 1e4,
    max_steps: int = 10_000_000,
    strip: float | None = None,
    strip_center: float = 0.0,
) -> Trajectory:
    """Integrate ``field`` from ``start`` until a stopping condition.

    ``until`` is a :class:`Section`, a final time, or a scalar event
    function ``g(t, x, y)`` whose root stops the integration.  Event times
    are located on the dense output and Newton-polished.  If ``strip`` is
    given, entry/exit of the band |y - strip_center| <= strip is annotated.

    Raises ``StepSizeUnderflow`` on stiffness collapse, ``StepLimitExceeded``
    past ``max_steps`` accepted steps, and ``EventNotBracketed`` for a start
    lying on the target section with vanishing outgoing velocity.
    """
    x0, y0 = float(start[0]), float(start[1])

    if isinstance(until, Section):
        mode = "section"
        sec = until
        t_end = t_max
        if abs(y0 - sec.y0) <= 1e-13:
            fx, fy = field(x0, y0)
            if fy == 0.0 and sec.contains(x0):
                raise EventNotBracketed("start lies on the section with zero outgoing velocity")
            # return maps start on their own section: step off it so the
            # immediate zero residual is not reported as the landing
            t0 += 1e-11
            x0 += 1e-11 * fx
            y0 += 1e-11 * fy
    elif callable(until):
        mode = "predicate"
        sec = None
        t_end = t_max
    else:
        mode = "time"
        sec = None
        t_end = float(until)

    events: list = []
    if mode == "section":
        def ev_stop(t, z):
            return z[1] - sec.y0
    elif mode == "predicate":
        def ev_stop(t, z):
            return until(t, z[0], z[1])
    else:
        ev_stop = None
    if ev_stop is not None:
        ev_stop.terminal = True
        ev_stop.direction = 0
        events.append(ev_stop)

    if strip is not None:
        def ev_strip(t, z):
            return abs(z[1] - strip_center) - strip

        ev_strip.terminal = False
        ev_strip.direction = 0
        events.append(ev_strip)

    ts: list[np.ndarray] = []
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    notes: list[TrajectoryEvent] = []
    n_steps = 0
    t_cur, z_cur = t0, [x0, y0]

    for _ in range(64):  # restart budget for wrong-half section hits
        sol = solve_ivp(
            field.rhs,
            (t_cur, t_end),
            z_cur,
            method=method,
            rtol=rtol,
            atol=atol,
            max_step=max_step,
            dense_output=True,
            events=events or None,
        )
        if sol.status == -1:
            if "step size" in sol.message.lower():
                raise StepSizeUnderflow(sol.message)
            raise IntegratorError(sol.message)
        n_steps += len(sol.t)
        if n_steps > max_steps:
            raise StepLimitExceeded(f"exceeded {max_steps} steps")
        ts.append(sol.t)
        xs.append(sol.y[0])
        ys.append(sol.y[1])

        if strip is not None:
            for te in sol.t_events[-1]:
                z = sol.sol(te)
                inside_after = abs(sol.sol(min(te + 1e-12, sol.t[-1]))[1] - strip_center) < strip
                kind = "enter_strip" if inside_after else "exit_strip"
                notes.append(TrajectoryEvent(float(te), kind, (float(z[0]), float(z[1]))))

        stopped = ev_stop is not None and sol.t_events[0].size > 0
        if stopped and mode == "section":
            t_hit = float(sol.t_events[0][-1])
            t_hit = _polish_event(sol.sol, t_hit, lambda x, y: y - sec.y0, lambda x, y: field(x, y)[1])
            z = sol.sol(t_hit)
            if sec.contains(float(z[0])):
                notes.append(TrajectoryEvent(t_hit, f"cross_section:{sec.id}", (float(z[0]), float(z[1]))))
                # the polished time may precede the stored event sample by one
                # rounding unit; replace it to keep t strictly ordered
                if ts[-1][-1] >= t_hit:
                    ts[-1] = ts[-1][:-1]
                    xs[-1] = xs[-1][:-1]
                    ys[-1] = ys[-1][:-1]
                ts.append(np.array([t_hit]))
                xs.append(np.array([z[0]]))
                ys.append(np.array([z[1]]))
                return Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), notes)
            # wrong half-line: nudge past the crossing and carry on
            t_cur = t_hit + max(1e-12, 1e-12 * abs(t_hit))
            z_cur = [float(v) for v in sol.sol(t_cur)]
            continue
        if stopped and mode == "predicate":
            t_hit = float(sol.t_events[0][-1])
            z = sol.sol(t_hit)
            notes.append(TrajectoryEvent(t_hit, "predicate", (float(z[0]), float(z[1]))))
            ts.append(np.array([t_hit]))
            xs.append(np.array([z[0]]))
            ys.append(np.array([z[1]]))
            return Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), notes)
        if sol.status == 0:
            if mode != "time":
                raise NoArrival("integration reached t_max before the stopping condition")
            return Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), notes)
    raise NoArrival("section restart budget exhausted")


def flow_map(
    field: "PlanarField",
    section_from: Section,
    section_to: Section,
    x_on_from: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "RK45",
    t_max: float = 1e4,
    backward: bool = False,
) -> PoincareResult:
    """Map a point of ``section_from`` to its landing on ``section_to``.

    The start is lifted to ``(x_on_from, section_from.y0)``.  The zero-length
    case (identical sections) returns the point unchanged.  ``NoArrival`` is
    raised when the orbit never reaches the target; this is a meaningful
    signal in the homoclinic regime, where the exterior map loses its domain.
    """
    if section_from == section_to:
        return PoincareResult(x=float(x_on_from), time=0.0, min_step=0.0)
    fld = field.negated() if backward else field
    traj = integrate(
        fld,
        (x_on_from, section_from.y0),
        section_to,
        rtol=rtol,
        atol=atol,
        method=method,
        t_max=t_max,
    )
    t_end, x_end, _ = traj.end
    dts = np.diff(traj.t)
    min_step = float(np.min(dts[dts > 0])) if np.any(dts > 0) else 0.0
    return PoincareResult(x=x_end, time=(-t_end if backward else t_end), min_step=min_step)


def sample_dense(ts: Iterable[float], dense, n: int = 800) -> tuple[np.ndarray, np.ndarray]:
    """Uniform resampling helper for plots and Hausdorff comparisons."""
    ts = np.asarray(list(ts), dtype=float)
    grid = np.linspace(ts[0], ts[-1], n)
    vals = np.array([dense(t) for t in grid])
    return grid, vals
