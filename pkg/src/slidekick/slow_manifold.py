"""Fenichel expansion terms, numerical continuation of the attracting slow
manifold through the strip, and the sandwich/isolating-block checks.

All strip integrations use the orbit equations rather than time
parametrization: as a graph v(x) while the manifold is a graph over x, and
as a graph x(v) near the fold where m0' blows up.  The implicit Radau
stepper keeps the cost independent of 1/eps along the attracting branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from slidekick.regularization import RegularizationProfile, RegularizedSystem


class SlowManifoldError(Exception):
    pass


class HyperbolicityLost(SlowManifoldError):
    """Normal hyperbolicity failed before the seed point."""


class StripCrossingFailed(SlowManifoldError):
    """The strip transit never returned to the upper boundary."""


@dataclass(frozen=True)
class SlowManifoldExpansion:
    """Closed-form terms of the slow-manifold expansions.

    x-graph: m(x; eps) = m0(x) + eps*m1(x) + O(eps^2) for x <= 0.
    v-graph: n(v; eps) = n0(v) + eps*n1(v) + eps^2*n2(v) + O(eps^3) on
    (-1, 1].  n0 and m0 are mutual inverses on the shared range.
    """

    profile: RegularizationProfile
    n0: Callable[[float], float]
    n1: Callable[[float], float]
    n2: Callable[[float], float]
    m0: Callable[[float], float]
    m1: Callable[[float], float]
    n_valid: tuple[float, float] = (-1.0, 1.0)
    m_valid: tuple[float, float] = (-np.inf, 0.0)

    def dn0(self, v: float) -> float:
        phi = self.profile
        return phi.deriv(v, 1) / (1.0 + phi.eval(v)) ** 2

    def dm0(self, x: float) -> float:
        phi = self.profile
        return 4.0 / ((1.0 - 2.0 * x) ** 2 * phi.deriv(self.m0(x), 1))

    def dn1(self, v: float) -> float:
        phi = self.profile
        w, d1, d2 = phi.eval(v), phi.deriv(v, 1), phi.deriv(v, 2)
        return (1.0 + w) * (2.0 * d1 * d1 - (1.0 + w) * d2) / (2.0 * d1 * d1)


def expansion_terms(profile: RegularizationProfile) -> SlowManifoldExpansion:
    """Solve the invariance equation formally for the normal-form pair.

    n0(v) = (phi(v) - 1) / (2 (phi(v) + 1)),  n1 = 1/(2 n0'),
    n2 = -2 n1' n1^2, and on the x-graph side m0 = phi^{-1}((1+2x)/(1-2x)),
    m1 = -(m0')^2 / 2.  Note the recursion gives n2 = n0''/(4 n0'^4); the
    frequently quoted n0''/(2 n0'^2) does not satisfy the order-eps^2
    balance.
    """

    def n0(v: float) -> float:
        w = profile.eval(v)
        return 0.5 * (w - 1.0) / (w + 1.0)

    def n1(v: float) -> float:
        w = profile.eval(v)
        d1 = profile.deriv(v, 1)
        return (1.0 + w) ** 2 / (2.0 * d1)

    def n2(v: float) -> float:
        w = profile.eval(v)
        d1 = profile.deriv(v, 1)
        d2 = profile.deriv(v, 2)
        n1v = (1.0 + w) ** 2 / (2.0 * d1)
        dn1v = (1.0 + w) * (2.0 * d1 * d1 - (1.0 + w) * d2) / (2.0 * d1 * d1)
        return -2.0 * dn1v * n1v * n1v

    def m0(x: float) -> float:
        return profile.inverse((1.0 + 2.0 * x) / (1.0 - 2.0 * x))

    def m1(x: float) -> float:
        v = m0(x)
        dm0 = 4.0 / ((1.0 - 2.0 * x) ** 2 * profile.deriv(v, 1))
        return -0.5 * dm0 * dm0

    return SlowManifoldExpansion(profile=profile, n0=n0, n1=n1, n2=n2, m0=m0, m1=m1)


def invariance_residual(profile: RegularizationProfile, eps: float, v: float) -> float:
    """Residual of (1 + 2n + phi(v)(2n-1)) n' - eps (1 + phi(v)) for the
    truncated expansion n = n0 + eps*n1 (analytic derivatives)."""
    exp = expansion_terms(profile)
    w = profile.eval(v)
    n = exp.n0(v) + eps * exp.n1(v)
    dn = exp.dn0(v) + eps * exp.dn1(v)
    return (1.0 + 2.0 * n + w * (2.0 * n - 1.0)) * dn - eps * (1.0 + w)


@dataclass
class ManifoldTrace:
    """Samples (x, v) along the numerically continued attracting manifold."""

    x: np.ndarray
    v: np.ndarray
    epsilon: float
    profile: RegularizationProfile
    exit_x: float | None = None  # abscissa where the trace reached v = to_v
    legs: list[str] = field(default_factory=list)

    def v_of_x(self) -> Callable[[float], float]:
        order = np.argsort(self.x)
        xs, vs = self.x[order], self.v[order]
        return lambda q: float(np.interp(q, xs, vs))

    def x_of_v(self) -> Callable[[float], float]:
        order = np.argsort(self.v)
        vs, xs = self.v[order], self.x[order]
        return lambda q: float(np.interp(q, vs, xs))

    def to_csv(self, path, margins=None) -> None:
        lower = margins[0] if margins else np.full_like(self.x, np.nan)
        upper = margins[1] if margins else np.full_like(self.x, np.nan)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,v,margin_lower,margin_upper\n")
            for x, v, lo, up in zip(self.x, self.v, lower, upper):
                fh.write(f"{x:.17g},{v:.17g},{lo:.17g},{up:.17g}\n")


def _slow_fast_rhs(R: RegularizedSystem, unclamped: bool):
    """(B1, B2)(x, v): the blended field in strip coordinates."""
    eps = R.epsilon
    off = R.base.offset
    prof = R.profile

    def bvals(x: float, v: float) -> tuple[float, float]:
        y = off + eps * v
        fp = R.base.x_plus(x, y)
        fm = R.base.x_minus(x, y)
        w = v if unclamped else prof.eval(v)
        return (
            0.5 * (fp[0] + fm[0]) + 0.5 * w * (fp[0] - fm[0]),
            0.5 * (fp[1] + fm[1]) + 0.5 * w * (fp[1] - fm[1]),
        )

    def dbvals_dv(x: float, v: float) -> tuple[float, float]:
        # dominant v-derivative of the blend: the profile term; the O(eps)
        # field y-derivatives only precondition Radau's Newton iteration and
        # are dropped
        y = off + eps * v
        fp = R.base.x_plus(x, y)
        fm = R.base.x_minus(x, y)
        dw = 1.0 if unclamped else prof.deriv(v, 1)
        return 0.5 * dw * (fp[0] - fm[0]), 0.5 * dw * (fp[1] - fm[1])

    return bvals, dbvals_dv


def trace_manifold(
    R: RegularizedSystem,
    from_x: float,
    to_v: float = 1.0,
    *,
    to_x: float | None = None,
    delta_switch: float = 0.2,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    samples_per_leg: int = 1200,
    extend_linear: bool = False,
) -> ManifoldTrace:
    """Continue the attracting Fenichel manifold from x = from_x.

    The trace is seeded with m0 + eps*m1 (the seed error dies at rate
    exp(-c (x - from_x)/eps) before the turning region), integrated as a
    graph over x, and switched to a graph over v at v = 1 - delta_switch
    where m0' is no longer bounded.  With ``to_x`` (extended linear system,
    phi(v) = v without clamping) the trace is followed as an x-graph to that
    abscissa instead.
    """
    exp = expansion_terms(R.profile)
    eps = R.epsilon
    if extend_linear and R.profile.p != 1:
        raise ValueError("extend_linear only makes sense for the piecewise linear profile")

    v_seed = exp.m0(from_x) + eps * exp.m1(from_x)
    f2p, f2m = R.base.normal_components(from_x)
    if R.profile.deriv(v_seed, 1) * (f2p - f2m) >= 0.0:
        raise HyperbolicityLost(f"seed at x={from_x} is not normally attracting")

    bvals, dbv = _slow_fast_rhs(R, unclamped=extend_linear)

    def dv_dx(x, z):
        b1, b2 = bvals(x, z[0])
        return [b2 / (eps * b1)]

    def dv_dx_jac(x, z):
        b1, b2 = bvals(x, z[0])
        d1, d2 = dbv(x, z[0])
        return [[(d2 * b1 - b2 * d1) / (eps * b1 * b1)]]

    legs = []
    xs_all: list[np.ndarray] = []
    vs_all: list[np.ndarray] = []

    x_stop = to_x if to_x is not None else from_x + 50.0
    events = []
    if to_x is None:
        def ev_exit(x, z):
            return z[0] - to_v

        ev_exit.terminal = True
        ev_exit.direction = 1
        events.append(ev_exit)
        if to_v > 1.0 - delta_switch and R.profile.p >= 2:
            def ev_switch(x, z):
                return z[0] - (1.0 - delta_switch)

            ev_switch.terminal = True
            ev_switch.direction = 1
            events.append(ev_switch)

    sol = solve_ivp(
        dv_dx,
        (from_x, x_stop),
        [v_seed],
        method="Radau",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=events or None,
        jac=dv_dx_jac,
    )
    if sol.status == -1:
        raise StripCrossingFailed(sol.message)
    grid = np.linspace(sol.t[0], sol.t[-1], samples_per_leg)
    xs_all.append(grid)
    vs_all.append(np.array([float(sol.sol(x)[0]) for x in grid]))
    legs.append("x-graph")

    exit_x: float | None = None
    if to_x is None and sol.t_events[0].size > 0:
        exit_x = float(sol.t_events[0][-1])
    elif to_x is None and len(events) > 1 and sol.t_events[1].size > 0:
        # switch to the v-graph for the fold passage
        x_sw = float(sol.t_events[1][-1])
        v_sw = float(sol.sol(x_sw)[0])

        def dx_dv(v, z):
            b1, b2 = bvals(z[0], v)
            return [eps * b1 / b2]

        sol2 = solve_ivp(
            dx_dv,
            (v_sw, to_v),
            [x_sw],
            method="Radau",
            rtol=rtol,
            atol=atol,
            dense_output=True,
        )
        if sol2.status != 0:
            raise StripCrossingFailed(sol2.message)
        grid2 = np.linspace(sol2.t[0], sol2.t[-1], samples_per_leg // 2)
        vs_all.append(grid2)
        xs_all.append(np.array([float(sol2.sol(v)[0]) for v in grid2]))
        legs.append("v-graph")
        exit_x = float(sol2.y[0][-1]) if abs(to_v - 1.0) < 1e-14 else None

    return ManifoldTrace(
        x=np.concatenate(xs_all),
        v=np.concatenate(vs_all),
        epsilon=eps,
        profile=R.profile,
        exit_x=exit_x,
        legs=legs,
    )


@dataclass
class SandwichReport:
    which: str
    count: int
    fraction_ok: float
    min_margin_lower: float
    min_margin_upper: float
    x: np.ndarray
    margin_lower: np.ndarray
    margin_upper: np.ndarray


def verify_sandwich(
    R: RegularizedSystem,
    trace: ManifoldTrace,
    which: str,
    *,
    K: float = 10.0,
    M: float = 50.0,
    delta: float = 0.2,
    lambda1: float = 0.2,
    lam: float = 0.45,
    x_range: tuple[float, float] | None = None,
) -> SandwichReport:
    """Check one of the isolating-block inequalities along a trace.

    ``linear_conf``:   m0 - eps*K <= v(x) <= m0          on x in x_range
    ``outer_block_p``: n0 <= x(v) <= n0 + M*eps/(1-v)^{p-1}
                       on 1-delta <= v <= 1-eps^lambda1
    ``graph_over_x_p``: m0 - eps*K/|x|^{(2p-2)/p} <= v(x) <= m0
                       on x <= -eps^lam

    Margins are reported per point; the fraction of points satisfying the
    inequality must be 1.0.  An empty range is a vacuous pass.
    """
    eps = R.epsilon
    exp = expansion_terms(R.profile)
    p = R.profile.p

    if which == "linear_conf":
        lo_x, hi_x = x_range if x_range is not None else (float(trace.x.min()), 0.25)
        mask = (trace.x >= lo_x) & (trace.x <= hi_x)
        xs, vs = trace.x[mask], trace.v[mask]
        m0 = np.array([(1.0 + 2.0 * x) / (1.0 - 2.0 * x) for x in xs])
        lower = vs - (m0 - eps * K)
        upper = m0 - vs
    elif which == "outer_block_p":
        v_lo, v_hi = 1.0 - delta, 1.0 - eps**lambda1
        mask = (trace.v >= v_lo) & (trace.v <= v_hi)
        xs, vs = trace.x[mask], trace.v[mask]
        n0 = np.array([exp.n0(v) for v in vs])
        lower = xs - n0
        upper = n0 + M * eps / np.abs(1.0 - vs) ** (p - 1) - xs
    elif which == "graph_over_x_p":
        hi_x = -(eps**lam)
        lo_x = x_range[0] if x_range is not None else float(trace.x.min())
        mask = (trace.x >= lo_x) & (trace.x <= hi_x)
        xs, vs = trace.x[mask], trace.v[mask]
        m0 = np.array([exp.m0(x) for x in xs])
        lower = vs - (m0 - eps * K / np.abs(xs) ** ((2.0 * p - 2.0) / p))
        upper = m0 - vs
    else:
        raise ValueError(f"unknown sandwich kind {which!r}")

    count = int(mask.sum()) if "mask" in locals() else 0
    if count == 0:
        return SandwichReport(which, 0, 1.0, np.inf, np.inf, np.array([]), np.array([]), np.array([]))
    ok = (lower >= 0.0) & (upper >= 0.0)
    return SandwichReport(
        which=which,
        count=count,
        fraction_ok=float(np.mean(ok)),
        min_margin_lower=float(lower.min()),
        min_margin_upper=float(upper.min()),
        x=xs,
        margin_lower=lower,
        margin_upper=upper,
    )


@dataclass
class ContractionReport:
    starts: list[float]
    exit_points: list[float]
    milestones: np.ndarray
    # separations[(i, j)][k] = |v_i - v_j| at milestone k (NaN where undefined)
    separations: dict[tuple[int, int], np.ndarray]


def contraction_probe(
    R: RegularizedSystem,
    x0_list: list[float],
    milestones: np.ndarray | None = None,
    *,
    x_limit: float = 0.5,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> ContractionReport:
    """Drop orbits from (x0, v=1) and measure pairwise separations.

    Orbits are integrated as graphs v(x) through the strip until they return
    to v = 1; separations |v_i(x) - v_j(x)| are reported at the requested x
    milestones, and the strip-exit abscissae are collected (their spread is
    the landing-independence diagnostic).
    """
    eps = R.epsilon
    bvals, dbv = _slow_fast_rhs(R, unclamped=False)

    def dv_dx(x, z):
        b1, b2 = bvals(x, z[0])
        return [b2 / (eps * b1)]

    def dv_dx_jac(x, z):
        b1, b2 = bvals(x, z[0])
        d1, d2 = dbv(x, z[0])
        return [[(d2 * b1 - b2 * d1) / (eps * b1 * b1)]]

    def ev_exit(x, z):
        return z[0] - 1.0

    ev_exit.terminal = True
    ev_exit.direction = 1

    solutions = []
    exits = []
    for x0 in x0_list:
        sol = solve_ivp(
            dv_dx,
            (x0, x_limit),
            [1.0],
            method="Radau",
            rtol=rtol,
            atol=atol,
            dense_output=True,
            events=[ev_exit],
            jac=dv_dx_jac,
        )
        if sol.status == -1 or sol.t_events[0].size == 0:
            raise StripCrossingFailed(f"orbit from x0={x0} did not return to v=1")
        solutions.append(sol)
        exits.append(float(sol.t_events[0][-1]))

    if milestones is None:
        milestones = np.linspace(max(x0_list), 0.0, 5)
    milestones = np.asarray(milestones, dtype=float)

    seps: dict[tuple[int, int], np.ndarray] = {}
    for i in range(len(x0_list)):
        for j in range(i + 1, len(x0_list)):
            vals = np.full(len(milestones), np.nan)
            for k, xm in enumerate(milestones):
                si, sj = solutions[i], solutions[j]
                if si.t[0] <= xm <= si.t[-1] and sj.t[0] <= xm <= sj.t[-1]:
                    vals[k] = abs(float(si.sol(xm)[0]) - float(sj.sol(xm)[0]))
            seps[(i, j)] = vals

    return ContractionReport(
        starts=list(x0_list), exit_points=exits, milestones=milestones, separations=seps
    )


def strip_crossing(
    R: RegularizedSystem,
    x_enter: float,
    *,
    x_limit: float,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> tuple[float, float, dict]:
    """Cross the strip from (x_enter, v=1) back to v=1: the middle map.

    Returns (x_exit, transit_time, diagnostics).  Time is recovered by the
    quadrature dt/dx = 1/B1 alongside the orbit equation.  Raises
    ``StripCrossingFailed`` if the orbit leaves through the bottom or never
    returns (which cannot happen for entries left of the tangency while the
    lower field pushes up).
    """
    eps = R.epsilon
    bvals, dbv = _slow_fast_rhs(R, unclamped=False)

    def rhs(x, z):
        b1, b2 = bvals(x, z[0])
        return [b2 / (eps * b1), 1.0 / b1]

    def rhs_jac(x, z):
        b1, b2 = bvals(x, z[0])
        d1, d2 = dbv(x, z[0])
        return [
            [(d2 * b1 - b2 * d1) / (eps * b1 * b1), 0.0],
            [-d1 / (b1 * b1), 0.0],
        ]

    def ev_exit(x, z):
        return z[0] - 1.0

    ev_exit.terminal = True
    ev_exit.direction = 1

    def ev_bottom(x, z):
        return z[0] + 1.0

    ev_bottom.terminal = True
    ev_bottom.direction = -1

    sol = solve_ivp(
        rhs,
        (x_enter, x_limit),
        [1.0, 0.0],
        method="Radau",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=[ev_exit, ev_bottom],
        jac=rhs_jac,
    )
    if sol.status == -1:
        raise StripCrossingFailed(sol.message)
    if sol.t_events[1].size > 0:
        raise StripCrossingFailed(f"orbit from x={x_enter} fell through the strip")
    if sol.t_events[0].size == 0:
        raise StripCrossingFailed(f"orbit from x={x_enter} did not return to v=1 by x={x_limit}")
    x_exit = float(sol.t_events[0][-1])
    t_exit = float(sol.sol(x_exit)[1])
    v_min = float(np.min(sol.y[0]))
    return x_exit, t_exit, {"v_min": v_min, "n_steps": len(sol.t)}
