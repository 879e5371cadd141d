"""The fold Poincare map of the regularized system and its asymptotics.

P_eps is assembled from three stages: P carries a point of the outer
section {y = y0, x < fold} down to the strip boundary under X+ alone, the
middle map crosses the strip along the attracting manifold, and Pbar lifts
the exit back to {y = y0, x > fold}.  The tangency constants x0, alpha,
beta of Prop-type quadratic germs are fitted from perturbed landings, and
the exit abscissa / landing deviation are fitted against powers of eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from slidekick.fields import FilippovSystem, FoldPoint, PlanarField, find_fold
from slidekick.integrator import NoArrival, PoincareResult, Section, integrate
from slidekick.regularization import RegularizedSystem
from slidekick.slow_manifold import strip_crossing


class PoincareError(Exception):
    pass


class TangentialCrossing(PoincareError):
    """A pseudo-separatrix meets the outer section tangentially."""


class FitRejected(PoincareError):
    """An exponent fit fell below the r^2 acceptance bar."""


@dataclass(frozen=True)
class TangencyConstants:
    """Quadratic germ of the near-fold section maps.

    Landings on {y = y0} from a point (x, y) near the fold obey
    x0 + alpha*y + beta*x^2 + O(xy, y^2) in fold-centered coordinates, with
    the sign pattern alpha+ < 0, beta+ > 0, alpha- > 0, beta- < 0.
    """

    y0: float
    fold_x: float
    x0_plus: float
    x0_minus: float
    alpha_plus: float
    alpha_minus: float
    beta_plus: float
    beta_minus: float


def _landing(field: PlanarField, start, y_target: float, *, backward: bool, rtol=1e-11, atol=1e-13) -> float:
    fld = field.negated() if backward else field
    z0 = [float(start[0]), float(start[1])]
    if abs(z0[1] - y_target) <= 1e-13:
        # starting on the target height: step off so the immediate zero
        # residual is not taken as the landing
        f0 = fld(*z0)
        z0 = [z0[0] + 1e-11 * f0[0], z0[1] + 1e-11 * f0[1]]

    def ev(t, z):
        return z[1] - y_target

    ev.terminal = True
    ev.direction = 0
    sol = solve_ivp(fld.rhs, (0.0, 1e3), z0, method="RK45", max_step=0.25,
                    rtol=rtol, atol=atol, dense_output=True, events=[ev])
    if sol.t_events[0].size == 0:
        raise NoArrival(f"orbit from {start} never met y = {y_target}")
    t_hit = float(sol.t_events[0][0])
    return float(sol.sol(t_hit)[0])


def fit_tangency_constants(
    x_plus: PlanarField,
    fold: FoldPoint | float,
    y0: float,
    *,
    offset: float = 0.0,
    h_x: float = 0.04,
    h_y: float = 0.04,
) -> TangencyConstants:
    """Fit x0, alpha, beta for both pseudo-separatrix maps.

    x0 comes from integrating the orbit of the fold point itself; alpha and
    beta from least squares over landings of a small grid of perturbed
    starts against the model 1, y, x^2 (with xy, y^2, x^3 columns absorbing
    the next order so the quadratic coefficients stay unbiased).
    """
    fx = fold.x if isinstance(fold, FoldPoint) else float(fold)

    x0p = _landing(x_plus, (fx, offset), y0, backward=False)
    x0m = _landing(x_plus, (fx, offset), y0, backward=True)
    for x0 in (x0p, x0m):
        if abs(x_plus(x0, y0)[1]) < 1e-8:
            raise TangentialCrossing(f"separatrix meets y0={y0} tangentially at x={x0}")

    dxs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0]) * h_x
    dys = np.array([0.0, 0.25, 0.5, 0.75, 1.0]) * h_y
    rows, land_p, land_m = [], [], []
    for dx in dxs:
        for dy in dys:
            start = (fx + dx, offset + dy)
            land_p.append(_landing(x_plus, start, y0, backward=False))
            land_m.append(_landing(x_plus, start, y0, backward=True))
            # columns past x^2 absorb the next orders so alpha, beta stay unbiased
            rows.append([1.0, dy, dx * dx, dx * dy, dy * dy, dx**3, dx**4, dx * dx * dy])
    A = np.asarray(rows)
    cp, *_ = np.linalg.lstsq(A, np.asarray(land_p), rcond=None)
    cm, *_ = np.linalg.lstsq(A, np.asarray(land_m), rcond=None)
    return TangencyConstants(
        y0=y0,
        fold_x=fx,
        x0_plus=float(cp[0]),
        x0_minus=float(cm[0]),
        alpha_plus=float(cp[1]),
        alpha_minus=float(cm[1]),
        beta_plus=float(cp[2]),
        beta_minus=float(cm[2]),
    )


def normal_form_constants(y0: float) -> TangencyConstants:
    """Closed-form germ of the normal-form pair: x0 = +-sqrt(y0),
    alpha = -+1/(2 sqrt(y0)), beta = +-1/(2 sqrt(y0))."""
    r = math.sqrt(y0)
    return TangencyConstants(
        y0=y0, fold_x=0.0, x0_plus=r, x0_minus=-r,
        alpha_plus=-1.0 / (2.0 * r), alpha_minus=1.0 / (2.0 * r),
        beta_plus=1.0 / (2.0 * r), beta_minus=-1.0 / (2.0 * r),
    )


@dataclass
class FoldMapDecomposition:
    """The three stages of P_eps as numeric callables plus the germ data."""

    y0: float
    epsilon: float
    P: Callable[[float], float]
    Pmid: Callable[[float], float]
    Pbar: Callable[[float], float]
    constants: TangencyConstants | None = None


def decompose(
    R: RegularizedSystem,
    y0: float,
    fold: FoldPoint | float,
    *,
    constants: TangencyConstants | None = None,
    x_limit: float | None = None,
) -> FoldMapDecomposition:
    fx = fold.x if isinstance(fold, FoldPoint) else float(fold)
    off = R.base.offset
    eps = R.epsilon
    lim = x_limit if x_limit is not None else fx + 0.4

    def P(x: float) -> float:
        return _landing(R.base.x_plus, (x, y0), off + eps, backward=False)

    def Pmid(x: float) -> float:
        return strip_crossing(R, x, x_limit=lim)[0]

    def Pbar(x: float) -> float:
        return _landing(R.base.x_plus, (x, off + eps), y0, backward=False)

    return FoldMapDecomposition(y0=y0, epsilon=eps, P=P, Pmid=Pmid, Pbar=Pbar, constants=constants)


def map_P_epsilon(
    R: RegularizedSystem,
    y0: float,
    x: float,
    *,
    fold: FoldPoint | float | None = None,
    fold_bracket: tuple[float, float] = (-1.0, 1.0),
    x_limit: float | None = None,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> PoincareResult:
    """Full numerical transit {y=y0, x<fold} -> {y=y0, x>fold} through the strip.

    Orbits whose X+ arc stays above the strip never feel the regularization;
    they are returned with the ``out_of_domain`` flag set and the pure-X+
    landing (P_eps = P0 trivially there).  The flags record the strip entry
    and exit abscissae and the stage times for diagnostics.
    """
    if fold is None:
        fold = find_fold(R.base, fold_bracket)
    fx = fold.x if isinstance(fold, FoldPoint) else float(fold)
    off = R.base.offset
    eps = R.epsilon
    y_strip = off + eps

    # stage P: ride X+ down to the strip boundary; a minimum of y above the
    # strip means the orbit misses it entirely
    def ev_strip(t, z):
        return z[1] - y_strip

    ev_strip.terminal = True
    ev_strip.direction = -1

    def ev_min(t, z):
        return R.base.x_plus(z[0], z[1])[1]

    ev_min.terminal = True
    ev_min.direction = 1

    sol = solve_ivp(
        R.base.x_plus.rhs,
        (0.0, 1e3),
        [x, y0],
        method="RK45",
        max_step=0.25,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=[ev_strip, ev_min],
    )
    if sol.t_events[0].size > 0:
        t_in = float(sol.t_events[0][0])
    elif sol.t_events[1].size > 0 and float(sol.sol(sol.t_events[1][0])[1]) <= y_strip:
        # a wide step can fly over the whole dip without a sign change of the
        # strip residual; y is monotone down to the minimum, so the crossing
        # is recovered from the dense output
        from scipy.optimize import brentq

        t_min = float(sol.t_events[1][0])
        t_in = float(brentq(lambda t: float(sol.sol(t)[1]) - y_strip, 0.0, t_min, xtol=1e-14))
    else:
        # never reached the strip: grazing orbit untouched by regularization
        x_out = _landing(R.base.x_plus, (x, y0), y0, backward=False)
        return PoincareResult(x=x_out, time=float("nan"), min_step=0.0,
                              flags={"out_of_domain": True})
    x_in = float(sol.sol(t_in)[0])

    x_exit, t_mid, diag = strip_crossing(
        R, x_in, x_limit=(x_limit if x_limit is not None else fx + 0.4)
    )

    def ev_up(t, z):
        return z[1] - y0

    ev_up.terminal = True
    ev_up.direction = 1
    sol3 = solve_ivp(
        R.base.x_plus.rhs,
        (0.0, 1e3),
        [x_exit, y_strip],
        method="RK45",
        max_step=0.25,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=[ev_up],
    )
    if sol3.t_events[0].size == 0:
        raise NoArrival("exit orbit never reached the outer section")
    t_up = float(sol3.t_events[0][0])
    x_out = float(sol3.sol(t_up)[0])

    return PoincareResult(
        x=x_out,
        time=t_in + t_mid + t_up,
        min_step=0.0,
        flags={
            "out_of_domain": False,
            "x_in": x_in,
            "x_exit": x_exit,
            "v_min": diag["v_min"],
            "t_stages": (t_in, t_mid, t_up),
        },
    )


@dataclass(frozen=True)
class ExponentFit:
    epsilons: np.ndarray
    landings: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    dropped_largest: bool = False


def fit_power_law(epsilons, values, *, r2_min: float = 0.999, allow_drop: bool = True) -> ExponentFit:
    """Least-squares slope of log|value| against log eps.

    If the largest eps sits more than 3x the RMS of the other residuals off
    the line (pre-asymptotic contamination), it is dropped once and the fit
    redone.  Fits with r^2 below ``r2_min`` are rejected.
    """
    eps = np.asarray(epsilons, dtype=float)
    val = np.abs(np.asarray(values, dtype=float))
    order = np.argsort(eps)
    eps, val = eps[order], val[order]

    def _fit(e, v):
        X = np.log(e)
        Y = np.log(v)
        A = np.vstack([X, np.ones_like(X)]).T
        coef, _res, _rank, _sv = np.linalg.lstsq(A, Y, rcond=None)
        resid = Y - A @ coef
        ss_tot = float(np.sum((Y - Y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        return coef, resid, r2

    coef, resid, r2 = _fit(eps, val)
    dropped = False
    if allow_drop and len(eps) >= 4:
        # judge the largest eps against the line through the others: a
        # pre-asymptotic point contaminates its own fit's residuals
        coef_r, resid_r, r2_r = _fit(eps[:-1], val[:-1])
        rms_rest = float(np.sqrt(np.mean(resid_r**2)))
        pred_err = abs(math.log(val[-1]) - (coef_r[0] * math.log(eps[-1]) + coef_r[1]))
        if pred_err > 3.0 * max(rms_rest, 1e-12):
            coef, resid, r2 = coef_r, resid_r, r2_r
            dropped = True
    if r2 < r2_min:
        raise FitRejected(f"r^2 = {r2:.6f} < {r2_min}")
    return ExponentFit(
        epsilons=eps,
        landings=val,
        slope=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=r2,
        dropped_largest=dropped,
    )


@dataclass
class LandingScan:
    epsilons: np.ndarray
    exits: np.ndarray       # strip-exit abscissa relative to the fold
    deviations: np.ndarray  # P_eps(x) - x0+ - alpha+ eps
    exit_fit: ExponentFit
    deviation_fit: ExponentFit


def landing_scan(
    base: FilippovSystem,
    profile,
    eps_list,
    y0: float,
    probe_x: float,
    *,
    constants: TangencyConstants,
    fold: FoldPoint | float | None = None,
) -> LandingScan:
    """Sweep eps, collect strip exits and landing deviations, fit exponents.

    The exit abscissa scales like eps^{p/(2p-1)} and the deviation of the
    landing from x0+ + alpha+ eps like eps^{2p/(2p-1)}.
    """
    fx = constants.fold_x if fold is None else (fold.x if isinstance(fold, FoldPoint) else float(fold))
    exits, devs = [], []
    for eps in eps_list:
        R = RegularizedSystem(base, profile, eps)
        r = map_P_epsilon(R, y0, probe_x, fold=fx)
        exits.append(r.flags["x_exit"] - fx)
        devs.append(r.x - (constants.x0_plus + constants.alpha_plus * eps))
    eps_arr = np.asarray(list(eps_list), dtype=float)
    return LandingScan(
        epsilons=eps_arr,
        exits=np.asarray(exits),
        deviations=np.asarray(devs),
        exit_fit=fit_power_law(eps_arr, exits),
        deviation_fit=fit_power_law(eps_arr, devs),
    )


def exterior_map(
    x_plus: PlanarField,
    section_from: Section,
    section_to: Section,
    x: float,
    *,
    offset: float = 0.0,
    t_max: float = 1e3,
    floor_margin: float | None = None,
) -> PoincareResult:
    """Exterior return P^e along X+ from one outer section to the other.

    ``NoArrival`` is raised when the orbit escapes before coming back; in
    the sliding-homoclinic setting that is the meaningful signal that the
    exterior map has lost its domain.  With ``floor_margin`` the orbit is
    also considered lost if it dips below {y = offset + floor_margin}.
    """
    start = (x, section_from.y0)
    if floor_margin is None:
        traj = integrate(x_plus, start, section_to, rtol=1e-11, atol=1e-13, t_max=t_max)
        t_end, x_end, _ = traj.end
        return PoincareResult(x=x_end, time=t_end, min_step=0.0)

    y_floor = offset + floor_margin

    def ev_target(t, z):
        return z[1] - section_to.y0

    ev_target.terminal = True
    ev_target.direction = 0

    def ev_floor(t, z):
        return z[1] - y_floor

    ev_floor.terminal = True
    ev_floor.direction = -1

    t0, z0 = 0.0, [x, section_from.y0]
    fx0 = x_plus(*z0)
    t0 += 1e-11
    z0 = [z0[0] + 1e-11 * fx0[0], z0[1] + 1e-11 * fx0[1]]
    for _ in range(16):
        sol = solve_ivp(x_plus.rhs, (t0, t_max), z0, method="RK45",
                        rtol=1e-11, atol=1e-13, dense_output=True,
                        events=[ev_target, ev_floor])
        if sol.t_events[1].size > 0 and (
            sol.t_events[0].size == 0 or sol.t_events[1][-1] <= sol.t_events[0][-1]
        ):
            raise NoArrival("exterior orbit dipped below the floor margin")
        if sol.t_events[0].size > 0:
            t_hit = float(sol.t_events[0][-1])
            x_hit = float(sol.sol(t_hit)[0])
            if section_to.contains(x_hit):
                return PoincareResult(x=x_hit, time=t_hit, min_step=0.0)
            t0 = t_hit + 1e-11
            z0 = [float(v) for v in sol.sol(t0)]
            continue
        raise NoArrival("exterior orbit never returned to the target section")
    raise NoArrival("exterior orbit restart budget exhausted")


def exterior_slope(
    x_plus: PlanarField,
    section_from: Section,
    section_to: Section,
    x: float,
    *,
    offset: float = 0.0,
    dx: float = 1e-6,
) -> float:
    """Local derivative c of the exterior map by central differences."""
    lo = exterior_map(x_plus, section_from, section_to, x - dx, offset=offset)
    hi = exterior_map(x_plus, section_from, section_to, x + dx, offset=offset)
    return (hi.x - lo.x) / (2.0 * dx)
