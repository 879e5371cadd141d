"""Return-map fixed points and the sliding bifurcation scans.

The return map R = P^e o P_eps is a strong contraction on the flattened
interval (its Lipschitz constant scales like a positive power of eps), so
fixed points are found by direct iteration with a bisection fallback on
R(x) - x.  Scans over the family parameter reproduce the grazing-sliding
dichotomy, the centre/semistable case and the sliding-homoclinic loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from slidekick.fields import PlanarField, filippov_flow, find_fold
from slidekick.integrator import NoArrival, Section, integrate
from slidekick.models import ModelDescriptor, saddle_eigen
from slidekick.poincare import (
    TangencyConstants,
    exterior_map,
    fit_tangency_constants,
    map_P_epsilon,
)
from slidekick.regularization import RegularizationProfile, RegularizedSystem


class IterationDiverged(Exception):
    pass


class SaddleNotResolved(Exception):
    pass


@dataclass
class FixedPoint:
    x: float
    stability: str  # attracting | repelling | neutral
    residual: float


@dataclass
class ReturnMapStudy:
    family: str
    mu: float
    epsilon: float
    fixed_points: list[FixedPoint]
    gamma: float
    delta: float
    c: float


def _stability(R: Callable[[float], float], x: float, dx: float = 1e-6) -> str:
    slope = (R(x + dx) - R(x - dx)) / (2.0 * dx)
    if abs(abs(slope) - 1.0) <= 1e-3:
        return "neutral"
    return "attracting" if abs(slope) < 1.0 else "repelling"


def iterate_to_fixed_point(
    R: Callable[[float], float],
    x0: float,
    *,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """Direct iteration; raises IterationDiverged if increments grow."""
    x = x0
    prev_step = math.inf
    for _ in range(max_iter):
        try:
            x_new = R(x)
        except NoArrival as exc:
            raise IterationDiverged(f"orbit left the map domain at x={x}") from exc
        step = abs(x_new - x)
        if step <= tol:
            return x_new
        if step > 1.5 * prev_step and step > 1e-9:
            raise IterationDiverged(f"increments grew at x={x_new}")
        prev_step = step
        x = x_new
    raise IterationDiverged(f"no convergence after {max_iter} iterations (step={step:g})")


def find_fixed_points_scan(
    R: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    n: int = 200,
    tol: float = 1e-12,
) -> list[FixedPoint]:
    """All roots of R(x) - x on [lo, hi] by sign-change scan plus bisection."""
    xs = np.linspace(lo, hi, n)
    vals = np.array([R(x) - x for x in xs])
    out: list[FixedPoint] = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            root = float(xs[i])
        elif vals[i] * vals[i + 1] < 0.0:
            root = float(brentq(lambda x: R(x) - x, xs[i], xs[i + 1], xtol=tol))
        else:
            continue
        out.append(FixedPoint(x=root, stability=_stability(R, root), residual=abs(R(root) - root)))
    return out


# ---------------------------------------------------------------------------
# grazing-sliding (synthetic germ family over the normal-fold inner dynamics)


def _grazing_return_map(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    mu: float,
    *,
    cache: dict | None = None,
    rtol: float = 1e-10,
):
    """Return map machinery for the synthetic grazing germ.

    Returns (R, G, gamma, delta, c, xbar) where G is the eps-regularized
    cross map (cached across mu: it does not depend on the germ parameter)
    and xbar is the abscissa of the orbit tangent to the strip boundary.
    """
    y0 = desc.facts["y0"]
    c = desc.facts["c"]
    pe = desc.facts["exterior_factory"](mu)
    R_eps = RegularizedSystem(desc.system, profile, eps)
    fold_x = desc.facts["fold_x"]
    store = cache if cache is not None else {}

    def G(x: float) -> float:
        if x not in store:
            store[x] = map_P_epsilon(R_eps, y0, x, fold=fold_x, rtol=rtol, atol=rtol * 1e-2).x
        return store[x]

    def R(x: float) -> float:
        return pe(G(x))

    x0p = desc.facts["x0"](y0)
    gamma = pe(x0p) - (-x0p)
    alpha_p = desc.facts["alpha"](y0)
    delta = -alpha_p - c * alpha_p  # alpha- = -alpha+ for the normal form
    xbar = -math.sqrt(y0 - eps)    # orbit through (xbar, y0) grazes y = eps
    return R, G, gamma, delta, c, xbar


def _grazing_fixed_points(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    mu: float,
    cache: dict,
) -> tuple[list[FixedPoint], float, float]:
    """Fixed points of the grazing return map using its monotone structure.

    R is increasing, nearly flat left of the tangent orbit xbar and affine
    with slope |c| on the pure side.  The stable point (when it exists) is
    reached by direct iteration from the flattened landing; the pure branch
    root has the closed form pe(0)/(1+c) for the affine germ.  A local scan
    across the flat/pure transition backs both up whenever the contraction
    criterion disagrees with what was found.  Every reported point satisfies
    |R(x*) - x*| <= 1e-8 under the full numerical map.
    """
    R, G, gamma, delta, c, xbar = _grazing_return_map(
        desc, profile, eps, mu, cache=cache, rtol=1e-9
    )
    y0 = desc.facts["y0"]
    x0m = -desc.facts["x0"](y0)
    pe = desc.facts["exterior_factory"](mu)

    found: list[FixedPoint] = []

    def accept(x_star: float) -> bool:
        if any(abs(f.x - x_star) < 1e-9 for f in found):
            return False
        res = abs(R(x_star) - x_star)
        if res <= 1e-8:
            slope = (R(x_star + 1e-7) - R(x_star - 1e-7)) / 2e-7
            if abs(abs(slope) - 1.0) <= 1e-3:
                stab = "neutral"
            else:
                stab = "attracting" if abs(slope) < 1.0 else "repelling"
            found.append(FixedPoint(x=x_star, stability=stab, residual=res))
            return True
        return False

    # stable branch: the map contracts onto it from the flattened landing
    try:
        x_st = iterate_to_fixed_point(R, pe(G(x0m - 0.2)), tol=1e-11, max_iter=80)
        accept(x_st)
    except IterationDiverged:
        pass

    # pure branch: R(x) = pe(-x) on the untouched side, root at pe(0)/(1+c)
    if abs(1.0 + c) > 1e-12:
        x_pure = pe(0.0) / (1.0 + c)
        if x_pure >= xbar - 1e-12:
            accept(x_pure)

    # the contraction criterion gamma < Delta*eps promises a stable point;
    # if it was not caught (root inside the flat/pure transition), or nothing
    # was found at all, scan the transition zone with the full map
    promised = gamma < delta * eps and not any(f.stability == "attracting" for f in found)
    if promised or not found:
        lo, hi = xbar - 8e-3, xbar + 1e-3
        xs = np.linspace(lo, hi, 17)
        vals = [R(x) - x for x in xs]
        for i in range(len(xs) - 1):
            if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
                root = float(brentq(lambda x: R(x) - x, xs[i], xs[i + 1], xtol=1e-13))
                accept(root)
    return found, gamma, delta


def find_periodic_orbit(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    mu: float,
) -> ReturnMapStudy:
    """Fixed points of the return map of the synthetic grazing family.

    Inside the contraction regime gamma < Delta*eps the flattened fixed
    point is found by one to two iterations of the map; outside it the
    pure-X+ branch (the grazing orbit untouched by the strip) may still
    carry one.  Every reported point satisfies |R(x*) - x*| <= 1e-8 under
    the full numerical map.
    """
    cache: dict = {}
    fps, gamma, delta = _grazing_fixed_points(desc, profile, eps, mu, cache)
    return ReturnMapStudy(
        family=desc.id, mu=mu, epsilon=eps, fixed_points=fps, gamma=gamma,
        delta=delta, c=desc.facts["c"],
    )


@dataclass
class BranchPoint:
    mu: float
    fixed_points: list[FixedPoint]
    gamma: float
    delta: float


@dataclass
class BranchDiagram:
    family: str
    epsilon: float
    points: list[BranchPoint]
    collision_mu: float | None = None

    def present(self) -> np.ndarray:
        return np.array([len(p.fixed_points) > 0 for p in self.points])


def grazing_sliding_scan(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    mu_grid,
) -> BranchDiagram:
    """Fixed-point branches over a mu grid for the grazing family.

    The attracting germ keeps a branch through mu = 0 (handing over from the
    flattened fixed point to the untouched X+ orbit); the repelling germ
    loses both fixed points below the collision parameter, which is located
    as the presence boundary on the grid.
    """
    cache: dict = {}
    pts: list[BranchPoint] = []
    for mu in mu_grid:
        fps, gamma, delta = _grazing_fixed_points(desc, profile, eps, float(mu), cache)
        pts.append(BranchPoint(mu=float(mu), fixed_points=fps, gamma=gamma, delta=delta))
    diagram = BranchDiagram(family=desc.facts["variant"], epsilon=eps, points=pts)
    present = diagram.present()
    if not present.all() and present.any():
        # the last absent -> present transition along increasing mu
        mus = np.array([p.mu for p in pts])
        order = np.argsort(mus)
        mus, pres = mus[order], present[order]
        for i in range(len(mus) - 1):
            if not pres[i] and pres[i + 1]:
                diagram.collision_mu = 0.5 * (mus[i] + mus[i + 1])
    return diagram


# ---------------------------------------------------------------------------
# centre / semistable case (Coulomb)


@dataclass
class SemistabilityReport:
    x_tangent: float
    tangent_residual: float
    exterior_monotone: bool
    exterior_final_gaps: list[float]
    exterior_iterations: list[int]
    interior_residuals: list[float]


def centre_semistability(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    *,
    y0: float = 0.25,
    n_exterior: int = 5,
    n_interior: int = 5,
    exterior_span: float = 0.2,
    interior_span: float = 0.2,
    max_iter: int = 1500,
    gap_target: float = 1e-6,
) -> SemistabilityReport:
    """Verify the three signatures of the semistable tangent orbit.

    (a) the X+ orbit tangent to the strip boundary is fixed under the return
    map, (b) exterior starts produce strictly increasing iterates converging
    to it, (c) interior starts come back to themselves (the centre's
    identity return map restricted outside the strip).
    """
    facts = desc.facts
    R_eps = RegularizedSystem(desc.system, profile, eps)
    fold_x = facts["fold_x"]
    x_bar = facts["tangent_orbit_x"](eps, y0)
    pe = facts["exterior_exact"]
    p_down = lambda x: facts["P_exact"](x, eps, y0)
    p_up = lambda x: facts["Pbar_exact"](x, eps, y0)

    from slidekick.slow_manifold import strip_crossing

    def return_map(x: float) -> float:
        if x >= x_bar:
            # the orbit clears the strip: exact circle return (identity)
            return x
        x_in = p_down(x)
        x_exit, _t, _d = strip_crossing(R_eps, x_in, x_limit=fold_x + 0.45)
        return pe(p_up(x_exit))

    # (a) tangent orbit fixed: follow the actual flow, not the closed form
    res_tan = abs(_full_loop_return(desc, x_bar, y0, eps) - x_bar)

    # (b) exterior iterates
    monotone = True
    gaps: list[float] = []
    iters: list[int] = []
    for k in range(1, n_exterior + 1):
        x = x_bar - exterior_span * k / n_exterior
        count = 0
        while count < max_iter:
            x_new = return_map(x)
            if x_new <= x:
                if x_new < x - 1e-12:
                    monotone = False
                break
            x = x_new
            count += 1
            if x_bar - x <= gap_target:
                break
        gaps.append(x_bar - x)
        iters.append(count)

    # (c) interior returns
    interior: list[float] = []
    for k in range(1, n_interior + 1):
        x = x_bar + interior_span * k / n_interior
        interior.append(abs(_full_loop_return(desc, x, y0, eps) - x))

    return SemistabilityReport(
        x_tangent=x_bar,
        tangent_residual=res_tan,
        exterior_monotone=monotone,
        exterior_final_gaps=gaps,
        exterior_iterations=iters,
        interior_residuals=interior,
    )


def _full_loop_return(desc: ModelDescriptor, x: float, y0: float, eps: float) -> float:
    """One full revolution of the X+ centre orbit through (x, y0), numerically.

    The section {y = y0} is crossed twice per revolution (once on the far
    side of the centre), so two section-to-section hops close the loop.
    """
    fld = desc.system.x_plus
    traj = integrate(fld, (x, y0), Section(y0, "all"), rtol=1e-12, atol=1e-14, max_step=0.05)
    traj = integrate(fld, (traj.end[1], y0), Section(y0, "all"), rtol=1e-12, atol=1e-14, max_step=0.05)
    return traj.end[1]


# ---------------------------------------------------------------------------
# sliding homoclinic to a saddle


@dataclass
class HomoclinicProbe:
    mu_tilde: float
    mu: float
    exists: bool
    fixed_point: float | None
    landing: float | None


@dataclass
class HomoclinicScan:
    epsilon: float
    probes: list[HomoclinicProbe]
    mu_tilde_star: float | None
    alpha_plus: float
    constants: TangencyConstants


def _separatrix_landing(desc: ModelDescriptor, y0: float, *, stable: bool, delta: float = 1e-8) -> float:
    """Crossing of W^{s,u}(saddle) with the outer section by shooting."""
    w, V = saddle_eigen(desc)
    if not (w[0] > 0.0 > w[1]):
        raise SaddleNotResolved(f"eigenvalues {w} are not a saddle pair")
    sx, sy = desc.facts["saddle"]
    v = V[:, 1] if stable else V[:, 0]
    # the loop-side branches of both manifolds leave the saddle with a
    # negative x-component (down-left for W^s, up-left for W^u)
    if v[0] > 0:
        v = -v
    start = (sx + delta * v[0], sy + delta * v[1])
    fld = desc.system.x_plus.negated() if stable else desc.system.x_plus

    def ev(t, z):
        return z[1] - y0

    ev.terminal = True
    ev.direction = 0
    from scipy.integrate import solve_ivp

    sol = solve_ivp(fld.rhs, (0.0, 200.0), list(start), method="RK45", max_step=0.1,
                    rtol=1e-12, atol=1e-14, dense_output=True, events=[ev])
    if sol.t_events[0].size == 0:
        raise NoArrival("separatrix never crossed the outer section")
    t_hit = float(sol.t_events[0][0])
    return float(sol.sol(t_hit)[0])


def homoclinic_scan(
    make_model: Callable[[float], ModelDescriptor],
    profile: RegularizationProfile,
    eps: float,
    mu_tilde_probes,
    *,
    y0: float = 0.25,
    bisect: bool = True,
    mu_tilde_hi: float | None = None,
    resolution_factor: float = 1e-3,
) -> HomoclinicScan:
    """Probe the sliding-homoclinic family at paper-normalized parameters.

    ``make_model(mu_raw)`` builds the family member with raw vertical shift
    mu_raw; the bifurcation parameter proper is the section displacement
    mu = x0+ - x0^s, probed at mu = mu_tilde * eps.  The homoclinic value
    mu_tilde^* (where the exterior map loses the landing interval) is
    located by bisection at resolution ``resolution_factor`` in mu_tilde.
    """
    def mu_paper(mu_raw: float) -> float:
        desc = make_model(mu_raw)
        f = find_fold(desc.system, desc.fold_bracket)
        x0p = _fold_orbit_landing(desc, f.x, y0)
        x0s = _separatrix_landing(desc, y0, stable=True)
        return x0p - x0s

    # linearize mu_paper(mu_raw) once, then refine each probe with brentq
    m0 = mu_paper(0.0)
    dm = (mu_paper(1e-4) - m0) / 1e-4

    def raw_for(mu_target: float) -> float:
        guess = (mu_target - m0) / dm
        half = 5e-3
        for _ in range(6):
            lo, hi = guess - half, guess + half
            if (mu_paper(lo) - mu_target) * (mu_paper(hi) - mu_target) < 0:
                return float(brentq(lambda r: mu_paper(r) - mu_target, lo, hi, xtol=1e-12))
            half *= 4.0
        raise SaddleNotResolved(f"could not bracket mu_raw for mu={mu_target}")

    # the germ constants belong to the grazing member of the family (where
    # the stable manifold is tangent to the switching line); with dissipation
    # that member sits at a nonzero raw shift
    raw0 = raw_for(0.0)
    anchor = make_model(raw0)
    fold0 = find_fold(anchor.system, anchor.fold_bracket)
    constants = fit_tangency_constants(anchor.system.x_plus, fold0, y0)

    def orbit_exists(mu_raw: float) -> tuple[bool, float | None, float | None]:
        desc = make_model(mu_raw)
        f = find_fold(desc.system, desc.fold_bracket)
        R_eps = RegularizedSystem(desc.system, profile, eps)
        x_probe = constants.x0_minus - 0.05
        landing = map_P_epsilon(R_eps, y0, x_probe, fold=f).x
        sec_p = Section(y0, "x>0", id="outer+")
        sec_m = Section(y0, "x<0", id="outer-")
        try:
            back = exterior_map(
                desc.system.x_plus, sec_p, sec_m, landing,
                offset=0.0, floor_margin=eps / 2, t_max=400.0,
            )
        except NoArrival:
            return False, None, landing
        # one more composition confirms the contraction fixed point
        x1 = back.x
        x2 = map_P_epsilon(R_eps, y0, x1, fold=f).x
        try:
            back2 = exterior_map(
                desc.system.x_plus, sec_p, sec_m, x2,
                offset=0.0, floor_margin=eps / 2, t_max=400.0,
            )
        except NoArrival:
            return False, None, landing
        return True, back2.x, landing

    probes: list[HomoclinicProbe] = []
    for mt in mu_tilde_probes:
        mu_raw = raw_for(mt * eps)
        ok, fp, landing = orbit_exists(mu_raw)
        probes.append(HomoclinicProbe(mu_tilde=float(mt), mu=mt * eps, exists=ok,
                                      fixed_point=fp, landing=landing))

    mt_star = None
    if bisect:
        hi = mu_tilde_hi if mu_tilde_hi is not None else 2.0 * abs(constants.alpha_plus)
        lo = 0.0
        if orbit_exists(raw_for(lo * eps))[0] and not orbit_exists(raw_for(hi * eps))[0]:
            while hi - lo > resolution_factor:
                mid = 0.5 * (lo + hi)
                if orbit_exists(raw_for(mid * eps))[0]:
                    lo = mid
                else:
                    hi = mid
            mt_star = 0.5 * (lo + hi)
    return HomoclinicScan(
        epsilon=eps,
        probes=probes,
        mu_tilde_star=mt_star,
        alpha_plus=constants.alpha_plus,
        constants=constants,
    )


def _fold_orbit_landing(desc: ModelDescriptor, fold_x: float, y0: float) -> float:
    from slidekick.poincare import _landing

    return _landing(desc.system.x_plus, (fold_x, desc.system.offset), y0, backward=False)


def saddle_passage_times(
    desc: ModelDescriptor,
    distances,
    *,
    entry_edge: float = 0.25,
) -> np.ndarray:
    """Transit times past the saddle for starts offset from W^s.

    The anchor point is taken on the actual (curved) stable manifold at
    eigen-coordinate v = -entry_edge by backward shooting, and the starts
    are displaced from it by d along the unstable eigendirection; the
    passage time to |u| = entry_edge then grows like log(1/d)/lambda_1.
    """
    w, V = saddle_eigen(desc)
    sx, sy = desc.facts["saddle"]
    vu, vs = V[:, 0].copy(), V[:, 1].copy()
    if vs[1] > 0:  # anchor on the branch below the saddle
        vs = -vs
    M = np.column_stack([vu, vs])
    Minv = np.linalg.inv(M)
    from scipy.integrate import solve_ivp

    def eigcoords(z):
        return Minv @ np.array([z[0] - sx, z[1] - sy])

    # backward shooting: W^s leaves the saddle along vs in reverse time
    def ev_edge(t, z):
        return abs(eigcoords(z)[1]) - entry_edge

    ev_edge.terminal = True
    ev_edge.direction = 1
    seed = np.array([sx, sy]) + 1e-9 * vs
    fld_back = desc.system.x_plus.negated()
    solb = solve_ivp(fld_back.rhs, (0.0, 100.0), list(seed), method="RK45",
                     rtol=1e-12, atol=1e-14, max_step=0.05,
                     dense_output=True, events=[ev_edge])
    if solb.t_events[0].size == 0:
        raise NoArrival("could not anchor on the stable manifold")
    anchor = solb.sol(float(solb.t_events[0][0]))

    def ev_exit(t, z):
        return abs(eigcoords(z)[0]) - entry_edge

    ev_exit.terminal = True
    ev_exit.direction = 1

    times = []
    for d in distances:
        start = anchor + d * vu
        sol = solve_ivp(desc.system.x_plus.rhs, (0.0, 500.0), list(start), method="RK45",
                        rtol=1e-12, atol=1e-14, max_step=0.1, events=[ev_exit])
        if sol.t_events[0].size == 0:
            raise NoArrival(f"passage from distance {d} never exited the saddle box")
        times.append(float(sol.t_events[0][0]))
    return np.asarray(times)


# ---------------------------------------------------------------------------
# Stribeck attractor (sliding periodic orbit of the dry-friction oscillator)


@dataclass
class StribeckResult:
    epsilon: float
    fixed_point: float
    stability: str
    n_fixed_points: int
    hausdorff_upper: float
    gamma: float


def _directed_hausdorff(P: np.ndarray, Q: np.ndarray) -> float:
    """Largest distance from points of P to the polyline Q (point-to-segment)."""
    seg_a = Q[:-1]
    seg_b = Q[1:]
    d = seg_b - seg_a
    L2 = np.sum(d * d, axis=1)
    L2[L2 == 0.0] = 1.0
    worst = 0.0
    for p in P:
        t = np.clip(np.sum((p - seg_a) * d, axis=1) / L2, 0.0, 1.0)
        proj = seg_a + t[:, None] * d
        dist = np.min(np.sqrt(np.sum((p - proj) ** 2, axis=1)))
        worst = max(worst, dist)
    return worst


def hausdorff_polyline(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines (point-to-segment)."""
    return max(_directed_hausdorff(A, B), _directed_hausdorff(B, A))


def stribeck_attractor(
    desc: ModelDescriptor,
    profile: RegularizationProfile,
    eps: float,
    *,
    y0: float = 0.25,
) -> StribeckResult:
    """Locate the attracting periodic orbit of the regularized Stribeck model
    and measure how far its upper arc sits from the Filippov sliding cycle."""
    fold = find_fold(desc.system, desc.fold_bracket)
    R_eps = RegularizedSystem(desc.system, profile, eps)

    def pe(z: float) -> float:
        r = exterior_map(
            desc.system.x_plus,
            Section(y0, "all", id="from"),
            _HalfSection(y0, fold.x, side=-1),
            z,
            offset=0.0,
            floor_margin=eps / 2,
            t_max=200.0,
        )
        return r.x

    def G(x: float) -> float:
        return map_P_epsilon(R_eps, y0, x, fold=fold).x

    def R(x: float) -> float:
        return pe(G(x))

    x0p = _fold_orbit_landing(desc, fold.x, y0)
    gamma = pe(x0p) - _separatrix_like_backward(desc, fold.x, y0)

    x_star = iterate_to_fixed_point(R, pe(x0p))
    fps = find_fixed_points_scan(R, x_star - 0.25, min(x_star + 0.25, fold.x - 1e-3), n=48)

    # upper arc of the regularized orbit: X+ from the strip exit around to the
    # next strip entry (Z_eps = X+ above the strip)
    r_full = map_P_epsilon(R_eps, y0, x_star, fold=fold)
    arc_eps = _upper_arc(desc.system.x_plus, r_full.flags["x_exit"], eps, t_max=200.0)

    # Filippov sliding cycle: upper arc from the fold exit until sliding,
    # closed by the sliding segment on the switching line
    traj0 = filippov_flow(desc.system, (fold.x, 0.0), "sliding", t_max=200.0, max_step=0.02)
    x_land = traj0.end[1]
    slide = np.column_stack([np.linspace(x_land, fold.x, 200), np.zeros(200)])
    cycle0 = np.vstack([np.column_stack([traj0.x, traj0.y]), slide])

    # the eps-closeness of the regularized orbit holds against the whole
    # sliding cycle; cutting both curves at y = eps would instead compare
    # the O(eps^{p/(2p-1)}) strip exit against the cycle's O(sqrt(eps))
    # boundary crossing (the stated non-uniformity of the limit)
    mask0 = traj0.y > eps
    arc0 = np.column_stack([traj0.x[mask0], traj0.y[mask0]])
    d1 = _directed_hausdorff(arc_eps, cycle0)
    d2 = _directed_hausdorff(arc0, arc_eps)
    dist = max(d1, d2)
    return StribeckResult(
        epsilon=eps,
        fixed_point=x_star,
        stability=_stability(R, x_star, dx=1e-5),
        n_fixed_points=len(fps),
        hausdorff_upper=dist,
        gamma=gamma,
    )


def _separatrix_like_backward(desc: ModelDescriptor, fold_x: float, y0: float) -> float:
    from slidekick.poincare import _landing

    return _landing(desc.system.x_plus, (fold_x, desc.system.offset), y0, backward=True)


class _HalfSection(Section):
    """Section restricted to one side of the fold abscissa."""

    def __init__(self, y0: float, fold_x: float, side: int):
        super().__init__(y0=y0, half="all", id=f"half{side}")
        object.__setattr__(self, "_fold_x", fold_x)
        object.__setattr__(self, "_side", side)

    def contains(self, x: float) -> bool:
        return (x - self._fold_x) * self._side > 0.0


def _upper_arc(field: PlanarField, x_exit: float, eps: float, *, t_max: float) -> np.ndarray:
    from scipy.integrate import solve_ivp

    def ev(t, z):
        return z[1] - eps

    ev.terminal = True
    ev.direction = -1
    sol = solve_ivp(field.rhs, (1e-9, t_max), [x_exit, eps], method="RK45", max_step=0.02,
                    rtol=1e-11, atol=1e-13, dense_output=True, events=[ev])
    if sol.t_events[0].size == 0:
        raise NoArrival("upper arc never returned to the strip boundary")
    ts = np.linspace(sol.t[0], float(sol.t_events[0][0]), 6000)
    pts = sol.sol(ts)
    return np.column_stack([pts[0], pts[1]])
