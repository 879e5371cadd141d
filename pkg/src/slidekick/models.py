"""Built-in model zoo: closed-form Filippov pairs with ground-truth metadata.

Every descriptor records the facts used as oracles by the experiments: fold
location, section constants where closed forms exist, first integrals, and
(for the friction models) the physical orientation.  The dry-friction
systems have their recurrence below the switching line y = 1; the
constructors return them reflected (y -> 1 - y), which puts the visible
fold of the upper field at the origin-height line in the standard
orientation used everywhere else.  The physical pair is kept alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from slidekick.fields import FilippovSystem, FoldPoint, PlanarField, find_fold


class UnknownModel(Exception):
    pass


class BadParams(Exception):
    pass


class TransversalityLost(Exception):
    """The lower field stopped being transversal during straightening."""


# smallest positive root of y^3 - 3y + 1: the vertical offset that makes the
# Hamiltonian saddle loop of the homoclinic model tangent to y = 0
Y_TANGENT = 0.34729635533386066


@dataclass
class ModelDescriptor:
    id: str
    system: FilippovSystem
    params: dict[str, float]
    facts: dict[str, Any] = field(default_factory=dict)
    physical_system: FilippovSystem | None = None
    exterior: Callable[[float], float] | None = None
    notes: str = ""

    @property
    def fold_bracket(self) -> tuple[float, float]:
        return self.facts.get("fold_bracket", (-1.0, 1.0))

    def fold(self) -> FoldPoint:
        return find_fold(self.system, self.fold_bracket)


def _normal_fold(params: dict) -> ModelDescriptor:
    xp = PlanarField(lambda x, y: (1.0, 2.0 * x), name="X+")
    xm = PlanarField(lambda x, y: (0.0, 1.0), name="X-")
    system = FilippovSystem(xp, xm)
    facts = {
        "fold_x": 0.0,
        "fold_bracket": (-1.0, 1.0),
        "sliding_for": "x<0",
        "x0": lambda y0: math.sqrt(y0),
        "alpha": lambda y0: -1.0 / (2.0 * math.sqrt(y0)),
        "beta": lambda y0: 1.0 / (2.0 * math.sqrt(y0)),
        # down map {y=y0,x<0} -> {y=eps,x<0} and up map {y=eps,x>0} -> {y=y0,x>0}
        "P_exact": lambda x, eps, y0: -math.sqrt(x * x + eps - y0),
        "Pbar_exact": lambda x, eps, y0: math.sqrt(x * x - eps + y0),
        "first_integral": lambda x, y: y - x * x,
        "sliding_speed": lambda x: 1.0 / (1.0 - 2.0 * x),
    }
    return ModelDescriptor(id="normal-fold", system=system, params={}, facts=facts)


def _general_fold(params: dict) -> ModelDescriptor:
    a1 = params.setdefault("a1", 0.2)
    a2 = params.setdefault("a2", 0.1)
    a3 = params.setdefault("a3", 0.15)
    b = params.setdefault("b", 0.3)

    def fplus(x, y):
        return (1.0 + a1 * x + a2 * y, 2.0 * x + b * y + a3 * x * y)

    xp = PlanarField(fplus, name="X+g")
    xm = PlanarField(lambda x, y: (0.0, 1.0), name="X-")
    system = FilippovSystem(xp, xm)
    facts = {"fold_x": 0.0, "fold_bracket": (-0.5, 0.5)}
    return ModelDescriptor(id="general-fold", system=system, params=params, facts=facts)


def _stribeck(params: dict) -> ModelDescriptor:
    fs = params.setdefault("F_s", 1.0)
    fd = params.setdefault("F_d", 0.5)
    dl = params.setdefault("delta", 0.05)
    if not (fs > fd > 0.0 and 0.0 < dl < 1.0):
        raise BadParams("stribeck needs F_s > F_d > 0 and 0 < delta < 1")

    # reflected coordinates: ytil = 1 - y; the slip field below the belt
    # speed becomes the upper field with a visible fold at (F_s, 0)
    def xp(x, yt):
        return (1.0 - yt, x - (fs - fd) / (1.0 + dl * yt) - fd)

    def xm(x, yt):
        return (1.0 - yt, x + (fs - fd) / (1.0 - dl * yt) + fd)

    def xp_phys(x, y):
        return (y, -x - (fs - fd) / (1.0 + dl * (y - 1.0)) - fd)

    def xm_phys(x, y):
        return (y, -x + (fs - fd) / (1.0 + dl * (1.0 - y)) + fd)

    system = FilippovSystem(PlanarField(xp, name="X+stribeck"), PlanarField(xm, name="X-stribeck"))
    physical = FilippovSystem(
        PlanarField(xp_phys, name="X+phys"), PlanarField(xm_phys, name="X-phys"), offset=1.0
    )
    focus = (fd + (fs - fd) / (1.0 + dl), 0.0)  # physical coordinates, unstable
    facts = {
        "fold_x": fs,
        "fold_bracket": (0.5 * fs, 1.5 * fs),
        "lower_tangency_x": -fs,
        "sliding_for": f"|x|<{fs}",
        "sliding_speed": lambda x: 1.0,
        "focus_physical": focus,
        # V grows along the physical slip-down field while y < (1+delta)/delta
        "lyapunov_like": lambda x, y: (x - fd - (fs - fd) / (1.0 + dl)) ** 2 + y * y,
        "reflected": True,
    }
    return ModelDescriptor(
        id="stribeck", system=system, params=params, facts=facts, physical_system=physical,
        notes="reflected: working y equals 1 - physical y",
    )


def _coulomb(params: dict) -> ModelDescriptor:
    fs = params.setdefault("F_s", 1.0)
    if fs <= 0.0:
        raise BadParams("coulomb needs F_s > 0")

    def xp(x, yt):
        return (1.0 - yt, x - fs)

    def xm(x, yt):
        return (1.0 - yt, x + fs)

    def xp_phys(x, y):
        return (y, -x - fs)

    def xm_phys(x, y):
        return (y, -x + fs)

    system = FilippovSystem(PlanarField(xp, name="X+coulomb"), PlanarField(xm, name="X-coulomb"))
    physical = FilippovSystem(
        PlanarField(xp_phys), PlanarField(xm_phys), offset=1.0
    )

    def p_exact(x: float, h: float, y0: float) -> float:
        r2 = (x - fs) ** 2 + (y0 - 1.0) ** 2
        return fs - math.sqrt(r2 - (h - 1.0) ** 2)

    def pbar_exact(x: float, h: float, y0: float) -> float:
        r2 = (x - fs) ** 2 + (h - 1.0) ** 2
        return fs + math.sqrt(r2 - (y0 - 1.0) ** 2)

    facts = {
        "fold_x": fs,
        "fold_bracket": (0.0, 2.0 * fs),
        "lower_tangency_x": -fs,
        "centre": (fs, 1.0),  # working coordinates; (F_s, 0) physically
        "first_integral_physical": lambda x, y: (x - fs) ** 2 + y * y,
        "first_integral": lambda x, yt: (x - fs) ** 2 + (yt - 1.0) ** 2,
        "P_exact": p_exact,
        "Pbar_exact": pbar_exact,
        "exterior_exact": lambda z: 2.0 * fs - z,
        "tangent_orbit_x": lambda eps, y0: fs - math.sqrt((1.0 - eps) ** 2 - (1.0 - y0) ** 2),
        "sliding_speed": lambda x: 1.0,
        "reflected": True,
    }
    return ModelDescriptor(
        id="coulomb", system=system, params=params, facts=facts, physical_system=physical,
        notes="reflected: working y equals 1 - physical y; centre orbits are circles",
    )


def _grazing_family(params: dict) -> ModelDescriptor:
    variant = params.setdefault("variant", "attracting")
    if variant not in ("attracting", "repelling"):
        raise BadParams("variant must be 'attracting' or 'repelling'")
    c = params.setdefault("c", -0.5 if variant == "attracting" else -2.0)
    if c > 0.0:
        raise BadParams("the exterior slope c must be <= 0")
    if variant == "attracting" and not -1.0 < c < 0.0:
        raise BadParams("attracting germ needs -1 < c < 0")
    if variant == "repelling" and c >= -1.0:
        raise BadParams("repelling germ needs c < -1")
    y0 = params.setdefault("y0", 0.25)
    mu = params.setdefault("mu", 0.0)

    base = _normal_fold({})
    x0p = math.sqrt(y0)
    x0m = -x0p
    gamma_sign = +1.0 if variant == "attracting" else -1.0

    def make_exterior(mu_val: float) -> Callable[[float], float]:
        def pe(z: float) -> float:
            return x0m + gamma_sign * mu_val + c * (z - x0p)

        return pe

    facts = dict(base.facts)
    facts.update({
        "variant": variant,
        "c": c,
        "gamma_sign": gamma_sign,
        "y0": y0,
        "exterior_factory": make_exterior,
        # Delta = alpha- - c alpha+ with the normal-form constants at y0
        "delta": (1.0 / (2.0 * math.sqrt(y0))) * (1.0 + c),
    })
    return ModelDescriptor(
        id="grazing-family", system=base.system, params=params, facts=facts,
        exterior=make_exterior(mu),
        notes="synthetic exterior germ over the normal-fold inner dynamics",
    )


def _grazing_family_ode(params: dict) -> ModelDescriptor:
    omega = params.setdefault("omega", 1.0)
    kappa = params.setdefault("kappa", 0.5)
    h = params.setdefault("h", 1.0)
    mu = params.setdefault("mu", 0.0)
    r0 = h - mu  # cycle radius; mu > 0 lifts the cycle into the upper half plane

    def fplus(x, y):
        u1, u2 = x, y - h
        rad = 1.0 - (u1 * u1 + u2 * u2) / (r0 * r0)
        return (-omega * u2 + kappa * rad * u1, omega * u1 + kappa * rad * u2)

    xp = PlanarField(fplus, name="X+ode")
    xm = PlanarField(lambda x, y: (0.0, 1.0), name="X-")
    system = FilippovSystem(xp, xm)
    facts = {
        "fold_bracket": (-0.5 * h, 0.5 * h),
        "cycle_radius": r0,
        "centre": (0.0, h),
        "attracting_cycle": kappa > 0,
    }
    return ModelDescriptor(id="grazing-family-ode", system=system, params=params, facts=facts)


def _saddle_homoclinic(params: dict) -> ModelDescriptor:
    mu = params.setdefault("mu", 0.0)     # vertical shift: dip height of the loop
    nu = params.setdefault("nu", 0.0)     # dissipation; 0 is the Hamiltonian variant
    yc = Y_TANGENT

    def g0p(u):
        return 1.0 - u * u

    def fplus(x, y):
        arg = y + yc - mu
        gp = g0p(arg)
        return (gp, 2.0 * x - 2.0 * x * x - nu * gp)

    xp = PlanarField(fplus, name="X+saddle")
    xm = PlanarField(lambda x, y: (0.0, 1.0), name="X-")
    system = FilippovSystem(xp, xm)

    saddle = (1.0, 1.0 - yc + mu)

    def hamiltonian(x, y):
        u = y + yc - mu
        return (u - u**3 / 3.0) - (x * x - 2.0 * x**3 / 3.0)

    facts = {
        "fold_bracket": (-0.3, 0.6),
        "saddle": saddle,
        "hamiltonian": hamiltonian,
        "saddle_level": 2.0 / 3.0 - 1.0 / 3.0,
        "hamiltonian_variant": nu == 0.0,
        # at nu = 0 the saddle loop dips exactly to y = mu at x = 0
        "dip_height": mu,
    }
    return ModelDescriptor(
        id="saddle-homoclinic", system=system, params=params, facts=facts,
        notes="separable field (G0'(y+yc-mu), f(x)) with energy dissipation nu",
    )


_BUILDERS = {
    "normal-fold": _normal_fold,
    "general-fold": _general_fold,
    "stribeck": _stribeck,
    "coulomb": _coulomb,
    "grazing-family": _grazing_family,
    "grazing-family-ode": _grazing_family_ode,
    "saddle-homoclinic": _saddle_homoclinic,
}


def model(model_id: str, check: bool = True, **params) -> ModelDescriptor:
    """Construct a built-in model by string id.

    With ``check`` the descriptor's self-checks run: the fold residual must
    vanish to 1e-12 and any closed-form maps are compared against direct
    integration at three points.
    """
    if model_id not in _BUILDERS:
        raise UnknownModel(f"unknown model {model_id!r}; known: {sorted(_BUILDERS)}")
    try:
        desc = _BUILDERS[model_id](dict(params))
    except TypeError as exc:
        raise BadParams(str(exc)) from exc
    if check:
        _self_check(desc)
    return desc


def list_models() -> list[str]:
    return sorted(_BUILDERS)


def _self_check(desc: ModelDescriptor) -> None:
    from slidekick.poincare import _landing

    fold = desc.fold()
    if "fold_x" in desc.facts:
        residual = desc.system.x_plus(desc.facts["fold_x"], desc.system.offset)[1]
        if abs(residual) > 1e-12:
            raise BadParams(f"{desc.id}: fold residual {residual:g} at declared fold")
    if not fold.visible:
        raise BadParams(f"{desc.id}: the fold is not visible")

    if "P_exact" in desc.facts and desc.id == "normal-fold":
        eps, y0 = 1e-3, 0.25
        for x in (-0.9, -0.7, -0.6):
            want = desc.facts["P_exact"](x, eps, y0)
            got = _landing(desc.system.x_plus, (x, y0), eps, backward=False)
            if abs(want - got) > 1e-9:
                raise BadParams(f"{desc.id}: P closed form mismatch at x={x}")
    if desc.id == "coulomb":
        y0, h = 0.25, 0.1
        for x in (0.05, 0.2, 0.45):
            want = desc.facts["P_exact"](x, h, y0)
            got = _landing(desc.system.x_plus, (x, y0), h, backward=False)
            if abs(want - got) > 1e-9:
                raise BadParams("coulomb: circle map mismatch")
    if desc.id == "stribeck":
        # the unstable pseudo-separatrix of the fold must come back to the
        # switching line inside the sliding segment
        from slidekick.integrator import Section, integrate

        fs = desc.params["F_s"]
        traj = integrate(desc.system.x_plus, (fs + 1e-9, 1e-12), Section(0.0), t_max=50.0)
        x_star = traj.end[1]
        if not (-fs < x_star < fs):
            raise BadParams(f"stribeck: W^u lands at {x_star:.4f}, outside the sliding segment")
    if desc.id == "saddle-homoclinic":
        sx, sy = desc.facts["saddle"]
        fx, fy = desc.system.x_plus(sx, sy)
        if abs(fx) > 1e-12 or abs(fy) > 1e-12:
            raise BadParams("saddle-homoclinic: saddle is not an equilibrium")


def saddle_eigen(desc: ModelDescriptor) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the saddle of the homoclinic model."""
    sx, sy = desc.facts["saddle"]
    J = desc.system.x_plus.jacobian(sx, sy)
    w, V = np.linalg.eig(J)
    order = np.argsort(w)[::-1]  # unstable first
    return w[order].real, V[:, order].real


def flowbox_reduce(
    system: FilippovSystem,
    *,
    x_window: float = 0.3,
    y_window: float = 0.3,
    grid_n: int = 5,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> tuple[FilippovSystem, dict]:
    """Straighten X- to (0, 1) and rescale X+ into the general-fold form.

    The change of variables is realized numerically: psi(xh, yh) flows X-
    from (xh, 0) for time yh, its differential comes from the variational
    equations, and the final shift xhat = xbar + f2(xbar)/2 absorbs the
    pure-x second-order terms of the vertical component.  The returned
    report verifies that the transformed lower field equals (0, 1) on a
    test grid and that the tangency at the origin stays visible.
    """
    from scipy.integrate import solve_ivp
    from scipy.optimize import brentq

    xm, xp = system.x_minus, system.x_plus
    off = system.offset
    if xm(0.0, off)[1] <= 0.0:
        raise TransversalityLost("X- must point upward on the switching line")

    def flow_with_jac(x0: float, tau: float):
        # psi(xh, yh) = X- flow from (xh, offset) for time yh; its differential
        # has d(psi)/d(xh) from the variational equations and d(psi)/d(yh)
        # equal to the field itself
        def rhs(t, z):
            x, y, m1, m2 = z
            fx, fy = xm(x, y)
            J = xm.jacobian(x, y)
            return [fx, fy, J[0, 0] * m1 + J[0, 1] * m2, J[1, 0] * m1 + J[1, 1] * m2]

        if tau == 0.0:
            pos = (x0, off)
            col1 = np.array([1.0, 0.0])
        else:
            sol = solve_ivp(rhs, (0.0, tau), [x0, off, 1.0, 0.0],
                            method="RK45", rtol=rtol, atol=atol)
            if sol.status != 0:
                raise TransversalityLost("flow-box straightening integration failed")
            z = sol.y[:, -1]
            pos = (float(z[0]), float(z[1]))
            col1 = np.array([z[2], z[3]])
        M = np.column_stack([col1, np.array(xm(*pos))])
        return pos, M

    def tilde_plus(xt: float, yt: float) -> tuple[float, float]:
        pos, M = flow_with_jac(xt, yt)
        v = np.linalg.solve(M, np.array(xp(*pos)))
        return float(v[0]), float(v[1])

    def tilde_minus(xt: float, yt: float) -> tuple[float, float]:
        pos, M = flow_with_jac(xt, yt)
        v = np.linalg.solve(M, np.array(xm(*pos)))
        return float(v[0]), float(v[1])

    # scaling to the normal-form leading part
    c = tilde_plus(0.0, 0.0)[0]
    h = 1e-6
    a = (tilde_plus(h, 0.0)[1] - tilde_plus(-h, 0.0)[1]) / (2.0 * h)
    if c <= 0.0 or a <= 0.0:
        raise TransversalityLost("straightened field lost the visible-fold signs")
    sx, sy, st = a / 2.0, a * c / 2.0, a * c / 2.0

    def bar_plus(xb: float, yb: float) -> tuple[float, float]:
        ft = tilde_plus(xb / sx, yb / sy)
        return sx * ft[0] / st, sy * ft[1] / st

    def f2(xb: float) -> float:
        return bar_plus(xb, 0.0)[1] - 2.0 * xb

    def to_hat(xb: float) -> float:
        return xb + 0.5 * f2(xb)

    def from_hat(xh: float) -> float:
        lo, hi = xh - 0.5 * abs(xh) - 0.1, xh + 0.5 * abs(xh) + 0.1
        return float(brentq(lambda xb: to_hat(xb) - xh, lo, hi, xtol=1e-14))

    def hat_plus(xh: float, yh: float) -> tuple[float, float]:
        xb = from_hat(xh)
        fb = bar_plus(xb, yh)
        dchi = 1.0 + 0.5 * (f2(xb + 1e-6) - f2(xb - 1e-6)) / 2e-6
        return dchi * fb[0], fb[1]

    def hat_minus(xh: float, yh: float) -> tuple[float, float]:
        xb = from_hat(xh)
        ft = tilde_minus(xb / sx, yh / sy)
        dchi = 1.0 + 0.5 * (f2(xb + 1e-6) - f2(xb - 1e-6)) / 2e-6
        return dchi * sx * ft[0] / st, sy * ft[1] / st

    reduced = FilippovSystem(
        PlanarField(hat_plus, name="Xhat+"), PlanarField(hat_minus, name="Xhat-")
    )

    xs = np.linspace(-x_window, x_window, grid_n)
    ys = np.linspace(0.0, y_window, grid_n)
    worst = 0.0
    for xh in xs:
        for yh in ys:
            v = reduced.x_minus(xh, yh)
            worst = max(worst, abs(v[0]), abs(v[1] - 1.0))
    dfx = (reduced.x_plus(1e-5, 0.0)[1] - reduced.x_plus(-1e-5, 0.0)[1]) / 2e-5
    report = {
        "minus_field_error": worst,
        "fold_residual": reduced.x_plus(0.0, 0.0)[1],
        "fold_slope": dfx,
        "visible": dfx * reduced.x_plus(0.0, 0.0)[0] > 0.0,
        "scales": {"a": a, "c": c},
    }
    return reduced, report
