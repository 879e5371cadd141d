"""Transition profiles and the regularized vector field.

A profile phi is monotone, odd, equals -1 below v=-1 and +1 above v=1.  The
smoothness index p classifies the contact with the outer constants: p=1 is
the continuous piecewise linear profile, p>=2 gives a C^{p-1} profile whose
first p-1 derivatives vanish at the gluing points, so phi behaves like
1 + O(v-1)^p near v=1.  The regularized field blends X+ and X- by
phi(y/eps) inside the strip |y| <= eps and coincides with them outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from numpy.polynomial import Polynomial

from slidekick.fields import FilippovSystem, PlanarField


class InvalidP(Exception):
    """Polynomial profiles need p >= 2."""


@dataclass(frozen=True)
class RegularizationProfile:
    """Transition function phi with smoothness class p.

    ``deriv(v, k)`` evaluates the k-th derivative; outside [-1, 1] all
    derivatives vanish, at the endpoints the interior one-sided limit is
    returned.  ``phi_p_at_1`` stores the left limit of the p-th derivative
    at v = 1 in closed form (the constant that sets the inner equation).
    """

    p: int
    eval: Callable[[float], float]
    deriv: Callable[[float, int], float]
    phi_p_at_1: float
    name: str = ""

    def __call__(self, v: float) -> float:
        return self.eval(v)

    @property
    def c_p(self) -> float:
        """Taylor coefficient phi^(p)(1)/p! of the contact at v = 1."""
        return self.phi_p_at_1 / math.factorial(self.p)

    def deriv_at_1(self, k: int) -> float:
        """One-sided (interior) k-th derivative at v = 1."""
        return self.deriv(1.0, k)

    def inverse(self, w: float) -> float:
        """phi^{-1} on [-1, 1] by bisection (phi is strictly increasing)."""
        from scipy.optimize import brentq

        if w >= 1.0:
            return 1.0
        if w <= -1.0:
            return -1.0
        return float(brentq(lambda v: self.eval(v) - w, -1.0, 1.0, xtol=1e-15))


def phi_linear() -> RegularizationProfile:
    """The continuous piecewise linear profile (p = 1): clamp(v, -1, 1)."""

    def ev(v: float) -> float:
        return float(min(1.0, max(-1.0, v)))

    def dv(v: float, k: int) -> float:
        if k == 0:
            return ev(v)
        if k == 1:
            return 1.0 if -1.0 <= v <= 1.0 else 0.0
        return 0.0

    return RegularizationProfile(p=1, eval=ev, deriv=dv, phi_p_at_1=1.0, name="linear")


def _poly_profile(p: int, dphi: Polynomial, name: str) -> RegularizationProfile:
    # normalize the antiderivative of dphi so phi(1) = 1, phi odd
    anti = dphi.integ()
    scale = 1.0 / float(anti(1.0))
    phi_poly = anti * scale
    derivs = [phi_poly]
    for _ in range(p + 2):
        derivs.append(derivs[-1].deriv())

    def ev(v: float) -> float:
        if v >= 1.0:
            return 1.0
        if v <= -1.0:
            return -1.0
        return float(phi_poly(v))

    def dv(v: float, k: int) -> float:
        if k == 0:
            return ev(v)
        if v > 1.0 or v < -1.0:
            return 0.0
        if k < len(derivs):
            return float(derivs[k](v))
        return 0.0

    return RegularizationProfile(
        p=p, eval=ev, deriv=dv, phi_p_at_1=float(derivs[p](1.0)), name=name
    )


def phi_polynomial(p: int, kill_next_order: bool = False) -> RegularizationProfile:
    """Polynomial C^{p-1} profile: phi'(v) proportional to (1 - v^2)^{p-1}.

    The antiderivative is normalized so phi(1) = 1; derivatives of order
    1..p-1 vanish at both endpoints, giving exact C^{p-1} gluing with a
    sign-definite p-th derivative at 1 (negative for p even, positive for p
    odd).  With ``kill_next_order`` the density picks up the even factor
    1 + (p-1)/4 * (1 - v^2), which cancels phi^(p+1)(1) while keeping
    monotonicity and oddness (used to probe the first-order inner
    correction with zero forcing).
    """
    if p < 2:
        raise InvalidP(f"polynomial profile needs p >= 2, got {p}")
    base = Polynomial([1.0, 0.0, -1.0]) ** (p - 1)
    if kill_next_order:
        base = base * Polynomial([1.0 + (p - 1) / 4.0, 0.0, -(p - 1) / 4.0])
    name = f"poly({p})" + ("-flat" if kill_next_order else "")
    return _poly_profile(p, base, name)


def parse_profile(spec: str) -> RegularizationProfile:
    """Parse the config syntax ``linear`` or ``poly(p)``."""
    s = spec.strip().lower()
    if s == "linear":
        return phi_linear()
    if s.startswith("poly(") and s.endswith(")"):
        return phi_polynomial(int(s[5:-1]))
    raise ValueError(f"unknown profile spec {spec!r}")


@dataclass(frozen=True)
class RegularizedSystem:
    """A Filippov pair blended by phi(y/eps) inside the strip |y| <= eps."""

    base: FilippovSystem
    profile: RegularizationProfile
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    @property
    def offset(self) -> float:
        return self.base.offset

    def blend(self, x: float, y: float) -> tuple[float, float]:
        """Field value of Z_eps at (x, y); exact X+/X- outside the strip."""
        v = (y - self.base.offset) / self.epsilon
        if v >= 1.0:
            return self.base.x_plus(x, y)
        if v <= -1.0:
            return self.base.x_minus(x, y)
        w = self.profile.eval(v)
        fp = self.base.x_plus(x, y)
        fm = self.base.x_minus(x, y)
        return (
            0.5 * (fp[0] + fm[0]) + 0.5 * w * (fp[0] - fm[0]),
            0.5 * (fp[1] + fm[1]) + 0.5 * w * (fp[1] - fm[1]),
        )


def regularized_field(R: RegularizedSystem) -> PlanarField:
    """Z_eps = (X+ + X-)/2 + phi(y/eps) (X+ - X-)/2 as a PlanarField."""
    return PlanarField(R.blend, name=f"Z_eps[{R.profile.name}, eps={R.epsilon:g}]")


def slow_fast_forms(R: RegularizedSystem) -> dict[str, PlanarField]:
    """The slow and fast coordinate forms of Z_eps in (x, v), y = offset + eps*v.

    The slow form keeps the original time (so vdot carries the 1/eps); the
    fast form rescales time by t = eps*tau, which multiplies the x-equation
    by eps instead.  Both agree with the regularized field under the
    coordinate and time maps.
    """
    eps = R.epsilon
    off = R.base.offset

    def slow(x: float, v: float) -> tuple[float, float]:
        bx, by = R.blend(x, off + eps * v)
        return bx, by / eps

    def fast(x: float, v: float) -> tuple[float, float]:
        bx, by = R.blend(x, off + eps * v)
        return eps * bx, by

    return {
        "slow": PlanarField(slow, name="slow"),
        "fast": PlanarField(fast, name="fast"),
    }
