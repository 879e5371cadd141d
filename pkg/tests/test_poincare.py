import math

import numpy as np
import pytest

from slidekick.fields import find_fold
from slidekick.integrator import NoArrival, Section
from slidekick.models import model
from slidekick.poincare import (
    FitRejected,
    TangentialCrossing,
    decompose,
    exterior_map,
    exterior_slope,
    fit_power_law,
    fit_tangency_constants,
    landing_scan,
    map_P_epsilon,
)
from slidekick.regularization import RegularizedSystem, phi_linear, phi_polynomial


@pytest.fixture(scope="module")
def nf():
    return model("normal-fold")


@pytest.fixture(scope="module")
def nf_fold(nf):
    return find_fold(nf.system, nf.fold_bracket)


@pytest.fixture(scope="module")
def constants(nf, nf_fold):
    return fit_tangency_constants(nf.system.x_plus, nf_fold, 0.25)


def test_tangency_constants_normal_form(constants):
    # closed forms at y0 = 1/4: x0 = +-1/2, alpha = -+1, beta = +-1
    assert constants.x0_plus == pytest.approx(0.5, abs=1e-5)
    assert constants.x0_minus == pytest.approx(-0.5, abs=1e-5)
    assert constants.alpha_plus == pytest.approx(-1.0, abs=5e-3)
    assert constants.alpha_minus == pytest.approx(1.0, abs=5e-3)
    assert constants.beta_plus == pytest.approx(1.0, abs=5e-3)
    assert constants.beta_minus == pytest.approx(-1.0, abs=5e-3)


def test_sign_pattern(constants):
    assert constants.alpha_plus < 0 < constants.beta_plus
    assert constants.beta_minus < 0 < constants.alpha_minus


def test_translation_invariance(nf_fold):
    # same constants in fold-centered coordinates for a shifted field
    from slidekick.fields import FilippovSystem, PlanarField

    xp = PlanarField(lambda x, y: (1.0, 2.0 * (x - 0.3)))
    xm = PlanarField(lambda x, y: (0.0, 1.0))
    sys_shift = FilippovSystem(xp, xm)
    f = find_fold(sys_shift, (-1.0, 1.0))
    assert f.x == pytest.approx(0.3, abs=1e-12)
    tc = fit_tangency_constants(xp, f, 0.25)
    assert tc.x0_plus - f.x == pytest.approx(0.5, abs=1e-5)
    assert tc.alpha_plus == pytest.approx(-1.0, abs=5e-3)
    assert tc.beta_plus == pytest.approx(1.0, abs=5e-3)


def test_tangential_crossing_guard(nf, nf_fold):
    # a section at the fold height itself meets the separatrix tangentially
    with pytest.raises((TangentialCrossing, NoArrival)):
        fit_tangency_constants(nf.system.x_plus, nf_fold, 0.0)


def test_map_p1_branch(nf, nf_fold, lin):
    # Thm branch p=1: P_eps = x0+ + alpha+ eps + O(eps^2), constant on I
    for eps in (1e-2, 1e-3, 1e-4):
        R = RegularizedSystem(nf.system, lin, eps)
        vals = [map_P_epsilon(R, 0.25, x, fold=nf_fold).x for x in (-0.9, -0.7, -0.5)]
        for v in vals:
            assert v == pytest.approx(0.5 - eps, abs=10 * eps**2)
        assert max(vals) - min(vals) <= 10 * eps**2


def test_map_out_of_domain_flag(nf, nf_fold, lin):
    R = RegularizedSystem(nf.system, lin, 1e-3)
    r = map_P_epsilon(R, 0.25, -0.2, fold=nf_fold)  # orbit dips only to 0.21
    assert r.flags["out_of_domain"]
    assert r.x == pytest.approx(0.2, abs=1e-8)  # the untouched grazing return


def test_decomposition_consistency(nf, nf_fold, poly2):
    # map_P_epsilon equals Pbar o Pmid o P composed numerically
    eps = 1e-3
    R = RegularizedSystem(nf.system, poly2, eps)
    dec = decompose(R, 0.25, nf_fold)
    for x in (-0.9, -0.6):
        direct = map_P_epsilon(R, 0.25, x, fold=nf_fold).x
        composed = dec.Pbar(dec.Pmid(dec.P(x)))
        assert direct == pytest.approx(composed, abs=1e-9)


def test_stage_maps_match_closed_forms(nf, nf_fold, poly2):
    eps = 1e-3
    R = RegularizedSystem(nf.system, poly2, eps)
    dec = decompose(R, 0.25, nf_fold)
    P_exact = nf.facts["P_exact"]
    Pbar_exact = nf.facts["Pbar_exact"]
    for x in (-0.9, -0.7, -0.6):
        assert dec.P(x) == pytest.approx(P_exact(x, eps, 0.25), abs=1e-9)
    for w in (0.05, 0.1, 0.3):
        assert dec.Pbar(w) == pytest.approx(Pbar_exact(w, eps, 0.25), abs=1e-9)


def test_ordering_against_pure_map(nf, nf_fold, poly2):
    # Prop comparison: P_eps(x) < P+(x) strictly on [x0-, xbar_eps]
    eps = 1e-3
    R = RegularizedSystem(nf.system, poly2, eps)
    xbar = -math.sqrt(0.25 - eps)
    for x in np.linspace(-0.4999, xbar + 1e-6, 5):
        r = map_P_epsilon(R, 0.25, x, fold=nf_fold)
        if r.flags.get("out_of_domain"):
            continue
        assert r.x < -x  # P+(x) = -x for the normal form


def test_prefactor_ties_to_inner(nf, nf_fold, poly2):
    # (P_eps - x0+ - alpha+ eps)/eps^{4/3} -> beta+ eta0(0)^2
    from slidekick.inner import distinguished_solution

    eps = 1e-6
    R = RegularizedSystem(nf.system, poly2, eps)
    r = map_P_epsilon(R, 0.25, -0.8, fold=nf_fold)
    lhs = (r.x - (0.5 - eps)) / eps ** (4.0 / 3.0)
    eta0 = distinguished_solution(2, poly2.c_p).eta_at_0
    assert lhs == pytest.approx(1.0 * eta0**2, rel=0.1)


def test_landing_scan_exponents_p2(nf, nf_fold, poly2, constants):
    eps_list = [1e-6, 3e-6, 1e-5, 3e-5, 1e-4]
    # exact constants keep the eps^{4/3} signal clean at the smallest eps
    from slidekick.poincare import TangencyConstants

    exact = TangencyConstants(
        y0=0.25, fold_x=0.0, x0_plus=0.5, x0_minus=-0.5,
        alpha_plus=-1.0, alpha_minus=1.0, beta_plus=1.0, beta_minus=-1.0,
    )
    scan = landing_scan(nf.system, poly2, eps_list, 0.25, -0.8, constants=exact)
    assert scan.exit_fit.slope == pytest.approx(2.0 / 3.0, abs=0.02)
    assert scan.exit_fit.r_squared >= 0.999
    assert scan.deviation_fit.slope == pytest.approx(4.0 / 3.0, abs=0.03)


def test_fit_power_law_rejects_noise():
    eps = np.array([1e-6, 1e-5, 1e-4, 1e-3])
    vals = np.array([3.0, 0.01, 0.5, 0.002])
    with pytest.raises(FitRejected):
        fit_power_law(eps, vals)


def test_fit_power_law_drops_contaminated_largest():
    eps = np.array([1e-6, 3e-6, 1e-5, 3e-5, 1e-4])
    vals = eps**0.75
    vals[-1] *= 1.8  # pre-asymptotic contamination at the largest eps
    fit = fit_power_law(eps, vals)
    assert fit.dropped_largest
    assert fit.slope == pytest.approx(0.75, abs=1e-6)


def test_exterior_map_centre_identity():
    # Coulomb centre: P^e o P+ is the identity on its domain
    desc = model("coulomb")
    y0 = 0.25
    up = Section(y0, "all", id="up")
    fs = desc.params["F_s"]
    for x in (0.2, 0.35, 0.5):
        # P+: left crossing to right crossing through the circle bottom
        r1 = exterior_map(desc.system.x_plus, up, up, x)
        r2 = exterior_map(desc.system.x_plus, up, up, r1.x)
        assert r2.x == pytest.approx(x, abs=1e-8)


def test_exterior_slope_centre():
    desc = model("coulomb")
    y0 = 0.25
    up = Section(y0, "all", id="up")
    c = exterior_slope(desc.system.x_plus, up, up, 0.3)
    assert c == pytest.approx(-1.0, abs=1e-4)  # circles: P^e(z) = 2 F_s - z


def test_exterior_map_no_arrival():
    # the normal-form X+ has no recurrence: the orbit escapes upward
    nf = model("normal-fold")
    with pytest.raises(NoArrival):
        exterior_map(
            nf.system.x_plus,
            Section(0.25, "x>0", id="a"),
            Section(0.25, "x<0", id="b"),
            0.5,
            floor_margin=1e-4,
            t_max=30.0,
        )
