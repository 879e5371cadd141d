import numpy as np
import pytest

from slidekick.bifurcation import (
    centre_semistability,
    find_fixed_points_scan,
    find_periodic_orbit,
    grazing_sliding_scan,
    homoclinic_scan,
    iterate_to_fixed_point,
    IterationDiverged,
    saddle_passage_times,
    stribeck_attractor,
)
from slidekick.models import model, saddle_eigen
from slidekick.regularization import phi_linear, phi_polynomial


def test_iterate_contraction():
    assert iterate_to_fixed_point(lambda x: 0.5 * x + 1.0, 0.0) == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(IterationDiverged):
        iterate_to_fixed_point(lambda x: 2.0 * x + 1.0, 0.5)


def test_scan_finds_both_roots():
    fps = find_fixed_points_scan(lambda x: x * x, -0.5, 1.5)
    xs = sorted(f.x for f in fps)
    assert xs[0] == pytest.approx(0.0, abs=1e-10)
    assert xs[1] == pytest.approx(1.0, abs=1e-10)
    stabs = {round(f.x, 6): f.stability for f in fps}
    assert stabs[0.0] == "attracting"
    assert stabs[1.0] == "repelling"


def test_grazing_gamma_branches(lin):
    # return-map trichotomy on the synthetic germ: gamma < 0 orbit, gamma > 0 none
    desc = model("grazing-family", variant="attracting")
    eps = 1e-3
    neg = find_periodic_orbit(desc, lin, eps, -2e-3)  # gamma = mu = -2e-3 < 0
    assert any(f.stability == "attracting" for f in neg.fixed_points)
    assert neg.gamma < 0
    # gamma = 0 with Delta > 0: orbit approaching the grazing orbit
    zero = find_periodic_orbit(desc, lin, eps, 0.0)
    assert zero.delta > 0
    assert any(f.stability == "attracting" for f in zero.fixed_points)
    # strip crossing of the found orbit scales like eps^{p/(2p-1)} (p=1: eps)
    x_star = zero.fixed_points[0].x
    from slidekick.poincare import map_P_epsilon
    from slidekick.regularization import RegularizedSystem

    r = map_P_epsilon(RegularizedSystem(desc.system, lin, eps), 0.25, x_star, fold=0.0)
    assert abs(r.flags["x_exit"]) < 10 * eps


def test_grazing_gamma_positive_no_flattened_orbit(lin):
    desc = model("grazing-family", variant="attracting")
    eps = 1e-3
    delta = desc.facts["delta"]
    st = find_periodic_orbit(desc, lin, eps, 3.0 * delta * eps)  # gamma > Delta eps
    # only the untouched X+ cycle remains, right of the tangent orbit
    assert all(f.x > -np.sqrt(0.25 - eps) - 1e-12 for f in st.fixed_points)


def test_grazing_attracting_branch_spans(lin):
    desc = model("grazing-family", variant="attracting")
    eps = 1e-3
    delta = desc.facts["delta"]
    grid = np.linspace(-delta * eps, 2 * delta * eps, 13)
    diag = grazing_sliding_scan(desc, lin, eps, grid)
    assert diag.present().all()
    # branch continuity: adjacent fixed points stay close
    xs = [min(f.x for f in p.fixed_points) for p in diag.points]
    dmu = grid[1] - grid[0]
    assert max(abs(np.diff(xs))) <= 10 * dmu


def test_grazing_repelling_saddle_node(lin):
    desc = model("grazing-family", variant="repelling")
    eps = 1e-3
    delta = abs(desc.facts["delta"])
    grid = np.linspace(-1.5 * delta * eps, 1.5 * delta * eps, 13)
    diag = grazing_sliding_scan(desc, lin, eps, grid)
    present = diag.present()
    assert not present[0]          # lost below the collision
    assert present[-1]             # pair exists above it
    assert diag.collision_mu is not None
    assert diag.collision_mu > 0.0
    # where present, the stable and unstable branches coexist
    top = diag.points[-1].fixed_points
    stabs = sorted(f.stability for f in top)
    assert stabs == ["attracting", "repelling"]


def test_remark_delta_identity(lin):
    # c alpha+ = (pi+)'(x0-) alpha-  on the synthetic germ (exact by build)
    desc = model("grazing-family", variant="attracting")
    c = desc.facts["c"]
    y0 = desc.facts["y0"]
    alpha_p = desc.facts["alpha"](y0)
    alpha_m = -alpha_p
    # pi+ = P^e o P+ with P+(x) = -x: slope is -c
    pi_slope = -c
    assert c * alpha_p == pytest.approx(pi_slope * alpha_m, rel=1e-12)
    delta = desc.facts["delta"]
    assert delta == pytest.approx(alpha_m * (1.0 - pi_slope), rel=1e-12)


def test_centre_semistability_coulomb(poly2):
    desc = model("coulomb")
    rep = centre_semistability(desc, poly2, 1e-3, y0=0.25, max_iter=900)
    assert rep.tangent_residual <= 1e-9
    assert rep.exterior_monotone
    assert all(g <= 1e-6 for g in rep.exterior_final_gaps)
    assert all(r <= 1e-8 for r in rep.interior_residuals)


def test_stribeck_attractor_smoke(poly2):
    desc = model("stribeck")
    res = stribeck_attractor(desc, poly2, 1e-2, y0=0.25)
    assert res.stability == "attracting"
    assert res.n_fixed_points == 1
    assert res.gamma < 0.0
    assert res.hausdorff_upper <= 5 * 1e-2


def test_homoclinic_probes_and_bisection(lin):
    eps = 1e-3
    make = lambda mu_raw: model("saddle-homoclinic", mu=mu_raw, nu=0.15, check=False)
    scan = homoclinic_scan(make, lin, eps, [0.0], y0=0.25, bisect=True)
    ap = scan.alpha_plus
    assert scan.probes[0].exists
    assert scan.mu_tilde_star is not None
    assert abs(scan.mu_tilde_star + ap) <= 0.2


def test_homoclinic_hamiltonian_variant(lin):
    # nu = 0: the found orbit is the tangent orbit of the Hamiltonian field
    eps = 1e-3
    make = lambda mu_raw: model("saddle-homoclinic", mu=mu_raw, nu=0.0, check=False)
    scan = homoclinic_scan(make, lin, eps, [0.0, 1.0], y0=0.25, bisect=False)
    assert scan.probes[0].exists
    assert scan.probes[1].exists


def test_saddle_passage_time_slope():
    desc = model("saddle-homoclinic", nu=0.15)
    w, _ = saddle_eigen(desc)
    lam1 = w[0]
    ds = np.array([1e-3, 3e-4, 1e-4, 3e-5, 1e-5])
    times = saddle_passage_times(desc, ds)
    A = np.vstack([np.log(1.0 / ds), np.ones_like(ds)]).T
    slope = np.linalg.lstsq(A, times, rcond=None)[0][0]
    assert slope == pytest.approx(1.0 / lam1, rel=0.1)


def test_contraction_certificate(lin):
    # along an accepted fixed-point iteration, successive increments shrink
    # by at least a factor 2 after the second step
    desc = model("grazing-family", variant="attracting")
    eps = 1e-3
    from slidekick.poincare import map_P_epsilon
    from slidekick.regularization import RegularizedSystem

    pe = desc.facts["exterior_factory"](-2e-3)
    R_eps = RegularizedSystem(desc.system, lin, eps)

    def R(x):
        return pe(map_P_epsilon(R_eps, 0.25, x, fold=0.0).x)

    x = -0.7
    increments = []
    for _ in range(6):
        x_new = R(x)
        increments.append(abs(x_new - x))
        x = x_new
        if increments[-1] < 1e-13:
            break
    for a, b in zip(increments[2:], increments[1:]):
        assert a <= 0.5 * b + 1e-14


def test_return_map_identity_on_coulomb(poly2):
    # c alpha+ = (pi+)'(x0-) alpha- measured on a model with a real exterior
    from slidekick.integrator import Section
    from slidekick.poincare import exterior_slope, fit_tangency_constants

    desc = model("coulomb")
    fold = desc.fold()
    y0 = 0.25
    tc = fit_tangency_constants(desc.system.x_plus, fold, y0)
    up = Section(y0, "all", id="up")
    # c at the unstable-separatrix crossing; pi+' by chaining the two maps
    c = exterior_slope(desc.system.x_plus, up, up, tc.x0_plus)
    dx = 1e-6
    from slidekick.poincare import exterior_map, _landing

    def pi_plus(x):
        mid = _landing(desc.system.x_plus, (x, y0), y0, backward=False)
        return exterior_map(desc.system.x_plus, up, up, mid).x

    slope = (pi_plus(tc.x0_minus + dx) - pi_plus(tc.x0_minus - dx)) / (2 * dx)
    assert c * tc.alpha_plus == pytest.approx(slope * tc.alpha_minus, rel=0.05)
    # the centre makes pi+ the identity, hence Delta = 0 within tolerance
    assert slope == pytest.approx(1.0, abs=1e-3)


def test_lipschitz_gate_p2(poly2):
    # over 20 probes the regularized map's spread obeys the calibrated
    # eps^{min((3p-1)/(2p-1), p(p+1)/(2p-1)^2)} gate
    from slidekick.poincare import map_P_epsilon
    from slidekick.regularization import RegularizedSystem

    desc = model("normal-fold")
    eps = 1e-3
    R_eps = RegularizedSystem(desc.system, poly2, eps)
    xs = np.linspace(-0.95, -0.55, 20)
    vals = [map_P_epsilon(R_eps, 0.25, x, fold=0.0).x for x in xs]
    spread = max(vals) - min(vals)
    p = 2
    gate = min((3 * p - 1) / (2 * p - 1), p * (p + 1) / (2 * p - 1) ** 2)
    assert spread <= 10.0 * eps**gate
