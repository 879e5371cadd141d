import math

import numpy as np
import pytest

from slidekick.regularization import RegularizedSystem, phi_linear, phi_polynomial
from slidekick.slow_manifold import (
    HyperbolicityLost,
    contraction_probe,
    expansion_terms,
    invariance_residual,
    strip_crossing,
    trace_manifold,
    verify_sandwich,
)


def test_linear_expansion_closed_forms(lin):
    exp = expansion_terms(lin)
    assert exp.m0(-0.5) == pytest.approx(0.0, abs=1e-12)
    assert exp.m1(-0.5) == pytest.approx(-8.0 / 16.0, abs=1e-12)
    for x in np.linspace(-0.9, -0.05, 9):
        assert exp.m0(x) == pytest.approx((1 + 2 * x) / (1 - 2 * x), abs=1e-12)
        assert exp.m1(x) == pytest.approx(-8.0 / (1 - 2 * x) ** 4, abs=1e-10)
    # n-side closed forms: n0 = (v-1)/(2(v+1)), n1 = (v+1)^2/2, n2 = -(v+1)^5/2
    for v in np.linspace(-0.8, 1.0, 10):
        assert exp.n0(v) == pytest.approx((v - 1) / (2 * (v + 1)), abs=1e-12)
        assert exp.n1(v) == pytest.approx((v + 1) ** 2 / 2, abs=1e-12)
        assert exp.n2(v) == pytest.approx(-((v + 1) ** 5) / 2, abs=1e-10)


@pytest.mark.parametrize("p", [2, 3])
def test_inverse_pair(p):
    exp = expansion_terms(phi_polynomial(p))
    for x in np.linspace(-0.9, -1e-3, 50):
        assert exp.n0(exp.m0(x)) == pytest.approx(x, abs=1e-10)


def test_n0_tail_coefficient(poly2, poly3):
    # n0(v) ~ phi^(p)(1)/(4 p!) (v-1)^p as v -> 1
    for prof in (poly2, poly3):
        exp = expansion_terms(prof)
        p = prof.p
        lead = prof.phi_p_at_1 / (4 * math.factorial(p))
        for dv in (1e-2, 1e-3):
            ratio = exp.n0(1.0 - dv) / ((-dv) ** p)
            assert ratio == pytest.approx(lead, rel=0.05)


def test_n1_positive(poly2, poly3, lin):
    for prof in (lin, poly2, poly3):
        exp = expansion_terms(prof)
        for v in np.linspace(-0.95, 0.999, 200):
            assert exp.n1(v) > 0.0


def test_invariance_residual_order_eps_squared(poly2):
    # residual of n0 + eps*n1 is O(eps^2) uniformly on v <= 0.8
    sup = {}
    for eps in (1e-3, 1e-4, 1e-5):
        vs = np.linspace(-0.9, 0.8, 300)
        sup[eps] = max(abs(invariance_residual(poly2, eps, v)) for v in vs)
    ratios = [sup[e] / e**2 for e in sup]
    assert max(ratios) / min(ratios) < 2.0


def test_trace_linear_exit(normal_form, lin):
    # paper gives x1 = 2 eps + O(eps^2); the series pins the constant at -16
    for eps in (1e-3, 1e-4):
        R = RegularizedSystem(normal_form, lin, eps)
        tr = trace_manifold(R, -1.0, 1.0)
        assert tr.exit_x == pytest.approx(2 * eps, abs=25 * eps**2)
        assert tr.exit_x == pytest.approx(2 * eps - 16 * eps**2, abs=500 * eps**3)


def test_trace_agrees_with_orbit_crossing(normal_form, poly2):
    # the trace and an attracted orbit exit the strip at the same abscissa
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    x_exit, _t, _d = strip_crossing(R, -0.5, x_limit=0.4)
    assert tr.exit_x == pytest.approx(x_exit, abs=1e-7)


def test_trace_outer_block_membership(normal_form, poly2):
    # p=2 block: n0(v) < x(v) < n0(v) + M eps/(1-v) until v = 1 - eps^0.2
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    rep = verify_sandwich(R, tr, "outer_block_p", M=50.0, delta=0.2, lambda1=0.2)
    assert rep.count > 50
    assert rep.fraction_ok == 1.0


def test_trace_exit_matches_inner_constant(normal_form, poly2):
    # cross-module consistency: exit ~ eps^{2/3} eta0(0) within 20% at 1e-6
    from slidekick.inner import distinguished_solution

    eps = 1e-6
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    eta0 = distinguished_solution(2, poly2.c_p).eta_at_0
    assert tr.exit_x == pytest.approx(eps ** (2 / 3) * eta0, rel=0.2)


def test_hyperbolicity_guard(normal_form, poly2):
    R = RegularizedSystem(normal_form, poly2, 1e-3)
    with pytest.raises(HyperbolicityLost):
        trace_manifold(R, 0.2, 1.0)  # wrong side of the fold


def test_linear_confinement_sandwich(normal_form, lin):
    # extended linear system on [-1, 1/4]: the confinement constant must
    # dominate |m1|, which grows to 8/(1-2x)^4 = 128 at x = 1/4 (so K = 10
    # only covers the sliding side x <= 0; K = 150 covers the full range)
    eps = 1e-3
    R = RegularizedSystem(normal_form, lin, eps)
    tr = trace_manifold(R, -1.0, to_x=0.25, extend_linear=True)
    rep = verify_sandwich(R, tr, "linear_conf", K=150.0, x_range=(-1.0, 0.25))
    assert rep.fraction_ok == 1.0
    assert rep.count > 500
    rep10 = verify_sandwich(R, tr, "linear_conf", K=10.0, x_range=(-1.0, 0.0))
    assert rep10.fraction_ok == 1.0


def test_graph_over_x_sandwich(normal_form, poly2):
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    rep = verify_sandwich(R, tr, "graph_over_x_p", K=10.0, lam=0.45)
    assert rep.fraction_ok == 1.0


def test_sandwich_empty_range_vacuous(normal_form, poly2):
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    rep = verify_sandwich(R, tr, "linear_conf", x_range=(5.0, 6.0))
    assert rep.count == 0
    assert rep.fraction_ok == 1.0


def test_contraction_linear_bound(normal_form, lin):
    # |v1 - v2|(x) <= |v1 - v2|(x0) exp(-(x - x0)/(2 eps)) down to arithmetic
    eps = 1e-3
    R = RegularizedSystem(normal_form, lin, eps)
    rep = contraction_probe(R, [-0.1, -0.05], milestones=np.array([-0.05, -0.02, 0.0]))
    sep = rep.separations[(0, 1)]
    assert sep[0] > 0  # genuinely different orbits at the common start
    bound = sep[0] * np.exp(-(0.0 - (-0.05)) / (2 * eps))
    assert sep[2] <= max(bound, 1e-10)


def test_contraction_identical_starts(normal_form, lin):
    R = RegularizedSystem(normal_form, lin, 1e-3)
    rep = contraction_probe(R, [-0.1, -0.1])
    assert np.nanmax(rep.separations[(0, 1)]) < 1e-12


def test_landing_independence(normal_form, poly2):
    # spread of strip exits over deep probes obeys the Lipschitz gate
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    rep = contraction_probe(R, [-0.3, -0.2, -0.1])
    spread = max(rep.exit_points) - min(rep.exit_points)
    p = 2
    assert spread <= 100 * eps ** ((3 * p - 1) / (2 * p - 1))
    assert spread <= 1e-8


def test_monotone_exit(normal_form, poly2):
    # v strictly increases along the trace inside the outer block
    eps = 1e-4
    R = RegularizedSystem(normal_form, poly2, eps)
    tr = trace_manifold(R, -1.0, 1.0)
    vs = tr.v[tr.v > 0.8]
    assert np.all(np.diff(vs) > -1e-12)


def test_trace_csv_export(tmp_path, normal_form, poly2):
    R = RegularizedSystem(normal_form, poly2, 1e-3)
    tr = trace_manifold(R, -1.0, 1.0)
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    head = path.read_text().splitlines()[0]
    assert head == "x,v,margin_lower,margin_upper"
