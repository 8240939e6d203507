"""Certified polynomial-disc searches for metric and two-point bounds."""

import numpy as np
import pytest

from iml.discs import (AnalyticDisc, SearchConfig, certify_disc,
                       kobayashi_royden_upper, lempert_tanh, lempert_upper,
                       linear_lempert_upper)
from iml.geometry import make_model_domain
from iml.oracles import oracle_kappa, oracle_lempert

FAST = SearchConfig(degree=4, restarts=4, max_iters=80, seed=0)


def test_disc_eval_and_derivative():
    d = AnalyticDisc(center=np.array([0.1 + 0j, 0.2j]),
                     coeffs=np.array([[1.0, 0.5j], [0.0, 0.25]], dtype=complex))
    z = d(np.array([0.0, 0.5]))
    assert np.allclose(z[0], d.center)
    assert np.allclose(z[1], d.center + 0.5 * d.coeffs[0] + 0.25 * d.coeffs[1])
    assert np.allclose(d.derivative0(), d.coeffs[0])
    assert d.degree == 2 and d.dimension == 2


def test_certify_disc_inside_and_poking_out():
    dom = make_model_domain("unit-disc")
    inside = AnalyticDisc(center=np.array([0.0j]), coeffs=np.array([[0.5 + 0j]]))
    cert = certify_disc(dom, inside, FAST)
    assert cert.passed and cert.min_margin > 0.4
    assert cert.boundary_samples == FAST.boundary_samples
    outside = AnalyticDisc(center=np.array([0.8 + 0j]), coeffs=np.array([[0.5 + 0j]]))
    assert not certify_disc(dom, outside, FAST).passed


def test_metric_bound_hugs_the_disc_oracle():
    dom = make_model_domain("unit-disc")
    for z, X in [([0.0], [1.0]), ([0.4], [1.0]), ([0.2 - 0.3j], [0.5 + 1.0j])]:
        est = kobayashi_royden_upper(dom, z, X, FAST)
        want = oracle_kappa(dom, z, X).value
        assert est.kind == "upper-bound"
        assert est.value >= want - 1e-9          # certified side
        assert est.value <= want * 1.03          # sharp side
        assert est.cert is not None and est.cert.passed


def test_metric_bound_zero_direction_is_exact():
    dom = make_model_domain("unit-disc")
    est = kobayashi_royden_upper(dom, [0.3], [0.0], FAST)
    assert est.value == 0.0


def test_metric_dyadic_direction_scaling_is_exact():
    dom = make_model_domain({"kind": "polydisc", "radii": [1.0, 2.0]})
    z = [0.1, 0.2j]
    X = np.array([0.7, -0.4 + 0.2j])
    a = kobayashi_royden_upper(dom, z, X, FAST).value
    b = kobayashi_royden_upper(dom, z, 4.0 * X, FAST).value
    assert b == 4.0 * a
    c = kobayashi_royden_upper(dom, z, 1j * X, FAST).value
    assert c == pytest.approx(a, rel=1e-12)


def test_metric_bound_monotone_in_restarts():
    dom = make_model_domain({"kind": "balanced", "h": "max-geo"})
    z, X = [0.1, 0.05j], [1.0, 0.8]
    vals = [kobayashi_royden_upper(dom, z, X,
                                   SearchConfig(degree=2, restarts=r, max_iters=60,
                                                seed=1)).value
            for r in (2, 4, 8)]
    assert vals[1] <= vals[0] + 1e-15
    assert vals[2] <= vals[1] + 1e-15


def test_metric_bound_monotone_in_degree():
    dom = make_model_domain({"kind": "balanced", "h": "max-geo"})
    z, X = [0.1, 0.05j], [1.0, 0.8]
    vals = [kobayashi_royden_upper(dom, z, X,
                                   SearchConfig(degree=d, restarts=4, max_iters=60,
                                                seed=1)).value
            for d in (1, 2, 4)]
    assert vals[1] <= vals[0] + 1e-15
    assert vals[2] <= vals[1] + 1e-15


def test_domain_inclusion_transfers_witness():
    # the ball sits inside the bidisc, so a certified ball disc recertifies
    # there and the bidisc metric bound can only be smaller
    ball = make_model_domain({"kind": "ball", "radius": 1.0, "dimension": 2})
    bidisc = make_model_domain({"kind": "polydisc", "radii": [1.0, 1.0]})
    z, X = [0.2, 0.1j], [1.0, 0.5]
    a = kobayashi_royden_upper(ball, z, X, FAST)
    cert = certify_disc(bidisc, a.witness, FAST)
    assert cert.passed
    b = kobayashi_royden_upper(bidisc, z, X, FAST)
    assert b.value <= a.value + 1e-9


def test_lempert_bound_on_disc_is_moebius():
    dom = make_model_domain("unit-disc")
    for a, b in [(0.0, 0.5), (0.3 + 0.1j, -0.4j)]:
        est = lempert_upper(dom, [a], [b], FAST)
        want = oracle_lempert(dom, [a], [b]).value
        assert want - 1e-9 <= est.value <= want * 1.02 + 1e-9


def test_lempert_equal_points_is_zero():
    dom = make_model_domain("unit-disc")
    assert lempert_upper(dom, [0.3], [0.3], FAST).value == 0.0


def test_lempert_bound_symmetric_enough():
    dom = make_model_domain({"kind": "balanced", "h": "max"})
    a, b = [0.1, 0.2], [-0.3j, 0.4]
    v1 = lempert_upper(dom, a, b, FAST).value
    v2 = lempert_upper(dom, b, a, FAST).value
    assert v1 == pytest.approx(v2, rel=0.05)  # search noise only; k~* is symmetric here


def test_linear_lempert_on_huge_slice_is_tiny():
    # on the horizontal plane of the degenerate domain the density vanishes,
    # so the linear disc reaches the radius cap
    dom = make_model_domain({"kind": "example3", "K": 50, "J": 10})
    a = np.array([0.0, 0.0], dtype=complex)
    b = np.array([2.0, 0.0], dtype=complex)
    est = linear_lempert_upper(dom, a, b, FAST)
    assert est.value < 1e-8


def test_lempert_tanh_values():
    assert lempert_tanh(0.5) == pytest.approx(0.5493061443, abs=1e-4)
    assert lempert_tanh(0.9) == pytest.approx(1.4722194896, abs=1e-4)
    assert lempert_tanh(0.0) == 0.0
    with pytest.raises(ValueError):
        lempert_tanh(1.0)
    with pytest.raises(ValueError):
        lempert_tanh(-0.1)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(degree=0)
    with pytest.raises(ValueError):
        SearchConfig(rho=1.5)
    with pytest.raises(ValueError):
        SearchConfig(boundary_samples=3)
    with pytest.raises(ValueError):
        SearchConfig(margin_eps=-1.0)


def test_base_point_outside_raises():
    dom = make_model_domain("unit-disc")
    with pytest.raises(ValueError):
        kobayashi_royden_upper(dom, [1.5], [1.0], FAST)
    with pytest.raises(ValueError):
        lempert_upper(dom, [0.0], [1.5], FAST)
