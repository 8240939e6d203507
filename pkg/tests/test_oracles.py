"""Closed-form metric and two-point oracles on the model domains."""

import numpy as np
import pytest

from iml.geometry import make_model_domain
from iml.oracles import kappa_map, lempert_map, oracle_kappa, oracle_lempert


def disc(): return make_model_domain("unit-disc")


def poly(): return make_model_domain({"kind": "polydisc", "radii": [1.0, 2.0]})


def ball(r=1.0): return make_model_domain({"kind": "ball", "radius": r, "dimension": 2})


def test_disc_metric_is_scaled_reciprocal_gap():
    est = oracle_kappa(disc(), [0.5], [1.0])
    assert est.kind == "oracle-exact"
    assert est.value == pytest.approx(1.0 / (1 - 0.25))
    assert oracle_kappa(disc(), [0.0], [2.0]).value == pytest.approx(2.0)


def test_disc_two_point_is_moebius():
    a, b = 0.3 + 0.1j, -0.2 + 0.4j
    est = oracle_lempert(disc(), [a], [b])
    assert est.value == pytest.approx(abs((a - b) / (1 - np.conj(a) * b)))
    assert oracle_lempert(disc(), [a], [a]).value == 0.0


def test_polydisc_metric_is_max_rule():
    z = [0.5, 1.0j]
    X = [1.0, 1.0]
    want = max(1.0 / (1 - 0.25), 2.0 / (4 - 1))
    assert oracle_kappa(poly(), z, X).value == pytest.approx(want)


def test_polydisc_two_point_is_max_of_factor_values():
    z, w = [0.0, 0.0], [0.5, 1.0]
    want = max(0.5, abs(1.0 / 2.0))
    assert oracle_lempert(poly(), z, w).value == pytest.approx(want)


def test_ball_metric_formula():
    z = np.array([0.5, 0.0], dtype=complex)
    X = np.array([0.0, 1.0], dtype=complex)
    # orthogonal direction: |X| / sqrt(1 - |z|^2)
    assert oracle_kappa(ball(), z, X).value == pytest.approx(1.0 / np.sqrt(0.75))
    X2 = np.array([1.0, 0.0], dtype=complex)
    # radial direction: |X| / (1 - |z|^2)
    assert oracle_kappa(ball(), z, X2).value == pytest.approx(1.0 / 0.75)


def test_ball_two_point_formula():
    a = np.array([0.5, 0.0], dtype=complex)
    b = np.array([0.0, 0.3], dtype=complex)
    got = oracle_lempert(ball(), a, b).value
    num = (1 - 0.25) * (1 - 0.09)
    den = abs(1 - np.vdot(a, b)) ** 2
    assert got == pytest.approx(np.sqrt(1 - num / den))


def test_ball_radius_rescaling():
    z = np.array([0.6, 0.2j])
    X = np.array([0.3, -1.0])
    v1 = oracle_kappa(ball(1.0), z / 1.5 * 1.5, X).value  # radius 1 reference
    v2 = oracle_kappa(ball(1.5), 1.5 * z, X).value
    assert v2 == pytest.approx(v1 / 1.5)


def test_balanced_gauge_oracle_at_origin_only():
    dom = make_model_domain({"kind": "balanced", "h": "max-geo"})
    est = oracle_kappa(dom, [0.0, 0.0], [1.0, 1.0])
    assert est.value == pytest.approx(2.0)
    with pytest.raises(ValueError):
        oracle_kappa(dom, [0.1, 0.0], [1.0, 1.0])


def test_no_oracle_for_example3():
    dom = make_model_domain({"kind": "example3", "K": 50, "J": 10})
    assert kappa_map(dom) is None
    assert lempert_map(dom) is None
    with pytest.raises(ValueError):
        oracle_kappa(dom, [0.0, 0.5], [1.0, 0.0])


def test_vectorized_maps_match_scalar_oracles():
    for dom in (disc(), poly(), ball(1.5)):
        km, lm = kappa_map(dom), lempert_map(dom)
        g = np.random.default_rng(5)
        n = dom.dimension
        Z = 0.3 * (g.standard_normal((8, n)) + 1j * g.standard_normal((8, n)))
        X = g.standard_normal((8, n)) + 1j * g.standard_normal((8, n))
        W = 0.3 * (g.standard_normal((8, n)) + 1j * g.standard_normal((8, n)))
        kv, lv = km(Z, X), lm(Z, W)
        for i in range(8):
            assert kv[i] == pytest.approx(oracle_kappa(dom, Z[i], X[i]).value)
            assert lv[i] == pytest.approx(oracle_lempert(dom, Z[i], W[i]).value)


def test_two_point_shrinks_to_metric():
    # k*(z, z + tX)/|t| -> kappa(z; X) linearly in |t|
    for dom in (disc(), poly(), ball(1.5)):
        n = dom.dimension
        z = np.full(n, 0.2 + 0.1j)
        X = np.linspace(1.0, 0.5, n) + 0.3j
        kap = oracle_kappa(dom, z, X).value
        err = []
        for t in (1e-2, 1e-3):
            q = oracle_lempert(dom, z, z + t * X).value / t
            err.append(abs(q - kap) / kap)
        assert err[0] < 0.02
        assert err[1] < 0.002


def test_metric_scaling_in_direction():
    for dom in (disc(), poly(), ball(1.5)):
        n = dom.dimension
        z = np.full(n, 0.1 - 0.2j)
        X = np.linspace(0.5, 1.5, n) * (1 + 1j)
        v = oracle_kappa(dom, z, X).value
        assert oracle_kappa(dom, z, 2.0 * X).value == pytest.approx(2 * v)
        assert oracle_kappa(dom, z, 1j * X).value == pytest.approx(v)
