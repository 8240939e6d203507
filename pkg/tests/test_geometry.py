"""Domain models, gauges, and interior sampling."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iml.geometry import (DomainModel, balanced_membership, canonical_direction,
                          gauge, make_model_domain, sample_interior)


def test_gauge_registry_values():
    h = gauge("max")
    assert h(np.array([0.5, -0.25j])) == 0.5
    h = gauge("euclid")
    assert h(np.array([3.0, 4.0j])) == pytest.approx(5.0)
    h = gauge("geo")
    assert h(np.array([4.0, 1.0])) == pytest.approx(2.0)
    h = gauge("max-geo", c=2.0)
    assert h(np.array([1.0, 1.0])) == pytest.approx(2.0)
    assert h(np.array([1.0, 0.0])) == pytest.approx(1.0)


def test_gauge_batch_matches_scalar():
    h = gauge("max-geo")
    pts = np.array([[0.3, 0.4j], [1.0, 2.0], [0.0, 0.0]], dtype=complex)
    batch = h(pts)
    assert batch.shape == (3,)
    for i, p in enumerate(pts):
        assert batch[i] == pytest.approx(float(h(p)))


_coord = st.floats(min_value=-2, max_value=2, allow_subnormal=False).filter(
    lambda x: x == 0.0 or abs(x) > 1e-80)


@given(st.sampled_from(["max", "euclid", "geo", "max-geo"]),
       st.integers(min_value=-6, max_value=6), _coord, _coord, _coord, _coord)
@settings(max_examples=200, deadline=None)
def test_gauge_dyadic_homogeneity_exact(name, p, a, b, c, d):
    # |lam| a power of two scales every modulus exactly in binary floating
    # point.  Tiny coordinates are excluded: squaring them inside the modulus
    # underflows into subnormals, where scaling loses bits.
    h = gauge(name)
    z = np.array([a + 1j * b, c + 1j * d])
    lam = 2.0 ** p
    assert float(h(lam * z)) == lam * float(h(z))


@given(st.floats(min_value=0.0, max_value=2 * np.pi),
       st.floats(min_value=-2, max_value=2), st.floats(min_value=-2, max_value=2),
       st.floats(min_value=-2, max_value=2), st.floats(min_value=-2, max_value=2))
@settings(max_examples=200, deadline=None)
def test_gauge_phase_invariance(theta, a, b, c, d):
    h = gauge("max-geo")
    z = np.array([a + 1j * b, c + 1j * d])
    v0, v1 = float(h(z)), float(h(np.exp(1j * theta) * z))
    assert v1 == pytest.approx(v0, rel=1e-12, abs=1e-12)


def test_canonical_direction_splits_norm():
    s, u = canonical_direction(np.array([3.0, 4.0j]))
    assert s == pytest.approx(5.0)
    assert np.linalg.norm(u) == pytest.approx(1.0)
    # the largest coordinate of the canonical unit vector is real positive
    k = np.argmax(np.abs(u))
    assert abs(u[k].imag) < 1e-15 and u[k].real > 0
    # phase rotation of the input leaves the canonical direction unchanged
    _, u2 = canonical_direction(np.exp(0.7j) * np.array([3.0, 4.0j]))
    assert np.allclose(u, u2, atol=1e-14)
    s0, u0 = canonical_direction(np.zeros(2, complex))
    assert s0 == 0.0 and np.all(u0 == 0)


def test_unit_disc_model():
    dom = make_model_domain("unit-disc")
    assert dom.dimension == 1
    assert dom.membership(np.array([0.5 + 0.2j]))
    assert not dom.membership(np.array([1.0 + 0.0j]))
    assert dom.margin(np.array([[0.25 + 0j], [0.75 + 0j]])) == pytest.approx([0.75, 0.25])


def test_polydisc_model_margins():
    dom = make_model_domain({"kind": "polydisc", "radii": [1.0, 2.0]})
    assert dom.dimension == 2
    m = dom.margin(np.array([0.5, 1.0j]))
    assert m == pytest.approx(0.5)
    assert dom.membership(np.array([0.9, 1.9j]))
    assert not dom.membership(np.array([0.9, 2.1j]))


def test_ball_model_margins():
    dom = make_model_domain({"kind": "ball", "radius": 1.5, "dimension": 2})
    assert dom.margin(np.array([0.9, 1.2j])) == pytest.approx(0.0)
    assert dom.membership(np.array([0.5, 0.5j]))


def test_balanced_model_keeps_live_gauge():
    dom = make_model_domain({"kind": "balanced", "h": "max-geo"})
    assert dom.descriptor["h"] == "max-geo(2)"
    h = dom.descriptor["_h"]
    assert balanced_membership(h, np.array([0.3, 0.3]))
    assert not balanced_membership(h, np.array([0.8, 0.8]))
    assert dom.membership(np.array([0.3, 0.3], dtype=complex))


def test_product_model_is_min_of_factors():
    dom = make_model_domain({"kind": "product",
                             "factors": ["unit-disc", {"kind": "ball", "radius": 2.0,
                                                       "dimension": 2}]})
    assert dom.dimension == 3
    z = np.array([0.5, 1.0, 1.0j])
    assert dom.margin(z) == pytest.approx(0.5)


def test_bad_descriptors_raise():
    with pytest.raises(ValueError):
        make_model_domain("klein-bottle")
    with pytest.raises(ValueError):
        make_model_domain({"kind": "polydisc", "radii": [1.0, -2.0]})
    with pytest.raises(ValueError):
        make_model_domain({"kind": "ball", "radius": 0.0})
    with pytest.raises(ValueError):
        make_model_domain({"kind": "balanced"})
    with pytest.raises(ValueError):
        make_model_domain({"kind": "product", "factors": ["unit-disc"]})


def test_sample_interior_stays_inside_and_is_deterministic():
    dom = make_model_domain({"kind": "polydisc", "radii": [1.0, 2.0]})
    a = sample_interior(dom, 64, np.random.default_rng(3))
    b = sample_interior(dom, 64, np.random.default_rng(3))
    assert np.array_equal(a, b)
    assert a.shape == (64, 2)
    assert dom.membership(a).all()


def test_sample_interior_balanced():
    dom = make_model_domain({"kind": "balanced", "h": "max"})
    pts = sample_interior(dom, 32, np.random.default_rng(0))
    assert dom.membership(pts).all()
