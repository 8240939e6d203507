"""Difference-quotient traces and the inequality/identity checkers."""

import numpy as np
import pytest

from iml.derivatives import (ShrinkSchedule, derivative_estimate, kmap_for,
                             make_balanced_kmap, prop2_check, theorem1_check,
                             underline_kappa, _oracle_kmap)
from iml.geometry import gauge, make_model_domain
from iml.oracles import oracle_kappa

SCHED = ShrinkSchedule()


def test_schedule_radii_and_validation():
    s = ShrinkSchedule(rho0=0.2, levels=4, factor=0.5)
    assert np.allclose(s.radii(), [0.2, 0.1, 0.05, 0.025])
    with pytest.raises(ValueError):
        ShrinkSchedule(rho0=0.0)
    with pytest.raises(ValueError):
        ShrinkSchedule(factor=1.0)
    with pytest.raises(ValueError):
        ShrinkSchedule(levels=1)
    with pytest.raises(ValueError):
        ShrinkSchedule(samples_per_level=4)


def test_trace_brackets_the_disc_metric():
    dom = make_model_domain("unit-disc")
    z, X = [0.3], [1.0]
    tr = derivative_estimate(_oracle_kmap(dom), z, X, SCHED, dom=dom)
    kap = oracle_kappa(dom, z, X).value
    assert tr.lower_limit <= kap <= tr.upper_limit
    assert tr.upper_limit == pytest.approx(kap, rel=0.01)
    assert tr.lower_limit == pytest.approx(kap, rel=0.01)
    assert len(tr.rows) == SCHED.levels
    # per-level spread shrinks with the radius
    spread = [qx - qn for _, qx, qn, _ in tr.rows]
    assert spread[-1] < spread[0]


def test_trace_zero_direction_is_zero():
    dom = make_model_domain("unit-disc")
    tr = derivative_estimate(_oracle_kmap(dom), [0.2], [0.0], SCHED, dom=dom)
    assert tr.upper_limit == 0.0 and tr.lower_limit == 0.0


def test_trace_scales_with_the_direction():
    # shared draws per level: doubling X doubles the quotients up to the
    # curvature of the evaluator at the sampled step sizes
    dom = make_model_domain("unit-disc")
    t1 = derivative_estimate(_oracle_kmap(dom), [0.2], [1.0], SCHED, dom=dom)
    t2 = derivative_estimate(_oracle_kmap(dom), [0.2], [2.0], SCHED, dom=dom)
    assert t2.upper_limit == pytest.approx(2 * t1.upper_limit, rel=0.01)
    assert t2.lower_limit == pytest.approx(2 * t1.lower_limit, rel=0.01)


def test_chain_surrogate_decreases_with_budget():
    h = gauge("max-geo")
    X = np.array([1.0, 1.0], dtype=complex)
    parts = np.array([[0.8, 0.2], [0.2, 0.8]], dtype=complex)
    k1 = make_balanced_kmap(h, 1)
    k2 = make_balanced_kmap(h, 2, X, parts)
    A = np.zeros((16, 2), dtype=complex)
    g = np.random.default_rng(0)
    B = 0.02 * (g.standard_normal((16, 2)) + 1j * g.standard_normal((16, 2)))
    v1, v2 = k1(A, B), k2(A, B)
    assert np.all(v2 <= v1 + 1e-12)
    assert np.all(v1 >= 0.0) and np.all(np.isfinite(v1))


def test_underline_matches_the_lower_quotient():
    for desc, z, X in [("unit-disc", [0.3], [1.0]),
                       ({"kind": "ball", "radius": 1.0, "dimension": 2},
                        [0.2, 0.1j], [1.0, 0.5])]:
        dom = make_model_domain(desc)
        uk = underline_kappa(dom, z, X, SCHED)
        tr = derivative_estimate(_oracle_kmap(dom), z, X, SCHED, dom=dom)
        assert uk == pytest.approx(tr.lower_limit, rel=0.03)
        assert uk > 0.0


def test_decomposition_bound_row_on_the_polydisc():
    dom = make_model_domain({"kind": "polydisc", "radii": [1.0, 2.0]})
    row = prop2_check(dom, [0.1, 0.2j], [1.0, 0.5], m=2)
    assert row["passed"]
    assert row["lhs_kappa_m"] >= row["rhs_upper_quotient"] - row["tol"]


def test_decomposition_bound_row_on_a_balanced_domain():
    dom = make_model_domain({"kind": "balanced", "h": "max-geo"})
    row = prop2_check(dom, [0.0, 0.0], [1.0, 1.0], m=2)
    assert row["passed"]
    assert row["lhs_kappa_m"] == pytest.approx(1.6, abs=1e-3)


def test_balanced_quotients_need_the_origin():
    dom = make_model_domain({"kind": "balanced", "h": "max"})
    with pytest.raises(ValueError):
        kmap_for(dom, 2, [0.1, 0.0], [1.0, 1.0])


def test_identity_rows_on_the_oracle_domains():
    for desc, z, X in [("unit-disc", [0.3 + 0.2j], [1.0]),
                       ({"kind": "polydisc", "radii": [1.0, 2.0]},
                        [0.2, 0.5j], [1.0, 1.0]),
                       ({"kind": "ball", "radius": 1.5, "dimension": 2},
                        [0.4, 0.3j], [0.5, 1.0])]:
        dom = make_model_domain(desc)
        row = theorem1_check(dom, z, X, m=1)
        assert row["passed"], row
        assert abs(row["upper_limit"] - row["kappa_m"]) <= 0.03 * row["kappa_m"]
        assert abs(row["lower_limit"] - row["kappa_m"]) <= 0.03 * row["kappa_m"]


def test_identity_checker_rejects_surrogate_domains():
    dom = make_model_domain({"kind": "balanced", "h": "max"})
    with pytest.raises(ValueError):
        theorem1_check(dom, [0.0, 0.0], [1.0, 0.5], m=1)
