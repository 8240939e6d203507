"""Closed-form metric and Lempert values on the model domains.

These are the two-sided ground truths the variational searches are
tested against: Poincare metric and Mobius distance on the disc, the
componentwise max rule on polydiscs, the automorphism-invariant forms on
the Euclidean ball, and the gauge itself for balanced domains at the
origin (valid there because every registered gauge has plurisubharmonic
log, so the balanced domain is pseudoconvex).

The public entry points return MetricEstimate records; the _value
functions are vectorized over leading axes and are what the quotient
samplers call in bulk.  Polydisc and disc values hold at every interior
point; ball values use the standard automorphism formulas at any point,
which extends the stated origin values and is exercised by the
infinitesimal consistency checks; balanced-domain values are origin-only.
"""

from __future__ import annotations

import numpy as np

from .discs import MetricEstimate
from .geometry import DomainModel, MinkowskiFunctional, as_point, as_vector, gauge


def _descriptor(dom) -> dict:
    if isinstance(dom, DomainModel):
        return dom.descriptor
    if isinstance(dom, str):
        return {"kind": dom}
    return dict(dom)


def _gauge_of(desc) -> MinkowskiFunctional:
    h = desc.get("_h", desc.get("h"))
    if isinstance(h, MinkowskiFunctional):
        return h
    return gauge(str(h), c=float(desc.get("c", 2.0)))


def kappa_disc_value(z, X):
    """|X| / (1 - |z|^2), batched over leading axes."""
    z = np.asarray(z, dtype=complex)[..., 0]
    X = np.asarray(X, dtype=complex)[..., 0]
    return np.abs(X) / (1.0 - np.abs(z) ** 2)


def lempert_disc_value(a, b):
    """Mobius pseudodistance |(a - b) / (1 - conj(a) b)|."""
    a = np.asarray(a, dtype=complex)[..., 0]
    b = np.asarray(b, dtype=complex)[..., 0]
    return np.abs((a - b) / (1.0 - np.conj(a) * b))


def kappa_polydisc_value(radii, z, X):
    """max_i r_i |X_i| / (r_i^2 - |z_i|^2): the product (max) rule."""
    radii = np.asarray(radii, dtype=float)
    z = np.asarray(z, dtype=complex)
    X = np.asarray(X, dtype=complex)
    return (radii * np.abs(X) / (radii ** 2 - np.abs(z) ** 2)).max(axis=-1)


def lempert_polydisc_value(radii, a, b):
    radii = np.asarray(radii, dtype=float)
    a = np.asarray(a, dtype=complex) / radii
    b = np.asarray(b, dtype=complex) / radii
    return np.abs((a - b) / (1.0 - np.conj(a) * b)).max(axis=-1)


def kappa_ball_value(radius, z, X):
    """Bergman-scale-free Kobayashi metric of the ball of given radius.

    kappa^2 = ((1 - |z|^2) |X|^2 + |<X, z>|^2) / (1 - |z|^2)^2 with both
    z and X measured in units of the radius; reduces to |X| at z = 0.
    """
    z = np.asarray(z, dtype=complex) / radius
    X = np.asarray(X, dtype=complex) / radius
    zz = 1.0 - np.einsum("...i,...i->...", z, np.conj(z)).real
    xx = np.einsum("...i,...i->...", X, np.conj(X)).real
    xz = np.abs(np.einsum("...i,...i->...", X, np.conj(z)))
    return np.sqrt(zz * xx + xz ** 2) / zz


def lempert_ball_value(radius, a, b):
    """k~* of the ball: |phi_a(b)| via the automorphism identity

    1 - |phi_a(b)|^2 = (1 - |a|^2)(1 - |b|^2) / |1 - <b, a>|^2.
    """
    a = np.asarray(a, dtype=complex) / radius
    b = np.asarray(b, dtype=complex) / radius
    aa = 1.0 - np.einsum("...i,...i->...", a, np.conj(a)).real
    bb = 1.0 - np.einsum("...i,...i->...", b, np.conj(b)).real
    ab = np.abs(1.0 - np.einsum("...i,...i->...", b, np.conj(a))) ** 2
    val2 = 1.0 - aa * bb / ab
    return np.sqrt(np.maximum(val2, 0.0))


_AT_ORIGIN_TOL = 0.0  # balanced oracles are exact only at z = 0


def oracle_kappa(dom, z, X) -> MetricEstimate:
    """Exact Kobayashi-Royden value on a model domain.

    Balanced domains are served only at z = 0, where kappa(0; X) = h(X).
    """
    desc = _descriptor(dom)
    kind = desc.get("kind")
    if kind == "unit-disc":
        z = as_point(z, 1)
        X = as_vector(X, 1)
        return MetricEstimate(float(kappa_disc_value(z, X)), "oracle-exact", "oracle:unit-disc")
    if kind == "polydisc":
        radii = np.asarray(desc.get("radii", (1.0, 1.0)), dtype=float)
        z = as_point(z, radii.size)
        X = as_vector(X, radii.size)
        return MetricEstimate(float(kappa_polydisc_value(radii, z, X)), "oracle-exact",
                              "oracle:polydisc")
    if kind == "ball":
        r = float(desc.get("radius", 1.0))
        n = int(desc.get("dimension", 2))
        z = as_point(z, n)
        X = as_vector(X, n)
        return MetricEstimate(float(kappa_ball_value(r, z, X)), "oracle-exact", "oracle:ball")
    if kind == "balanced":
        h = _gauge_of(desc)
        n = int(desc.get("dimension", 2))
        z = as_point(z, n)
        X = as_vector(X, n)
        if np.max(np.abs(z)) > _AT_ORIGIN_TOL:
            raise ValueError("balanced oracle is exact only at the origin")
        return MetricEstimate(float(h(X)), "oracle-exact", f"oracle:balanced({h.name})")
    raise ValueError(f"no kappa oracle for domain kind {kind!r}")


def oracle_lempert(dom, z, w) -> MetricEstimate:
    """Exact Lempert-function (k~*) value on a model domain."""
    desc = _descriptor(dom)
    kind = desc.get("kind")
    if kind == "unit-disc":
        z = as_point(z, 1)
        w = as_point(w, 1)
        return MetricEstimate(float(lempert_disc_value(z, w)), "oracle-exact", "oracle:unit-disc")
    if kind == "polydisc":
        radii = np.asarray(desc.get("radii", (1.0, 1.0)), dtype=float)
        z = as_point(z, radii.size)
        w = as_point(w, radii.size)
        return MetricEstimate(float(lempert_polydisc_value(radii, z, w)), "oracle-exact",
                              "oracle:polydisc")
    if kind == "ball":
        r = float(desc.get("radius", 1.0))
        n = int(desc.get("dimension", 2))
        z = as_point(z, n)
        w = as_point(w, n)
        return MetricEstimate(float(lempert_ball_value(r, z, w)), "oracle-exact", "oracle:ball")
    if kind == "balanced":
        h = _gauge_of(desc)
        n = int(desc.get("dimension", 2))
        z = as_point(z, n)
        w = as_point(w, n)
        if np.max(np.abs(z)) > _AT_ORIGIN_TOL:
            raise ValueError("balanced oracle is exact only at the origin")
        return MetricEstimate(float(h(w)), "oracle-exact", f"oracle:balanced({h.name})")
    raise ValueError(f"no lempert oracle for domain kind {kind!r}")


def kappa_map(dom):
    """Vectorized (Z, X) -> kappa values for an oracle domain, or None."""
    desc = _descriptor(dom)
    kind = desc.get("kind")
    if kind == "unit-disc":
        return kappa_disc_value
    if kind == "polydisc":
        radii = np.asarray(desc.get("radii", (1.0, 1.0)), dtype=float)
        return lambda Z, X: kappa_polydisc_value(radii, Z, X)
    if kind == "ball":
        r = float(desc.get("radius", 1.0))
        return lambda Z, X: kappa_ball_value(r, Z, X)
    return None


def lempert_map(dom):
    """Vectorized (A, B) -> k~* values for an oracle domain, or None."""
    desc = _descriptor(dom)
    kind = desc.get("kind")
    if kind == "unit-disc":
        return lempert_disc_value
    if kind == "polydisc":
        radii = np.asarray(desc.get("radii", (1.0, 1.0)), dtype=float)
        return lambda A, B: lempert_polydisc_value(radii, A, B)
    if kind == "ball":
        r = float(desc.get("radius", 1.0))
        return lambda A, B: lempert_ball_value(r, A, B)
    return None
