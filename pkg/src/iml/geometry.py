"""Complex points, tangent vectors, gauges, and the model domains.

Everything downstream works with plain complex ndarrays: a point or vector
in C^n is an array of shape (n,), and all evaluators broadcast over a
leading batch axis, i.e. (..., n) -> (...).  Domains are immutable bundles
of a membership predicate and a signed margin (positive inside, negative
outside), so they can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MAX_DIMENSION = 4


def as_point(z, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite complex vector of shape (n,)."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if arr.ndim != 1:
        raise ValueError(f"expected a single point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(float))):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: point has {arr.shape[0]} coords, domain has {dim}")
    return arr


def as_vector(X, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite complex tangent vector of shape (n,).  Zero is fine."""
    return as_point(X, dim)


class MinkowskiFunctional:
    """Absolutely homogeneous gauge h with h(0) = 0.

    The raw gauge is only ever evaluated on canonical unit directions
    (Euclidean norm 1, largest component rotated to the positive real
    axis) and the result is rescaled by the norm, so h(lam*X) = |lam|*h(X)
    holds by construction and not by trusting the raw callable.
    """

    def __init__(self, raw: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        self.raw = raw
        self.name = name

    @staticmethod
    def _canonical(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = np.linalg.norm(X, axis=-1)
        safe = np.where(s == 0.0, 1.0, s)
        U = X / safe[..., None]
        i0 = np.argmax(np.abs(U), axis=-1)
        lead = np.take_along_axis(U, i0[..., None], axis=-1)[..., 0]
        mod = np.abs(lead)
        phase = np.where(mod == 0.0, 1.0 + 0.0j, lead / np.where(mod == 0.0, 1.0, mod))
        return s, U * np.conj(phase)[..., None]

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        scalar = X.ndim == 1
        s, U = self._canonical(X)
        val = np.where(s == 0.0, 0.0, s * np.asarray(self.raw(U), dtype=float))
        return float(val) if scalar else val

    def __repr__(self):
        return f"MinkowskiFunctional({self.name})"


def canonical_direction(X) -> tuple[float, np.ndarray]:
    """Split X into (Euclidean norm, canonical unit direction).

    The direction has norm 1 and its largest component rotated to the
    positive real axis, so X and lam*X map to the same direction for any
    complex lam != 0.  For X = 0 the direction is the zero vector.
    """
    X = np.asarray(X, dtype=complex)
    s, U = MinkowskiFunctional._canonical(X)
    return float(s), U


def _raw_euclid(U):
    return np.linalg.norm(U, axis=-1)


def _raw_max(U):
    return np.abs(U).max(axis=-1)


def _raw_geo(U):
    a = np.abs(U)
    return np.sqrt(a[..., 0] * a[..., 1])


def gauge(name: str, c: float = 2.0) -> MinkowskiFunctional:
    """Named gauges used by the CLI and the test domains.

    euclid   Euclidean norm (unit ball)
    max      max of moduli (unit polydisc)
    max-geo  max(|x|, |y|, c*sqrt(|x||y|)), non-convex for c > 1, n = 2
    geo      sqrt(|x||y|), degenerate (vanishes on the axes), n = 2
    """
    if name == "euclid":
        return MinkowskiFunctional(_raw_euclid, "euclid")
    if name == "max":
        return MinkowskiFunctional(_raw_max, "max")
    if name == "max-geo":
        cc = float(c)

        def raw(U, cc=cc):
            a = np.abs(U)
            return np.maximum(np.maximum(a[..., 0], a[..., 1]), cc * np.sqrt(a[..., 0] * a[..., 1]))

        return MinkowskiFunctional(raw, f"max-geo({cc:g})")
    if name == "geo":
        return MinkowskiFunctional(_raw_geo, "geo")
    raise ValueError(f"unknown gauge name: {name!r}")


@dataclass(frozen=True)
class DomainModel:
    """A domain in C^n: membership test, signed margin, and a descriptor.

    margin is positive inside, negative outside, continuous near the
    boundary; membership(z) <=> margin(z) > 0.  lipschitz_hint is a rough
    scale converting margin units to a safe Euclidean perturbation radius
    (used by sampling and stability checks, nothing rigorous).
    """

    dimension: int
    margin: Callable[[np.ndarray], np.ndarray]
    descriptor: dict = field(default_factory=dict)
    lipschitz_hint: float = 1.0

    def membership(self, z) -> np.ndarray:
        return np.asarray(self.margin(np.asarray(z, dtype=complex))) > 0.0

    def contains(self, z) -> bool:
        return bool(self.membership(as_point(z, self.dimension)))

    @property
    def kind(self) -> str:
        return self.descriptor.get("kind", "?")

    def __repr__(self):
        return f"DomainModel({self.descriptor})"


def balanced_membership(h: MinkowskiFunctional, z) -> bool:
    """z lies in the balanced domain {h < 1}."""
    z = np.asarray(z, dtype=complex)
    return bool(h(z) < 1.0)


def _normalize_descriptor(descriptor) -> dict:
    if isinstance(descriptor, str):
        return {"kind": descriptor}
    if isinstance(descriptor, dict):
        return dict(descriptor)
    raise ValueError(f"bad domain descriptor: {descriptor!r}")


def make_model_domain(descriptor) -> DomainModel:
    """Build one of the model domains from a tagged descriptor.

    Tags: unit-disc | polydisc (radii) | ball (radius) | balanced (h [, c])
    | product (factors) | example3 (K, J).  `h` may be a gauge name or a
    MinkowskiFunctional; `factors` may be descriptors or DomainModels.
    """
    desc = _normalize_descriptor(descriptor)
    kind = desc.get("kind")

    if kind == "unit-disc":
        def margin(z):
            z = np.asarray(z, dtype=complex)
            return 1.0 - np.abs(z[..., 0])

        return DomainModel(1, margin, {"kind": "unit-disc"})

    if kind == "polydisc":
        radii = np.asarray(desc.get("radii", (1.0, 1.0)), dtype=float)
        if radii.ndim != 1 or radii.size < 1:
            raise ValueError("polydisc needs a list of radii")
        if np.any(radii <= 0.0):
            raise ValueError("polydisc radii must be positive")
        n = radii.size
        if n > MAX_DIMENSION:
            raise ValueError(f"dimension {n} exceeds the desk-scale cap {MAX_DIMENSION}")

        def margin(z, radii=radii):
            z = np.asarray(z, dtype=complex)
            return (radii - np.abs(z)).min(axis=-1)

        return DomainModel(n, margin, {"kind": "polydisc", "radii": tuple(map(float, radii))})

    if kind in ("ball", "euclidean-ball"):
        r = float(desc.get("radius", 1.0))
        if r <= 0.0:
            raise ValueError("ball radius must be positive")
        n = int(desc.get("dimension", 2))
        if not 1 <= n <= MAX_DIMENSION:
            raise ValueError(f"ball dimension must be in 1..{MAX_DIMENSION}")

        def margin(z, r=r):
            z = np.asarray(z, dtype=complex)
            return r - np.linalg.norm(z, axis=-1)

        return DomainModel(n, margin, {"kind": "ball", "radius": r, "dimension": n})

    if kind == "balanced":
        h = desc.get("h")
        if h is None:
            raise ValueError("balanced domain needs a gauge h")
        if isinstance(h, str):
            h = gauge(h, c=float(desc.get("c", 2.0)))
        n = int(desc.get("dimension", 2))
        if not 1 <= n <= MAX_DIMENSION:
            raise ValueError(f"balanced dimension must be in 1..{MAX_DIMENSION}")

        def margin(z, h=h):
            z = np.asarray(z, dtype=complex)
            return 1.0 - h(z)

        # gauges built from moduli have O(1) gradients but the geo-mean term
        # steepens near the axes; 3 is a safe conversion scale.  Underscore
        # keys carry live objects and are skipped by report serialization.
        return DomainModel(n, margin,
                           {"kind": "balanced", "h": h.name, "dimension": n, "_h": h},
                           lipschitz_hint=3.0)

    if kind == "product":
        factors = desc.get("factors")
        if not factors or len(factors) < 2:
            raise ValueError("product needs at least two factors")
        doms = [f if isinstance(f, DomainModel) else make_model_domain(f) for f in factors]
        dims = [d.dimension for d in doms]
        n = sum(dims)
        if n > MAX_DIMENSION:
            raise ValueError(f"dimension {n} exceeds the desk-scale cap {MAX_DIMENSION}")
        splits = np.cumsum(dims)[:-1]

        def margin(z, doms=doms, splits=splits):
            z = np.asarray(z, dtype=complex)
            parts = np.split(z, splits, axis=-1)
            vals = [d.margin(p) for d, p in zip(doms, parts)]
            return np.minimum.reduce(vals)

        hint = min(d.lipschitz_hint for d in doms)
        return DomainModel(n, margin, {"kind": "product", "factors": [d.descriptor for d in doms]},
                           lipschitz_hint=hint)

    if kind == "example3":
        from .example3 import build_example3_domain

        return build_example3_domain(K=int(desc.get("K", 200)), J=int(desc.get("J", 60)))

    raise ValueError(f"unknown domain kind: {kind!r}")


def sample_interior(dom: DomainModel, count: int, rng: np.random.Generator,
                    shrink: float = 0.9) -> np.ndarray:
    """Draw `count` interior points, (count, n) complex.

    Uses the natural parameterization of each model family scaled by
    `shrink`; example3 points are drawn from the unit ball it contains.
    Rejection-filters through the actual membership test, so the output is
    certified interior whatever the descriptor said.
    """
    n = dom.dimension
    kind = dom.kind
    out = np.empty((0, n), dtype=complex)
    guard = 0
    while out.shape[0] < count:
        guard += 1
        if guard > 200:
            raise RuntimeError(f"interior sampling stalled for {dom}")
        m = max(count - out.shape[0], count)
        if kind == "polydisc":
            radii = np.asarray(dom.descriptor["radii"])
            r = np.sqrt(rng.uniform(size=(m, n))) * radii * shrink
            th = rng.uniform(0.0, 2 * np.pi, size=(m, n))
            pts = r * np.exp(1j * th)
        elif kind in ("ball", "example3"):
            radius = dom.descriptor.get("radius", 1.0) if kind == "ball" else 1.0
            g = rng.standard_normal((m, 2 * n)).view(complex)
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = rng.uniform(size=(m, 1)) ** (1.0 / (2 * n))
            pts = g * r * radius * shrink
        else:
            # unit-disc, balanced, product: ball sampling then membership filter
            g = rng.standard_normal((m, 2 * n)).view(complex)
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = rng.uniform(size=(m, 1)) ** (1.0 / (2 * n))
            pts = g * r * shrink
        keep = dom.membership(pts) & (dom.margin(pts) > (1.0 - shrink) * 0.05)
        out = np.concatenate([out, pts[keep]], axis=0)
    return out[:count]
