"""Higher-order Kobayashi quantities built on top of a base metric.

kappa^(m)(z; X) is the infimum of sum_j kappa(z; X_j) over m-part
decompositions sum X_j = X; the Kobayashi-Buseman metric is the
stabilized level kappa^(2n-1).  k^(m)(z, w) is the infimum of m-hop
chain sums of tanh^{-1} k~*, and the Kobayashi pseudodistance is the
infimum over m.  All searched values are upper bounds; exactness of the
monotone ladders comes from seeding each level with the previous level's
witness (padded with a zero part or a repeated point, which costs
nothing), never from trusting the optimizer.

The hull functional realizes the balanced-domain identity for the
Buseman metric at the origin: the gauge of the convex hull of {h < 1},
computed for 2D complete Reinhardt gauges through the convex hull of the
modulus shadow (taking moduli commutes with convex hulls for complete
Reinhardt sets).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from ._optim import nelder_mead_batch
from .discs import (MetricEstimate, SearchConfig, kobayashi_royden_upper,
                    lempert_upper, linear_lempert_upper)
from .geometry import DomainModel, MinkowskiFunctional, as_point, as_vector
from .oracles import kappa_map, lempert_map, _descriptor, _gauge_of

_CHAIN_PENALTY = 1e4
_NEAR_ONE = 1.0 - 1e-12


@dataclass(frozen=True)
class HigherConfig:
    """Search budgets for decomposition and chain optimization."""

    restarts: int = 16
    max_iters: int = 150
    seed: int = 0
    hull_points: int = 2048
    max_m: int = 8
    margin_eps: float = 1e-3

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if self.hull_points < 64:
            raise ValueError("hull_points too small to polygonalize")


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Parts X_1..X_m with sum equal to X; the last part is X minus the rest."""

    parts: np.ndarray  # (m, n)

    @classmethod
    def from_free(cls, X, free) -> "Decomposition":
        free = np.atleast_2d(np.asarray(free, dtype=complex))
        last = np.asarray(X, dtype=complex) - free.sum(axis=0)
        return cls(np.vstack([free, last[None, :]]))

    @property
    def m(self) -> int:
        return self.parts.shape[0]

    def total(self) -> np.ndarray:
        return self.parts.sum(axis=0)


@dataclass(frozen=True, eq=False)
class Chain:
    """Points z_0..z_m inside the domain, endpoints are the queried pair."""

    points: np.ndarray  # (m+1, n)

    @property
    def m(self) -> int:
        return self.points.shape[0] - 1

    def hops(self):
        return self.points[:-1], self.points[1:]


@dataclass(frozen=True, eq=False)
class HullFunctional:
    """Gauge of the convex hull of {base < 1}; callable on vectors."""

    base: MinkowskiFunctional
    normals: np.ndarray | None  # (F, 2) facet normals in modulus space
    offsets: np.ndarray | None  # (F,) positive offsets; None = degenerate hull

    def __call__(self, X) -> float:
        X = np.asarray(X, dtype=complex)
        q = np.abs(X)
        if q.shape[-1] != 2:
            raise ValueError("hull functional is 2D only")
        if self.normals is None:
            return 0.0 if q.ndim == 1 else np.zeros(q.shape[:-1])
        val = (q @ self.normals.T) / self.offsets
        out = np.maximum(val.max(axis=-1), 0.0)
        return float(out) if q.ndim == 1 else out


def oracle_metric(dom):
    """(z, Xs) -> kappa values, vectorized over Xs, for oracle domains.

    Balanced domains answer only at z = 0 (the gauge identity); the
    other model domains answer anywhere.
    """
    desc = _descriptor(dom)
    kind = desc.get("kind")
    m = kappa_map(dom)
    if m is not None:
        def ev(z, Xs, m=m):
            Xs = np.asarray(Xs, dtype=complex)
            Z = np.broadcast_to(np.asarray(z, dtype=complex), Xs.shape)
            return m(Z, Xs)

        return ev
    if kind == "balanced":
        h = _gauge_of(desc)

        def ev(z, Xs, h=h):
            if np.max(np.abs(np.asarray(z))) > 0.0:
                raise ValueError("balanced oracle metric is exact only at the origin")
            return h(np.asarray(Xs, dtype=complex))

        return ev
    raise ValueError(f"no oracle metric for domain kind {kind!r}")


def search_metric(dom: DomainModel, cfg: SearchConfig | None = None):
    """(z, Xs) -> certified upper bounds via disc search.  Slow; loops."""
    cfg = cfg or SearchConfig()

    def ev(z, Xs):
        Xs = np.asarray(Xs, dtype=complex)
        flat = Xs.reshape(-1, Xs.shape[-1])
        vals = [kobayashi_royden_upper(dom, z, x, cfg).value for x in flat]
        return np.asarray(vals).reshape(Xs.shape[:-1])

    return ev


def _axis_split_parts(X, m):
    """Coordinate-grouped decomposition: part j carries coordinate block j."""
    n = X.shape[0]
    parts = np.zeros((m, n), dtype=complex)
    for i in range(n):
        parts[min(i, m - 1), i] = X[i]
    return parts


def _free_to_parts(x, k, n):
    r = x.shape[0]
    f = x.reshape(r, k - 1, n, 2)
    return f[..., 0] + 1j * f[..., 1]


def _parts_to_free(parts):
    p = np.asarray(parts[:-1], dtype=complex)
    return np.stack([p.real, p.imag], axis=-1).reshape(-1)


def _condense(parts, values, k):
    """Merge lowest-cost parts pairwise until only k remain."""
    parts = list(np.asarray(parts, dtype=complex))
    values = list(np.asarray(values, dtype=float))
    while len(parts) > k:
        i, j = np.argsort(values)[:2]
        i, j = (int(i), int(j)) if i < j else (int(j), int(i))
        parts[i] = parts[i] + parts.pop(j)
        values.pop(j)
        values[i] = 0.0  # placeholder; re-costed by the caller's seed search
    return np.asarray(parts)


def kobayashi_ladder(metric, z, X, m, cfg: HigherConfig | None = None):
    """Values and witnesses of kappa^(1..m); exact monotone by nesting.

    metric is a vectorized evaluator (z, Xs (..., n)) -> (...).  Returns
    (values dict, decomposition dict).
    """
    cfg = cfg or HigherConfig()
    z = as_point(z)
    X = as_vector(X, z.shape[0])
    n = z.shape[0]
    if m < 1:
        raise ValueError("m must be >= 1")

    v1 = float(metric(z, X[None, :])[0])
    values = {1: v1}
    parts = {1: X[None, :].copy()}
    if m == 1 or v1 == 0.0:
        for k in range(2, m + 1):
            values[k] = min(values[k - 1], v1)
            parts[k] = np.vstack([parts[k - 1], np.zeros((1, n), complex)])
        return values, parts

    scale = float(np.linalg.norm(X))

    def level_search(k, seeds):
        def fun(x):
            fr = _free_to_parts(x, k, n)
            last = X[None, :] - fr.sum(axis=1)
            full = np.concatenate([fr, last[:, None, :]], axis=1)
            return metric(z, full).sum(axis=-1)

        x0 = np.stack(seeds, axis=0)
        xb, fb = nelder_mead_batch(fun, x0, steps=0.1 * scale,
                                   maxiter=cfg.max_iters, fatol=1e-14, xatol=1e-12)
        i = int(np.argmin(fb))
        fr = _free_to_parts(xb[i][None, :], k, n)[0]
        full = np.vstack([fr, (X - fr.sum(axis=0))[None, :]])
        return float(fb[i]), full

    for k in range(2, m + 1):
        seeds = [
            _parts_to_free(np.vstack([parts[k - 1], np.zeros((1, n), complex)])),
            _parts_to_free(np.full((k, n), 0, complex) + X[None, :] / k),
            _parts_to_free(_axis_split_parts(X, k)),
        ]
        for r in range(len(seeds), cfg.restarts):
            g = np.random.default_rng([cfg.seed, 29, k, r])
            seeds.append(g.standard_normal(2 * n * (k - 1)) * (0.7 * scale / k))
        val, pk = level_search(k, seeds)
        if val < values[k - 1]:
            values[k], parts[k] = val, pk
        else:
            values[k] = values[k - 1]
            parts[k] = np.vstack([parts[k - 1], np.zeros((1, n), complex)])

    # polish: re-seed each level with condensed copies of deeper witnesses,
    # then re-impose monotonicity (a j-part witness embeds into any k >= j)
    if m >= 3:
        for k in range(2, m):
            cands = []
            for j in range(k + 1, m + 1):
                pv = np.asarray(metric(z, parts[j]))
                cands.append(_parts_to_free(_condense(parts[j], pv, k)))
            val, pk = level_search(k, [_parts_to_free(parts[k])] + cands)
            if val < values[k]:
                values[k], parts[k] = val, pk
        for k in range(2, m + 1):
            if values[k] > values[k - 1]:
                values[k], parts[k] = values[k - 1], parts[k - 1]
    return values, parts


def mth_kobayashi(metric, z, X, m, cfg: HigherConfig | None = None) -> MetricEstimate:
    """Upper bound for kappa^(m)(z; X); nonincreasing in m by nesting."""
    values, parts = kobayashi_ladder(metric, z, X, m, cfg)
    return MetricEstimate(values[m], "upper-bound", Decomposition(parts[m]),
                          meta={"m": m, "ladder": values})


def kobayashi_buseman(metric, z, X, n_dim: int, cfg: HigherConfig | None = None) -> MetricEstimate:
    """kappa-hat estimate: the stabilized level kappa^(2n-1)."""
    if n_dim < 1:
        raise ValueError("dimension must be >= 1")
    est = mth_kobayashi(metric, z, X, 2 * n_dim - 1, cfg)
    est.meta["kappa_hat"] = True
    return est


def make_hull_functional(h: MinkowskiFunctional, points: int = 2048) -> HullFunctional:
    """Polygonalize {h < 1} in modulus space and take its convex hull.

    h must be complete Reinhardt in 2D: it may depend only on the moduli
    (checked on samples).  A gauge vanishing along some direction makes
    the hull the whole plane; that degenerates to the zero functional.
    """
    probe = np.array([[0.3 + 0.0j, 0.7 + 0.0j], [0.9 + 0.0j, 0.1 + 0.0j]])
    spun = probe * np.exp(1j * np.array([0.9, -1.7]))[None, :]
    if not np.allclose([h(p) for p in probe], [h(p) for p in spun], rtol=1e-9, atol=1e-12):
        raise ValueError("hull functional needs a Reinhardt gauge (moduli only)")

    theta = np.linspace(0.0, np.pi / 2.0, int(points))
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1).astype(complex)
    hv = np.asarray(h(dirs), dtype=float)
    if np.any(hv <= 1e-9):
        return HullFunctional(h, None, None)
    rad = 1.0 / hv
    pts = rad[:, None] * dirs.real
    pts = np.vstack([[[0.0, 0.0]], pts])
    hull = ConvexHull(pts)
    # facets a.p + b <= 0; keep those with b < 0 (0 strictly inside)
    eq = hull.equations
    a, b = eq[:, :2], eq[:, 2]
    keep = b < -1e-12
    return HullFunctional(h, a[keep], -b[keep])


def hull_functional(h: MinkowskiFunctional, X, points: int = 2048) -> float:
    """Gauge of the convex hull of {h < 1}, evaluated at X (2D Reinhardt)."""
    return float(make_hull_functional(h, points)(as_vector(X, 2)))


def balanced_lempert_map(h: MinkowskiFunctional):
    """(A, B) -> linear-disc upper bound h(B - A) / (1 - h(A)) for k~*.

    Valid on the balanced domain {h < 1}: the disc a + zeta (b - a)/q stays
    inside by homogeneity and subadditivity of h.  Values clip just below
    1 when the disc cannot certify the pair (the bound is then vacuous).
    """

    def ev(A, B, h=h):
        A = np.asarray(A, dtype=complex)
        B = np.asarray(B, dtype=complex)
        ha = np.asarray(h(A))
        q = np.asarray(h(B - A)) / np.maximum(1.0 - ha, 1e-15)
        return np.minimum(q, _NEAR_ONE)

    return ev


def search_lempert_map(dom: DomainModel, cfg: SearchConfig | None = None, linear_only=True):
    """(A, B) -> certified k~* upper bounds via disc search.  Loops; slow."""
    cfg = cfg or SearchConfig()
    fn = linear_lempert_upper if linear_only else lempert_upper

    def ev(A, B):
        A = np.asarray(A, dtype=complex)
        B = np.asarray(B, dtype=complex)
        shp = np.broadcast_shapes(A.shape, B.shape)
        A = np.broadcast_to(A, shp).reshape(-1, shp[-1])
        B = np.broadcast_to(B, shp).reshape(-1, shp[-1])
        vals = [min(fn(dom, a, b, cfg).value, _NEAR_ONE) for a, b in zip(A, B)]
        return np.asarray(vals).reshape(shp[:-1])

    return ev


def default_lempert_map(dom: DomainModel, cfg: SearchConfig | None = None):
    """Oracle map when the domain has one, else gauge proxy, else search."""
    m = lempert_map(dom)
    if m is not None:
        return m
    desc = _descriptor(dom)
    if desc.get("kind") == "balanced":
        return balanced_lempert_map(_gauge_of(desc))
    return search_lempert_map(dom, cfg)


def mth_lempert(dom: DomainModel, z, w, m, base=None, cfg: HigherConfig | None = None,
                seed_chain=None) -> MetricEstimate:
    """Upper bound for k^(m)(z, w) by optimizing interior chain points.

    base is a vectorized (A, B) -> k~* evaluator; defaults per domain.
    seed_chain (optional) supplies explicit intermediate points (m-1, n)
    to include among the starts, e.g. a hand-built route.
    """
    cfg = cfg or HigherConfig()
    z = as_point(z, dom.dimension)
    w = as_point(w, dom.dimension)
    if float(dom.margin(z)) <= 0.0 or float(dom.margin(w)) <= 0.0:
        raise ValueError("chain endpoints must lie inside the domain")
    base = base or default_lempert_map(dom)
    n = dom.dimension

    def chain_cost_points(pts):
        # pts (R, m-1, n)
        r = pts.shape[0]
        A = np.concatenate([np.broadcast_to(z, (r, 1, n)), pts], axis=1)
        B = np.concatenate([pts, np.broadcast_to(w, (r, 1, n))], axis=1)
        hop = np.arctanh(np.minimum(np.asarray(base(A, B)), _NEAR_ONE))
        margins = np.asarray(dom.margin(pts))
        bad = np.maximum(cfg.margin_eps - margins, 0.0)
        return hop.sum(axis=-1) + _CHAIN_PENALTY * bad.sum(axis=-1)

    values = {}
    chains = {}
    v1 = float(np.arctanh(min(float(np.asarray(base(z[None, :], w[None, :]))[0]), _NEAR_ONE)))
    values[1] = v1
    chains[1] = np.vstack([z[None, :], w[None, :]])

    def to_free(pts):
        pts = np.asarray(pts, dtype=complex)
        return np.stack([pts.real, pts.imag], axis=-1).reshape(-1)

    scale = max(float(np.linalg.norm(w - z)), 1e-6)
    for k in range(2, m + 1):
        t = np.arange(1, k)[:, None] / k
        lin = z[None, :] * (1 - t) + w[None, :] * t
        prev_mid = np.vstack([chains[k - 1][1:-1], w[None, :]])
        seeds = [to_free(lin), to_free(prev_mid)]
        if seed_chain is not None and np.asarray(seed_chain).shape[0] == k - 1:
            seeds.append(to_free(np.asarray(seed_chain, dtype=complex)))
        for r in range(len(seeds), max(cfg.restarts // 2, len(seeds) + 2)):
            g = np.random.default_rng([cfg.seed, 31, k, r])
            seeds.append(seeds[0] + 0.2 * scale * g.standard_normal(seeds[0].shape[0]))

        def fun(x, k=k):
            f = x.reshape(-1, k - 1, n, 2)
            return chain_cost_points(f[..., 0] + 1j * f[..., 1])

        xb, fb = nelder_mead_batch(fun, np.stack(seeds), steps=0.1 * scale,
                                   maxiter=cfg.max_iters, fatol=1e-14, xatol=1e-12)
        i = int(np.argmin(fb))
        pts = xb[i].reshape(k - 1, n, 2)
        pts = pts[..., 0] + 1j * pts[..., 1]
        val = float(fb[i])
        if float(np.min(dom.margin(pts))) < cfg.margin_eps or val >= values[k - 1]:
            values[k] = values[k - 1]
            chains[k] = np.vstack([chains[k - 1], chains[k - 1][-1:]])
        else:
            values[k] = val
            chains[k] = np.vstack([z[None, :], pts, w[None, :]])

    return MetricEstimate(values[m], "upper-bound", Chain(chains[m]),
                          meta={"m": m, "ladder": values})


def kobayashi_distance(dom: DomainModel, z, w, cfg: HigherConfig | None = None,
                       base=None, seed_chain=None) -> MetricEstimate:
    """inf over m <= cfg.max_m of the m-th Lempert bounds; reports m*."""
    cfg = cfg or HigherConfig()
    est = mth_lempert(dom, z, w, cfg.max_m, base=base, cfg=cfg, seed_chain=seed_chain)
    ladder = est.meta["ladder"]
    vbest = min(ladder.values())
    m_star = min(k for k, v in ladder.items() if v <= vbest + 1e-12)
    return MetricEstimate(vbest, "upper-bound", est.witness,
                          meta={"ladder": ladder, "m_star": m_star})
