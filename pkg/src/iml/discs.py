"""Upper bounds for the Lempert function and the Kobayashi-Royden metric.

Both quantities are infima of |alpha| over analytic discs f: D -> M with
interpolation constraints (f(0) = z and f(alpha) = w, or f(0) = z and
alpha f'(0) = X).  We search polynomial discs of configurable degree.
The interpolation constraints are eliminated exactly by substitution, so
every candidate satisfies them to machine precision; containment in the
domain is the only soft part and is certified by sampling the boundary
circle of radius rho.

Boundary-only sampling is justified: every model margin here is of the
form const - g with log g plurisubharmonic (moduli, norms, gauges, and
the example3 defining function), so g composed with a disc obeys the
maximum principle and interior containment follows from boundary
containment, up to the finite-sample discretization.  The certified
radius-rho disc is reparameterized to the unit disc, which divides the
bound by rho and keeps it a true upper bound.

The alpha search is a feasibility bisection: at each probe alpha the
free coefficients are driven toward containment by batched simplex
descent (all restarts at once), and alpha decreases while a certified
disc exists.  Only certified discs ever update the incumbent, so the
returned value is sound regardless of optimizer quality.  Degrees are
laddered through powers of two with warm starts; together with per-row
restart seeding this makes the returned value nonincreasing in both the
degree and the restart count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._optim import nelder_mead_batch
from .geometry import DomainModel, as_point, as_vector, canonical_direction

_ALPHA_RTOL = 1e-3
_ALPHA_ATOL = 1e-6
_RMAX = 1e9


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the disc search; defaults target desk-scale accuracy."""

    degree: int = 4
    restarts: int = 8
    rho: float = 0.995
    boundary_samples: int = 256
    margin_eps: float = 1e-3
    max_iters: int = 120
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.degree <= 32:
            raise ValueError("degree must be in 1..32")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must be in (0, 1)")
        if self.boundary_samples < 8:
            raise ValueError("need at least 8 boundary samples")
        if self.margin_eps <= 0.0:
            raise ValueError("margin_eps must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True, eq=False)
class AnalyticDisc:
    """Polynomial disc f(zeta) = center + sum_k coeffs[k-1] * zeta^k."""

    center: np.ndarray  # (n,)
    coeffs: np.ndarray  # (d, n), entries c_1..c_d

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "coeffs", c)
        if c.shape[1] != self.center.shape[0]:
            raise ValueError("coefficient dimension mismatch")

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def __call__(self, zeta) -> np.ndarray:
        """Evaluate at zeta, batched (...,) -> (..., n).  Exact at 0."""
        zeta = np.asarray(zeta, dtype=complex)
        acc = np.zeros(zeta.shape + (self.dimension,), dtype=complex)
        for ck in self.coeffs[::-1]:
            acc = (acc + ck) * zeta[..., None]
        return acc + self.center

    def derivative0(self) -> np.ndarray:
        return self.coeffs[0]


@dataclass(frozen=True)
class ContainmentCert:
    """Boundary-sample containment evidence for a disc of radius `radius`."""

    boundary_samples: int
    radius: float
    min_margin: float

    @property
    def passed(self) -> bool:
        return self.min_margin > 0.0


@dataclass(eq=False)
class MetricEstimate:
    """A metric or distance value with its provenance.

    kind is "upper-bound" (variational, certified disc witness) or
    "oracle-exact" (closed form, witness is the oracle tag).
    """

    value: float
    kind: str
    witness: Any = None
    cert: ContainmentCert | None = None
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def _boundary_zetas(cfg: SearchConfig) -> np.ndarray:
    s = cfg.boundary_samples
    theta = 2.0 * np.pi * np.arange(s) / s
    return cfg.rho * np.exp(1j * theta)


def certify_disc(dom: DomainModel, disc: AnalyticDisc, cfg: SearchConfig) -> ContainmentCert:
    """Sample the radius-rho circle and record the worst margin."""
    pts = disc(_boundary_zetas(cfg))
    m = float(np.min(dom.margin(pts)))
    return ContainmentCert(cfg.boundary_samples, cfg.rho, m)


def lempert_tanh(est) -> float:
    """tanh^{-1} of a Lempert-function value; domain [0, 1)."""
    v = float(est.value) if isinstance(est, MetricEstimate) else float(est)
    if not 0.0 <= v < 1.0:
        raise ValueError(f"lempert value {v} outside [0, 1)")
    return float(np.arctanh(v))


def _margins(dom, center, zpow, coeffs):
    # coeffs (R, d, n); zpow (S, d) -> points (R, S, n) -> margins (R, S)
    pts = np.einsum("sd,rdn->rsn", zpow, coeffs) + center
    return np.asarray(dom.margin(pts))


def _min_margin(dom, center, zpow, coeffs):
    return _margins(dom, center, zpow, coeffs).min(axis=-1)


_SOFT_TAU = 5e-3


def _soft_min_margin(dom, center, zpow, coeffs):
    """Smoothed minimum margin: the simplex search behaves much better on
    this than on the raw min, while certification always uses the true min."""
    m = _margins(dom, center, zpow, coeffs)
    lo = m.min(axis=-1, keepdims=True)
    return (lo - _SOFT_TAU * np.log(np.exp((lo - m) / _SOFT_TAU).sum(axis=-1, keepdims=True)))[:, 0]


def _feasible_linear_radius(dom, z, u, cfg):
    """Largest certified radius r of the linear disc z + r*zeta*u."""
    zetas = _boundary_zetas(cfg)

    def ok(r):
        return float(np.min(dom.margin(z + (r * zetas)[:, None] * u))) >= cfg.margin_eps

    lo, hi = 0.0, 1.0
    if ok(hi):
        while hi < _RMAX and ok(2.0 * hi):
            hi *= 2.0
        if hi >= _RMAX:
            return _RMAX
        lo, hi = hi, 2.0 * hi
    else:
        while hi > 1e-12 and not ok(hi / 2.0):
            hi /= 2.0
        if hi <= 1e-12:
            return 0.0
        lo, hi = hi / 2.0, hi
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _restart_starts(warm, restarts, scale, rng_key):
    """Row 0 continues the warm point; later rows add seeded noise.

    Per-row seeding means the first r rows agree for any restart count,
    which is what makes estimates monotone in `restarts`.
    """
    dim = warm.shape[0]
    rows = [warm]
    for r in range(1, restarts):
        g = np.random.default_rng([*rng_key, r])
        rows.append(warm + scale * g.standard_normal(dim))
    return np.stack(rows, axis=0)


def _degree_ladder(d: int) -> list[int]:
    ladder, k = [], 2
    while k < d:
        ladder.append(k)
        k *= 2
    ladder.append(d)
    return ladder


def _alpha_bisect(dom, z, cfg, build_coeffs, alpha_hi, warm, scale, rng_key):
    """Shrink alpha while feasibility can be restored; return certified best.

    build_coeffs(alpha, xflat) maps free parameters (R, free_dim) to full
    coefficient arrays (R, d, n).  Returns (alpha, xbest) for the smallest
    certified alpha, starting from the certified alpha_hi with its free
    parameters `warm`.
    """
    zpow = _boundary_zetas(cfg)[:, None] ** np.arange(1, 1 + build_coeffs.degree)[None, :]

    def restored(alpha, starts):
        def fun(x):
            return -_soft_min_margin(dom, z, zpow, build_coeffs(alpha, x))

        xb, _ = nelder_mead_batch(fun, starts, steps=0.15 * scale,
                                  maxiter=cfg.max_iters, fatol=1e-12, xatol=1e-12)
        true = _min_margin(dom, z, zpow, build_coeffs(alpha, xb))
        i = int(np.argmax(true))
        return (float(true[i]) >= cfg.margin_eps), xb[i]

    lo, hi = 0.0, alpha_hi
    best_x = warm
    while hi - lo > max(_ALPHA_ATOL, _ALPHA_RTOL * hi):
        mid = 0.5 * (lo + hi)
        starts = _restart_starts(best_x, cfg.restarts, scale, rng_key)
        ok, xb = restored(mid, starts)
        if ok:
            hi, best_x = mid, xb
        else:
            lo = mid
    return hi, best_x


class _CoeffBuilder:
    """Assemble (R, d, n) coefficient arrays from free parameters.

    mode "kappa": c_1 = u / alpha fixed, free c_2..c_d.
    mode "lempert": free c_2..c_d, c_1 = (target - sum_{k>=2} c_k a^k)/a.
    """

    def __init__(self, degree, dim, mode, u=None, target=None):
        self.degree = degree
        self.dim = dim
        self.mode = mode
        self.u = u
        self.target = target

    @property
    def free_dim(self):
        return 2 * self.dim * (self.degree - 1)

    def free_part(self, xflat):
        r = xflat.shape[0]
        x = xflat.reshape(r, self.degree - 1, self.dim, 2)
        return x[..., 0] + 1j * x[..., 1]

    def __call__(self, alpha, xflat):
        r = xflat.shape[0]
        free = self.free_part(xflat) if self.degree > 1 else np.zeros((r, 0, self.dim), complex)
        c = np.empty((r, self.degree, self.dim), dtype=complex)
        c[:, 1:, :] = free
        if self.mode == "kappa":
            c[:, 0, :] = self.u / alpha
        else:
            apow = alpha ** np.arange(2, self.degree + 1)
            rest = np.einsum("k,rkn->rn", apow, free) if self.degree > 1 else 0.0
            c[:, 0, :] = (self.target - rest) / alpha
        return c


def kobayashi_royden_upper(dom: DomainModel, z, X, cfg: SearchConfig | None = None) -> MetricEstimate:
    """Certified upper bound for kappa_dom(z; X).

    The input direction is reduced to its canonical unit representative
    and the result rescaled by |X|, so absolute homogeneity in X is exact
    by construction.
    """
    cfg = cfg or SearchConfig()
    z = as_point(z, dom.dimension)
    X = as_vector(X, dom.dimension)
    norm, u = canonical_direction(X)
    if norm == 0.0:
        disc = AnalyticDisc(z, np.zeros((1, dom.dimension), complex))
        return MetricEstimate(0.0, "upper-bound", disc, certify_disc(dom, disc, cfg))
    if float(dom.margin(z)) < cfg.margin_eps:
        raise ValueError("base point too close to the boundary for the configured margin_eps")

    r_lin = _feasible_linear_radius(dom, z, u, cfg)
    if r_lin <= 0.0:
        raise RuntimeError("no feasible linear disc; base point margin below margin_eps")
    alpha = 1.0 / r_lin
    best = AnalyticDisc(z, (r_lin * u)[None, :])

    for d in (_degree_ladder(cfg.degree) if cfg.degree > 1 else []):
        builder = _CoeffBuilder(d, dom.dimension, "kappa", u=u)
        warm = np.zeros(builder.free_dim)
        prev = best.coeffs
        if prev.shape[0] > 1:
            pad = np.zeros((d - 1, dom.dimension), complex)
            pad[:prev.shape[0] - 1] = prev[1:]
            warm = np.stack([pad.real, pad.imag], axis=-1).reshape(-1)
        alpha, xb = _alpha_bisect(dom, z, cfg, builder, alpha,
                                  warm, 0.2 * r_lin, (cfg.seed, 11, d))
        best = AnalyticDisc(z, builder(alpha, xb[None, :])[0])

    cert = certify_disc(dom, best, cfg)
    value = norm * alpha / cfg.rho
    return MetricEstimate(value, "upper-bound", best, cert,
                          meta={"direction_norm": norm, "alpha": alpha})


def linear_lempert_upper(dom: DomainModel, z, w, cfg: SearchConfig | None = None) -> MetricEstimate:
    """Certified k~* upper bound using only the linear disc through z, w."""
    cfg = cfg or SearchConfig()
    z = as_point(z, dom.dimension)
    w = as_point(w, dom.dimension)
    if np.array_equal(z, w):
        disc = AnalyticDisc(z, np.zeros((1, dom.dimension), complex))
        return MetricEstimate(0.0, "upper-bound", disc, certify_disc(dom, disc, cfg))
    step = w - z
    r_lin = _feasible_linear_radius(dom, z, step, cfg)  # scale of zeta*step
    # f(zeta) = z + r*zeta*step certified on |zeta| <= rho hits w at 1/r,
    # so the reparameterized value is 1/(r*rho), meaningful only below 1
    if r_lin * cfg.rho <= 1.0 + 1e-12:
        return MetricEstimate(1.0, "upper-bound", None, None,
                              meta={"diagnostic": "no feasible linear disc reaches w"})
    alpha = 1.0 / r_lin
    disc = AnalyticDisc(z, (r_lin * step)[None, :])
    cert = certify_disc(dom, disc, cfg)
    return MetricEstimate(alpha / cfg.rho, "upper-bound", disc, cert,
                          meta={"alpha": alpha})


def lempert_upper(dom: DomainModel, z, w, cfg: SearchConfig | None = None) -> MetricEstimate:
    """Certified upper bound for the Lempert function k~*_dom(z, w).

    When no linear disc reaches w, a degree >= 2 rescue is attempted even
    under cfg.degree = 1, since any certified disc beats the vacuous 1.
    """
    cfg = cfg or SearchConfig()
    z = as_point(z, dom.dimension)
    w = as_point(w, dom.dimension)
    if np.array_equal(z, w):
        disc = AnalyticDisc(z, np.zeros((1, dom.dimension), complex))
        return MetricEstimate(0.0, "upper-bound", disc, certify_disc(dom, disc, cfg))
    if float(dom.margin(z)) < cfg.margin_eps or float(dom.margin(w)) < cfg.margin_eps:
        raise ValueError("endpoints must sit inside the domain with margin_eps room")

    lin = linear_lempert_upper(dom, z, w, cfg)
    alpha_cap = cfg.rho * (1.0 - 1e-9)
    best_alpha = lin.meta["alpha"] if lin.witness is not None else None
    best = lin.witness
    target = w - z
    scale = 0.3 * float(np.linalg.norm(target))

    for d in (_degree_ladder(cfg.degree) if cfg.degree > 1 or best is None else []):
        builder = _CoeffBuilder(max(d, 2), dom.dimension, "lempert", target=target)
        warm = np.zeros(builder.free_dim)
        if best is not None and best.coeffs.shape[0] > 1:
            pad = np.zeros((builder.degree - 1, dom.dimension), complex)
            pad[:best.coeffs.shape[0] - 1] = best.coeffs[1:]
            warm = np.stack([pad.real, pad.imag], axis=-1).reshape(-1)
        if best is None:
            # no certified starting disc yet: restore feasibility at the cap
            zpow = _boundary_zetas(cfg)[:, None] ** np.arange(1, builder.degree + 1)[None, :]
            starts = _restart_starts(warm, cfg.restarts, scale, (cfg.seed, 13, builder.degree))

            def fun(x, a=alpha_cap, b=builder):
                return -_min_margin(dom, z, zpow, b(a, x))

            xb, fb = nelder_mead_batch(fun, starts, steps=0.15 * scale,
                                       maxiter=cfg.max_iters, fatol=1e-12, xatol=1e-12)
            i = int(np.argmin(fb))
            if -float(fb[i]) < cfg.margin_eps:
                continue
            warm, best_alpha = xb[i], alpha_cap
        a_new, xb = _alpha_bisect(dom, z, cfg, builder, best_alpha,
                                  warm, scale, (cfg.seed, 13, builder.degree))
        best_alpha = a_new
        best = AnalyticDisc(z, builder(a_new, xb[None, :])[0])

    if best is None:
        return MetricEstimate(1.0, "upper-bound", None, None,
                              meta={"diagnostic": "no certified disc found at any alpha < 1"})
    cert = certify_disc(dom, best, cfg)
    return MetricEstimate(min(best_alpha / cfg.rho, 1.0 - 1e-12), "upper-bound", best, cert,
                          meta={"alpha": best_alpha})
