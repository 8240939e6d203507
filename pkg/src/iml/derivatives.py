"""Difference-quotient estimators for the derivatives of k^(m).

The upper derivative of k^(m) at (z; X) is the limsup of
k^(m)(w, w + tY)/|t| over t -> 0 in C_*, w -> z, Y -> X; the lower
derivative replaces limsup by liminf.  Numerically we sample triples
(t, w, Y) on a geometric ladder of shrinking radii and record the max
and min quotient per level; reported limits are the last-level values
(the two-level Richardson extrapolants ride along as convergence
evidence, never as the accepted number).

The draws at a given (seed, level) are shared across inputs, so traces
for X and lam*X differ only through the curvature of the evaluator, not
through sampling noise; that is what the homogeneity property tests
lean on.

For balanced domains at the origin there is no closed-form k^(m) map,
so quotients run against a certified chain surrogate: the minimum over
a small family of linear-disc chain patterns (direct hop, coordinate
split, and a rescaled copy of the decomposition that witnessed the
kappa^(m) search).  Every pattern is a true upper bound for k^(m), so
Proposition 2 checks against it are conservative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DomainModel, MinkowskiFunctional, as_point, as_vector
from .higher import HigherConfig, kobayashi_ladder, oracle_metric
from .oracles import _descriptor, _gauge_of, kappa_map, lempert_map

_NEAR_ONE = 1.0 - 1e-12


@dataclass(frozen=True)
class ShrinkSchedule:
    """Geometric ladder of sampling radii rho_i = rho0 * factor^i."""

    rho0: float = 0.1
    levels: int = 6
    factor: float = 0.5
    samples_per_level: int = 64

    def __post_init__(self):
        if self.rho0 <= 0.0:
            raise ValueError("rho0 must be positive")
        if not 0.0 < self.factor < 1.0:
            raise ValueError("factor must be in (0, 1)")
        if self.samples_per_level < 8:
            raise ValueError("need at least 8 samples per level")
        if self.levels < 2:
            raise ValueError("need at least 2 levels to extrapolate")

    def radii(self) -> np.ndarray:
        return self.rho0 * self.factor ** np.arange(self.levels)


@dataclass(frozen=True)
class QuotientTrace:
    """Per-level quotient extremes plus the reported limits.

    rows hold (rho, max quotient, min quotient, sample count).  The
    upper/lower limits are the last-level extremes; the *_extrapolated
    fields are the two-level Richardson values, reported as evidence.
    """

    rows: tuple
    upper_limit: float
    lower_limit: float
    upper_extrapolated: float
    lower_extrapolated: float

    def __post_init__(self):
        if self.upper_limit < self.lower_limit:
            raise ValueError("upper limit below lower limit")


def _richardson(prev: float, last: float, factor: float) -> float:
    return last + factor * (last - prev) / (1.0 - factor)


def _unit_ball_points(g: np.random.Generator, count: int, n: int) -> np.ndarray:
    v = g.normal(size=(count, n)) + 1j * g.normal(size=(count, n))
    nrm = np.linalg.norm(v, axis=1, keepdims=True)
    nrm[nrm == 0.0] = 1.0
    r = g.random(count) ** (1.0 / (2 * n))
    return v / nrm * r[:, None]


def _level_draws(seed: int, level: int, count: int, n: int):
    """Shared raw draws for one ladder level: t on the half-annulus scale
    [1/2, 1], a w-offset in the unit ball, a Y-offset in the unit ball."""
    g = np.random.default_rng([seed, 17, level])
    t = np.exp(np.log(0.5) * g.random(count)) * np.exp(2j * np.pi * g.random(count))
    dw = _unit_ball_points(g, count, n)
    dy = _unit_ball_points(g, count, n)
    return t, dw, dy


def derivative_estimate(kmap, z, X, sched: ShrinkSchedule | None = None,
                        dom: DomainModel | None = None, seed: int = 0,
                        max_retries: int = 60) -> QuotientTrace:
    """Sampled difference quotients of a two-point evaluator near (z, X).

    kmap(A, B) must be vectorized over leading axes and return k^(m)-type
    values (already in distance scale, i.e. tanh^{-1} of a Lempert-type
    quantity, or any pseudodistance evaluator).  When dom is given,
    sample points are rejected back inside the domain, erroring out after
    max_retries resampling rounds.
    """
    sched = sched or ShrinkSchedule()
    z = as_point(z)
    X = as_vector(X, z.shape[0])
    n = z.shape[0]
    xnorm = float(np.linalg.norm(X))
    rows = []
    for level, rho in enumerate(sched.radii()):
        t, dw, dy = _level_draws(seed, level, sched.samples_per_level, n)
        t = rho * t
        w = z[None, :] + rho * dw
        Y = X[None, :] + (rho * xnorm) * dy
        if dom is not None:
            for attempt in range(max_retries + 1):
                bad = ~(dom.membership(w) & dom.membership(w + t[:, None] * Y))
                if not bad.any():
                    break
                if attempt == max_retries:
                    raise RuntimeError(
                        f"could not keep quotient samples inside the domain at rho={rho:g}")
                g = np.random.default_rng([seed, 19, level, attempt])
                nb = int(bad.sum())
                w[bad] = z[None, :] + rho * _unit_ball_points(g, nb, n)
                Y[bad] = X[None, :] + (rho * xnorm) * _unit_ball_points(g, nb, n)
        q = np.asarray(kmap(w, w + t[:, None] * Y)) / np.abs(t)
        if not np.all(np.isfinite(q)):
            raise RuntimeError("quotient evaluator returned non-finite values")
        rows.append((float(rho), float(q.max()), float(q.min()), sched.samples_per_level))

    upper = rows[-1][1]
    lower = rows[-1][2]
    return QuotientTrace(
        rows=tuple(rows),
        upper_limit=upper,
        lower_limit=lower,
        upper_extrapolated=_richardson(rows[-2][1], upper, sched.factor),
        lower_extrapolated=_richardson(rows[-2][2], lower, sched.factor),
    )


def underline_kappa(dom: DomainModel, z, X, sched: ShrinkSchedule | None = None,
                    metric=None, seed: int = 0) -> float:
    """liminf surrogate for kappa near (z, X): the hyperbolicity indicator.

    metric defaults to the domain's vectorized kappa oracle and must
    accept (Z, Xs) batches.  Returns the last-level minimum of
    metric(z', X') over shrinking neighborhoods (the same reporting
    convention the quotient traces use).
    """
    sched = sched or ShrinkSchedule()
    z = as_point(z, dom.dimension)
    X = as_vector(X, dom.dimension)
    if metric is None:
        metric = kappa_map(dom)
        if metric is None:
            raise ValueError("no kappa oracle for this domain; pass metric=")
    n = dom.dimension
    xnorm = float(np.linalg.norm(X))
    last = None
    for level, rho in enumerate(sched.radii()):
        _, dw, dy = _level_draws(seed, level, sched.samples_per_level, n)
        w = z[None, :] + rho * dw
        Y = X[None, :] + (rho * xnorm) * dy
        inside = dom.membership(w)
        if not inside.all():
            w = np.where(inside[:, None], w, z[None, :])
        last = float(np.min(np.asarray(metric(w, Y))))
    return max(last, 0.0)


def make_balanced_kmap(h: MinkowskiFunctional, m: int, anchor_X=None, anchor_parts=None):
    """Certified chain surrogate for k^(m) on the balanced domain {h < 1}.

    Patterns (each a valid <= m hop chain of linear-disc hop bounds):
    the direct hop; the coordinate split of the step; and, when given, the
    kappa^(m) witness decomposition rescaled to the sampled step.  Interior
    chain points with h >= 1 invalidate a pattern (cost +inf there).
    """

    def hop_costs(points_prev, steps):
        ha = np.asarray(h(points_prev))
        q = np.asarray(h(steps)) / np.maximum(1.0 - ha, 1e-300)
        q = np.where(ha >= 1.0, np.inf, q)
        return np.arctanh(np.minimum(q, _NEAR_ONE)) + np.where(q >= 1.0, np.inf, 0.0)

    def chain_cost(A, parts):
        # A (..., n); parts (..., m, n) summing to the step
        total = 0.0
        cur = A
        for j in range(parts.shape[-2]):
            step = parts[..., j, :]
            total = total + hop_costs(cur, step)
            cur = cur + step
        return total

    if anchor_parts is not None:
        anchor_parts = np.asarray(anchor_parts, dtype=complex)
        anchor_X = np.asarray(anchor_X, dtype=complex)
        ax2 = float(np.vdot(anchor_X, anchor_X).real)

    def kmap(A, B):
        A = np.asarray(A, dtype=complex)
        B = np.asarray(B, dtype=complex)
        diff = B - A
        n = diff.shape[-1]
        best = hop_costs(A, diff)
        if m >= 2:
            # coordinate split, padded into exactly min(n, m) hops
            kparts = min(n, m)
            parts = np.zeros(diff.shape[:-1] + (kparts, n), dtype=complex)
            for i in range(n):
                parts[..., min(i, kparts - 1), i] = diff[..., i]
            best = np.minimum(best, chain_cost(A, parts))
        if m >= 2 and anchor_parts is not None and ax2 > 0.0:
            c = np.einsum("...i,i->...", diff, np.conj(anchor_X)) / ax2
            rem = (diff - c[..., None] * anchor_X) / anchor_parts.shape[0]
            parts = c[..., None, None] * anchor_parts + rem[..., None, :]
            best = np.minimum(best, chain_cost(A, parts))
        return best

    return kmap


def _oracle_kmap(dom: DomainModel):
    """tanh^{-1} of the closed-form Lempert map; valid for every k^(m)
    on these domains since their Lempert function is already a distance."""
    lm = lempert_map(dom)
    if lm is None:
        return None

    def kmap(A, B, lm=lm):
        return np.arctanh(np.minimum(np.asarray(lm(A, B)), _NEAR_ONE))

    return kmap


def kmap_for(dom: DomainModel, m: int, z, X, cfg: HigherConfig | None = None):
    """Pick the k^(m) evaluator a quotient run should use on this domain.

    Oracle domains use the closed-form map; balanced domains at the
    origin get the chain surrogate anchored at the kappa^(m) witness for
    (z, X).  Returns (kmap, lhs_estimate_or_None, witness_parts).
    """
    desc = _descriptor(dom)
    kind = desc.get("kind")
    okmap = _oracle_kmap(dom)
    if okmap is not None:
        return okmap, None, None
    if kind == "balanced":
        z = as_point(z, dom.dimension)
        if np.max(np.abs(z)) > 0.0:
            raise ValueError("balanced-domain quotients are anchored at the origin")
        h = _gauge_of(desc)
        values, parts = kobayashi_ladder(oracle_metric(dom), z, X, m, cfg)
        return make_balanced_kmap(h, m, X, parts[m]), values[m], parts[m]
    raise ValueError(f"no k^(m) evaluator for domain kind {kind!r}")


def prop2_check(dom: DomainModel, z, X, m: int, sched: ShrinkSchedule | None = None,
                cfg: HigherConfig | None = None, seed: int = 0) -> dict:
    """One row of the kappa^(m) >= upper-derivative-of-k^(m) check.

    Passes when lhs >= rhs - (0.02*lhs + 1e-3); rhs is the last-level
    max quotient, which overestimates the true upper derivative, so the
    check errs on the strict side.
    """
    z = as_point(z, dom.dimension)
    X = as_vector(X, dom.dimension)
    kmap, lhs, _ = kmap_for(dom, m, z, X, cfg)
    if lhs is None:
        lhs = float(mth_kappa_value(dom, z, X, m, cfg))
    trace = derivative_estimate(kmap, z, X, sched, dom=dom, seed=seed)
    rhs = trace.upper_limit
    tol = 0.02 * lhs + 1e-3
    return {
        "domain": dom.kind,
        "z": z,
        "X": X,
        "m": m,
        "lhs_kappa_m": float(lhs),
        "rhs_upper_quotient": float(rhs),
        "tol": float(tol),
        "passed": bool(lhs >= rhs - tol),
    }


def mth_kappa_value(dom: DomainModel, z, X, m: int, cfg: HigherConfig | None = None) -> float:
    """kappa^(m) upper bound via the domain's oracle metric."""
    values, _ = kobayashi_ladder(oracle_metric(dom), z, X, m, cfg)
    return values[m]


def theorem1_check(dom: DomainModel, z, X, m: int = 1, sched: ShrinkSchedule | None = None,
                   cfg: HigherConfig | None = None, seed: int = 0, rtol: float = 0.03) -> dict:
    """Both quotient limits of k^(m) against kappa^(m) on an oracle domain.

    The identity needs a continuous positive metric, so only the
    closed-form domains qualify; both the upper and the lower last-level
    quotient must sit within rtol of kappa^(m).
    """
    z = as_point(z, dom.dimension)
    X = as_vector(X, dom.dimension)
    kmap = _oracle_kmap(dom)
    if kmap is None:
        raise ValueError("theorem1_check needs a closed-form oracle domain")
    kap = mth_kappa_value(dom, z, X, m, cfg)
    trace = derivative_estimate(kmap, z, X, sched, dom=dom, seed=seed)
    scale = max(kap, 1e-12)
    up_ok = abs(kap - trace.upper_limit) <= rtol * scale
    lo_ok = abs(kap - trace.lower_limit) <= rtol * scale
    return {
        "domain": dom.kind,
        "z": z,
        "X": X,
        "m": m,
        "kappa_m": float(kap),
        "upper_limit": trace.upper_limit,
        "lower_limit": trace.lower_limit,
        "upper_extrapolated": trace.upper_extrapolated,
        "lower_extrapolated": trace.lower_extrapolated,
        "passed": bool(up_ok and lo_ok),
    }
