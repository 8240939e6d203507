"""An unbounded pseudoconvex domain in C^2 built from a subharmonic series.

The defining function is psi(z) = |z2| * exp(||z||^2 + v(z1)) with

    u(lam) = sum_k  log(|lam - 1/k| / 4) / k^2
    v(lam) = sum_j  u(lam/2 - r_j) / (2 j^2),

(r_j) a dense sequence on the imaginary segment [0, i/2].  The domain is
{psi < 1}.  Both series are truncated (orders K and J); every discarded
term is negative on the sets we evaluate on, so truncation only ever
*raises* u, v and psi.  A certified psi < 1 therefore certifies
membership in the untruncated domain as well.

Minus infinity is a first-class value here: u hits -inf exactly on the
poles lam = 1/k, v inherits poles at lam = 2*(r_j + 1/k), and psi is then
exactly 0, which is what makes the vertical lines {lam*} x C and the
plane C x {0} lie inside the domain.  Pole hits are exact floating-point
events (see singular_first_coords), not near-misses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import DomainModel

LOG4 = float(np.log(4.0))


def default_rseq(J: int) -> np.ndarray:
    """First J terms of the dyadic enumeration of [0, i/2].

    Breadth-first over levels: (i/2)*(1/2); (i/2)*(1/4), (i/2)*(3/4); ...
    odd numerators ascending within a level.  Dense in the limit, and every
    entry is an exactly representable dyadic imaginary number.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    out = []
    level = 1
    while len(out) < J:
        for odd in range(1, 2 ** level, 2):
            out.append(complex(0.0, 0.5 * (odd / 2.0 ** level)))
            if len(out) == J:
                break
        level += 1
    return np.asarray(out, dtype=complex)


@dataclass(frozen=True)
class Example3Params:
    """Truncation orders and the retained prefix of the dense sequence."""

    K: int = 200
    J: int = 60
    rseq: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.K < 10 or self.J < 10:
            raise ValueError("need K >= 10 and J >= 10")
        rs = default_rseq(self.J) if self.rseq is None else np.asarray(self.rseq, dtype=complex)
        if rs.shape != (self.J,):
            raise ValueError("rseq must have J entries")
        if np.any(np.abs(rs.real) > 0) or np.any(rs.imag < 0) or np.any(rs.imag > 0.5):
            raise ValueError("rseq must lie on the segment [0, i/2]")
        object.__setattr__(self, "rseq", rs)


def eval_u(lam, K: int) -> np.ndarray:
    """Truncated u(lam) = sum_{k<=K} log(|lam - 1/k|/4) / k^2.

    Returns -inf exactly on the poles lam = 1/k, k <= K.  Batched over lam.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    lam = np.asarray(lam, dtype=complex)
    scalar = lam.ndim == 0
    k = np.arange(1, K + 1, dtype=float)
    d = np.abs(lam[..., None] - 1.0 / k)
    with np.errstate(divide="ignore"):
        terms = np.log(d / 4.0) / k ** 2
    val = terms.sum(axis=-1)
    return float(val) if scalar else val


def u_tail_bound(K: int, lam=None) -> float:
    """Bound on |u - u_K| for the discarded tail k > K.

    With lam omitted the bound (log 4 + 1 + log K)/K holds on the half
    plane Re(lam) <= 0 (the discarded poles sit at 1/k <= 1/K, so there
    |lam - 1/k| >= 1/k).  With lam given, the bound uses the distance from
    lam to the real segment [0, 1/(K+1)] carrying the discarded poles and
    is +inf when lam sits on that segment (excluding the origin, which the
    default bound covers).
    """
    base = (LOG4 + 1.0 + np.log(K)) / K
    if lam is None:
        return float(base)
    lam = complex(lam)
    if lam.real <= 0.0:
        return float(base)
    seg = min(max(lam.real, 0.0), 1.0 / (K + 1))
    dist = abs(lam - seg)
    if dist == 0.0:
        return float("inf")
    tail_terms = (LOG4 + max(0.0, -np.log(dist))) / K
    return float(tail_terms)


def eval_v(lam, params: Example3Params) -> np.ndarray:
    """Truncated v(lam) = sum_{j<=J} u(lam/2 - r_j) / (2 j^2).

    -inf exactly on the truncated singular set lam = 2*(r_j + 1/k).
    """
    lam = np.asarray(lam, dtype=complex)
    scalar = lam.ndim == 0
    half = lam / 2.0
    acc = np.zeros(lam.shape, dtype=float)
    for j, r in enumerate(params.rseq, start=1):
        acc = acc + eval_u(half - r, params.K) / (2.0 * j * j)
    return float(acc) if scalar else acc


def v_tail_bound(params: Example3Params) -> float:
    """Bound on |v - v_J| on the half plane Re(lam) <= 0.

    There u(0) <= u(lam/2 - r_j) < 0 for every j, so each discarded term
    is at most |u(0)|/(2 j^2) in size; |u(0)| is bounded through its own
    truncation.
    """
    u0_mag = abs(eval_u(0.0, params.K)) + u_tail_bound(params.K)
    return float(u0_mag / (2.0 * params.J))


@dataclass(frozen=True)
class Example3Domain:
    """Truncated domain {psi < 1} plus its one-sided truncation bookkeeping."""

    params: Example3Params
    u_tail: float
    v_tail: float

    def v(self, lam):
        return eval_v(lam, self.params)

    def psi(self, z):
        return eval_psi(z, self)


def eval_psi(z, dom: Example3Domain) -> np.ndarray:
    """psi(z) = |z2| * exp(||z||^2 + v(z1)), evaluated in log scale.

    Exactly 0 when z2 = 0 or v(z1) = -inf (log-scale -inf wins over any
    finite ||z||^2, so huge |z2| on a singular line still gives 0).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 1
    if z.shape[-1] != 2:
        raise ValueError("example3 lives in C^2")
    with np.errstate(divide="ignore"):
        logpsi = np.log(np.abs(z[..., 1])) + np.abs(z[..., 0]) ** 2 \
            + np.abs(z[..., 1]) ** 2 + eval_v(z[..., 0], dom.params)
    val = np.exp(logpsi)
    return float(val) if scalar else val


@lru_cache(maxsize=8)
def _cached_example3(K: int, J: int) -> Example3Domain:
    params = Example3Params(K=K, J=J)
    return Example3Domain(params=params, u_tail=u_tail_bound(K), v_tail=v_tail_bound(params))


def make_example3(K: int = 200, J: int = 60, rseq=None) -> Example3Domain:
    if rseq is None:
        return _cached_example3(int(K), int(J))
    params = Example3Params(K=int(K), J=int(J), rseq=rseq)
    return Example3Domain(params=params, u_tail=u_tail_bound(params.K), v_tail=v_tail_bound(params))


def build_example3_domain(K: int = 200, J: int = 60, rseq=None) -> DomainModel:
    """Wrap the truncated domain as a DomainModel with margin 1 - psi."""
    ex = make_example3(K, J, rseq)

    def margin(z, ex=ex):
        return 1.0 - eval_psi(z, ex)

    desc = {"kind": "example3", "K": ex.params.K, "J": ex.params.J, "_obj": ex}
    # psi varies fast in z1 near the poles of v; margin units are not
    # Euclidean ones, hence the conservative conversion scale.
    return DomainModel(2, margin, desc, lipschitz_hint=10.0)


def singular_first_coords(params: Example3Params, ks=None) -> np.ndarray:
    """First coordinates lam = 2*(r_j + 1/k) of the truncated singular lines.

    Constructed as 2*r_j + 2/k in floating point, which makes the pole hit
    in eval_v exact: (lam/2 - r_j) - 1/k is exactly zero.  Shape (J, #k),
    rows indexed by j, columns by k.
    """
    k = np.arange(1, params.K + 1, dtype=float) if ks is None else np.asarray(ks, dtype=float)
    return 2.0 * params.rseq[:, None] + 2.0 / k[None, :]
