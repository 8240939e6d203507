"""Batched Nelder-Mead simplex descent.

All the variational searches here (disc coefficients, vector
decompositions, chain points) are low-dimensional, derivative-free and
run with multiple restarts.  Running the restarts as rows of one array
lets a single numpy-vectorized objective drive all of them at once,
which is where the speed comes from; scipy's simplex loop would pay
per-restart Python overhead.

The iteration is the textbook reflect/expand/contract/shrink scheme
with fixed coefficients.  Everything is deterministic for fixed inputs
and independent of any worker count: rows never interact.
"""

from __future__ import annotations

import numpy as np


def nelder_mead_batch(fun, x0, steps=0.1, maxiter=200, fatol=0.0, xatol=0.0):
    """Minimize fun over each row of x0 independently.

    fun maps an (R, d) array to (R,) values and must be vectorized.
    x0 has shape (R, d); steps is a scalar or (d,) initial simplex
    offset.  Returns (xbest, fbest) with shapes (R, d) and (R,).
    Rows stop moving once their simplex collapses below the tolerances;
    the loop exits early only when every row has.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    nr, dim = x0.shape
    if dim == 0:
        f0 = np.asarray(fun(x0), dtype=float)
        return x0.copy(), f0
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (dim,))

    # simplex: (R, d+1, d); vertex 0 is x0, vertex j+1 offsets coord j
    simplex = np.repeat(x0[:, None, :], dim + 1, axis=1)
    for j in range(dim):
        off = steps[j] if steps[j] != 0.0 else 0.05
        simplex[:, j + 1, j] += off

    def feval(pts):
        flat = pts.reshape(-1, dim)
        return np.asarray(fun(flat), dtype=float).reshape(pts.shape[:-1])

    fvals = feval(simplex)
    rows = np.arange(nr)

    for _ in range(int(maxiter)):
        order = np.argsort(fvals, axis=1, kind="stable")
        simplex = np.take_along_axis(simplex, order[:, :, None], axis=1)
        fvals = np.take_along_axis(fvals, order, axis=1)

        fspread = fvals[:, -1] - fvals[:, 0]
        xspread = np.abs(simplex - simplex[:, :1, :]).max(axis=(1, 2))
        active = (fspread > fatol) | (xspread > xatol)
        if not active.any():
            break

        best = fvals[:, 0]
        worst = fvals[:, -1]
        second = fvals[:, -2]
        centroid = simplex[:, :-1, :].mean(axis=1)

        xr = centroid + (centroid - simplex[:, -1, :])
        fr = feval(xr)

        new_x = simplex[:, -1, :].copy()
        new_f = worst.copy()

        refl = (fr < second) & (fr >= best)
        exp_try = fr < best
        xe = centroid + 2.0 * (centroid - simplex[:, -1, :])
        fe = np.where(exp_try, feval(np.where(exp_try[:, None], xe, centroid)), np.inf)
        take_exp = exp_try & (fe < fr)
        take_refl = refl | (exp_try & ~take_exp)

        contr = ~(refl | exp_try)
        out = contr & (fr < worst)
        xc = np.where(out[:, None],
                      centroid + 0.5 * (xr - centroid),
                      centroid + 0.5 * (simplex[:, -1, :] - centroid))
        fc = np.where(contr, feval(np.where(contr[:, None], xc, centroid)), np.inf)
        take_contr = contr & np.where(out, fc <= fr, fc < worst)
        shrink = contr & ~take_contr

        new_x[take_refl] = xr[take_refl]
        new_f[take_refl] = fr[take_refl]
        new_x[take_exp] = xe[take_exp]
        new_f[take_exp] = fe[take_exp]
        new_x[take_contr] = xc[take_contr]
        new_f[take_contr] = fc[take_contr]

        upd = active & ~shrink
        simplex[upd, -1, :] = new_x[upd]
        fvals[upd, -1] = new_f[upd]

        shr = active & shrink
        if shr.any():
            sub = simplex[shr]
            sub[:, 1:, :] = sub[:, :1, :] + 0.5 * (sub[:, 1:, :] - sub[:, :1, :])
            simplex[shr] = sub
            fsub = feval(simplex[shr][:, 1:, :])
            tmp = fvals[shr]
            tmp[:, 1:] = fsub
            fvals[shr] = tmp
        _ = rows  # rows kept for clarity of the per-row invariant

    order = np.argsort(fvals, axis=1, kind="stable")
    ibest = order[:, 0]
    xbest = simplex[np.arange(nr), ibest, :]
    fbest = fvals[np.arange(nr), ibest]
    return xbest, fbest
